/**
 * Rendering of a quantification report into display lines.
 *
 * Kept as pure string formatting so the displayed counts can be asserted
 * in tests without a DOM. All values come straight off the payload.
 */

import type { ReportPayload } from "./api.js";

export interface ReportSummary {
  bursts: number;
  cyclesInBursts: number;
  fragments: number;
  meanFrequencyHz: number | null;
}

export function summarize(report: ReportPayload): ReportSummary {
  let cycles = 0;
  for (const n of report.cycles_per_burst) cycles += n;
  return {
    bursts: report.bursts.length,
    cyclesInBursts: cycles,
    fragments: report.fragments.length,
    meanFrequencyHz: report.frequency_defined ? report.mean_frequency_hz : null,
  };
}

export function reportLines(report: ReportPayload): string[] {
  const s = summarize(report);
  const lines: string[] = [];
  const source = report.source_id ?? report.session_id;
  lines.push(`source ${source} — landmark ${report.landmark_id}` +
             ` (${report.mode}), ${report.session_duration_s.toFixed(1)} s`);
  lines.push(`bursts: ${s.bursts}`);
  lines.push(`cycles in bursts: ${s.cyclesInBursts}`);
  lines.push(`fragments: ${s.fragments}`);
  if (s.meanFrequencyHz !== null) {
    lines.push(`mean frequency: ${s.meanFrequencyHz.toFixed(3)} Hz`);
  } else {
    lines.push(`mean frequency: undefined (no bursts)`);
  }
  lines.push(`rates: ${report.bursts_per_minute.toFixed(2)} bursts/min, ` +
             `${report.cycles_per_minute.toFixed(2)} cycles/min`);
  if (report.mean_cycle_amplitude !== null) {
    lines.push(`mean cycle amplitude: ` +
               `${report.mean_cycle_amplitude.toFixed(4)} ${report.unit}`);
  }
  if (report.cycles_per_burst.length > 0) {
    lines.push(`cycles per burst: ${report.cycles_per_burst.join(", ")}`);
  }
  lines.push(`segments: ${report.segments_analyzed} analyzed, ` +
             `${report.segments_skipped} skipped`);
  return lines;
}

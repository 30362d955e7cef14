/**
 * View state and request sequencing.
 *
 * The state object is plain data; the transition helpers return fresh
 * objects and mark which panels have gone stale so the controller knows
 * what needs refetching. A RequestGate serializes in-flight requests per
 * panel: starting a new one aborts the previous and only the latest
 * response is allowed to land.
 */

import type { ReportPayload, SessionMeta, SignalPayload } from "./api.js";
import type { FilterDraft, QuantDraft } from "./validation.js";

export interface ViewState {
  session: SessionMeta | null;
  landmarkId: number;
  mode: string;
  filter: FilterDraft;
  quant: QuantDraft;
  signal: SignalPayload | null;
  report: ReportPayload | null;
  /** true when the shown signal no longer matches the current selection */
  signalStale: boolean;
  /** true when the shown report no longer matches the current parameters */
  reportStale: boolean;
}

export function initialState(): ViewState {
  return {
    session: null,
    landmarkId: 8,
    mode: "vertical",
    filter: { low_cut_hz: 0.3, high_cut_hz: 3.0, order: 4, causal: false },
    quant: {
      min_peak_distance_s: 0.2,
      max_intra_burst_gap_s: 1.5,
      min_cycles_per_burst: 6,
      threshold_mode: "mean_abs",
    },
    signal: null,
    report: null,
    signalStale: false,
    reportStale: false,
  };
}

export function withSession(state: ViewState, session: SessionMeta): ViewState {
  return {
    ...state,
    session,
    signal: null,
    report: null,
    signalStale: true,
    reportStale: true,
  };
}

export function withSelection(state: ViewState, landmarkId: number,
                              mode?: string): ViewState {
  return {
    ...state,
    landmarkId,
    mode: mode ?? state.mode,
    signalStale: true,
    reportStale: true,
  };
}

export function withFilter(state: ViewState,
                           filter: FilterDraft): ViewState {
  return { ...state, filter, signalStale: true, reportStale: true };
}

/** Detector parameters affect only the report, not the plotted signal. */
export function withQuant(state: ViewState, quant: QuantDraft): ViewState {
  return { ...state, quant, reportStale: true };
}

export function withSignal(state: ViewState,
                           signal: SignalPayload): ViewState {
  return { ...state, signal, signalStale: false };
}

export function withReport(state: ViewState,
                           report: ReportPayload): ViewState {
  return { ...state, report, reportStale: false };
}

/** Latest-wins guard for one panel's requests. */
export class RequestGate {
  private counter = 0;
  private controller: AbortController | null = null;

  begin(): { token: number; signal: AbortSignal } {
    this.controller?.abort();
    this.controller = new AbortController();
    this.counter += 1;
    return { token: this.counter, signal: this.controller.signal };
  }

  isCurrent(token: number): boolean {
    return token === this.counter;
  }
}

/**
 * Plot geometry.
 *
 * Everything here maps data coordinates to pixel coordinates and back —
 * pure functions over arrays, no canvas access, so the mapping is testable
 * without a DOM. Gaps (null samples) split a trace into separate polylines
 * rather than being bridged visually.
 */

export type Range = [number, number];

export interface PlotRect {
  left: number;
  top: number;
  width: number;
  height: number;
}

export interface Segment {
  t: number[];
  v: number[];
}

export function xRangeOf(timestamps: number[]): Range {
  if (timestamps.length === 0) return [0, 1];
  const lo = timestamps[0];
  const hi = timestamps[timestamps.length - 1];
  return lo === hi ? [lo - 0.5, hi + 0.5] : [lo, hi];
}

export function yRangeOf(values: (number | null)[], padFrac = 0.08): Range {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v === null) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === Infinity) return [-1, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  const pad = (hi - lo) * padFrac;
  return [lo - pad, hi + pad];
}

/** Split a trace at null samples into contiguous segments. */
export function gapSegments(timestamps: number[],
                            values: (number | null)[]): Segment[] {
  const segments: Segment[] = [];
  let current: Segment | null = null;
  for (let i = 0; i < values.length; i++) {
    const v = values[i];
    if (v === null) {
      current = null;
      continue;
    }
    if (current === null) {
      current = { t: [], v: [] };
      segments.push(current);
    }
    current.t.push(timestamps[i]);
    current.v.push(v);
  }
  return segments;
}

export function xToPx(x: number, domain: Range, rect: PlotRect): number {
  const [lo, hi] = domain;
  return rect.left + ((x - lo) / (hi - lo)) * rect.width;
}

/** Pixel y grows downward; larger data values plot higher. */
export function yToPx(y: number, domain: Range, rect: PlotRect): number {
  const [lo, hi] = domain;
  return rect.top + (1 - (y - lo) / (hi - lo)) * rect.height;
}

/** Flatten one segment to [x0, y0, x1, y1, ...] pixel pairs. */
export function polylinePx(seg: Segment, xDomain: Range, yDomain: Range,
                           rect: PlotRect): number[] {
  const out: number[] = [];
  for (let i = 0; i < seg.t.length; i++) {
    out.push(xToPx(seg.t[i], xDomain, rect), yToPx(seg.v[i], yDomain, rect));
  }
  return out;
}

export interface SpanPx {
  x: number;
  width: number;
}

/** Horizontal extents, in pixels, of time spans such as detected bursts. */
export function spanRects(spans: Array<{ start_time_s: number; end_time_s: number }>,
                          xDomain: Range, rect: PlotRect): SpanPx[] {
  return spans.map((s) => {
    const x0 = xToPx(s.start_time_s, xDomain, rect);
    const x1 = xToPx(s.end_time_s, xDomain, rect);
    return { x: x0, width: Math.max(x1 - x0, 1) };
  });
}

/** Pixel x positions of individual cycle peaks. */
export function cycleTickXs(bursts: Array<{ cycles: Array<{ time_s: number }> }>,
                            xDomain: Range, rect: PlotRect): number[] {
  const out: number[] = [];
  for (const b of bursts) {
    for (const c of b.cycles) {
      out.push(xToPx(c.time_s, xDomain, rect));
    }
  }
  return out;
}

/** Runs of `true` in a mask, as [start, endExclusive) index pairs. */
export function maskRuns(flags: boolean[]): Array<[number, number]> {
  const runs: Array<[number, number]> = [];
  let start = -1;
  for (let i = 0; i < flags.length; i++) {
    if (flags[i] && start < 0) start = i;
    if (!flags[i] && start >= 0) {
      runs.push([start, i]);
      start = -1;
    }
  }
  if (start >= 0) runs.push([start, flags.length]);
  return runs;
}

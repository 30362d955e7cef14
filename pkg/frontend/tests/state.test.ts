import { describe, expect, it } from "vitest";

import type { ReportPayload, SessionMeta, SignalPayload } from "../src/api.js";
import {
  RequestGate,
  initialState,
  withFilter,
  withQuant,
  withReport,
  withSelection,
  withSession,
  withSignal,
} from "../src/state.js";
import { fixture } from "./helpers.js";

describe("initialState", () => {
  it("starts on the jaw landmark with the stock parameters", () => {
    const st = initialState();
    expect(st.landmarkId).toBe(8);
    expect(st.mode).toBe("vertical");
    expect(st.filter).toEqual(
      { low_cut_hz: 0.3, high_cut_hz: 3.0, order: 4, causal: false });
    expect(st.quant.min_cycles_per_burst).toBe(6);
    expect(st.quant.max_intra_burst_gap_s).toBe(1.5);
    expect(st.signalStale).toBe(false);
    expect(st.reportStale).toBe(false);
  });
});

describe("staleness transitions", () => {
  const meta = fixture<SessionMeta>("session_fitted");
  const signal = fixture<SignalPayload>("signal_raw");
  const report = fixture<ReportPayload>("report");

  it("a new session clears old panels and marks both stale", () => {
    let st = withSignal(withSession(initialState(), meta), signal);
    st = withReport(st, report);
    st = withSession(st, meta);
    expect(st.signal).toBeNull();
    expect(st.report).toBeNull();
    expect(st.signalStale).toBe(true);
    expect(st.reportStale).toBe(true);
  });

  it("selection and filter edits stale both panels", () => {
    for (const next of [
      withSelection(initialState(), 48),
      withFilter(initialState(),
                 { low_cut_hz: 0.5, high_cut_hz: 4, order: 4, causal: false }),
    ]) {
      expect(next.signalStale).toBe(true);
      expect(next.reportStale).toBe(true);
    }
  });

  it("detector edits stale only the report", () => {
    const st = withQuant(initialState(), {
      min_peak_distance_s: 0.2,
      max_intra_burst_gap_s: 2.0,
      min_cycles_per_burst: 6,
      threshold_mode: "mean_abs",
    });
    expect(st.signalStale).toBe(false);
    expect(st.reportStale).toBe(true);
  });

  it("fresh payloads clear their own staleness and no other", () => {
    let st = withSelection(initialState(), 48);
    st = withSignal(st, signal);
    expect(st.signalStale).toBe(false);
    expect(st.reportStale).toBe(true);
    st = withReport(st, report);
    expect(st.reportStale).toBe(false);
  });

  it("selection keeps the mode unless one is given", () => {
    const st = withSelection(initialState(), 30);
    expect(st.mode).toBe("vertical");
    expect(withSelection(st, 30, "euclidean").mode).toBe("euclidean");
  });
});

describe("RequestGate", () => {
  it("only the newest token is current", () => {
    const gate = new RequestGate();
    const a = gate.begin();
    const b = gate.begin();
    expect(gate.isCurrent(a.token)).toBe(false);
    expect(gate.isCurrent(b.token)).toBe(true);
  });

  it("starting a new request aborts the previous signal", () => {
    const gate = new RequestGate();
    const a = gate.begin();
    expect(a.signal.aborted).toBe(false);
    const b = gate.begin();
    expect(a.signal.aborted).toBe(true);
    expect(b.signal.aborted).toBe(false);
  });
});

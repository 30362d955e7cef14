import { describe, expect, it } from "vitest";

import {
  FilterDraft,
  QuantDraft,
  hasErrors,
  validateFilter,
  validateQuant,
} from "../src/validation.js";

const okFilter = (): FilterDraft =>
  ({ low_cut_hz: 0.3, high_cut_hz: 3.0, order: 4, causal: false });

const okQuant = (): QuantDraft => ({
  min_peak_distance_s: 0.2,
  max_intra_burst_gap_s: 1.5,
  min_cycles_per_burst: 6,
  threshold_mode: "mean_abs",
});

describe("validateFilter", () => {
  it("accepts the defaults at 30 fps", () => {
    expect(validateFilter(okFilter(), 30)).toEqual({});
  });

  it("accepts the defaults when the sample rate is not yet known", () => {
    expect(validateFilter(okFilter(), null)).toEqual({});
  });

  it("rejects non-positive and non-finite low cutoffs", () => {
    for (const low of [0, -0.5, NaN, Infinity]) {
      const errors = validateFilter({ ...okFilter(), low_cut_hz: low }, 30);
      expect(errors["low"]).toBeTruthy();
    }
  });

  it("rejects a high cutoff at or below the low cutoff", () => {
    const errors = validateFilter(
      { ...okFilter(), low_cut_hz: 2, high_cut_hz: 2 }, 30);
    expect(errors["high"]).toMatch(/above the low/);
  });

  it("rejects a high cutoff at or above Nyquist when the rate is known", () => {
    for (const high of [15, 16, 20]) {
      const errors = validateFilter({ ...okFilter(), high_cut_hz: high }, 30);
      expect(errors["high"]).toMatch(/Nyquist/);
    }
    // just below Nyquist is fine
    expect(validateFilter({ ...okFilter(), high_cut_hz: 14.9 }, 30))
      .toEqual({});
  });

  it("skips the Nyquist rule while the rate is unknown", () => {
    expect(validateFilter({ ...okFilter(), high_cut_hz: 20 }, null))
      .toEqual({});
  });

  it("requires an even integer order of at least 2", () => {
    expect(validateFilter({ ...okFilter(), order: 3 }, 30)["order"])
      .toMatch(/even/);
    expect(validateFilter({ ...okFilter(), order: 0 }, 30)["order"])
      .toMatch(/at least 2/);
    expect(validateFilter({ ...okFilter(), order: 2.5 }, 30)["order"])
      .toBeTruthy();
    expect(validateFilter({ ...okFilter(), order: 2 }, 30)).toEqual({});
    expect(validateFilter({ ...okFilter(), order: 6 }, 30)).toEqual({});
  });

  it("reports each bad field under its own key", () => {
    const errors = validateFilter(
      { low_cut_hz: -1, high_cut_hz: NaN, order: 5, causal: true }, 30);
    expect(Object.keys(errors).sort()).toEqual(["high", "low", "order"]);
  });
});

describe("validateQuant", () => {
  it("accepts the defaults", () => {
    expect(validateQuant(okQuant())).toEqual({});
  });

  it("rejects non-positive spacings and gaps", () => {
    expect(validateQuant({ ...okQuant(), min_peak_distance_s: 0 })
      ["min_peak_distance_s"]).toBeTruthy();
    expect(validateQuant({ ...okQuant(), max_intra_burst_gap_s: -1 })
      ["max_intra_burst_gap_s"]).toBeTruthy();
  });

  it("requires a positive integer cycle threshold", () => {
    expect(validateQuant({ ...okQuant(), min_cycles_per_burst: 0 })
      ["min_cycles_per_burst"]).toBeTruthy();
    expect(validateQuant({ ...okQuant(), min_cycles_per_burst: 5.5 })
      ["min_cycles_per_burst"]).toBeTruthy();
    expect(validateQuant({ ...okQuant(), min_cycles_per_burst: 1 }))
      .toEqual({});
  });
});

describe("hasErrors", () => {
  it("distinguishes empty from populated maps", () => {
    expect(hasErrors({})).toBe(false);
    expect(hasErrors({ high: "bad" })).toBe(true);
  });
});

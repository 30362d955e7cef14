/**
 * Client-side checks for filter and detector parameters.
 *
 * These mirror the rules the service enforces so that a bad value is caught
 * before any request leaves the browser. The service remains the authority;
 * anything it rejects that slips through here still lands as an inline
 * error on the same control.
 */

export interface FilterDraft {
  low_cut_hz: number;
  high_cut_hz: number;
  order: number;
  causal: boolean;
}

export interface QuantDraft {
  min_peak_distance_s: number;
  max_intra_burst_gap_s: number;
  min_cycles_per_burst: number;
  threshold_mode: "mean_abs" | "mean_raw";
}

export type FieldErrors = Record<string, string>;

export function hasErrors(errors: FieldErrors): boolean {
  return Object.keys(errors).length > 0;
}

/**
 * Validate a filter draft. `sampleRateHz` is null before a session's signal
 * has been loaded; the Nyquist rule only applies once the rate is known.
 */
export function validateFilter(draft: FilterDraft,
                               sampleRateHz: number | null): FieldErrors {
  const errors: FieldErrors = {};
  const { low_cut_hz: low, high_cut_hz: high, order } = draft;

  if (!Number.isFinite(low) || low <= 0) {
    errors["low"] = "low cutoff must be a positive frequency";
  }
  if (!Number.isFinite(high) || high <= 0) {
    errors["high"] = "high cutoff must be a positive frequency";
  } else if (Number.isFinite(low) && low > 0 && high <= low) {
    errors["high"] = "high cutoff must be above the low cutoff";
  } else if (sampleRateHz !== null && high >= sampleRateHz / 2) {
    errors["high"] =
      `high cutoff must be below the Nyquist frequency ` +
      `(${(sampleRateHz / 2).toFixed(2)} Hz at ${sampleRateHz.toFixed(2)} fps)`;
  }
  if (!Number.isInteger(order) || order < 2) {
    errors["order"] = "order must be an integer of at least 2";
  } else if (order % 2 !== 0) {
    errors["order"] = "order must be even";
  }
  return errors;
}

export function validateQuant(draft: QuantDraft): FieldErrors {
  const errors: FieldErrors = {};
  if (!Number.isFinite(draft.min_peak_distance_s) ||
      draft.min_peak_distance_s <= 0) {
    errors["min_peak_distance_s"] = "minimum peak spacing must be positive";
  }
  if (!Number.isFinite(draft.max_intra_burst_gap_s) ||
      draft.max_intra_burst_gap_s <= 0) {
    errors["max_intra_burst_gap_s"] = "burst gap must be positive";
  }
  if (!Number.isInteger(draft.min_cycles_per_burst) ||
      draft.min_cycles_per_burst < 1) {
    errors["min_cycles_per_burst"] = "cycles per burst must be at least 1";
  }
  return errors;
}

/**
 * Typed client for the nnsquant HTTP service.
 *
 * Every number the UI displays comes out of one of these payloads verbatim;
 * the client adds no interpretation beyond JSON parsing and error mapping.
 */

export interface FilterParams {
  low_cut_hz: number;
  high_cut_hz: number;
  order: number;
  zero_phase: boolean;
}

export interface QuantParams {
  min_peak_distance_s: number;
  max_intra_burst_gap_s: number;
  min_cycles_per_burst: number;
  threshold_mode: "mean_abs" | "mean_raw";
}

export type SessionStatus = "uploaded" | "fitting" | "fitted" | "error";

export interface SessionMeta {
  session_id: string;
  status: SessionStatus;
  model: string;
  source_id: string | null;
  frame_count: number | null;
  fitted_frames: number | null;
  error: string | null;
  created_at: string;
}

export interface SignalPayload {
  session_id: string;
  landmark_id: number;
  mode: string;
  unit: string;
  sample_rate_hz: number;
  timestamps_s: number[];
  raw: (number | null)[];
  filtered: (number | null)[] | null;
  interpolated: boolean[];
  filter: FilterParams | null;
}

export interface CyclePayload {
  index: number;
  time_s: number;
  amplitude: number;
}

export interface BurstPayload {
  start_time_s: number;
  end_time_s: number;
  duration_s: number;
  cycle_count: number;
  cycles: CyclePayload[];
}

export interface ReportPayload {
  session_id: string;
  source_id: string | null;
  landmark_id: number;
  mode: string;
  unit: string;
  sample_rate_hz: number | null;
  session_duration_s: number;
  parameters: QuantParams;
  filter: FilterParams;
  bursts: BurstPayload[];
  fragments: BurstPayload[];
  cycles_per_burst: number[];
  burst_durations_s: number[];
  bursts_per_minute: number;
  cycles_per_minute: number;
  mean_frequency_hz: number | null;
  frequency_defined: boolean;
  mean_cycle_amplitude: number | null;
  total_cycles_detected: number;
  segments_analyzed: number;
  segments_skipped: number;
}

export interface LandmarkPoint {
  id: number;
  x: number;
  y: number;
  region: string;
}

export interface AnnotationPayload {
  landmarks: LandmarkPoint[];
  default_landmark_id: number;
  num_landmarks: number;
}

export interface QuantifyRequest {
  landmark_id: number;
  mode: string;
  filter: Partial<FilterParams>;
  quant: Partial<QuantParams>;
}

export interface SignalQuery {
  landmark: number;
  mode: string;
  low?: number;
  high?: number;
  order?: number;
  causal?: boolean;
}

/**
 * One error type for every non-2xx response.
 *
 * `fields` maps the last element of a validation `loc` (e.g. "high",
 * "model", "filter") to its message so controls can show errors inline;
 * `meta` carries the session document a 409 returns while fitting is still
 * in flight.
 */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly fields: Record<string, string> = {},
    readonly meta: SessionMeta | null = null,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

async function toServiceError(resp: Response): Promise<ServiceError> {
  let doc: unknown = null;
  try {
    doc = await resp.json();
  } catch {
    return new ServiceError(resp.status, `HTTP ${resp.status}`);
  }
  const body = doc as Record<string, unknown>;
  const detail = body?.detail;
  if (Array.isArray(detail)) {
    // FastAPI validation shape: [{loc: [...], msg, type}]
    const fields: Record<string, string> = {};
    let first = "";
    for (const item of detail as Array<{ loc?: unknown[]; msg?: string }>) {
      const msg = item.msg ?? "invalid value";
      if (!first) first = msg;
      const loc = Array.isArray(item.loc) ? item.loc : [];
      const key = String(loc[loc.length - 1] ?? "request");
      fields[key] = msg;
    }
    return new ServiceError(resp.status, first || `HTTP ${resp.status}`, fields);
  }
  if (typeof detail === "string") {
    return new ServiceError(resp.status, detail);
  }
  if (detail && typeof detail === "object") {
    // 409: detail is the session meta document
    const meta = detail as SessionMeta;
    return new ServiceError(resp.status, `session is ${meta.status}`, {}, meta);
  }
  if (typeof body?.message === "string") {
    const label = typeof body.error === "string" ? `${body.error}: ` : "";
    return new ServiceError(resp.status, `${label}${body.message}`);
  }
  return new ServiceError(resp.status, `HTTP ${resp.status}`);
}

export class NnsClient {
  constructor(private readonly base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.base + path, init);
    if (!resp.ok) {
      throw await toServiceError(resp);
    }
    return (await resp.json()) as T;
  }

  createSession(trajectoryCsv: string, model: string,
                sourceId?: string): Promise<SessionMeta> {
    return this.request<SessionMeta>("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        trajectory_csv: trajectoryCsv,
        model,
        source_id: sourceId ?? null,
      }),
    });
  }

  getSession(sessionId: string): Promise<SessionMeta> {
    return this.request<SessionMeta>(`/sessions/${sessionId}`);
  }

  getSignal(sessionId: string, query: SignalQuery,
            abort?: AbortSignal): Promise<SignalPayload> {
    const params = new URLSearchParams();
    params.set("landmark", String(query.landmark));
    params.set("mode", query.mode);
    if (query.low !== undefined) params.set("low", String(query.low));
    if (query.high !== undefined) params.set("high", String(query.high));
    if (query.order !== undefined) params.set("order", String(query.order));
    if (query.causal) params.set("causal", "true");
    return this.request<SignalPayload>(
      `/sessions/${sessionId}/signal?${params.toString()}`,
      { signal: abort });
  }

  quantify(sessionId: string, body: QuantifyRequest,
           abort?: AbortSignal): Promise<ReportPayload> {
    return this.request<ReportPayload>(`/sessions/${sessionId}/quantify`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal: abort,
    });
  }

  annotation(): Promise<AnnotationPayload> {
    return this.request<AnnotationPayload>("/annotation");
  }
}

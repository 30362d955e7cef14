/**
 * Application controller: owns the view state, talks to the service, and
 * enforces the interaction rules — edits only mark panels stale, Apply
 * buttons trigger requests, invalid parameters never leave the browser,
 * and within each panel only the latest request is allowed to land.
 *
 * The controller touches no DOM; the view subscribes via `notify`.
 */

import {
  AnnotationPayload,
  NnsClient,
  QuantifyRequest,
  ServiceError,
  SignalQuery,
} from "./api.js";
import {
  RequestGate,
  ViewState,
  initialState,
  withQuant,
  withReport,
  withSelection,
  withSession,
  withSignal,
} from "./state.js";
import {
  FieldErrors,
  FilterDraft,
  QuantDraft,
  validateFilter,
  validateQuant,
} from "./validation.js";

export interface ControllerOptions {
  /** Delay between fit-status polls (tests shrink this). */
  pollMs?: number;
  /** Give up waiting for a fit after this many polls. */
  maxPolls?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) =>
  new Promise<void>((resolve) => setTimeout(resolve, ms));

export class AppController {
  state: ViewState = initialState();
  annotation: AnnotationPayload | null = null;
  /** Inline per-control messages, keyed by control name ("high", "order", ...). */
  fieldErrors: FieldErrors = {};
  /** Errors not tied to a control (unknown session, malformed upload, ...). */
  banner: string | null = null;
  busy = false;

  /** Filter actually in effect on the signal panel; null until first Apply. */
  private appliedFilter: FilterDraft | null = null;
  private signalGate = new RequestGate();
  private reportGate = new RequestGate();
  private readonly pollMs: number;
  private readonly maxPolls: number;
  private readonly sleep: (ms: number) => Promise<void>;

  constructor(private readonly client: NnsClient,
              private readonly notify: () => void = () => {},
              opts: ControllerOptions = {}) {
    this.pollMs = opts.pollMs ?? 250;
    this.maxPolls = opts.maxPolls ?? 400;
    this.sleep = opts.sleep ?? defaultSleep;
  }

  async loadAnnotation(): Promise<void> {
    try {
      this.annotation = await this.client.annotation();
      this.state = withSelection(this.state,
                                 this.annotation.default_landmark_id);
    } catch (err) {
      this.fail(err);
    }
    this.notify();
  }

  /** Upload a trajectory, wait for the fit, then load the raw signal. */
  async upload(trajectoryCsv: string, model: string,
               sourceId?: string): Promise<void> {
    this.banner = null;
    this.busy = true;
    this.notify();
    try {
      let meta = await this.client.createSession(trajectoryCsv, model,
                                                 sourceId);
      this.state = withSession(this.state, meta);
      this.appliedFilter = null;
      this.notify();
      let polls = 0;
      while (meta.status === "uploaded" || meta.status === "fitting") {
        if (polls++ >= this.maxPolls) {
          this.banner = "timed out waiting for the fit to finish";
          return;
        }
        await this.sleep(this.pollMs);
        meta = await this.client.getSession(meta.session_id);
        this.state = { ...this.state, session: meta };
        this.notify();
      }
      if (meta.status === "error") {
        this.banner = meta.error ?? "fit failed";
        return;
      }
      await this.refreshSignal();
    } catch (err) {
      this.fail(err);
    } finally {
      this.busy = false;
      this.notify();
    }
  }

  /** Picking a landmark refetches the signal; the report goes stale. */
  async selectLandmark(landmarkId: number): Promise<void> {
    this.state = withSelection(this.state, landmarkId);
    this.notify();
    await this.refreshSignal();
  }

  async selectMode(mode: string): Promise<void> {
    this.state = withSelection(this.state, this.state.landmarkId, mode);
    this.notify();
    await this.refreshSignal();
  }

  /** Edits update the draft and validate; nothing is sent until Apply. */
  setFilterField<K extends keyof FilterDraft>(field: K,
                                              value: FilterDraft[K]): void {
    this.state = { ...this.state,
                   filter: { ...this.state.filter, [field]: value },
                   signalStale: true, reportStale: true };
    this.revalidate();
    this.notify();
  }

  setQuantField<K extends keyof QuantDraft>(field: K,
                                            value: QuantDraft[K]): void {
    this.state = withQuant(this.state,
                           { ...this.state.quant, [field]: value });
    this.revalidate();
    this.notify();
  }

  /**
   * Apply the drafted filter to the signal panel. Returns false — and sends
   * nothing — when the draft fails client-side validation.
   */
  async applyFilter(): Promise<boolean> {
    this.revalidate();
    if (this.filterDraftInvalid()) {
      this.notify();
      return false;
    }
    this.appliedFilter = { ...this.state.filter };
    await this.refreshSignal();
    return true;
  }

  /** Run quantification with the drafted parameters. No request if invalid. */
  async quantify(): Promise<boolean> {
    const session = this.state.session;
    if (!session || session.status !== "fitted") {
      this.banner = "no fitted session";
      this.notify();
      return false;
    }
    this.revalidate();
    if (this.filterDraftInvalid() || this.quantDraftInvalid()) {
      this.notify();
      return false;
    }
    const body: QuantifyRequest = {
      landmark_id: this.state.landmarkId,
      mode: this.state.mode,
      filter: {
        low_cut_hz: this.state.filter.low_cut_hz,
        high_cut_hz: this.state.filter.high_cut_hz,
        order: this.state.filter.order,
        zero_phase: !this.state.filter.causal,
      },
      quant: { ...this.state.quant },
    };
    const { token, signal } = this.reportGate.begin();
    try {
      const report = await this.client.quantify(session.session_id, body,
                                                signal);
      if (!this.reportGate.isCurrent(token)) return true;
      this.state = withReport(this.state, report);
      this.notify();
    } catch (err) {
      if (!this.reportGate.isCurrent(token)) return true;
      this.fail(err);
      this.notify();
    }
    return true;
  }

  private async refreshSignal(): Promise<void> {
    const session = this.state.session;
    if (!session || session.status !== "fitted") return;
    const query: SignalQuery = {
      landmark: this.state.landmarkId,
      mode: this.state.mode,
    };
    if (this.appliedFilter) {
      query.low = this.appliedFilter.low_cut_hz;
      query.high = this.appliedFilter.high_cut_hz;
      query.order = this.appliedFilter.order;
      query.causal = this.appliedFilter.causal;
    }
    const { token, signal } = this.signalGate.begin();
    try {
      const payload = await this.client.getSignal(session.session_id, query,
                                                  signal);
      if (!this.signalGate.isCurrent(token)) return;
      this.state = withSignal(this.state, payload);
      this.notify();
    } catch (err) {
      if (!this.signalGate.isCurrent(token)) return;
      this.fail(err);
      this.notify();
    }
  }

  private revalidate(): void {
    const rate = this.state.signal?.sample_rate_hz ?? null;
    this.fieldErrors = {
      ...validateFilter(this.state.filter, rate),
      ...validateQuant(this.state.quant),
    };
  }

  private filterDraftInvalid(): boolean {
    return ["low", "high", "order"].some((k) => k in this.fieldErrors);
  }

  private quantDraftInvalid(): boolean {
    return ["min_peak_distance_s", "max_intra_burst_gap_s",
            "min_cycles_per_burst"].some((k) => k in this.fieldErrors);
  }

  private fail(err: unknown): void {
    if (err instanceof DOMException && err.name === "AbortError") return;
    if (err instanceof ServiceError) {
      if (Object.keys(err.fields).length > 0) {
        this.fieldErrors = { ...this.fieldErrors, ...err.fields };
      } else {
        this.banner = err.message;
      }
      return;
    }
    this.banner = err instanceof Error ? err.message : String(err);
  }
}

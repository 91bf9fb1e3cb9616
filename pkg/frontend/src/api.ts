/** Typed fetch client. Every response body carries the model fingerprint;
 * the client remembers the first one it sees and reports any later change so
 * the app can force a refresh instead of mixing model versions. */

import type {
  CounterfactualRequest,
  CounterfactualResponse,
  EvaluationJob,
  FieldError,
  FuzzyCurve,
  ModelSummary,
  PredictRequest,
  PredictResponse,
} from "./types.js";

export type ApiErrorKind = "validation" | "undefined-conditional" | "http" | "network";

export class ApiError extends Error {
  readonly kind: ApiErrorKind;
  readonly status?: number;
  readonly fieldErrors: FieldError[];
  readonly conditions: [string, string][];

  constructor(
    kind: ApiErrorKind,
    message: string,
    opts: { status?: number; fieldErrors?: FieldError[]; conditions?: [string, string][] } = {},
  ) {
    super(message);
    this.kind = kind;
    this.status = opts.status;
    this.fieldErrors = opts.fieldErrors ?? [];
    this.conditions = opts.conditions ?? [];
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private expectedFingerprint: string | null = null;
  private readonly fetchImpl: FetchLike;

  /** Set when any response carries a fingerprint different from the first
   * one seen; the app must re-bootstrap before trusting further output. */
  fingerprintChanged = false;
  onFingerprintChange: ((next: string) => void) | null = null;

  constructor(
    readonly baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private track(body: unknown): void {
    const fingerprint =
      typeof body === "object" && body !== null && "fingerprint" in body
        ? String((body as { fingerprint: unknown }).fingerprint)
        : null;
    if (fingerprint === null) return;
    if (this.expectedFingerprint === null) {
      this.expectedFingerprint = fingerprint;
    } else if (fingerprint !== this.expectedFingerprint) {
      this.fingerprintChanged = true;
      this.onFingerprintChange?.(fingerprint);
    }
  }

  /** Accept the current server model as the new expectation. */
  acceptFingerprint(fingerprint: string): void {
    this.expectedFingerprint = fingerprint;
    this.fingerprintChanged = false;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError("network", `service unreachable: ${String(err)}`);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      /* non-JSON body: handled by status below */
    }
    if (response.ok) {
      this.track(body);
      return body as T;
    }
    const detail = (body as { detail?: unknown } | null)?.detail;
    if (response.status === 409 && detail && typeof detail === "object") {
      const d = detail as { error?: string; conditions?: [string, string][] };
      throw new ApiError("undefined-conditional", d.error ?? "conditional probability undefined", {
        status: 409,
        conditions: d.conditions ?? [],
      });
    }
    if (response.status === 422 && Array.isArray(detail)) {
      const errors = detail as FieldError[];
      const msg = errors.map((e) => e.msg).join("; ") || "invalid request";
      throw new ApiError("validation", msg, { status: 422, fieldErrors: errors });
    }
    throw new ApiError("http", `request failed with status ${response.status}`, {
      status: response.status,
    });
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  async model(): Promise<ModelSummary> {
    const summary = await this.request<ModelSummary>("/model");
    this.acceptFingerprint(summary.fingerprint);
    return summary;
  }

  fuzzy(variable: string, opts: { at?: number; caseValue?: string } = {}): Promise<FuzzyCurve> {
    const params = new URLSearchParams();
    if (opts.at !== undefined) params.set("at", String(opts.at));
    if (opts.caseValue !== undefined) params.set("case", opts.caseValue);
    const qs = params.toString();
    return this.request<FuzzyCurve>(`/fuzzy/${encodeURIComponent(variable)}${qs ? `?${qs}` : ""}`);
  }

  predict(body: PredictRequest): Promise<PredictResponse> {
    return this.post<PredictResponse>("/predict", body);
  }

  counterfactual(body: CounterfactualRequest): Promise<CounterfactualResponse> {
    return this.post<CounterfactualResponse>("/counterfactual", body);
  }

  startEvaluation(body: {
    resamples: number;
    seed: number;
    test_fraction?: number;
    paired?: boolean;
  }): Promise<EvaluationJob> {
    return this.post<EvaluationJob>("/evaluate", body);
  }

  evaluationStatus(jobId: string): Promise<Record<string, unknown>> {
    return this.request<Record<string, unknown>>(`/evaluate/${encodeURIComponent(jobId)}`);
  }
}

/** Thin fetch client for the triage server; the UI's only backend. */

import type {
  ExportPayload,
  QueuePayload,
  ReviewItem,
  SummaryPayload,
  VerdictAck,
  VerdictRequest,
  VerdictRecord,
} from "./types.js";

/** Server rejected a conflicting resubmission; carries the stored verdict. */
export class ConflictError extends Error {
  constructor(
    message: string,
    public readonly recorded: VerdictRecord | null,
  ) {
    super(message);
    this.name = "ConflictError";
  }
}

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface TriageApi {
  fetchQueue(): Promise<QueuePayload>;
  fetchItem(encounterId: string): Promise<ReviewItem>;
  submitVerdict(request: VerdictRequest): Promise<VerdictAck>;
  fetchSummary(): Promise<SummaryPayload>;
  fetchExport(): Promise<ExportPayload>;
}

async function asJson<T>(response: Response): Promise<T> {
  if (response.status === 409) {
    const body = await response.json().catch(() => ({ detail: {} }));
    const detail = body?.detail ?? {};
    throw new ConflictError(
      detail.message ?? "already reviewed",
      detail.recorded ?? null,
    );
  }
  if (!response.ok) {
    throw new ApiError(`${response.status} ${response.statusText}`, response.status);
  }
  return (await response.json()) as T;
}

export class HttpTriageApi implements TriageApi {
  constructor(private readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  fetchQueue(): Promise<QueuePayload> {
    return fetch(this.url("/queue")).then((r) => asJson<QueuePayload>(r));
  }

  fetchItem(encounterId: string): Promise<ReviewItem> {
    return fetch(this.url(`/item/${encodeURIComponent(encounterId)}`)).then((r) =>
      asJson<ReviewItem>(r),
    );
  }

  submitVerdict(request: VerdictRequest): Promise<VerdictAck> {
    return fetch(this.url("/verdict"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    }).then((r) => asJson<VerdictAck>(r));
  }

  fetchSummary(): Promise<SummaryPayload> {
    return fetch(this.url("/summary")).then((r) => asJson<SummaryPayload>(r));
  }

  fetchExport(): Promise<ExportPayload> {
    return fetch(this.url("/export")).then((r) => asJson<ExportPayload>(r));
  }
}

/** Client-side review session state.
 *
 * The server is the only source of truth: `load()` rebuilds the whole
 * state from GET /queue, and the summary view re-reads GET /summary
 * rather than recomputing percentages locally.  Failed submissions are
 * kept in an outbox and flushed on reconnect, so a draft is never lost.
 */

import { ConflictError, type TriageApi } from "./api.js";
import type {
  Category,
  ReviewItem,
  SummaryPayload,
  VerdictRecord,
  VerdictRequest,
} from "./types.js";

export type SubmissionState =
  | "idle"
  | "submitting"
  | "conflict"
  | "queued_offline"
  | "error";

export interface Draft {
  category: Category | null;
  rationale: string;
}

export class ReviewSession {
  items: ReviewItem[] = [];
  index = 0;
  draft: Draft = { category: null, rationale: "" };
  submission: SubmissionState = "idle";
  conflictVerdict: VerdictRecord | null = null;
  lastError = "";
  outbox: VerdictRequest[] = [];
  loaded = false;

  private serverTotal = 0;
  private serverDoneAtLoad = 0;

  constructor(
    private readonly api: TriageApi,
    public reviewerId: string = "default",
  ) {}

  /** Rebuild the queue snapshot from the server. */
  async load(): Promise<void> {
    const queue = await this.api.fetchQueue();
    this.items = queue.pending.slice();
    this.serverTotal = queue.total;
    this.serverDoneAtLoad = queue.done;
    this.index = 0;
    this.draft = { category: null, rationale: "" };
    this.submission = "idle";
    this.conflictVerdict = null;
    this.lastError = "";
    this.loaded = true;
  }

  get current(): ReviewItem | null {
    return this.items[this.index] ?? null;
  }

  get pendingCount(): number {
    return this.items.filter((item) => item.status === "pending").length;
  }

  get progress(): { total: number; done: number; pending: number } {
    const locallyDone = this.items.length - this.pendingCount;
    return {
      total: this.serverTotal,
      done: this.serverDoneAtLoad + locallyDone,
      pending: this.pendingCount,
    };
  }

  /** Every queued item has been reviewed. */
  get complete(): boolean {
    return this.loaded && this.pendingCount === 0;
  }

  /** A verdict needs a selected category and a pending item. */
  get canSubmit(): boolean {
    return (
      this.draft.category !== null &&
      this.current !== null &&
      this.current.status === "pending" &&
      this.submission !== "submitting"
    );
  }

  selectCategory(category: Category): void {
    this.draft.category = category;
  }

  setRationale(rationale: string): void {
    this.draft.rationale = rationale;
  }

  /** Step to an adjacent item; explicit navigation, nothing is skipped. */
  next(): void {
    if (this.index < this.items.length - 1) {
      this.index += 1;
      this.resetDraft();
    }
  }

  previous(): void {
    if (this.index > 0) {
      this.index -= 1;
      this.resetDraft();
    }
  }

  /** Jump forward to the nearest still-pending item, wrapping once. */
  advanceToPending(): void {
    const total = this.items.length;
    for (let step = 1; step <= total; step += 1) {
      const candidate = (this.index + step) % total;
      if (this.items[candidate]?.status === "pending") {
        this.index = candidate;
        this.resetDraft();
        return;
      }
    }
    // nothing pending; stay put so the completion screen can render
  }

  private resetDraft(): void {
    this.draft = { category: null, rationale: "" };
    this.submission = "idle";
    this.conflictVerdict = null;
    this.lastError = "";
  }

  private markDone(encounterId: string, verdict: VerdictRecord): void {
    const item = this.items.find((i) => i.encounter_id === encounterId);
    if (item) {
      item.status = "done";
      item.verdict = verdict;
    }
  }

  private toRecord(request: VerdictRequest): VerdictRecord {
    return {
      encounter_id: request.encounter_id,
      category: request.category,
      rationale: request.rationale,
      reviewer_id: request.reviewer_id ?? this.reviewerId,
      timestamp: "",
    };
  }

  /** Submit the current draft; see class docstring for failure handling. */
  async submit(): Promise<void> {
    if (!this.canSubmit || !this.current || !this.draft.category) {
      return;
    }
    const request: VerdictRequest = {
      encounter_id: this.current.encounter_id,
      category: this.draft.category,
      rationale: this.draft.rationale,
      reviewer_id: this.reviewerId,
    };
    this.submission = "submitting";
    try {
      await this.api.submitVerdict(request);
      this.markDone(request.encounter_id, this.toRecord(request));
      this.submission = "idle";
      this.advanceToPending();
    } catch (error) {
      if (error instanceof ConflictError) {
        this.submission = "conflict";
        this.conflictVerdict = error.recorded;
        if (error.recorded) {
          this.markDone(request.encounter_id, error.recorded);
        }
      } else {
        // network failure: keep the draft, queue the request for reconnect
        this.submission = "queued_offline";
        this.lastError = error instanceof Error ? error.message : String(error);
        this.outbox.push(request);
      }
    }
  }

  /** Re-send queued verdicts in order; stops at the first send failure. */
  async flushOutbox(): Promise<number> {
    let flushed = 0;
    while (this.outbox.length > 0) {
      const request = this.outbox[0];
      try {
        await this.api.submitVerdict(request);
        this.markDone(request.encounter_id, this.toRecord(request));
        this.outbox.shift();
        flushed += 1;
      } catch (error) {
        if (error instanceof ConflictError) {
          // someone else reviewed it; adopt the stored verdict and move on
          if (error.recorded) {
            this.markDone(request.encounter_id, error.recorded);
          }
          this.outbox.shift();
          flushed += 1;
        } else {
          break; // still offline; keep the rest queued
        }
      }
    }
    if (this.outbox.length === 0 && this.submission === "queued_offline") {
      this.submission = "idle";
      this.advanceToPending();
    }
    return flushed;
  }

  /** Summary straight from the server; the UI never recomputes shares. */
  fetchSummary(): Promise<SummaryPayload> {
    return this.api.fetchSummary();
  }
}

import { ApiError, NetworkError, type ApiLike } from "./api.js";
import type { OfflineQueue } from "./queue.js";
import { ReviewState } from "./review.js";

export type Phase = "loading" | "reviewing" | "exhausted" | "busy" | "offline" | "error";

export type SubmitOutcome = "submitted" | "queued" | "undecided" | "rejected";

/**
 * Orchestrates one reviewer session: fetch a task, collect verdicts, post
 * the decision, advance. At most one submission is in flight at a time.
 *
 * A network failure on submit queues the decision locally and flips the
 * session offline; `reconnect()` flushes the queue before resuming. The
 * server treats replayed duplicates as acknowledgements, so a flush that
 * races a previously-delivered post cannot double-apply.
 */
export class SessionController {
  review: ReviewState | null = null;
  phase: Phase = "loading";
  /** Inline validation message from the last rejected submission. */
  lastError: string | null = null;
  private inFlight = false;

  constructor(
    private api: ApiLike,
    private queue: OfflineQueue,
    readonly session: string,
  ) {}

  get pendingCount(): number {
    return this.queue.length;
  }

  async start(): Promise<void> {
    await this.fetchNext();
  }

  private async fetchNext(): Promise<void> {
    this.phase = "loading";
    try {
      const result = await this.api.nextTask(this.session);
      if (result.kind === "task") {
        this.review = new ReviewState(result.task);
        this.phase = "reviewing";
      } else if (result.kind === "exhausted") {
        this.review = null;
        this.phase = "exhausted";
      } else {
        this.review = null;
        this.phase = "busy";
      }
    } catch (err) {
      if (err instanceof NetworkError) {
        this.phase = "offline";
        return;
      }
      this.lastError = String(err);
      this.phase = "error";
    }
  }

  /** Post the current decision; only valid once every candidate is marked. */
  async submit(): Promise<SubmitOutcome> {
    const review = this.review;
    if (review === null || !review.allDecided() || review.isSubmitted || this.inFlight) {
      return "undecided";
    }
    const decision = review.decision();
    this.inFlight = true;
    try {
      await this.api.submit(decision);
      review.markSubmitted();
      this.lastError = null;
      await this.fetchNext();
      return "submitted";
    } catch (err) {
      if (err instanceof NetworkError) {
        // Keep the local work: queue it and move on optimistically.
        this.queue.enqueue(decision);
        review.markSubmitted();
        this.phase = "offline";
        return "queued";
      }
      if (err instanceof ApiError) {
        this.lastError = err.message;
        return "rejected";
      }
      throw err;
    } finally {
      this.inFlight = false;
    }
  }

  /** Flush queued decisions, then resume fetching tasks. */
  async reconnect(): Promise<void> {
    await this.queue.flush((d) => this.api.submit(d));
    if (this.queue.length > 0) {
      this.phase = "offline";
      return;
    }
    await this.fetchNext();
  }
}

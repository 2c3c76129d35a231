import type { AdjudicationTask, Decision } from "./types.js";

export type Verdict = "accepted" | "rejected" | "undecided";

/** What a keypress did, so the caller knows whether to re-render or submit. */
export type KeyResult = "marked" | "undone" | "moved" | "submit" | "blocked" | "ignored";

/**
 * Review state for one served task: a verdict per candidate, in served order.
 *
 * The selection state is exactly what will be posted — `decision()` reads the
 * verdict array and nothing else. Submission is only possible once every
 * candidate has been decided, and marks are frozen after `markSubmitted()`.
 */
export class ReviewState {
  readonly task: AdjudicationTask;
  focus = 0;
  private verdicts: Verdict[];
  private submitted = false;

  constructor(task: AdjudicationTask) {
    this.task = task;
    this.verdicts = task.candidates.map(() => "undecided");
  }

  get size(): number {
    return this.verdicts.length;
  }

  get isSubmitted(): boolean {
    return this.submitted;
  }

  verdict(index: number): Verdict {
    const v = this.verdicts[index];
    if (v === undefined) {
      throw new RangeError(`no candidate at index ${index}`);
    }
    return v;
  }

  accept(index: number): void {
    this.mark(index, "accepted");
  }

  reject(index: number): void {
    this.mark(index, "rejected");
  }

  /** Revert one candidate to undecided. A no-op after submission. */
  undo(index: number): void {
    this.mark(index, "undecided");
  }

  private mark(index: number, verdict: Verdict): void {
    if (this.submitted) {
      return;
    }
    if (index < 0 || index >= this.verdicts.length) {
      throw new RangeError(`no candidate at index ${index}`);
    }
    this.verdicts[index] = verdict;
  }

  allDecided(): boolean {
    return this.verdicts.every((v) => v !== "undecided");
  }

  /** The decision body matching the current marks. Requires allDecided(). */
  decision(): Decision {
    if (!this.allDecided()) {
      throw new Error("cannot build a decision while candidates are undecided");
    }
    const accepted: string[] = [];
    const rejected: string[] = [];
    this.task.candidates.forEach((cand, i) => {
      const bucket = this.verdicts[i] === "accepted" ? accepted : rejected;
      bucket.push(cand.profile.profile_id);
    });
    return { anchor_id: this.task.anchor.profile_id, accepted, rejected };
  }

  markSubmitted(): void {
    this.submitted = true;
  }

  acceptAll(): void {
    for (let i = 0; i < this.verdicts.length; i++) {
      this.accept(i);
    }
  }

  rejectAll(): void {
    for (let i = 0; i < this.verdicts.length; i++) {
      this.reject(i);
    }
  }

  /** Move focus to the next undecided candidate at or after `from`. */
  private advance(from: number): void {
    for (let step = 0; step < this.verdicts.length; step++) {
      const i = (from + step) % this.verdicts.length;
      if (this.verdicts[i] === "undecided") {
        this.focus = i;
        return;
      }
    }
    // Everything is decided; park focus where the last mark happened.
    this.focus = Math.min(Math.max(from - 1, 0), this.verdicts.length - 1);
  }

  /**
   * Keyboard-first flow: y/n mark the focused candidate and move on, u
   * reverts it, arrows (or j/k) move focus, Enter submits once complete.
   */
  handleKey(key: string): KeyResult {
    if (this.submitted || this.verdicts.length === 0) {
      return "ignored";
    }
    switch (key) {
      case "y":
        this.accept(this.focus);
        this.advance(this.focus + 1);
        return "marked";
      case "n":
        this.reject(this.focus);
        this.advance(this.focus + 1);
        return "marked";
      case "u":
        this.undo(this.focus);
        return "undone";
      case "ArrowDown":
      case "j":
        this.focus = Math.min(this.focus + 1, this.verdicts.length - 1);
        return "moved";
      case "ArrowUp":
      case "k":
        this.focus = Math.max(this.focus - 1, 0);
        return "moved";
      case "Enter":
        return this.allDecided() ? "submit" : "blocked";
      default:
        return "ignored";
    }
  }
}

import { describe, expect, test } from "vitest";

import { ReviewState } from "../src/review.js";
import type { AdjudicationTask, CandidateEntry, ProfileJson } from "../src/types.js";

function profile(pid: string, first = "Ada", last = "Quinn"): ProfileJson {
  return {
    profile_id: pid,
    first_name: first,
    last_name: last,
    dob_day: 7,
    dob_month: 3,
    dob_year: 1987,
  };
}

function candidate(pid: string, distance = 1): CandidateEntry {
  return {
    profile: profile(pid),
    distance,
    field_distances: { first: distance, last: 0, day: 0, month: 0, year: 0 },
  };
}

function task(nCandidates: number): AdjudicationTask {
  return {
    anchor: profile("anchor"),
    candidates: Array.from({ length: nCandidates }, (_, i) => candidate(`c${i}`, i)),
    session: "t",
    remaining: 5,
  };
}

describe("ReviewState", () => {
  test("starts fully undecided with submission blocked", () => {
    const review = new ReviewState(task(3));
    expect(review.allDecided()).toBe(false);
    for (let i = 0; i < 3; i++) {
      expect(review.verdict(i)).toBe("undecided");
    }
    expect(review.handleKey("Enter")).toBe("blocked");
    expect(() => review.decision()).toThrow(/undecided/);
  });

  test("decision mirrors the marks exactly", () => {
    const review = new ReviewState(task(4));
    review.accept(0);
    review.reject(1);
    review.accept(2);
    review.reject(3);
    expect(review.allDecided()).toBe(true);
    expect(review.decision()).toEqual({
      anchor_id: "anchor",
      accepted: ["c0", "c2"],
      rejected: ["c1", "c3"],
    });
  });

  test("marks can be changed and undone until submission", () => {
    const review = new ReviewState(task(2));
    review.accept(0);
    review.reject(0);
    expect(review.verdict(0)).toBe("rejected");
    review.undo(0);
    expect(review.verdict(0)).toBe("undecided");

    review.accept(0);
    review.accept(1);
    review.markSubmitted();
    review.undo(0);
    review.reject(1);
    expect(review.verdict(0)).toBe("accepted");
    expect(review.verdict(1)).toBe("accepted");
  });

  test("accept-all posts every candidate id; reject-all posts none", () => {
    const all = new ReviewState(task(3));
    all.acceptAll();
    expect(all.decision().accepted).toEqual(["c0", "c1", "c2"]);
    expect(all.decision().rejected).toEqual([]);

    const none = new ReviewState(task(3));
    none.rejectAll();
    expect(none.decision().accepted).toEqual([]);
    expect(none.decision().rejected).toEqual(["c0", "c1", "c2"]);
  });

  test("y/n mark the focused candidate and advance to the next undecided", () => {
    const review = new ReviewState(task(3));
    expect(review.focus).toBe(0);
    expect(review.handleKey("y")).toBe("marked");
    expect(review.verdict(0)).toBe("accepted");
    expect(review.focus).toBe(1);
    expect(review.handleKey("n")).toBe("marked");
    expect(review.verdict(1)).toBe("rejected");
    expect(review.focus).toBe(2);
    expect(review.handleKey("n")).toBe("marked");
    expect(review.allDecided()).toBe(true);
    expect(review.handleKey("Enter")).toBe("submit");
  });

  test("advance skips already-decided candidates and wraps", () => {
    const review = new ReviewState(task(3));
    review.reject(1);
    review.handleKey("y"); // marks 0, should skip 1 and land on 2
    expect(review.focus).toBe(2);
  });

  test("u reverts the focused candidate without moving", () => {
    const review = new ReviewState(task(2));
    review.handleKey("y");
    review.handleKey("ArrowUp");
    expect(review.focus).toBe(0);
    expect(review.handleKey("u")).toBe("undone");
    expect(review.verdict(0)).toBe("undecided");
    expect(review.focus).toBe(0);
  });

  test("arrow keys move focus and clamp at the edges", () => {
    const review = new ReviewState(task(2));
    expect(review.handleKey("ArrowUp")).toBe("moved");
    expect(review.focus).toBe(0);
    review.handleKey("ArrowDown");
    review.handleKey("ArrowDown");
    expect(review.focus).toBe(1);
    review.handleKey("k");
    expect(review.focus).toBe(0);
    review.handleKey("j");
    expect(review.focus).toBe(1);
  });

  test("unknown keys and post-submission keys are ignored", () => {
    const review = new ReviewState(task(1));
    expect(review.handleKey("q")).toBe("ignored");
    review.accept(0);
    review.markSubmitted();
    expect(review.handleKey("y")).toBe("ignored");
    expect(review.handleKey("Enter")).toBe("ignored");
  });

  test("out-of-range marks throw", () => {
    const review = new ReviewState(task(2));
    expect(() => review.accept(2)).toThrow(RangeError);
    expect(() => review.verdict(-1)).toThrow(RangeError);
  });
});

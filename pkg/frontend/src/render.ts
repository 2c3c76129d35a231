import { charDiff, type DiffSpan } from "./diff.js";
import { fieldStrings } from "./normalize.js";
import type { ReviewState, Verdict } from "./review.js";
import { FIELD_NAMES, type FieldName, type ProfileJson } from "./types.js";

/** One field of one candidate, diffed against the anchor. */
export interface FieldCell {
  name: FieldName;
  anchorSpans: DiffSpan[];
  candidateSpans: DiffSpan[];
  /** Server-computed edit distance for this field. */
  distance: number;
  exact: boolean;
}

export interface CandidateRow {
  profileId: string;
  /** Concatenated-distance badge, straight from the service. */
  badge: number;
  verdict: Verdict;
  focused: boolean;
  cells: FieldCell[];
  profile: ProfileJson;
}

export interface AnchorField {
  name: FieldName;
  text: string;
}

export interface TaskView {
  anchorId: string;
  anchorFields: AnchorField[];
  /** Rows in served order — the client never reorders candidates. */
  rows: CandidateRow[];
  remaining: number;
  allDecided: boolean;
  submitted: boolean;
}

/**
 * Pure view model for one task. Diffs run on the normalized field strings
 * (the ones the distances were computed on), so a badge of 0 always renders
 * as five exact-match fields with nothing highlighted.
 */
export function renderTask(review: ReviewState): TaskView {
  const task = review.task;
  const anchorStrs = fieldStrings(task.anchor);
  const rows = task.candidates.map((cand, i): CandidateRow => {
    const candStrs = fieldStrings(cand.profile);
    const cells = FIELD_NAMES.map((name, f): FieldCell => {
      const pair = charDiff(anchorStrs[f]!, candStrs[f]!);
      const distance = cand.field_distances[name];
      return {
        name,
        anchorSpans: pair.a,
        candidateSpans: pair.b,
        distance,
        exact: distance === 0,
      };
    });
    return {
      profileId: cand.profile.profile_id,
      badge: cand.distance,
      verdict: review.verdict(i),
      focused: review.focus === i,
      cells,
      profile: cand.profile,
    };
  });
  return {
    anchorId: task.anchor.profile_id,
    anchorFields: FIELD_NAMES.map((name, f) => ({ name, text: anchorStrs[f]! })),
    rows,
    remaining: task.remaining,
    allDecided: review.allDecided(),
    submitted: review.isSubmitted,
  };
}

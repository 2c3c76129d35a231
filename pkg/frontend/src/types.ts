/** Wire types mirroring the adjudication service's JSON payloads. */

export const FIELD_NAMES = ["first", "last", "day", "month", "year"] as const;

export type FieldName = (typeof FIELD_NAMES)[number];

export interface ProfileJson {
  profile_id: string;
  first_name: string;
  last_name: string;
  dob_day: number;
  dob_month: number;
  dob_year: number;
}

/** One ranked candidate as served by GET /api/next-task. */
export interface CandidateEntry {
  profile: ProfileJson;
  /** Edit distance between the concatenated normalized fields. */
  distance: number;
  /** Per-field edit distances on the normalized strings. */
  field_distances: Record<FieldName, number>;
}

export interface AdjudicationTask {
  anchor: ProfileJson;
  candidates: CandidateEntry[];
  session: string;
  remaining: number;
}

/** Body for POST /api/decision. */
export interface Decision {
  anchor_id: string;
  accepted: string[];
  rejected: string[];
  reviewer?: string;
}

export interface SubmitAck {
  status: "ok";
  duplicate?: boolean;
}

export interface SessionStats {
  profiles: number;
  adjudicated: number;
  remaining: number;
  clusters: number;
  accept_rate: number | null;
}

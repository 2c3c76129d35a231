import type { ProfileJson } from "./types.js";

/**
 * Client-side copy of the server's field canonicalization, so the diff view
 * compares exactly the strings the distances were computed on.
 */
export function normalizeField(raw: string): string {
  return raw
    .trim()
    .toLowerCase()
    .replace(/[^a-z0-9]/g, "");
}

/** The five normalized field strings, in served field order. */
export function fieldStrings(p: ProfileJson): [string, string, string, string, string] {
  return [
    normalizeField(p.first_name),
    normalizeField(p.last_name),
    normalizeField(String(p.dob_day).padStart(2, "0")),
    normalizeField(String(p.dob_month).padStart(2, "0")),
    normalizeField(String(p.dob_year).padStart(4, "0")),
  ];
}

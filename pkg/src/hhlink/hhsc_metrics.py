"""Shelter-utilization metrics over linked stay records.

Stays are (profile_id, shelter_id, date) rows.  Merging maps each stay to
its profile's cluster (the linked person) and deduplicates exact
(person, shelter, date) triples.  An episode is a maximal run of stays
whose consecutive dates are less than 30 days apart; a gap of 29 days
continues an episode, a gap of 30 starts a new one.

Tenure is the exclusive day difference between a person's first and last
stay (single-day users have tenure 0); an inclusive variant is available
via a flag.  The top-5% cohort per metric uses the nearest-rank 95th
percentile threshold with ties included.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass

import numpy as np

from .cluster import Clustering
from .errors import EmptyInputError

GAP_DAYS = 30
METRIC_NAMES = ("total_stays", "tenure_days", "shelters_visited", "episodes")


@dataclass(frozen=True)
class StayRecord:
    profile_id: str
    shelter_id: str
    date: datetime.date


@dataclass(frozen=True)
class Episode:
    person_id: str
    start: datetime.date
    end: datetime.date
    stay_count: int


@dataclass(frozen=True)
class PersonUsage:
    person_id: str
    total_stays: int
    tenure_days: int
    shelters_visited: int
    episodes: int


def merge_stays(
    stays, clustering: Clustering | None = None
) -> dict[str, list[tuple[str, datetime.date]]]:
    """Per-person deduplicated stay sets.

    Each stay maps to its profile's cluster id; profiles absent from the
    clustering (or all of them, when clustering is None) stay their own
    person.  Exact (person, shelter, date) duplicates collapse to one.
    """
    member = clustering.member_map() if clustering is not None else {}
    merged: dict[str, set[tuple[str, datetime.date]]] = {}
    for s in stays:
        person = member.get(s.profile_id, s.profile_id)
        merged.setdefault(person, set()).add((s.shelter_id, s.date))
    return {person: sorted(items) for person, items in merged.items()}


def episodes(person_id: str, stay_set) -> list[Episode]:
    """Split a person's stays into episodes at gaps of GAP_DAYS or more."""
    if not stay_set:
        raise EmptyInputError(f"person {person_id!r} has no stays")
    by_date = sorted(stay_set, key=lambda t: (t[1], t[0]))
    out: list[Episode] = []
    start = by_date[0][1]
    prev = start
    count = 0
    for shelter, date in by_date:
        if (date - prev).days >= GAP_DAYS:
            out.append(Episode(person_id, start, prev, count))
            start = date
            count = 0
        count += 1
        prev = date
    out.append(Episode(person_id, start, prev, count))
    return out


def usage(person_id: str, stay_set, inclusive_tenure: bool = False) -> PersonUsage:
    """Aggregate one person's metrics from a deduplicated stay set."""
    if not stay_set:
        raise EmptyInputError(f"person {person_id!r} has no stays")
    dates = [d for _, d in stay_set]
    tenure = (max(dates) - min(dates)).days
    if inclusive_tenure:
        tenure += 1
    return PersonUsage(
        person_id,
        total_stays=len(stay_set),
        tenure_days=tenure,
        shelters_visited=len({sh for sh, _ in stay_set}),
        episodes=len(episodes(person_id, stay_set)),
    )


def all_usages(
    stays, clustering: Clustering | None = None, inclusive_tenure: bool = False
) -> list[PersonUsage]:
    merged = merge_stays(stays, clustering)
    return [
        usage(person, stay_set, inclusive_tenure)
        for person, stay_set in sorted(merged.items())
    ]


def _summary(values: np.ndarray) -> dict:
    return {"mean": float(np.mean(values)), "median": float(np.median(values))}


def top5_threshold(values: np.ndarray, percent: float = 5.0) -> tuple[float, int]:
    """Nearest-rank threshold: the k-th largest value with k = ceil(p% of n)."""
    n = len(values)
    k = int(np.ceil(percent / 100.0 * n))
    k = max(k, 1)
    threshold = float(np.sort(values)[::-1][k - 1])
    return threshold, k


def cohort_report(usages, percent: float = 5.0, min_persons: int = 20) -> dict:
    """Mean and median per metric, for everyone and for the top cohort.

    The cohort per metric is every person at or above the nearest-rank
    threshold for that metric (ties included, so it may exceed the nominal
    percentage).  With fewer than min_persons persons, only the All rows
    are reported and the report is flagged.
    """
    usages = list(usages)
    if not usages:
        raise EmptyInputError("no persons to report on")
    n = len(usages)
    too_small = n < min_persons
    report: dict = {"persons": n, "top_percent": percent, "metrics": {}}
    if too_small:
        report["top_cohort_omitted"] = (
            f"only {n} persons; need at least {min_persons} for a "
            f"meaningful top-{percent:g}% cohort"
        )
    for metric in METRIC_NAMES:
        values = np.asarray([getattr(u, metric) for u in usages], dtype=float)
        entry = {"all": _summary(values)}
        if not too_small:
            threshold, k = top5_threshold(values, percent)
            cohort = values[values >= threshold]
            entry["top"] = {
                **_summary(cohort),
                "threshold": threshold,
                "cohort_size": int(len(cohort)),
                "nominal_size": k,
            }
        report["metrics"][metric] = entry
    return report


def episode_length_histogram(all_episodes) -> dict[int, int]:
    """Episode count per stay-count value (the plotted distribution)."""
    hist: dict[int, int] = {}
    for ep in all_episodes:
        hist[ep.stay_count] = hist.get(ep.stay_count, 0) + 1
    return dict(sorted(hist.items()))


# ---------------------------------------------------------------------------
# demo stay generator (for end-to-end runs without real data)


def generate_stays(
    profile_ids,
    seed: int,
    start: datetime.date = datetime.date(2016, 1, 1),
    span_days: int = 1095,
    shelters: int = 8,
) -> list[StayRecord]:
    """Plausible synthetic stay records: a heavy-tailed stay count per
    profile, short in-episode gaps with occasional long breaks, and a
    preferred home shelter per person."""
    profile_ids = list(profile_ids)
    if not profile_ids:
        raise EmptyInputError("no profiles to generate stays for")
    shelter_ids = [f"S{i:02d}" for i in range(1, shelters + 1)]
    out: list[StayRecord] = []
    for i, pid in enumerate(sorted(profile_ids)):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        n_stays = int(min(rng.zipf(1.6), 300))
        home = shelter_ids[rng.integers(len(shelter_ids))]
        day = int(rng.integers(0, span_days))
        for _ in range(n_stays):
            shelter = home if rng.random() < 0.8 else shelter_ids[rng.integers(len(shelter_ids))]
            out.append(StayRecord(pid, shelter, start + datetime.timedelta(days=day)))
            if rng.random() < 0.12:
                day += int(rng.integers(GAP_DAYS, 240))
            else:
                day += int(rng.integers(1, 7))
    out.sort(key=lambda s: (s.profile_id, s.date, s.shelter_id))
    return out

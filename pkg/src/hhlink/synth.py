"""Synthetic duplicated-corpus generation with ground truth.

For every base (original) profile a cluster size is drawn from the manual
empirical cluster-size distribution; the cluster gets size - 1 duplicates,
each corrupted by an error pattern drawn from the empirical per-field
edit-distance pattern distribution.  Corruption reproduces the drawn
pattern exactly: names receive random insert/delete/substitute edits
(verified against the edit-distance oracle), date parts are replaced by a
uniformly chosen valid calendar value at the exact requested distance.

Everything is deterministic for a given master seed: per-original and
per-duplicate random streams are derived from it, so corpora are
reproducible record for record.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .encoder import EncoderConfig, PlainProfile, encode_profile, field_strings, normalize_field
from .errors import BadDistributionError, ParseError, PatternInfeasibleError, SchemaError
from .similarity import edit_distance, features

_MAX_RETRIES = 1000
_YEAR_RANGE = range(1900, 2100)

# Key used only for the self-check Dice table over synthetic data; the
# corpus is artificial, so a fixed public key costs nothing.
VALIDATION_KEY = b"hhlink-synth-validation"


@dataclass(frozen=True)
class ClusterSizeDistribution:
    sizes: tuple[int, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.sizes) != len(self.probabilities) or not self.sizes:
            raise BadDistributionError("sizes and probabilities must align and be non-empty")
        if len(set(self.sizes)) != len(self.sizes):
            raise BadDistributionError("duplicate cluster size")
        if any(s < 1 for s in self.sizes):
            raise BadDistributionError("cluster sizes must be >= 1")
        if any(not 0.0 <= p <= 1.0 for p in self.probabilities):
            raise BadDistributionError("probabilities must lie in [0, 1]")
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise BadDistributionError(
                f"probabilities sum to {sum(self.probabilities)!r}, not 1"
            )


@dataclass(frozen=True)
class PatternDistribution:
    """Per-field edit-distance patterns (first, last, day, month, year)."""

    patterns: tuple[tuple[int, int, int, int, int], ...]
    probabilities: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.patterns) != len(self.probabilities) or not self.patterns:
            raise BadDistributionError("patterns and probabilities must align and be non-empty")
        if len(set(self.patterns)) != len(self.patterns):
            raise BadDistributionError("duplicate error pattern")
        if any(len(p) != 5 or any(d < 0 for d in p) for p in self.patterns):
            raise BadDistributionError("patterns are 5-tuples of non-negative distances")
        if (0, 0, 0, 0, 0) not in self.patterns:
            raise BadDistributionError("the identical pattern (0,0,0,0,0) must be present")
        if any(not 0.0 <= p <= 1.0 for p in self.probabilities):
            raise BadDistributionError("probabilities must lie in [0, 1]")
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise BadDistributionError(
                f"probabilities sum to {sum(self.probabilities)!r}, not 1"
            )


def read_size_distribution(path) -> ClusterSizeDistribution:
    sizes, probs = [], []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["size", "probability"]:
            raise SchemaError(f"{path}: expected header size,probability")
        for lineno, row in enumerate(reader, start=2):
            try:
                sizes.append(int(row["size"]))
                probs.append(float(row["probability"]))
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return ClusterSizeDistribution(tuple(sizes), tuple(probs))


def read_pattern_distribution(path) -> PatternDistribution:
    pats, probs = [], []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        expected = ["first", "last", "day", "month", "year", "probability"]
        if reader.fieldnames != expected:
            raise SchemaError(f"{path}: expected header {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                pats.append(tuple(int(row[c]) for c in expected[:5]))
                probs.append(float(row["probability"]))
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return PatternDistribution(tuple(pats), tuple(probs))


def _bundled(name: str):
    return resources.files("hhlink").joinpath("defaults", name)


def default_size_distribution() -> ClusterSizeDistribution:
    """Manual-match cluster sizes; the >5 bucket is spread over sizes 6-10
    with geometrically halving mass."""
    with resources.as_file(_bundled("size_dist.csv")) as p:
        return read_size_distribution(p)


def default_pattern_distribution() -> PatternDistribution:
    """Top-10 empirical error patterns plus a uniform remainder bucket over
    twelve further plausible patterns."""
    with resources.as_file(_bundled("patterns.csv")) as p:
        return read_pattern_distribution(p)


def sample_cluster_sizes(
    n_originals: int, dist: ClusterSizeDistribution, seed: int
) -> np.ndarray:
    """One i.i.d. cluster size per original profile."""
    if n_originals < 1:
        raise ValueError("n_originals must be >= 1")
    rng = np.random.default_rng(seed)
    return rng.choice(np.asarray(dist.sizes), size=n_originals, p=dist.probabilities)


# ---------------------------------------------------------------------------
# corruption


def _corrupt_name(name: str, distance: int, rng: np.random.Generator) -> str:
    """Random insert/delete/substitute edits landing at the exact distance."""
    if distance == 0:
        return name
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    for _ in range(_MAX_RETRIES):
        s = name
        for _ in range(distance):
            ops = ["insert"]
            if s:
                ops += ["delete", "substitute"]
            op = ops[rng.integers(len(ops))]
            if op == "insert":
                pos = int(rng.integers(len(s) + 1))
                s = s[:pos] + alphabet[rng.integers(26)] + s[pos:]
            elif op == "delete":
                pos = int(rng.integers(len(s)))
                s = s[:pos] + s[pos + 1 :]
            else:
                pos = int(rng.integers(len(s)))
                s = s[:pos] + alphabet[rng.integers(26)] + s[pos + 1 :]
        if s and s != name and edit_distance(name, s) == distance:
            return s
    raise PatternInfeasibleError(
        f"could not corrupt {name!r} to exact distance {distance}"
    )


def _dob_candidates(
    profile: PlainProfile, dd: int, dm: int, dy: int
) -> list[tuple[int, int, int]]:
    """All valid (day, month, year) at the exact per-part distances."""
    import datetime

    day_s, month_s, year_s = field_strings(profile)[2:]
    days = [d for d in range(1, 32) if edit_distance(day_s, f"{d:02d}") == dd]
    months = [m for m in range(1, 13) if edit_distance(month_s, f"{m:02d}") == dm]
    years = [y for y in _YEAR_RANGE if edit_distance(year_s, f"{y:04d}") == dy]
    out = []
    for y in years:
        for m in months:
            for d in days:
                try:
                    datetime.date(y, m, d)
                except ValueError:
                    continue
                out.append((d, m, y))
    return out


def corrupt(
    original: PlainProfile,
    pattern: tuple[int, int, int, int, int],
    seed,
    new_id: str,
) -> PlainProfile:
    """Duplicate whose per-field edit distances equal the pattern exactly.

    Date parts are drawn uniformly from the valid calendar values at the
    requested distance; the whole triple must remain a real date.
    """
    rng = np.random.default_rng(seed)
    df, dl, dd, dm, dy = pattern
    first = _corrupt_name(normalize_field(original.first_name), df, rng)
    last = _corrupt_name(normalize_field(original.last_name), dl, rng)
    if (dd, dm, dy) == (0, 0, 0):
        day, month, year = original.dob_day, original.dob_month, original.dob_year
    else:
        cands = _dob_candidates(original, dd, dm, dy)
        if not cands:
            raise PatternInfeasibleError(
                f"no valid date at distances (day={dd}, month={dm}, year={dy}) "
                f"from {original.dob_year:04d}-{original.dob_month:02d}-{original.dob_day:02d}"
            )
        day, month, year = cands[rng.integers(len(cands))]
    return PlainProfile(new_id, first, last, day, month, year)


# ---------------------------------------------------------------------------
# corpus generation


def _pattern_key(pattern) -> str:
    return ",".join(str(d) for d in pattern)


def generate_corpus(
    originals,
    size_dist: ClusterSizeDistribution,
    pattern_dist: PatternDistribution,
    seed: int,
) -> tuple[list[PlainProfile], dict[str, list[str]], dict]:
    """Corpus of originals plus corrupted duplicates, with ground truth.

    Returns (profiles, truth, stats): truth maps cluster_id to its member
    profile ids; stats records realized size/pattern distributions and the
    original member of each cluster.  Profile ids are assigned by a seeded
    permutation so they carry no cluster signal.
    """
    originals = list(originals)
    for p in originals:
        p.validate()
    if len({(normalize_field(p.first_name), normalize_field(p.last_name),
             p.dob_day, p.dob_month, p.dob_year)
            for p in originals}) != len(originals):
        raise ValueError("originals must be unique")
    n = len(originals)
    sizes = sample_cluster_sizes(n, size_dist, seed)
    pat_array = np.arange(len(pattern_dist.patterns))

    records: list[tuple[int, PlainProfile | None, tuple | None, int]] = []
    pattern_counts: dict[str, int] = {}
    infeasible_resamples = 0
    for i, (orig, size) in enumerate(zip(originals, sizes)):
        records.append((i, orig, None, 0))
        rng_i = np.random.default_rng(np.random.SeedSequence([seed, i]))
        for j in range(1, int(size)):
            pattern = None
            for _ in range(_MAX_RETRIES):
                k = rng_i.choice(pat_array, p=pattern_dist.probabilities)
                cand = pattern_dist.patterns[int(k)]
                if _dob_feasible(orig, cand):
                    pattern = cand
                    break
                infeasible_resamples += 1
            if pattern is None:
                raise PatternInfeasibleError(
                    f"no feasible pattern for original {orig.profile_id!r}"
                )
            pattern_counts[_pattern_key(pattern)] = (
                pattern_counts.get(_pattern_key(pattern), 0) + 1
            )
            records.append((i, None, pattern, j))

    # Seeded permutation decouples profile ids from cluster structure.
    rng_ids = np.random.default_rng(np.random.SeedSequence([seed, 999999937]))
    order = rng_ids.permutation(len(records))
    width = max(6, len(str(len(records) - 1)))
    ids = [""] * len(records)
    for pos, rec_idx in enumerate(order):
        ids[rec_idx] = f"p{pos:0{width}d}"

    profiles: list[PlainProfile] = []
    truth: dict[str, list[str]] = {}
    originals_of: dict[str, str] = {}
    for rec_idx, (i, orig, pattern, j) in enumerate(records):
        cid = f"c{i:05d}"
        pid = ids[rec_idx]
        if orig is not None:
            prof = PlainProfile(
                pid,
                normalize_field(orig.first_name),
                normalize_field(orig.last_name),
                orig.dob_day,
                orig.dob_month,
                orig.dob_year,
            )
            originals_of[cid] = pid
        else:
            prof = corrupt(
                originals[i], pattern, np.random.SeedSequence([seed, i, j]), pid
            )
        profiles.append(prof)
        truth.setdefault(cid, []).append(pid)

    dup_count = len(profiles) - n
    identical = pattern_counts.get("0,0,0,0,0", 0)
    size_hist = _size_histogram([len(v) for v in truth.values()])
    stats = {
        "originals": n,
        "profiles": len(profiles),
        "duplicates": dup_count,
        "seed": seed,
        "size_histogram": size_hist,
        "pattern_counts": dict(sorted(pattern_counts.items())),
        "identical_share": identical / dup_count if dup_count else None,
        "infeasible_resamples": infeasible_resamples,
        "original_of": dict(sorted(originals_of.items())),
    }
    return profiles, truth, stats


def _dob_feasible(orig: PlainProfile, pattern) -> bool:
    dd, dm, dy = pattern[2], pattern[3], pattern[4]
    if (dd, dm, dy) == (0, 0, 0):
        return True
    return bool(_dob_candidates(orig, dd, dm, dy))


def _size_histogram(sizes) -> dict:
    total = len(sizes)
    counts = {b: 0 for b in ("1", "2", "3", "4", "5", ">5")}
    for s in sizes:
        counts[str(s) if s <= 5 else ">5"] += 1
    return {
        b: {"count": c, "percent": 100.0 * c / total} for b, c in counts.items()
    }


def validate_corpus(
    profiles,
    truth: dict[str, list[str]],
    original_of: dict[str, str],
    m: int = 64,
    key: bytes = VALIDATION_KEY,
) -> dict:
    """Recompute size and error-pattern tables from the corpus itself.

    Every duplicate is compared against its cluster's original: per-field
    edit distances (from plaintext) and Dice values (via encoding at the
    given m) are tallied as (distance, mean Dice) rows per field.
    """
    by_id = {p.profile_id: p for p in profiles}
    cfg = EncoderConfig(key=key, m=m)
    encoded = {p.profile_id: encode_profile(p, cfg) for p in profiles}
    field_names = ("first", "last", "day", "month", "year")
    rows: dict[tuple[int, ...], int] = {}
    dice_sums: dict[str, dict[int, list]] = {
        f: {} for f in field_names
    }  # field -> distance -> [sum, count]
    dup_pairs = 0
    for cid, members in truth.items():
        orig = by_id[original_of[cid]]
        ostrs = field_strings(orig)
        for pid in members:
            if pid == orig.profile_id:
                continue
            dup = by_id[pid]
            dstrs = field_strings(dup)
            dists = tuple(edit_distance(a, b) for a, b in zip(ostrs, dstrs))
            rows[dists] = rows.get(dists, 0) + 1
            fv = features(encoded[orig.profile_id], encoded[pid])
            for f, dist, dice_val in zip(field_names, dists, fv.d):
                acc = dice_sums[f].setdefault(dist, [0.0, 0])
                acc[0] += dice_val
                acc[1] += 1
            dup_pairs += 1
    pattern_table = [
        {
            "pattern": _pattern_key(p),
            "count": c,
            "share": c / dup_pairs,
        }
        for p, c in sorted(rows.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    dice_table = {
        f: {
            str(dist): {"mean_dice": s / c, "count": c}
            for dist, (s, c) in sorted(acc.items())
        }
        for f, acc in dice_sums.items()
    }
    return {
        "size_histogram": _size_histogram([len(v) for v in truth.values()]),
        "duplicate_pairs": dup_pairs,
        "pattern_table": pattern_table,
        "dice_by_distance": dice_table,
    }


# ---------------------------------------------------------------------------
# bundled roster generator

_FIRST_NAMES = """
james john robert michael william david richard joseph thomas charles
christopher daniel matthew anthony donald mark paul steven andrew kenneth
joshua kevin brian george edward ronald timothy jason jeffrey ryan jacob
gary nicholas eric jonathan stephen larry justin scott brandon benjamin
samuel gregory frank alexander raymond patrick jack dennis jerry tyler
aaron jose adam henry nathan douglas zachary peter kyle walter ethan
jeremy harold keith christian roger noah gerald carl terry sean austin
arthur lawrence jesse dylan bryan joe jordan billy bruce albert willie
gabriel logan alan juan wayne roy ralph randy eugene vincent russell
elijah louis bobby philip johnny mary patricia jennifer linda elizabeth
barbara susan jessica sarah karen nancy lisa margaret betty sandra
ashley dorothy kimberly emily donna michelle carol amanda melissa deborah
stephanie rebecca laura sharon cynthia kathleen amy shirley angela helen
anna brenda pamela nicole samantha katherine emma ruth christine catherine
debra rachel carolyn janet virginia maria heather diane julie joyce
victoria kelly christina joan evelyn lauren judith olivia frances martha
cheryl megan andrea hannah jacqueline ann jean alice kathryn gloria
teresa doris sara janice julia marie madison grace judy theresa beverly
denise marilyn amber danielle abigail brittany rose diana natalie sophia
alexis lori kayla jane geoffrey
""".split()

_LAST_NAMES = """
smith johnson williams brown jones garcia miller davis rodriguez martinez
hernandez lopez gonzalez wilson anderson thomas taylor moore jackson martin
lee perez thompson white harris sanchez clark ramirez lewis robinson
walker young allen king wright scott torres nguyen hill flores green
adams nelson baker hall rivera campbell mitchell carter roberts gomez
phillips evans turner diaz parker cruz edwards collins reyes stewart
morris morales murphy cook rogers gutierrez ortiz morgan cooper peterson
bailey reed kelly howard ramos kim cox ward richardson watson brooks
chavez wood james bennett gray mendoza ruiz hughes price alvarez castillo
sanders patel myers long ross foster jimenez powell jenkins perry russell
sullivan bell coleman butler henderson barnes gonzales fisher vasquez
simmons romero jordan patterson alexander hamilton graham reynolds griffin
wallace moreno west cole hayes bryant herrera gibson ellis tran medina
aguilar stevens murray ford castro marshall owens harrison fernandez
mcdonald woods washington kennedy wells vargas henry chen freeman webb
tucker guzman burns crawford olson simpson porter hunter gordon mendez
silva shaw snyder mason dixon munoz hunt hicks holmes palmer wagner black
robertson boyd rose stone salazar fox warren mills meyer rice schmidt
""".split()


def generate_roster(n: int, seed: int) -> list[PlainProfile]:
    """Plausible unique name/DOB roster for self-contained runs."""
    import calendar

    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    seen: set[tuple] = set()
    out: list[PlainProfile] = []
    width = max(5, len(str(n - 1)))
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 100 * n:
            raise ValueError(f"could not generate {n} unique profiles")
        first = _FIRST_NAMES[rng.integers(len(_FIRST_NAMES))]
        last = _LAST_NAMES[rng.integers(len(_LAST_NAMES))]
        year = int(rng.integers(1930, 2005))
        month = int(rng.integers(1, 13))
        day = int(rng.integers(1, calendar.monthrange(year, month)[1] + 1))
        key = (first, last, day, month, year)
        if key in seen:
            continue
        seen.add(key)
        out.append(PlainProfile(f"r{len(out):0{width}d}", first, last, day, month, year))
    return out

"""Pair enumeration at scale: all-pairs comparison, labeling, splitting.

The all-pairs comparison is blocked into chunk-pair tasks over disjoint
index ranges so any number of workers produces the same output: results
are merged and canonically sorted by (id_a, id_b) with id_a < id_b
lexicographically.  Pair tables are stored column-wise (numpy feature
matrix plus id columns) because corpora of tens of thousands of profiles
produce millions of candidate rows.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterator, Mapping, Sequence

import numpy as np

from .encoder import NUM_FIELDS, EncodedProfile
from .errors import (
    DegenerateClassError,
    DuplicateIdError,
    UnknownProfileError,
    VectorSizeMismatchError,
)
from .similarity import FeatureVector

FEATURE_COLUMNS = ("d_first", "d_last", "d_day", "d_month", "d_year", "d_all")
DEFAULT_FLOOR = 0.5
DEFAULT_BLOCK_SIZE = 2048


@dataclass(frozen=True)
class CandidatePair:
    """One scored profile pair in canonical order (id_a < id_b)."""

    id_a: str
    id_b: str
    features: FeatureVector
    label: bool | None = None
    confidence: float | None = None


@dataclass
class PairTable:
    """Column-wise set of candidate pairs, sorted by (id_a, id_b).

    features has one row per pair with columns FEATURE_COLUMNS.  labels
    (match = True) and confidence are optional and align row-wise.
    """

    id_a: list[str]
    id_b: list[str]
    features: np.ndarray
    labels: np.ndarray | None = None
    confidence: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = len(self.id_a)
        if len(self.id_b) != n or self.features.shape != (n, len(FEATURE_COLUMNS)):
            raise ValueError("pair table columns are misaligned")

    def __len__(self) -> int:
        return len(self.id_a)

    @property
    def positive_count(self) -> int:
        if self.labels is None:
            raise ValueError("pair table is unlabeled")
        return int(self.labels.sum())

    @property
    def negative_count(self) -> int:
        return len(self) - self.positive_count

    def subset(self, indices: np.ndarray) -> "PairTable":
        idx = np.asarray(indices)
        return PairTable(
            [self.id_a[i] for i in idx],
            [self.id_b[i] for i in idx],
            self.features[idx],
            None if self.labels is None else self.labels[idx],
            None if self.confidence is None else self.confidence[idx],
        )

    def iter_pairs(self) -> Iterator[CandidatePair]:
        for r in range(len(self)):
            row = self.features[r]
            yield CandidatePair(
                self.id_a[r],
                self.id_b[r],
                FeatureVector(tuple(float(v) for v in row[:NUM_FIELDS]), float(row[NUM_FIELDS])),
                None if self.labels is None else bool(self.labels[r]),
                None if self.confidence is None else float(self.confidence[r]),
            )


def pair_count(k: int) -> int:
    """Number of unordered pairs among k profiles."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return k * (k - 1) // 2


def _pack(profiles: Sequence[EncodedProfile]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pack encoded fields into (5, n) uint64 bit words plus popcount tables."""
    if not profiles:
        raise ValueError("no profiles to compare")
    m = profiles[0].m
    seen: set[str] = set()
    for p in profiles:
        if p.m != m:
            raise VectorSizeMismatchError(f"mixed vector sizes: {m} and {p.m}")
        if p.profile_id in seen:
            raise DuplicateIdError(f"duplicate profile id {p.profile_id!r}")
        seen.add(p.profile_id)
    n = len(profiles)
    bits = np.zeros((NUM_FIELDS, n), dtype=np.uint64)
    for i, p in enumerate(profiles):
        for f in range(NUM_FIELDS):
            bits[f, i] = int.from_bytes(p.fields[f], "big")
    w = np.bitwise_count(bits).astype(np.int64)
    wsum = w.sum(axis=0)
    return bits, w, wsum


def _block_task(
    bits: np.ndarray,
    w: np.ndarray,
    wsum: np.ndarray,
    floor: float,
    task: tuple[int, int, int, int],
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Score one block pair; returns (gi, gj, per-field dice (k,5), d_all (k,))."""
    i0, i1, j0, j1 = task
    common = np.empty((NUM_FIELDS, i1 - i0, j1 - j0), dtype=np.int64)
    for f in range(NUM_FIELDS):
        common[f] = np.bitwise_count(bits[f, i0:i1, None] & bits[f, None, j0:j1])
    num = common.sum(axis=0)
    den = wsum[i0:i1, None] + wsum[None, j0:j1]
    d_all = np.zeros(num.shape, dtype=np.float64)
    np.divide(2.0 * num, den, out=d_all, where=den > 0)
    mask = d_all >= floor
    if i0 == j0:
        mask &= np.triu(np.ones(mask.shape, dtype=bool), k=1)
    ii, jj = np.nonzero(mask)
    d5 = np.empty((len(ii), NUM_FIELDS), dtype=np.float64)
    for f in range(NUM_FIELDS):
        den_f = w[f, i0 + ii] + w[f, j0 + jj]
        col = np.zeros(len(ii), dtype=np.float64)
        np.divide(2.0 * common[f, ii, jj], den_f, out=col, where=den_f > 0)
        d5[:, f] = col
    return i0 + ii, j0 + jj, d5, d_all[ii, jj]


_WORKER_STATE: dict = {}


def _init_worker(bits: np.ndarray, w: np.ndarray, wsum: np.ndarray, floor: float) -> None:
    _WORKER_STATE["args"] = (bits, w, wsum, floor)


def _run_worker_task(task: tuple[int, int, int, int]):
    bits, w, wsum, floor = _WORKER_STATE["args"]
    return _block_task(bits, w, wsum, floor, task)


def compare_all(
    profiles: Sequence[EncodedProfile],
    floor: float = DEFAULT_FLOOR,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> PairTable:
    """Score every unordered profile pair, emitting those with d_all >= floor.

    Work is split into block-pair tasks over disjoint index ranges; output
    content is independent of workers and scheduling because rows are
    canonically ordered afterwards.
    """
    if not 0.0 <= floor < 1.0:
        raise ValueError("floor must be in [0, 1)")
    bits, w, wsum = _pack(profiles)
    n = len(profiles)
    tasks = []
    starts = list(range(0, n, block_size))
    for bi, i0 in enumerate(starts):
        i1 = min(i0 + block_size, n)
        for j0 in starts[bi:]:
            tasks.append((i0, i1, j0, min(j0 + block_size, n)))

    if workers <= 1 or len(tasks) <= 1:
        parts = [_block_task(bits, w, wsum, floor, t) for t in tasks]
    else:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(bits, w, wsum, floor)
        ) as ex:
            parts = list(ex.map(_run_worker_task, tasks, chunksize=1))

    gi = np.concatenate([p[0] for p in parts]) if parts else np.empty(0, dtype=np.int64)
    gj = np.concatenate([p[1] for p in parts]) if parts else np.empty(0, dtype=np.int64)
    d5 = np.concatenate([p[2] for p in parts]) if parts else np.empty((0, NUM_FIELDS))
    dall = np.concatenate([p[3] for p in parts]) if parts else np.empty(0)

    ids = [p.profile_id for p in profiles]
    # Lexicographic id rank makes canonical ordering an integer sort.
    rank = np.empty(n, dtype=np.int64)
    rank[np.argsort(np.array(ids, dtype=object), kind="stable")] = np.arange(n)
    swap = rank[gi] > rank[gj]
    a_idx = np.where(swap, gj, gi)
    b_idx = np.where(swap, gi, gj)
    order = np.lexsort((rank[b_idx], rank[a_idx]))
    a_idx, b_idx = a_idx[order], b_idx[order]
    feats = np.hstack([d5[order], dall[order, None]])
    return PairTable([ids[i] for i in a_idx], [ids[j] for j in b_idx], feats)


def member_to_cluster(truth: Mapping[str, Sequence[str]]) -> dict[str, str]:
    """Invert a {cluster_id: members} ground-truth mapping."""
    out: dict[str, str] = {}
    for cid, members in truth.items():
        for pid in members:
            if pid in out:
                raise UnknownProfileError(f"profile {pid!r} appears in two ground-truth clusters")
            out[pid] = cid
    return out


def attach_labels(table: PairTable, truth: Mapping[str, Sequence[str]]) -> PairTable:
    """Label each pair: match iff both profiles share a ground-truth cluster."""
    by_profile = member_to_cluster(truth)
    labels = np.zeros(len(table), dtype=bool)
    for r in range(len(table)):
        ca = by_profile.get(table.id_a[r])
        labels[r] = ca is not None and ca == by_profile.get(table.id_b[r])
    return replace(table, labels=labels)


def truth_positive_pairs(truth: Mapping[str, Sequence[str]]) -> list[tuple[str, str]]:
    """All within-cluster pairs of a ground truth, canonically ordered."""
    pairs = []
    for members in truth.values():
        ms = sorted(members)
        for i in range(len(ms)):
            for j in range(i + 1, len(ms)):
                pairs.append((ms[i], ms[j]))
    pairs.sort()
    return pairs


def label_pairs(
    profiles: Sequence[EncodedProfile],
    truth: Mapping[str, Sequence[str]],
    workers: int = 1,
) -> PairTable:
    """Materialize and label every unordered pair of the corpus.

    Enumerates all k(k-1)/2 pairs; meant for corpora up to a few thousand
    profiles.  For larger corpora use labeled_candidates, which keeps only
    pairs above the emission floor plus every ground-truth positive.
    """
    known = {p.profile_id for p in profiles}
    for pid in member_to_cluster(truth):
        if pid not in known:
            raise UnknownProfileError(f"ground truth references unknown profile {pid!r}")
    return attach_labels(compare_all(profiles, floor=0.0, workers=workers), truth)


def labeled_candidates(
    profiles: Sequence[EncodedProfile],
    truth: Mapping[str, Sequence[str]],
    floor: float = DEFAULT_FLOOR,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> PairTable:
    """Scalable labeled dataset: floor-filtered candidates plus all positives.

    Pairs below the floor are never match candidates downstream, so negatives
    below it are omitted; ground-truth positives below the floor are appended
    with directly computed features so recall accounting stays exact.
    """
    from .similarity import features as _features

    by_id = {p.profile_id: p for p in profiles}
    for pid in member_to_cluster(truth):
        if pid not in by_id:
            raise UnknownProfileError(f"ground truth references unknown profile {pid!r}")
    table = attach_labels(
        compare_all(profiles, floor=floor, workers=workers, block_size=block_size), truth
    )
    have = set(zip(table.id_a, table.id_b))
    missing = [pr for pr in truth_positive_pairs(truth) if pr not in have]
    if not missing:
        return table
    extra = np.array(
        [_features(by_id[a], by_id[b]).as_row() for a, b in missing], dtype=np.float64
    )
    id_a = table.id_a + [a for a, _ in missing]
    id_b = table.id_b + [b for _, b in missing]
    feats = np.vstack([table.features, extra])
    labels = np.concatenate([table.labels, np.ones(len(missing), dtype=bool)])
    order = sorted(range(len(id_a)), key=lambda r: (id_a[r], id_b[r]))
    return PairTable(
        [id_a[r] for r in order], [id_b[r] for r in order], feats[order], labels[order]
    )


def _class_indices(table: PairTable) -> tuple[np.ndarray, np.ndarray]:
    if table.labels is None:
        raise ValueError("stratified operations need a labeled pair table")
    pos = np.flatnonzero(table.labels)
    neg = np.flatnonzero(~table.labels)
    return pos, neg


def stratified_split(
    table: PairTable, train_fraction: float = 0.7, seed: int = 0
) -> tuple[PairTable, PairTable]:
    """Deterministic stratified train/test partition.

    Per class the train count is floor(fraction * n + 0.5), so class
    proportions are preserved within rounding.
    """
    pos, neg = _class_indices(table)
    if len(pos) == 0 or len(neg) == 0:
        raise DegenerateClassError("both classes must be represented to split")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for cls in (pos, neg):
        perm = cls[rng.permutation(len(cls))]
        n_train = int(np.floor(train_fraction * len(cls) + 0.5))
        train_idx.append(perm[:n_train])
        test_idx.append(perm[n_train:])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    return table.subset(train), table.subset(test)


def stratified_kfold(table: PairTable, folds: int = 5, seed: int = 0) -> np.ndarray:
    """Assign each pair to one of `folds` folds, stratified per class.

    Per-class fold sizes differ by at most one; assignment is a pure
    function of (table, folds, seed).
    """
    pos, neg = _class_indices(table)
    for cls in (pos, neg):
        if len(cls) < folds:
            raise DegenerateClassError(
                f"a class has {len(cls)} members, fewer than {folds} folds"
            )
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(table), dtype=np.int64)
    for cls in (pos, neg):
        perm = cls[rng.permutation(len(cls))]
        base, extra = divmod(len(cls), folds)
        start = 0
        for fold in range(folds):
            size = base + (1 if fold < extra else 0)
            assignment[perm[start : start + size]] = fold
            start += size
    return assignment

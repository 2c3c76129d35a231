"""Pairwise and cluster-level evaluation against ground truth.

Pairwise metrics are the usual confusion-matrix precision/recall/F1 over
labeled pairs.  Cluster metrics map every ground-truth cluster g to the
estimated cluster sharing the most profiles with it, score precision and
recall of that match, and aggregate by unweighted means; the aggregate F1
is the harmonic mean of mean precision and mean recall.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cluster import Clustering
from .errors import LengthMismatchError, UnknownProfileError


@dataclass(frozen=True)
class PairMetrics:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    precision_defined: bool
    recall_defined: bool

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "precision_defined": self.precision_defined,
            "recall_defined": self.recall_defined,
        }


def pair_metrics(predictions, labels) -> PairMetrics:
    """Confusion-matrix metrics; an empty denominator scores 0.0 and clears
    the corresponding *_defined flag."""
    pred = np.asarray(predictions, dtype=bool)
    lab = np.asarray(labels, dtype=bool)
    if pred.shape != lab.shape:
        raise LengthMismatchError(
            f"got {pred.shape[0]} predictions for {lab.shape[0]} labels"
        )
    tp = int(np.sum(pred & lab))
    fp = int(np.sum(pred & ~lab))
    fn = int(np.sum(~pred & lab))
    tn = int(np.sum(~pred & ~lab))
    p_def = tp + fp > 0
    r_def = tp + fn > 0
    precision = tp / (tp + fp) if p_def else 0.0
    recall = tp / (tp + fn) if r_def else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return PairMetrics(tp, fp, fn, tn, precision, recall, f1, p_def, r_def)


def best_overlap_map(g, estimated: Clustering):
    """The estimated cluster sharing the most profiles with ground-truth set g.

    Ties prefer the smaller estimated cluster, then the lexicographically
    smaller cluster id.  Returns None when no estimated cluster overlaps g.
    """
    gset = set(g)
    if not gset:
        raise ValueError("ground-truth cluster is empty")
    best = None
    best_key = None
    for c in estimated.clusters:
        overlap = len(gset.intersection(c.members))
        if overlap == 0:
            continue
        key = (-overlap, len(c.members), c.center)
        if best_key is None or key < best_key:
            best_key = key
            best = c
    return best


@dataclass
class ClusterMetrics:
    per_cluster: list[dict]  # one row per ground-truth cluster
    mean_precision: float
    mean_recall: float
    f1: float

    def to_dict(self) -> dict:
        return {
            "per_cluster": self.per_cluster,
            "mean_precision": self.mean_precision,
            "mean_recall": self.mean_recall,
            "f1": self.f1,
        }


def cluster_metrics(truth: dict, estimated: Clustering) -> ClusterMetrics:
    """Score an estimated clustering against {cluster_id: members} truth.

    Per ground-truth cluster g with best-overlap estimate f(g):
    precision = |f(g) ∩ g| / |f(g)| and recall = |f(g) ∩ g| / |g|; a truth
    cluster with no overlapping estimate scores (0, 0).
    """
    covered = set()
    for c in estimated.clusters:
        covered.update(c.members)
    rows = []
    for gid in sorted(truth):
        members = set(truth[gid])
        missing = members - covered
        if missing:
            raise UnknownProfileError(
                f"truth cluster {gid!r} references profiles absent from the "
                f"estimated clustering: {sorted(missing)[:3]}"
            )
        best = best_overlap_map(members, estimated)
        if best is None:
            rows.append(
                {"truth_id": gid, "mapped_id": None, "precision": 0.0, "recall": 0.0}
            )
            continue
        common = len(members.intersection(best.members))
        rows.append(
            {
                "truth_id": gid,
                "mapped_id": best.center,
                "precision": common / len(best.members),
                "recall": common / len(members),
            }
        )
    mp = float(np.mean([r["precision"] for r in rows]))
    mr = float(np.mean([r["recall"] for r in rows]))
    f1 = 2 * mp * mr / (mp + mr) if mp + mr > 0 else 0.0
    return ClusterMetrics(rows, mp, mr, f1)

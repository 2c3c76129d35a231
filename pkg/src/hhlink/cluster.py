"""Similarity-graph clustering with the CENTER and MERGE-CENTER scans.

Accepted pairwise links form a weighted graph; a single pass over the edges
in descending weight order designates cluster centers and assigns members.
MERGE-CENTER additionally merges two clusters whenever an edge touches a
center of one and any node of the other, so it only ever coarsens the
CENTER partition.

All tie-breaking is explicit (lexicographically smaller endpoint becomes
the center; the earlier-created center survives a merge), which makes the
output a pure function of the edge multiset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnknownEndpointError

SIZE_BUCKETS = ("1", "2", "3", "4", "5", ">5")


@dataclass(frozen=True)
class LinkEdge:
    """One accepted link; endpoints stored in canonical (ascending) order."""

    id_a: str
    id_b: str
    weight: float

    def __post_init__(self) -> None:
        if self.id_a >= self.id_b:
            raise ValueError("edge endpoints must satisfy id_a < id_b")
        if not 0.0 < self.weight <= 1.0:
            raise ValueError("edge weight must be in (0, 1]")


def make_edge(u: str, v: str, weight: float) -> LinkEdge:
    """Edge from endpoints in either order."""
    if u == v:
        raise ValueError("self-edges are not allowed")
    return LinkEdge(min(u, v), max(u, v), float(weight))


def sort_edges(edges) -> list[LinkEdge]:
    """Descending weight; ties by (id_a, id_b) ascending.  A total order, so
    any permutation of the input yields the same output."""
    return sorted(edges, key=lambda e: (-e.weight, e.id_a, e.id_b))


@dataclass
class Cluster:
    center: str
    members: list[str]
    confidences: dict[str, float] = field(default_factory=dict)
    """Assigning edge weight per non-center member."""


@dataclass
class Clustering:
    clusters: list[Cluster]

    def member_map(self) -> dict[str, str]:
        """profile_id -> cluster_id (the center's profile id)."""
        out = {}
        for c in self.clusters:
            for m in c.members:
                out[m] = c.center
        return out

    def as_dict(self) -> dict[str, list[str]]:
        """cluster_id -> sorted member list."""
        return {c.center: sorted(c.members) for c in self.clusters}

    def rows(self) -> list[tuple[str, str, bool, float | None]]:
        """(profile_id, cluster_id, is_center, confidence) sorted for output."""
        out = []
        for c in self.clusters:
            for m in sorted(c.members):
                out.append((m, c.center, m == c.center, c.confidences.get(m)))
        out.sort(key=lambda r: (r[1], r[0]))
        return out


class _Scan:
    """Shared scan state for both algorithms."""

    def __init__(self, profiles) -> None:
        self.profiles = set(profiles)
        if not self.profiles:
            raise ValueError("no profiles to cluster")
        self.assignment: dict[str, int] = {}  # node -> cluster key
        self.centers: dict[int, str] = {}  # cluster key -> center node
        self.members: dict[int, set[str]] = {}
        self.confidences: dict[int, dict[str, float]] = {}
        self.center_marked: set[str] = set()  # every node that ever centered
        self.next_key = 0

    def check(self, edge: LinkEdge) -> None:
        for n in (edge.id_a, edge.id_b):
            if n not in self.profiles:
                raise UnknownEndpointError(f"edge endpoint {n!r} is not a known profile")

    def new_cluster(self, center: str) -> int:
        key = self.next_key
        self.next_key += 1
        self.centers[key] = center
        self.members[key] = {center}
        self.confidences[key] = {}
        self.assignment[center] = key
        self.center_marked.add(center)
        return key

    def join(self, key: int, node: str, weight: float) -> None:
        self.members[key].add(node)
        self.confidences[key][node] = weight
        self.assignment[node] = key

    def is_center(self, node: str) -> bool:
        # The mark outlives a merge: an absorbed center is a plain member of
        # the surviving cluster for output purposes, yet it keeps attracting
        # unassigned nodes and triggering merges for the rest of the scan.
        # Without that, an edge list can attach a node to a center in CENTER
        # that MERGE-CENTER has already absorbed, and the merged partition
        # would no longer coarsen the CENTER partition.
        return node in self.center_marked

    def finish(self) -> Clustering:
        for n in sorted(self.profiles - self.assignment.keys()):
            self.new_cluster(n)
        clusters = [
            Cluster(self.centers[k], sorted(self.members[k]), dict(self.confidences[k]))
            for k in sorted(self.centers, key=lambda k: self.centers[k])
        ]
        return Clustering(clusters)


def _scan_edge_center(state: _Scan, edge: LinkEdge) -> None:
    u, v = edge.id_a, edge.id_b
    au = state.assignment.get(u)
    av = state.assignment.get(v)
    if au is None and av is None:
        center, other = (u, v) if u < v else (v, u)
        key = state.new_cluster(center)
        state.join(key, other, edge.weight)
    elif au is None or av is None:
        unassigned, assigned = (u, v) if au is None else (v, u)
        if state.is_center(assigned):
            state.join(state.assignment[assigned], unassigned, edge.weight)
        # assigned non-center: no action; the other node may center later


def center_cluster(profiles, edges) -> Clustering:
    """CENTER: single scan over pre-sorted edges; leftovers become singletons."""
    state = _Scan(profiles)
    for edge in edges:
        state.check(edge)
        _scan_edge_center(state, edge)
    return state.finish()


def merge_center_cluster(profiles, edges) -> Clustering:
    """MERGE-CENTER: CENTER plus merging when an edge reaches a foreign center.

    The earlier-created center survives; the absorbed center becomes a plain
    member whose confidence is the merge edge's weight, but its scan mark
    stays, so it can still pull in unassigned nodes and cause later merges.
    """
    state = _Scan(profiles)
    for edge in edges:
        state.check(edge)
        u, v = edge.id_a, edge.id_b
        au = state.assignment.get(u)
        av = state.assignment.get(v)
        if au is not None and av is not None:
            if au != av and (state.is_center(u) or state.is_center(v)):
                survivor, absorbed = (au, av) if au < av else (av, au)
                state.members[survivor] |= state.members[absorbed]
                state.confidences[survivor].update(state.confidences[absorbed])
                old_center = state.centers[absorbed]
                state.confidences[survivor][old_center] = edge.weight
                for n in state.members[absorbed]:
                    state.assignment[n] = survivor
                del state.members[absorbed]
                del state.centers[absorbed]
                del state.confidences[absorbed]
        else:
            _scan_edge_center(state, edge)
    return state.finish()


def cluster_stats(clustering: Clustering) -> dict:
    """Size histogram (buckets 1..5 and >5) plus pooled confidence summary.

    Confidences pool every non-center member across all clusters; with no
    such members (all singletons) the summary values are None.
    """
    sizes = [len(c.members) for c in clustering.clusters]
    total = len(sizes)
    counts = {b: 0 for b in SIZE_BUCKETS}
    for s in sizes:
        counts[str(s) if s <= 5 else ">5"] += 1
    histogram = {
        b: {"count": counts[b], "percent": 100.0 * counts[b] / total} for b in SIZE_BUCKETS
    }
    pool = [w for c in clustering.clusters for w in c.confidences.values()]
    if pool:
        conf = {
            "mean": float(np.mean(pool)),
            "median": float(np.median(pool)),
            "min": float(np.min(pool)),
        }
    else:
        conf = {"mean": None, "median": None, "min": None}
    return {
        "cluster_count": total,
        "profile_count": sum(sizes),
        "size_histogram": histogram,
        "confidence": conf,
    }

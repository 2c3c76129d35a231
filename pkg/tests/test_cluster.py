import itertools

import numpy as np
import pytest

from hhlink.cluster import (
    Cluster,
    Clustering,
    LinkEdge,
    center_cluster,
    cluster_stats,
    make_edge,
    merge_center_cluster,
    sort_edges,
)
from hhlink.errors import UnknownEndpointError


def reference_scan(profiles, sorted_edges, merge: bool):
    """Step-wise reference kept deliberately naive: plain dicts, linear scans.

    Returns ({center: sorted members}, {member: assigning weight}).
    """
    label = {}  # node -> its cluster's designated center node
    group = {}  # designated center -> set of members
    conf = {}  # non-center member -> weight of the edge that attached it
    order = {}  # designated center -> creation sequence number
    marked = set()  # every node that ever became a center (marks survive merges)
    ticket = itertools.count()

    for e in sorted_edges:
        u, v, w = e.id_a, e.id_b, e.weight
        if u not in label and v not in label:
            c, o = min(u, v), max(u, v)
            group[c] = {c, o}
            label[c] = c
            label[o] = c
            conf[o] = w
            order[c] = next(ticket)
            marked.add(c)
        elif (u in label) != (v in label):
            assigned = u if u in label else v
            loose = v if u in label else u
            if assigned in marked:
                home = label[assigned]
                group[home].add(loose)
                label[loose] = home
                conf[loose] = w
        elif merge:
            cu, cv = label[u], label[v]
            if cu != cv and (u in marked or v in marked):
                survivor, absorbed = (cu, cv) if order[cu] < order[cv] else (cv, cu)
                for n in group[absorbed]:
                    label[n] = survivor
                group[survivor] |= group[absorbed]
                conf[absorbed] = w
                del group[absorbed]
                del order[absorbed]

    for n in sorted(set(profiles) - set(label)):
        group[n] = {n}
        label[n] = n
    return {c: sorted(ms) for c, ms in group.items()}, conf


def random_graph(rng, n_nodes):
    nodes = [f"n{i}" for i in range(n_nodes)]
    weights = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    edges = []
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < 0.5:
                edges.append(make_edge(nodes[i], nodes[j], float(rng.choice(weights))))
    return nodes, edges


class TestLinkEdge:
    def test_canonical_order_enforced(self):
        with pytest.raises(ValueError):
            LinkEdge("b", "a", 0.5)
        with pytest.raises(ValueError):
            LinkEdge("a", "a", 0.5)

    def test_weight_range(self):
        with pytest.raises(ValueError):
            LinkEdge("a", "b", 0.0)
        with pytest.raises(ValueError):
            LinkEdge("a", "b", 1.5)
        LinkEdge("a", "b", 1.0)

    def test_make_edge_swaps(self):
        e = make_edge("z", "a", 0.7)
        assert (e.id_a, e.id_b) == ("a", "z")

    def test_make_edge_rejects_self_edge(self):
        with pytest.raises(ValueError):
            make_edge("a", "a", 0.5)


class TestSortEdges:
    def test_descending_weight(self):
        es = [make_edge("a", "b", 0.9), make_edge("c", "d", 0.7), make_edge("e", "f", 0.8)]
        assert [e.weight for e in sort_edges(es)] == [0.9, 0.8, 0.7]

    def test_equal_weights_lexicographic(self):
        es = [make_edge("c", "d", 0.5), make_edge("a", "b", 0.5), make_edge("a", "c", 0.5)]
        ordered = sort_edges(es)
        assert [(e.id_a, e.id_b) for e in ordered] == [("a", "b"), ("a", "c"), ("c", "d")]

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        _, edges = random_graph(rng, 6)
        base = sort_edges(edges)
        for _ in range(5):
            perm = list(edges)
            rng.shuffle(perm)
            assert sort_edges(perm) == base


class TestCenterHandTraces:
    def test_path_splits_in_two(self):
        edges = sort_edges(
            [make_edge("A", "B", 0.9), make_edge("B", "C", 0.8), make_edge("C", "D", 0.7)]
        )
        got = center_cluster(["A", "B", "C", "D"], edges)
        assert got.as_dict() == {"A": ["A", "B"], "C": ["C", "D"]}

    def test_star_single_cluster(self):
        edges = sort_edges(
            [make_edge("A", "B", 0.9), make_edge("A", "C", 0.9), make_edge("A", "D", 0.9)]
        )
        got = center_cluster(["A", "B", "C", "D"], edges)
        assert got.as_dict() == {"A": ["A", "B", "C", "D"]}

    def test_no_edges_all_singletons(self):
        got = center_cluster(["A", "B", "C"], [])
        assert got.as_dict() == {"A": ["A"], "B": ["B"], "C": ["C"]}

    def test_member_confidence_is_assigning_weight(self):
        edges = sort_edges([make_edge("A", "B", 0.9), make_edge("A", "C", 0.6)])
        got = center_cluster(["A", "B", "C"], edges)
        (cluster,) = got.clusters
        assert cluster.confidences == {"B": 0.9, "C": 0.6}

    def test_unknown_endpoint_rejected(self):
        with pytest.raises(UnknownEndpointError):
            center_cluster(["A", "B"], [make_edge("A", "X", 0.5)])

    def test_empty_profiles_rejected(self):
        with pytest.raises(ValueError):
            center_cluster([], [])


class TestMergeCenterHandTraces:
    def test_merge_through_center_edge(self):
        edges = sort_edges(
            [make_edge("A", "B", 0.9), make_edge("C", "D", 0.8), make_edge("A", "C", 0.7)]
        )
        profiles = ["A", "B", "C", "D"]
        assert center_cluster(profiles, edges).as_dict() == {
            "A": ["A", "B"],
            "C": ["C", "D"],
        }
        merged = merge_center_cluster(profiles, edges)
        assert merged.as_dict() == {"A": ["A", "B", "C", "D"]}

    def test_absorbed_center_confidence_is_merge_weight(self):
        edges = sort_edges(
            [make_edge("A", "B", 0.9), make_edge("C", "D", 0.8), make_edge("A", "C", 0.7)]
        )
        merged = merge_center_cluster(["A", "B", "C", "D"], edges)
        (cluster,) = merged.clusters
        assert cluster.confidences["C"] == 0.7
        assert cluster.confidences["B"] == 0.9
        assert cluster.confidences["D"] == 0.8

    def test_no_edges_identical_to_center(self):
        profiles = ["A", "B", "C"]
        assert (
            merge_center_cluster(profiles, []).as_dict()
            == center_cluster(profiles, []).as_dict()
        )

    def test_absorbed_center_keeps_attracting(self):
        # after (A,C) merges C's cluster away, C still pulls E in; dropping
        # C's mark would strand E and break the coarsening guarantee
        edges = sort_edges(
            [
                make_edge("A", "B", 0.9),
                make_edge("C", "D", 0.8),
                make_edge("A", "C", 0.7),
                make_edge("C", "E", 0.6),
            ]
        )
        profiles = ["A", "B", "C", "D", "E"]
        assert center_cluster(profiles, edges).as_dict() == {
            "A": ["A", "B"],
            "C": ["C", "D", "E"],
        }
        merged = merge_center_cluster(profiles, edges)
        assert merged.as_dict() == {"A": ["A", "B", "C", "D", "E"]}
        (cluster,) = merged.clusters
        assert cluster.confidences == {"B": 0.9, "C": 0.7, "D": 0.8, "E": 0.6}

    def test_member_member_edge_does_not_merge(self):
        # cross edge joins two non-centers, so nothing coarsens
        edges = sort_edges(
            [make_edge("A", "B", 0.9), make_edge("C", "D", 0.8), make_edge("B", "D", 0.5)]
        )
        profiles = ["A", "B", "C", "D"]
        expected = {"A": ["A", "B"], "C": ["C", "D"]}
        assert center_cluster(profiles, edges).as_dict() == expected
        assert merge_center_cluster(profiles, edges).as_dict() == expected


class TestReferenceEquivalence:
    @pytest.mark.parametrize("merge", [False, True])
    def test_random_graphs_up_to_six_nodes(self, merge):
        rng = np.random.default_rng(42 if merge else 24)
        algo = merge_center_cluster if merge else center_cluster
        for _ in range(400):
            nodes, edges = random_graph(rng, int(rng.integers(2, 7)))
            ordered = sort_edges(edges)
            got = algo(nodes, ordered)
            want_groups, want_conf = reference_scan(nodes, ordered, merge)
            assert got.as_dict() == want_groups
            got_conf = {
                m: w for c in got.clusters for m, w in c.confidences.items()
            }
            assert got_conf == want_conf

    def test_merge_center_coarsens_center(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            nodes, edges = random_graph(rng, int(rng.integers(2, 7)))
            ordered = sort_edges(edges)
            fine = center_cluster(nodes, ordered).member_map()
            coarse = merge_center_cluster(nodes, ordered).member_map()
            # every CENTER cluster lands inside exactly one MERGE-CENTER cluster
            by_fine: dict[str, set[str]] = {}
            for node, c in fine.items():
                by_fine.setdefault(c, set()).add(coarse[node])
            assert all(len(targets) == 1 for targets in by_fine.values())

    def test_clusters_partition_nodes(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            nodes, edges = random_graph(rng, 6)
            got = merge_center_cluster(nodes, sort_edges(edges))
            seen = [m for c in got.clusters for m in c.members]
            assert sorted(seen) == sorted(nodes)


class TestClusteringViews:
    def test_rows_sorted_and_flagged(self):
        edges = sort_edges([make_edge("b", "c", 0.9)])
        got = center_cluster(["a", "b", "c"], edges)
        rows = got.rows()
        assert rows == [
            ("a", "a", True, None),
            ("b", "b", True, None),
            ("c", "b", False, 0.9),
        ]

    def test_member_map(self):
        edges = sort_edges([make_edge("a", "b", 0.9)])
        got = center_cluster(["a", "b", "c"], edges)
        assert got.member_map() == {"a": "a", "b": "a", "c": "c"}


class TestClusterStats:
    def test_all_singletons(self):
        got = center_cluster(["a", "b", "c"], [])
        stats = cluster_stats(got)
        assert stats["cluster_count"] == 3
        assert stats["size_histogram"]["1"] == {"count": 3, "percent": 100.0}
        assert stats["confidence"]["mean"] is None

    def test_mixed_sizes(self):
        clustering = Clustering(
            [
                Cluster("a", ["a", "b", "c"], {"b": 0.9, "c": 0.8}),
                Cluster("d", ["d", "e"], {"e": 0.7}),
                Cluster("f", ["f"]),
            ]
        )
        stats = cluster_stats(clustering)
        hist = stats["size_histogram"]
        assert {b: hist[b]["count"] for b in hist} == {
            "1": 1, "2": 1, "3": 1, "4": 0, "5": 0, ">5": 0,
        }
        assert stats["profile_count"] == 6
        assert stats["confidence"]["mean"] == pytest.approx(0.8)
        assert stats["confidence"]["median"] == pytest.approx(0.8)
        assert stats["confidence"]["min"] == pytest.approx(0.7)

    def test_reference_size_distribution_shape(self):
        sizes = [1] * 60 + [2] * 96 + [3] * 53 + [4] * 34 + [5] * 29 + [7] * 54
        clusters = []
        pid = 0
        for i, s in enumerate(sizes):
            members = [f"p{pid + j:05d}" for j in range(s)]
            pid += s
            clusters.append(Cluster(members[0], members, {m: 0.9 for m in members[1:]}))
        stats = cluster_stats(Clustering(clusters))
        hist = stats["size_histogram"]
        assert hist["1"]["count"] == 60
        assert hist["1"]["percent"] == pytest.approx(100 * 60 / 326)
        assert hist["2"]["count"] == 96
        assert hist[">5"]["count"] == 54
        assert stats["cluster_count"] == 326

"""Adjudication service and HTTP layer.

Candidate ranking is checked against a brute-force edit-distance oracle
written here from the textbook DP recurrence, independent of
hhlink.similarity.  Lease behavior runs on an injected fake clock so no
test sleeps.
"""

import json
import logging

import pytest
from conftest import TEST_KEY
from fastapi.testclient import TestClient

from hhlink import adjudication, data_io, pairgen
from hhlink.adjudication import (
    AdjudicationService,
    BusyError,
    InvalidIdsError,
    StoredDecision,
    UnknownTaskError,
    concat_string,
    create_app,
)
from hhlink.encoder import FIELD_NAMES, EncoderConfig, PlainProfile, encode_profile, field_strings
from hhlink.synth import generate_roster


def dp_edit(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[len(b)]


class FakeClock:
    def __init__(self):
        self.t = 0.0

    def __call__(self):
        return self.t


def profile(pid, first, last, day=7, month=3, year=1987):
    return PlainProfile(pid, first, last, day, month, year)


# Twelve people; q01/q02 are the same person re-registered with a typo, the
# rest are unrelated.  Anything anchored at q01 sees ten candidates.
CORPUS = [
    profile("q01", "Geoffrey", "Walsh"),
    profile("q02", "Jeoffrey", "Walsh"),
    profile("q03", "Marisol", "Castillo", 21, 11, 1962),
    profile("q04", "Henrik", "Dahl", 2, 6, 1975),
    profile("q05", "Priya", "Raman", 14, 9, 1991),
    profile("q06", "Tobias", "Fung", 30, 1, 1983),
    profile("q07", "Alondra", "Reyes", 5, 5, 2001),
    profile("q08", "Cedric", "Osei", 17, 12, 1969),
    profile("q09", "Noor", "Haddad", 9, 4, 1996),
    profile("q10", "Wendell", "Price", 25, 8, 1958),
    profile("q11", "Sachiko", "Mori", 11, 2, 1979),
    profile("q12", "Bartholomew", "Quist", 28, 10, 1944),
]


def make_service(tmp_path, profiles=None, **kwargs):
    kwargs.setdefault("clock", FakeClock())
    return AdjudicationService(
        profiles if profiles is not None else CORPUS,
        tmp_path / "decisions.ndjson",
        **kwargs,
    )


def adjudicate_all(svc, session="solo"):
    """Drain the queue, accepting only distance-0 candidates."""
    while (task := svc.next_task(session)) is not None:
        accepted = [
            c["profile"]["profile_id"] for c in task["candidates"] if c["distance"] == 0
        ]
        rejected = [
            c["profile"]["profile_id"] for c in task["candidates"] if c["distance"] > 0
        ]
        svc.submit_decision(task["anchor"]["profile_id"], accepted, rejected)


class TestConstruction:
    def test_concat_string_normalizes_and_pads(self):
        p = profile("x", "Geoff", "O'Neil", 7, 3, 1987)
        assert concat_string(p) == "geoffoneil07031987"

    def test_needs_two_profiles(self, tmp_path):
        with pytest.raises(ValueError, match="two"):
            make_service(tmp_path, profiles=CORPUS[:1])

    def test_rejects_duplicate_ids(self, tmp_path):
        with pytest.raises(ValueError, match="duplicate"):
            make_service(tmp_path, profiles=[CORPUS[0], CORPUS[0]])


class TestCandidates:
    def test_two_profile_corpus_has_one_candidate(self, tmp_path):
        svc = make_service(tmp_path, profiles=CORPUS[:2])
        cands = svc.candidates_for("q01")
        assert len(cands) == 1
        assert cands[0]["profile"]["profile_id"] == "q02"

    def test_at_most_ten_candidates_excluding_anchor(self, tmp_path):
        svc = make_service(tmp_path)
        cands = svc.candidates_for("q03")
        ids = [c["profile"]["profile_id"] for c in cands]
        assert len(ids) == 10
        assert "q03" not in ids

    def test_exact_duplicate_ranks_first_with_distance_zero(self, tmp_path):
        twin = profile("q99", "geoffrey", "walsh")  # normalizes identically
        svc = make_service(tmp_path, profiles=CORPUS + [twin])
        cands = svc.candidates_for("q01")
        assert cands[0]["profile"]["profile_id"] == "q99"
        assert cands[0]["distance"] == 0

    def test_field_distances_cover_all_fields(self, tmp_path):
        svc = make_service(tmp_path)
        entry = svc.candidates_for("q01")[0]
        assert set(entry["field_distances"]) == set(FIELD_NAMES)
        anchor_strs = field_strings(CORPUS[0])
        other = next(p for p in CORPUS if p.profile_id == entry["profile"]["profile_id"])
        for name, a, b in zip(FIELD_NAMES, anchor_strs, field_strings(other)):
            assert entry["field_distances"][name] == dp_edit(a, b)

    def test_order_matches_brute_force_on_large_roster(self, tmp_path):
        roster = generate_roster(1000, seed=42)
        svc = make_service(tmp_path, profiles=roster)
        concat = {p.profile_id: concat_string(p) for p in roster}
        for anchor in (roster[0], roster[499], roster[-1]):
            expected = sorted(
                (dp_edit(concat[anchor.profile_id], concat[p.profile_id]), p.profile_id)
                for p in roster
                if p.profile_id != anchor.profile_id
            )[:10]
            got = [
                (c["distance"], c["profile"]["profile_id"])
                for c in svc.candidates_for(anchor.profile_id)
            ]
            assert got == expected


class TestTaskServing:
    def test_task_payload_shape(self, tmp_path):
        svc = make_service(tmp_path)
        task = svc.next_task("alice")
        assert set(task) == {"anchor", "candidates", "session", "remaining"}
        assert task["session"] == "alice"
        assert task["remaining"] == len(CORPUS)
        assert task["anchor"]["profile_id"] in {p.profile_id for p in CORPUS}
        assert len(task["candidates"]) == 10

    def test_same_session_reserves_same_anchor(self, tmp_path):
        svc = make_service(tmp_path)
        first = svc.next_task("alice")["anchor"]["profile_id"]
        second = svc.next_task("alice")["anchor"]["profile_id"]
        assert first == second

    def test_sessions_never_share_a_leased_anchor(self, tmp_path):
        svc = make_service(tmp_path)
        a = svc.next_task("alice")["anchor"]["profile_id"]
        b = svc.next_task("bob")["anchor"]["profile_id"]
        assert a != b

    def test_queue_order_is_deterministic_per_session(self, tmp_path):
        one = make_service(tmp_path, seed=7).next_task("alice")
        two = make_service(tmp_path, seed=7).next_task("alice")
        assert one["anchor"] == two["anchor"]

    def test_busy_when_other_sessions_hold_everything(self, tmp_path):
        svc = make_service(tmp_path, profiles=CORPUS[:2])
        svc.next_task("alice")
        svc.next_task("bob")
        with pytest.raises(BusyError):
            svc.next_task("carol")

    def test_expired_lease_is_reclaimed(self, tmp_path):
        clock = FakeClock()
        svc = make_service(tmp_path, profiles=CORPUS[:2], clock=clock, lease_seconds=100)
        svc.next_task("alice")
        svc.next_task("bob")
        clock.t = 101.0
        task = svc.next_task("carol")
        assert task is not None

    def test_lease_held_until_expiry(self, tmp_path):
        clock = FakeClock()
        svc = make_service(tmp_path, profiles=CORPUS[:2], clock=clock, lease_seconds=100)
        svc.next_task("alice")
        svc.next_task("bob")
        clock.t = 99.0
        with pytest.raises(BusyError):
            svc.next_task("carol")

    def test_decision_releases_lease(self, tmp_path):
        svc = make_service(tmp_path, profiles=CORPUS[:2])
        task = svc.next_task("alice")
        anchor = task["anchor"]["profile_id"]
        svc.submit_decision(anchor, [], [c["profile"]["profile_id"] for c in task["candidates"]])
        assert anchor not in svc.leases

    def test_none_when_exhausted(self, tmp_path):
        svc = make_service(tmp_path, profiles=CORPUS[:3])
        adjudicate_all(svc)
        assert svc.next_task("straggler") is None

    def test_remaining_counts_down(self, tmp_path):
        svc = make_service(tmp_path, profiles=CORPUS[:4])
        task = svc.next_task("alice")
        assert task["remaining"] == 4
        svc.submit_decision(
            task["anchor"]["profile_id"],
            [],
            [c["profile"]["profile_id"] for c in task["candidates"]],
        )
        assert svc.next_task("alice")["remaining"] == 3


class TestDecisions:
    def serve(self, svc, session="alice"):
        task = svc.next_task(session)
        anchor = task["anchor"]["profile_id"]
        ids = [c["profile"]["profile_id"] for c in task["candidates"]]
        return anchor, ids

    def test_accept_two_builds_three_profile_cluster(self, tmp_path):
        svc = make_service(tmp_path)
        anchor, ids = self.serve(svc)
        assert svc.submit_decision(anchor, ids[:2], ids[2:]) == {"status": "ok"}
        truth = svc.truth_clusters()
        members = sorted([anchor, *ids[:2]])
        assert truth == {members[0]: members}

    def test_reject_all_builds_singleton(self, tmp_path):
        svc = make_service(tmp_path)
        anchor, ids = self.serve(svc)
        svc.submit_decision(anchor, [], ids)
        assert svc.truth_clusters() == {anchor: [anchor]}

    def test_duplicate_submission_is_idempotent(self, tmp_path):
        svc = make_service(tmp_path)
        anchor, ids = self.serve(svc)
        svc.submit_decision(anchor, ids[:1], ids[1:])
        again = svc.submit_decision(anchor, ids[:1], ids[1:])
        assert again == {"status": "ok", "duplicate": True}
        lines = (tmp_path / "decisions.ndjson").read_text().splitlines()
        assert len(lines) == 1  # replay stays a single stored record

    def test_duplicate_detection_ignores_id_order(self, tmp_path):
        svc = make_service(tmp_path)
        anchor, ids = self.serve(svc)
        svc.submit_decision(anchor, ids[:2], ids[2:])
        again = svc.submit_decision(anchor, ids[1::-1], list(reversed(ids[2:])))
        assert again["duplicate"] is True

    def test_conflicting_resubmission_rejected(self, tmp_path):
        svc = make_service(tmp_path)
        anchor, ids = self.serve(svc)
        svc.submit_decision(anchor, ids[:1], ids[1:])
        with pytest.raises(InvalidIdsError, match="differently"):
            svc.submit_decision(anchor, ids[:2], ids[2:])

    def test_unknown_anchor(self, tmp_path):
        svc = make_service(tmp_path)
        with pytest.raises(UnknownTaskError, match="unknown"):
            svc.submit_decision("nobody", [], [])

    def test_known_but_unserved_anchor(self, tmp_path):
        svc = make_service(tmp_path)
        with pytest.raises(UnknownTaskError, match="no served task"):
            svc.submit_decision("q05", [], [])

    def test_accept_reject_overlap_rejected(self, tmp_path):
        svc = make_service(tmp_path)
        anchor, ids = self.serve(svc)
        with pytest.raises(InvalidIdsError, match="both"):
            svc.submit_decision(anchor, ids[:2], ids[1:])

    def test_ids_outside_served_candidates_rejected(self, tmp_path):
        svc = make_service(tmp_path)
        anchor, ids = self.serve(svc)
        with pytest.raises(InvalidIdsError, match="outside"):
            svc.submit_decision(anchor, [anchor], ids)


class TestPersistence:
    def test_restart_replays_decisions(self, tmp_path):
        svc = make_service(tmp_path)
        adjudicate_all(svc)
        reborn = make_service(tmp_path)
        assert reborn.decisions == svc.decisions
        assert reborn.truth_clusters() == svc.truth_clusters()
        assert reborn.next_task("anyone") is None

    def test_malformed_log_lines_skipped_with_warning(self, tmp_path, caplog):
        svc = make_service(tmp_path)
        anchor, ids = TestDecisions().serve(svc)
        svc.submit_decision(anchor, [], ids)
        with open(tmp_path / "decisions.ndjson", "a", encoding="utf-8") as fh:
            fh.write("{curly nonsense\n")
            fh.write(json.dumps({"accepted": [], "rejected": []}) + "\n")  # no anchor_id
            fh.write("\n")  # blank lines are tolerated silently
        with caplog.at_level(logging.WARNING, logger="hhlink.adjudication"):
            reborn = make_service(tmp_path)
        assert list(reborn.decisions) == [anchor]
        skipped = [r for r in caplog.records if "malformed" in r.message]
        assert len(skipped) == 2

    def test_log_records_are_sorted_key_json(self, tmp_path):
        svc = make_service(tmp_path)
        anchor, ids = TestDecisions().serve(svc)
        svc.submit_decision(anchor, ids[:1], ids[1:], reviewer="rk")
        (line,) = (tmp_path / "decisions.ndjson").read_text().splitlines()
        obj = json.loads(line)
        assert list(obj) == sorted(obj)
        assert obj["anchor_id"] == anchor
        assert obj["accepted"] == ids[:1]
        assert obj["reviewer"] == "rk"

    def test_snapshot_written_on_interval(self, tmp_path, monkeypatch):
        monkeypatch.setattr(adjudication, "SNAPSHOT_EVERY", 2)
        svc = make_service(tmp_path, profiles=CORPUS[:4])
        adjudicate_all(svc)
        snap = json.loads((tmp_path / "decisions.ndjson.snapshot.json").read_text())
        assert snap["decision_count"] == 4
        assert snap["adjudicated"] == sorted(svc.decisions)


class TestTruthExport:
    def test_overlapping_decisions_merge_transitively(self, tmp_path, caplog):
        svc = make_service(tmp_path)
        svc.decisions["q04"] = StoredDecision("q04", ("q06",), (), "", "")
        svc.decisions["q08"] = StoredDecision("q08", ("q06", "q10"), (), "", "")
        with caplog.at_level(logging.WARNING, logger="hhlink.adjudication"):
            truth = svc.truth_clusters()
        assert truth == {"q04": ["q04", "q06", "q08", "q10"]}
        assert any("overlap" in r.message for r in caplog.records)

    def test_cluster_id_is_smallest_member(self, tmp_path):
        svc = make_service(tmp_path)
        svc.decisions["q09"] = StoredDecision("q09", ("q02", "q12"), (), "", "")
        assert list(svc.truth_clusters()) == ["q02"]

    def test_reject_everything_everywhere_yields_all_singletons(self, tmp_path):
        svc = make_service(tmp_path, profiles=CORPUS[:5])
        while (task := svc.next_task("s")) is not None:
            ids = [c["profile"]["profile_id"] for c in task["candidates"]]
            svc.submit_decision(task["anchor"]["profile_id"], [], ids)
        expected = {p.profile_id: [p.profile_id] for p in CORPUS[:5]}
        assert svc.truth_clusters() == expected

    def test_full_adjudication_partitions_the_corpus(self, tmp_path):
        svc = make_service(tmp_path)
        adjudicate_all(svc)
        truth = svc.truth_clusters()
        members = [pid for group in truth.values() for pid in group]
        assert sorted(members) == sorted(p.profile_id for p in CORPUS)
        assert len(members) == len(set(members))

    def test_export_csv_shape(self, tmp_path):
        svc = make_service(tmp_path)
        svc.decisions["q03"] = StoredDecision("q03", ("q07",), (), "", "")
        lines = svc.export_csv().splitlines()
        assert lines == ["cluster_id,profile_id", "q03,q03", "q03,q07"]

    def test_export_reads_back_and_labels_pairs(self, tmp_path):
        twin = profile("q99", "geoffrey", "walsh")
        svc = make_service(tmp_path, profiles=CORPUS + [twin])
        adjudicate_all(svc)
        out = tmp_path / "truth.csv"
        out.write_text(svc.export_csv(), encoding="utf-8")
        truth = data_io.read_truth(out)
        assert truth == svc.truth_clusters()
        cfg = EncoderConfig(key=TEST_KEY, m=64)
        encoded = [encode_profile(p, cfg) for p in CORPUS + [twin]]
        table = pairgen.label_pairs(encoded, truth)
        positives = {
            tuple(sorted((a, b)))
            for a, b, lab in zip(table.id_a, table.id_b, table.labels)
            if lab
        }
        assert positives == {("q01", "q99")}

    def test_stats_progression(self, tmp_path):
        svc = make_service(tmp_path)
        assert svc.stats() == {
            "profiles": 12,
            "adjudicated": 0,
            "remaining": 12,
            "clusters": 0,
            "accept_rate": None,
        }
        anchor, ids = TestDecisions().serve(svc)
        svc.submit_decision(anchor, ids[:3], ids[3:])
        s = svc.stats()
        assert s["adjudicated"] == 1
        assert s["remaining"] == 11
        assert s["clusters"] == 1
        assert s["accept_rate"] == pytest.approx(0.3)


@pytest.fixture()
def client(tmp_path):
    svc = make_service(tmp_path)
    return TestClient(create_app(svc)), svc


class TestHttpApi:
    def test_next_task_and_decision_flow(self, client):
        tc, _ = client
        task = tc.get("/api/next-task", params={"session": "alice"}).json()
        assert task["session"] == "alice"
        anchor = task["anchor"]["profile_id"]
        ids = [c["profile"]["profile_id"] for c in task["candidates"]]
        resp = tc.post(
            "/api/decision",
            json={"anchor_id": anchor, "accepted": ids[:1], "rejected": ids[1:]},
        )
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok"}
        again = tc.post(
            "/api/decision",
            json={"anchor_id": anchor, "accepted": ids[:1], "rejected": ids[1:]},
        )
        assert again.json() == {"status": "ok", "duplicate": True}

    def test_busy_conflict(self, tmp_path):
        svc = make_service(tmp_path, profiles=CORPUS[:2])
        tc = TestClient(create_app(svc))
        tc.get("/api/next-task", params={"session": "alice"})
        tc.get("/api/next-task", params={"session": "bob"})
        resp = tc.get("/api/next-task", params={"session": "carol"})
        assert resp.status_code == 409
        assert resp.json()["error"] == "busy"

    def test_exhausted_conflict(self, tmp_path):
        svc = make_service(tmp_path, profiles=CORPUS[:3])
        adjudicate_all(svc)
        tc = TestClient(create_app(svc))
        resp = tc.get("/api/next-task")
        assert resp.status_code == 409
        assert resp.json() == {"error": "exhausted"}

    def test_unknown_task_is_404(self, client):
        tc, _ = client
        resp = tc.post(
            "/api/decision", json={"anchor_id": "nobody", "accepted": [], "rejected": []}
        )
        assert resp.status_code == 404
        assert resp.json()["error"] == "unknown_task"

    def test_invalid_ids_is_400(self, client):
        tc, _ = client
        task = tc.get("/api/next-task").json()
        anchor = task["anchor"]["profile_id"]
        resp = tc.post(
            "/api/decision",
            json={"anchor_id": anchor, "accepted": ["nope"], "rejected": []},
        )
        assert resp.status_code == 400
        assert resp.json()["error"] == "invalid_ids"

    def test_bad_json_is_400(self, client):
        tc, _ = client
        resp = tc.post(
            "/api/decision",
            content=b"{definitely not json",
            headers={"content-type": "application/json"},
        )
        assert resp.status_code == 400
        assert resp.json()["error"] == "bad_json"

    def test_export_is_csv(self, tmp_path):
        svc = make_service(tmp_path, profiles=CORPUS[:3])
        adjudicate_all(svc)
        tc = TestClient(create_app(svc))
        resp = tc.get("/api/export")
        assert resp.headers["content-type"].startswith("text/csv")
        assert resp.text == svc.export_csv()
        assert resp.text.startswith("cluster_id,profile_id\n")

    def test_stats_endpoint(self, client):
        tc, svc = client
        assert tc.get("/api/stats").json() == svc.stats()

    def test_plaintext_index_without_ui(self, client):
        tc, _ = client
        resp = tc.get("/")
        assert resp.status_code == 200
        assert "/api/next-task" in resp.text

    def test_static_ui_mount(self, tmp_path):
        ui = tmp_path / "ui"
        ui.mkdir()
        ui.joinpath("index.html").write_text("<!doctype html><title>adjudicate</title>")
        svc = make_service(tmp_path)
        tc = TestClient(create_app(svc, ui_dir=ui))
        assert "adjudicate" in tc.get("/").text
        assert tc.get("/api/stats").status_code == 200

#!/usr/bin/env python3
"""Regenerate the scripted adjudication session used by the UI tests.

Builds a ~1,000-profile demo corpus with seeded duplicates, drives the
reference adjudication service through a fixed number of review steps with
a truth-informed policy (accept exactly the candidates that share the
anchor's true cluster), and records every served task, the decision posted
for it, the final truth export, and the service stats.

The result is written to test/fixtures/session.json. The committed file is
pinned by a test on the Python side, so rerun this script whenever service
behavior changes and commit the diff.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from hhlink.adjudication import AdjudicationService
from hhlink.synth import (
    default_pattern_distribution,
    default_size_distribution,
    generate_corpus,
    generate_roster,
)

N_ORIGINALS = 310
CORPUS_SEED = 99
SERVICE_SEED = 7
SESSION = "ui-fixture"
STEPS = 12

FIXTURE_PATH = Path(__file__).resolve().parent.parent / "test" / "fixtures" / "session.json"


def build_corpus():
    roster = generate_roster(N_ORIGINALS, seed=CORPUS_SEED)
    return generate_corpus(
        roster, default_size_distribution(), default_pattern_distribution(), seed=CORPUS_SEED
    )


def build_fixture() -> dict:
    profiles, truth, _stats = build_corpus()
    if len(profiles) < 1000:
        raise RuntimeError(f"demo corpus too small: {len(profiles)} profiles")
    cluster_of = {pid: cid for cid, members in truth.items() for pid in members}

    with tempfile.TemporaryDirectory() as tmp:
        service = AdjudicationService(
            profiles, Path(tmp) / "decisions.ndjson", seed=SERVICE_SEED
        )
        steps = []
        for i in range(STEPS):
            task = service.next_task(SESSION)
            if task is None:
                raise RuntimeError("queue exhausted before the scripted steps finished")
            anchor_id = task["anchor"]["profile_id"]
            candidate_ids = [c["profile"]["profile_id"] for c in task["candidates"]]
            accepted = [p for p in candidate_ids if cluster_of[p] == cluster_of[anchor_id]]
            rejected = [p for p in candidate_ids if cluster_of[p] != cluster_of[anchor_id]]
            service.submit_decision(
                anchor_id=anchor_id,
                accepted=accepted,
                rejected=rejected,
                reviewer=SESSION,
                timestamp=float(i),
            )
            steps.append(
                {
                    "task": task,
                    "decision": {
                        "anchor_id": anchor_id,
                        "accepted": accepted,
                        "rejected": rejected,
                    },
                    "reject_all": not accepted,
                    "truth_cluster_size": len(truth[cluster_of[anchor_id]]),
                }
            )

        reject_all = [s for s in steps if s["reject_all"]]
        accepts = [s for s in steps if not s["reject_all"]]
        if not reject_all or not accepts:
            raise RuntimeError(
                "scripted session must exercise both accept and reject-all decisions; "
                "bump CORPUS_SEED or SERVICE_SEED"
            )
        for step in reject_all:
            # The singleton assertion downstream relies on nobody else being
            # able to pull these anchors into a group.
            if step["truth_cluster_size"] != 1:
                raise RuntimeError(
                    f"reject-all anchor {step['decision']['anchor_id']} is not a "
                    "truth singleton; bump CORPUS_SEED or SERVICE_SEED"
                )

        return {
            "corpus": {"originals": N_ORIGINALS, "seed": CORPUS_SEED},
            "service_seed": SERVICE_SEED,
            "session": SESSION,
            "profiles": len(profiles),
            "steps": steps,
            "export_csv": service.export_csv(),
            "stats": service.stats(),
        }


def main() -> None:
    fixture = build_fixture()
    FIXTURE_PATH.parent.mkdir(parents=True, exist_ok=True)
    FIXTURE_PATH.write_text(json.dumps(fixture, indent=2, sort_keys=True) + "\n")
    n_reject = sum(1 for s in fixture["steps"] if s["reject_all"])
    print(
        f"wrote {FIXTURE_PATH} ({fixture['profiles']} profiles, "
        f"{len(fixture['steps'])} steps, {n_reject} reject-all)"
    )


if __name__ == "__main__":
    main()

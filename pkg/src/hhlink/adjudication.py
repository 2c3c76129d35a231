"""Manual ground-truth adjudication service.

Serves a randomly drawn anchor profile with its ten nearest candidates by
Levenshtein distance over the concatenated identifying string (first name +
last name + zero-padded date of birth), records human accept/reject
decisions in an append-only newline-delimited log, and exports the
resulting ground-truth clusters as truth.csv content.

This is the one place plaintext identifiers are handled; it is meant to run
inside the data owner's network boundary.  Every other pipeline stage
consumes encoded or anonymized artifacts.

Anchors are drawn without replacement per reviewer session, with checkout
leases so two reviewers never work the same anchor at once.
"""

# No deferred annotations here: the FastAPI handler's `request: Request`
# annotation must be a real class at definition time, because Request is
# imported inside create_app and a string annotation cannot be resolved
# against this module's globals.

import datetime
import hashlib
import io
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoder import FIELD_NAMES, PlainProfile, field_strings
from .similarity import edit_distance

log = logging.getLogger(__name__)

DEFAULT_LEASE_SECONDS = 900
CANDIDATES_PER_TASK = 10
SNAPSHOT_EVERY = 25


def concat_string(profile: PlainProfile) -> str:
    """Single comparison string: normalized names plus zero-padded date."""
    return "".join(field_strings(profile))


@dataclass
class StoredDecision:
    anchor_id: str
    accepted: tuple[str, ...]
    rejected: tuple[str, ...]
    reviewer: str
    timestamp: str

    def key(self) -> tuple:
        return (self.anchor_id, tuple(sorted(self.accepted)), tuple(sorted(self.rejected)))


class AdjudicationService:
    """Corpus, decision log and lease bookkeeping behind the HTTP layer."""

    def __init__(
        self,
        profiles,
        log_path,
        seed: int = 0,
        lease_seconds: float = DEFAULT_LEASE_SECONDS,
        clock=time.monotonic,
    ) -> None:
        self.profiles = sorted(profiles, key=lambda p: p.profile_id)
        if len(self.profiles) < 2:
            raise ValueError("adjudication needs at least two profiles")
        self.by_id = {p.profile_id: p for p in self.profiles}
        if len(self.by_id) != len(self.profiles):
            raise ValueError("duplicate profile ids in corpus")
        self.concat = {p.profile_id: concat_string(p) for p in self.profiles}
        self.log_path = Path(log_path)
        self.seed = seed
        self.lease_seconds = lease_seconds
        self.clock = clock
        self.decisions: dict[str, StoredDecision] = {}
        self.leases: dict[str, tuple[str, float]] = {}  # anchor -> (session, expiry)
        self.served: dict[str, tuple[str, ...]] = {}  # anchor -> candidate ids
        self._session_queues: dict[str, list[str]] = {}
        self._replay_log()

    # -- persistence --------------------------------------------------------

    def _replay_log(self) -> None:
        if not self.log_path.exists():
            return
        with open(self.log_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    d = StoredDecision(
                        obj["anchor_id"],
                        tuple(obj["accepted"]),
                        tuple(obj["rejected"]),
                        obj.get("reviewer", ""),
                        obj.get("timestamp", ""),
                    )
                except (json.JSONDecodeError, KeyError, TypeError):
                    log.warning("skipping malformed decision log line %d", lineno)
                    continue
                self.decisions[d.anchor_id] = d
        log.info("replayed %d decisions from %s", len(self.decisions), self.log_path)

    def _append_log(self, d: StoredDecision) -> None:
        record = {
            "anchor_id": d.anchor_id,
            "accepted": list(d.accepted),
            "rejected": list(d.rejected),
            "reviewer": d.reviewer,
            "timestamp": d.timestamp,
        }
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True))
            fh.write("\n")
        if len(self.decisions) % SNAPSHOT_EVERY == 0:
            snap = self.log_path.with_suffix(self.log_path.suffix + ".snapshot.json")
            with open(snap, "w", encoding="utf-8") as fh:
                json.dump(
                    {
                        "decision_count": len(self.decisions),
                        "adjudicated": sorted(self.decisions),
                    },
                    fh,
                    indent=2,
                    sort_keys=True,
                )
                fh.write("\n")

    # -- task serving -------------------------------------------------------

    def _queue_for(self, session: str) -> list[str]:
        if session not in self._session_queues:
            digest = hashlib.sha256(session.encode("utf-8")).digest()
            rng = np.random.default_rng(
                np.random.SeedSequence([self.seed, int.from_bytes(digest[:8], "big")])
            )
            ids = [p.profile_id for p in self.profiles]
            self._session_queues[session] = [ids[i] for i in rng.permutation(len(ids))]
        return self._session_queues[session]

    def _lease_holder(self, anchor_id: str) -> str | None:
        lease = self.leases.get(anchor_id)
        if lease is None:
            return None
        session, expiry = lease
        if self.clock() >= expiry:
            del self.leases[anchor_id]
            return None
        return session

    def candidates_for(self, anchor_id: str) -> list[dict]:
        """The top candidates by concatenated edit distance, stably ordered."""
        anchor_concat = self.concat[anchor_id]
        scored = []
        for p in self.profiles:
            if p.profile_id == anchor_id:
                continue
            scored.append((edit_distance(anchor_concat, self.concat[p.profile_id]), p.profile_id))
        scored.sort()
        top = scored[:CANDIDATES_PER_TASK]
        anchor_strs = field_strings(self.by_id[anchor_id])
        out = []
        for dist, pid in top:
            cand_strs = field_strings(self.by_id[pid])
            out.append(
                {
                    "profile": _profile_json(self.by_id[pid]),
                    "distance": dist,
                    "field_distances": {
                        name: edit_distance(a, b)
                        for name, a, b in zip(FIELD_NAMES, anchor_strs, cand_strs)
                    },
                }
            )
        return out

    def next_task(self, session: str) -> dict | None:
        """The next unadjudicated, unleased anchor for this session.

        Returns None when every profile is adjudicated; raises BusyError when
        anchors remain but other sessions hold all of them.
        """
        queue = self._queue_for(session)
        busy = False
        for anchor_id in queue:
            if anchor_id in self.decisions:
                continue
            holder = self._lease_holder(anchor_id)
            if holder is not None and holder != session:
                busy = True
                continue
            self.leases[anchor_id] = (session, self.clock() + self.lease_seconds)
            candidates = self.candidates_for(anchor_id)
            self.served[anchor_id] = tuple(c["profile"]["profile_id"] for c in candidates)
            return {
                "anchor": _profile_json(self.by_id[anchor_id]),
                "candidates": candidates,
                "session": session,
                "remaining": len(self.profiles) - len(self.decisions),
            }
        if busy:
            raise BusyError("all remaining anchors are leased to other sessions")
        return None

    # -- decisions ----------------------------------------------------------

    def submit_decision(
        self,
        anchor_id: str,
        accepted,
        rejected,
        reviewer: str = "",
        timestamp: str | None = None,
    ) -> dict:
        accepted = tuple(sorted(set(accepted)))
        rejected = tuple(sorted(set(rejected)))
        if anchor_id not in self.by_id:
            raise UnknownTaskError(f"unknown anchor {anchor_id!r}")
        served = self.served.get(anchor_id)
        existing = self.decisions.get(anchor_id)
        candidate_set = set(served) if served is not None else None
        if existing is not None:
            if existing.key() == (anchor_id, accepted, rejected):
                return {"status": "ok", "duplicate": True}
            raise InvalidIdsError(f"anchor {anchor_id!r} already adjudicated differently")
        if served is None:
            raise UnknownTaskError(f"no served task for anchor {anchor_id!r}")
        overlap = set(accepted) & set(rejected)
        if overlap:
            raise InvalidIdsError(f"ids both accepted and rejected: {sorted(overlap)}")
        stray = (set(accepted) | set(rejected)) - candidate_set
        if stray:
            raise InvalidIdsError(f"ids outside the served candidates: {sorted(stray)}")
        d = StoredDecision(
            anchor_id,
            accepted,
            rejected,
            reviewer,
            timestamp or datetime.datetime.now(datetime.timezone.utc).isoformat(),
        )
        self.decisions[anchor_id] = d
        self.leases.pop(anchor_id, None)
        self._append_log(d)
        return {"status": "ok"}

    # -- export and stats ---------------------------------------------------

    def truth_clusters(self) -> dict[str, list[str]]:
        """Ground-truth clusters from all decisions, transitively merged.

        Each decision proposes {anchor} + accepted; proposals sharing any
        profile merge (with a warning, since the random-anchor workflow is
        not supposed to overlap).  Cluster ids are the smallest member id.
        """
        parent: dict[str, str] = {}

        def find(x: str) -> str:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        cross_merges = 0
        for anchor_id in sorted(self.decisions):
            d = self.decisions[anchor_id]
            group = [d.anchor_id, *d.accepted]
            if any(pid in parent for pid in group):
                cross_merges += 1
            for pid in group:
                parent.setdefault(pid, pid)
            first = group[0]
            for pid in group[1:]:
                ra, rb = find(first), find(pid)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        if cross_merges:
            log.warning(
                "merged %d decision groups that overlapped other groups", cross_merges
            )
        clusters: dict[str, list[str]] = {}
        for pid in parent:
            clusters.setdefault(find(pid), []).append(pid)
        return {root: sorted(members) for root, members in sorted(clusters.items())}

    def export_csv(self) -> str:
        truth = self.truth_clusters()
        buf = io.StringIO()
        buf.write("cluster_id,profile_id\n")
        for cid in sorted(truth):
            for pid in truth[cid]:
                buf.write(f"{cid},{pid}\n")
        return buf.getvalue()

    def stats(self) -> dict:
        accepted = sum(len(d.accepted) for d in self.decisions.values())
        rejected = sum(len(d.rejected) for d in self.decisions.values())
        total_decided = accepted + rejected
        return {
            "profiles": len(self.profiles),
            "adjudicated": len(self.decisions),
            "remaining": len(self.profiles) - len(self.decisions),
            "clusters": len(self.truth_clusters()),
            "accept_rate": accepted / total_decided if total_decided else None,
        }


class UnknownTaskError(Exception):
    pass


class InvalidIdsError(Exception):
    pass


class BusyError(Exception):
    pass


def _profile_json(p: PlainProfile) -> dict:
    return {
        "profile_id": p.profile_id,
        "first_name": p.first_name,
        "last_name": p.last_name,
        "dob_day": p.dob_day,
        "dob_month": p.dob_month,
        "dob_year": p.dob_year,
    }


def create_app(service: AdjudicationService, ui_dir=None):
    """FastAPI application over a service instance."""
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse, PlainTextResponse, Response

    app = FastAPI(title="hhlink adjudication", docs_url=None, redoc_url=None)

    @app.get("/api/next-task")
    def next_task(session: str = "default"):
        try:
            task = service.next_task(session)
        except BusyError as exc:
            return JSONResponse({"error": "busy", "detail": str(exc)}, status_code=409)
        if task is None:
            return JSONResponse({"error": "exhausted"}, status_code=409)
        return task

    @app.post("/api/decision")
    async def decision(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return JSONResponse({"error": "bad_json"}, status_code=400)
        try:
            result = service.submit_decision(
                anchor_id=body.get("anchor_id", ""),
                accepted=body.get("accepted", []),
                rejected=body.get("rejected", []),
                reviewer=body.get("reviewer", ""),
                timestamp=body.get("timestamp"),
            )
        except UnknownTaskError as exc:
            return JSONResponse({"error": "unknown_task", "detail": str(exc)}, status_code=404)
        except InvalidIdsError as exc:
            return JSONResponse({"error": "invalid_ids", "detail": str(exc)}, status_code=400)
        return result

    @app.get("/api/export")
    def export():
        return Response(content=service.export_csv(), media_type="text/csv")

    @app.get("/api/stats")
    def stats():
        return service.stats()

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/")
        def index():
            return PlainTextResponse(
                "hhlink adjudication API: /api/next-task /api/decision /api/export /api/stats"
            )

    return app

"""Canonical readers and writers for every pipeline file format.

All writers emit canonically sorted rows with fixed formatting, so a rerun
with identical inputs produces byte-identical files.  Readers validate
strictly: header mismatches raise SchemaError naming the column, bad values
raise ParseError carrying the line number, repeated ids raise
DuplicateIdError.

Reals in CSV files carry six decimal places; that rounding is part of the
format, so in-memory values round-trip through files at that precision.
Every output directory gets a manifest.json tracing outputs to input
digests, seeds and configuration (no timestamps; reruns must be
byte-identical).
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import json
from pathlib import Path

import numpy as np

from .cluster import Cluster, Clustering, LinkEdge
from .encoder import NUM_FIELDS, EncodedProfile, PlainProfile
from .errors import DuplicateIdError, ParseError, SchemaError
from .hhsc_metrics import StayRecord
from .pairgen import PairTable

MANIFEST_VERSION = 1

PROFILE_HEADER = ["profile_id", "first_name", "last_name", "dob_day", "dob_month", "dob_year"]
PAIR_HEADER = ["id_a", "id_b", "d_first", "d_last", "d_day", "d_month", "d_year", "d_all"]
LINK_HEADER = ["id_a", "id_b", "confidence"]
CLUSTER_HEADER = ["profile_id", "cluster_id", "is_center", "confidence"]
TRUTH_HEADER = ["cluster_id", "profile_id"]
STAY_HEADER = ["profile_id", "shelter_id", "date"]


def _open_read(path):
    return open(path, encoding="utf-8", newline="")


def _open_write(path):
    return open(path, "w", encoding="utf-8", newline="")


def _check_header(path, got, expected) -> None:
    if got is None:
        raise SchemaError(f"{path}: empty file, expected header {','.join(expected)}")
    missing = [c for c in expected if c not in got]
    if missing:
        raise SchemaError(f"{path}: missing column {missing[0]!r}")
    extra = [c for c in got if c not in expected]
    if extra:
        raise SchemaError(f"{path}: unexpected column {extra[0]!r}")
    if list(got) != list(expected):
        raise SchemaError(f"{path}: columns out of order, expected {','.join(expected)}")


def _fmt(x: float) -> str:
    return f"{x:.6f}"


# ---------------------------------------------------------------------------
# profiles.csv


def write_profiles(path, profiles) -> None:
    with _open_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROFILE_HEADER)
        for p in sorted(profiles, key=lambda p: p.profile_id):
            w.writerow([p.profile_id, p.first_name, p.last_name, p.dob_day, p.dob_month, p.dob_year])


def read_profiles(path) -> list[PlainProfile]:
    out: list[PlainProfile] = []
    seen: set[str] = set()
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(path, header, PROFILE_HEADER)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(PROFILE_HEADER):
                raise ParseError(f"{path}:{lineno}: expected {len(PROFILE_HEADER)} fields")
            pid, first, last, day_s, month_s, year_s = row
            if pid in seen:
                raise DuplicateIdError(f"{path}:{lineno}: duplicate profile id {pid!r}")
            seen.add(pid)
            try:
                p = PlainProfile(pid, first, last, int(day_s), int(month_s), int(year_s))
                p.validate()
            except (ValueError, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# encoded.jsonl


def write_encoded(path, encoded) -> None:
    with _open_write(path) as fh:
        for e in sorted(encoded, key=lambda e: e.profile_id):
            obj = {
                "profile_id": e.profile_id,
                "m": e.m,
                "fields": [f.hex() for f in e.fields],
            }
            fh.write(json.dumps(obj, separators=(",", ":"), sort_keys=True))
            fh.write("\n")


def read_encoded(path) -> list[EncodedProfile]:
    out: list[EncodedProfile] = []
    seen: set[str] = set()
    with _open_read(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            for k in ("profile_id", "m", "fields"):
                if k not in obj:
                    raise SchemaError(f"{path}:{lineno}: missing key {k!r}")
            pid = obj["profile_id"]
            if pid in seen:
                raise DuplicateIdError(f"{path}:{lineno}: duplicate profile id {pid!r}")
            seen.add(pid)
            m = obj["m"]
            if not isinstance(m, int) or m % 8 != 0 or m <= 0:
                raise ParseError(f"{path}:{lineno}: bad vector size m={m!r}")
            fields = obj["fields"]
            if not isinstance(fields, list) or len(fields) != NUM_FIELDS:
                raise ParseError(f"{path}:{lineno}: expected {NUM_FIELDS} field vectors")
            raw = []
            for hx in fields:
                try:
                    b = bytes.fromhex(hx)
                except (TypeError, ValueError) as exc:
                    raise ParseError(f"{path}:{lineno}: bad hex field: {exc}") from exc
                if len(b) != m // 8:
                    raise ParseError(
                        f"{path}:{lineno}: field hex length {len(hx)} does not match m={m}"
                    )
                raw.append(b)
            out.append(EncodedProfile(pid, m, tuple(raw)))
    return out


# ---------------------------------------------------------------------------
# pairs.csv


def write_pairs(path, table: PairTable) -> None:
    labeled = table.labels is not None
    with _open_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PAIR_HEADER + (["label"] if labeled else []))
        order = sorted(range(len(table)), key=lambda r: (table.id_a[r], table.id_b[r]))
        for r in order:
            row = [table.id_a[r], table.id_b[r]]
            row += [_fmt(v) for v in table.features[r]]
            if labeled:
                row.append("1" if table.labels[r] else "0")
            w.writerow(row)


def read_pairs(path) -> PairTable:
    id_a: list[str] = []
    id_b: list[str] = []
    feats: list[list[float]] = []
    labels: list[bool] = []
    labeled = False
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header == PAIR_HEADER + ["label"]:
            labeled = True
        else:
            _check_header(path, header, PAIR_HEADER)
        want = len(PAIR_HEADER) + (1 if labeled else 0)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != want:
                raise ParseError(f"{path}:{lineno}: expected {want} fields")
            id_a.append(row[0])
            id_b.append(row[1])
            try:
                feats.append([float(v) for v in row[2:8]])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            if labeled:
                if row[8] not in ("0", "1"):
                    raise ParseError(f"{path}:{lineno}: label must be 0 or 1")
                labels.append(row[8] == "1")
    features = np.asarray(feats, dtype=np.float64).reshape(len(id_a), 6)
    return PairTable(
        id_a, id_b, features, np.asarray(labels, dtype=bool) if labeled else None
    )


# ---------------------------------------------------------------------------
# links.csv


def write_links(path, edges) -> None:
    with _open_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LINK_HEADER)
        for e in sorted(edges, key=lambda e: (e.id_a, e.id_b)):
            w.writerow([e.id_a, e.id_b, _fmt(e.weight)])


def read_links(path) -> list[LinkEdge]:
    out: list[LinkEdge] = []
    seen: set[tuple[str, str]] = set()
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(path, header, LINK_HEADER)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 fields")
            a, b, conf = row
            if (a, b) in seen:
                raise DuplicateIdError(f"{path}:{lineno}: duplicate pair ({a!r}, {b!r})")
            seen.add((a, b))
            try:
                out.append(LinkEdge(a, b, float(conf)))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# clusters.csv


def write_clusters(path, clustering: Clustering) -> None:
    with _open_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CLUSTER_HEADER)
        for pid, cid, is_center, conf in clustering.rows():
            w.writerow([pid, cid, "1" if is_center else "0", "" if conf is None else _fmt(conf)])


def read_clusters(path) -> Clustering:
    groups: dict[str, dict] = {}
    seen: set[str] = set()
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(path, header, CLUSTER_HEADER)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise ParseError(f"{path}:{lineno}: expected 4 fields")
            pid, cid, center_s, conf_s = row
            if pid in seen:
                raise DuplicateIdError(f"{path}:{lineno}: duplicate profile id {pid!r}")
            seen.add(pid)
            if center_s not in ("0", "1"):
                raise ParseError(f"{path}:{lineno}: is_center must be 0 or 1")
            g = groups.setdefault(cid, {"center": None, "members": [], "conf": {}})
            g["members"].append(pid)
            if center_s == "1":
                if g["center"] is not None:
                    raise ParseError(f"{path}:{lineno}: cluster {cid!r} has two centers")
                g["center"] = pid
            if conf_s:
                try:
                    g["conf"][pid] = float(conf_s)
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: {exc}") from exc
    clusters = []
    for cid in sorted(groups):
        g = groups[cid]
        if g["center"] is None:
            raise ParseError(f"{path}: cluster {cid!r} has no center row")
        clusters.append(Cluster(g["center"], sorted(g["members"]), g["conf"]))
    return Clustering(clusters)


# ---------------------------------------------------------------------------
# truth.csv


def write_truth(path, truth: dict) -> None:
    with _open_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRUTH_HEADER)
        for cid in sorted(truth):
            for pid in sorted(truth[cid]):
                w.writerow([cid, pid])


def read_truth(path) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    seen: set[str] = set()
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(path, header, TRUTH_HEADER)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ParseError(f"{path}:{lineno}: expected 2 fields")
            cid, pid = row
            if pid in seen:
                raise DuplicateIdError(
                    f"{path}:{lineno}: profile {pid!r} appears in two clusters"
                )
            seen.add(pid)
            out.setdefault(cid, []).append(pid)
    return {cid: sorted(members) for cid, members in out.items()}


# ---------------------------------------------------------------------------
# stays.csv


def write_stays(path, stays) -> None:
    with _open_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STAY_HEADER)
        for s in sorted(stays, key=lambda s: (s.profile_id, s.date, s.shelter_id)):
            w.writerow([s.profile_id, s.shelter_id, s.date.isoformat()])


def read_stays(path) -> list[StayRecord]:
    out: list[StayRecord] = []
    with _open_read(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(path, header, STAY_HEADER)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 fields")
            pid, shelter, date_s = row
            try:
                date = datetime.date.fromisoformat(date_s)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            out.append(StayRecord(pid, shelter, date))
    return out


# ---------------------------------------------------------------------------
# JSON reports and the manifest


def write_report(path, report: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, stage: str, config: dict, inputs, outputs) -> None:
    """Record the stage's provenance: config echo plus input/output digests.

    Deliberately carries no timestamps so identical runs yield identical
    manifests.  Secrets must never appear in config (callers pass only a
    digest of the key, never the key).
    """
    out_dir = Path(out_dir)
    manifest = {
        "format_version": MANIFEST_VERSION,
        "stage": stage,
        "config": config,
        "inputs": {str(Path(p).name): sha256_file(p) for p in inputs},
        "outputs": {str(Path(p).name): sha256_file(p) for p in outputs},
    }
    write_report(out_dir / "manifest.json", manifest)

import json

import pytest

from hhlink import cli, data_io
from conftest import TEST_KEY


def run(*argv) -> int:
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """One full pipeline run: synth -> encode -> pairs -> tune -> train ->
    link -> cluster -> eval -> demo-stays -> metrics."""
    root = tmp_path_factory.mktemp("pipeline")
    key_file = root / "key.txt"
    key_file.write_bytes(TEST_KEY)

    assert run("synth", "--n-originals", 40, "--seed", 13, "--out", root / "synth") == 0
    assert (
        run(
            "encode",
            "--profiles", root / "synth" / "profiles.csv",
            "--m", 64,
            "--key-file", key_file,
            "--out", root / "enc" / "encoded.jsonl",
        )
        == 0
    )
    assert (
        run(
            "pairs",
            "--encoded", root / "enc" / "encoded.jsonl",
            "--truth", root / "synth" / "truth.csv",
            "--floor", 0.5,
            "--out", root / "pairs" / "pairs.csv",
        )
        == 0
    )
    assert (
        run(
            "tune",
            "--model", "threshold",
            "--pairs", root / "pairs" / "pairs.csv",
            "--folds", 3,
            "--seed", 1,
            "--out", root / "tune" / "tuning_report.json",
        )
        == 0
    )
    assert (
        run(
            "train",
            "--model", "threshold",
            "--pairs", root / "pairs" / "pairs.csv",
            "--from-tuning", root / "tune" / "tuning_report.json",
            "--out", root / "model" / "model.json",
        )
        == 0
    )
    assert (
        run(
            "link",
            "--model", root / "model" / "model.json",
            "--pairs", root / "pairs" / "pairs.csv",
            "--out", root / "links" / "links.csv",
        )
        == 0
    )
    assert (
        run(
            "cluster",
            "--links", root / "links" / "links.csv",
            "--encoded", root / "enc" / "encoded.jsonl",
            "--algo", "merge-center",
            "--out", root / "clusters" / "clusters.csv",
        )
        == 0
    )
    assert (
        run(
            "eval",
            "--pairs", root / "pairs" / "pairs.csv",
            "--model", root / "model" / "model.json",
            "--clusters", root / "clusters" / "clusters.csv",
            "--truth", root / "synth" / "truth.csv",
            "--out", root / "eval" / "eval_report.json",
        )
        == 0
    )
    assert (
        run(
            "demo-stays",
            "--profiles", root / "synth" / "profiles.csv",
            "--seed", 5,
            "--out", root / "stays" / "stays.csv",
        )
        == 0
    )
    assert (
        run(
            "metrics",
            "--stays", root / "stays" / "stays.csv",
            "--clusters", root / "clusters" / "clusters.csv",
            "--out", root / "metrics",
        )
        == 0
    )
    return root


class TestPipeline:
    def test_all_outputs_exist(self, pipeline):
        for rel in (
            "synth/profiles.csv",
            "synth/truth.csv",
            "synth/synth_stats.json",
            "enc/encoded.jsonl",
            "pairs/pairs.csv",
            "tune/tuning_report.json",
            "model/model.json",
            "links/links.csv",
            "clusters/clusters.csv",
            "eval/eval_report.json",
            "stays/stays.csv",
            "metrics/usage_report.json",
            "metrics/episode_hist.csv",
        ):
            assert (pipeline / rel).exists(), rel

    def test_manifests_trace_outputs(self, pipeline):
        for stage_dir in ("synth", "enc", "pairs", "model", "links", "clusters"):
            manifest = data_io.read_report(pipeline / stage_dir / "manifest.json")
            assert manifest["format_version"] == 1
            for name, digest in {**manifest["inputs"], **manifest["outputs"]}.items():
                matches = list(pipeline.rglob(name))
                assert matches, f"{name} missing for {stage_dir}"
                assert any(data_io.sha256_file(m) == digest for m in matches)

    def test_key_never_written(self, pipeline):
        hits = []
        for path in pipeline.rglob("*"):
            if path.is_file() and path.name != "key.txt":
                if TEST_KEY in path.read_bytes():
                    hits.append(path)
        assert hits == []

    def test_encode_manifest_has_key_digest_only(self, pipeline):
        manifest = data_io.read_report(pipeline / "enc" / "manifest.json")
        digest = manifest["config"]["key_digest"]
        assert len(digest) == 16
        assert TEST_KEY.decode() not in json.dumps(manifest)

    def test_eval_report_sections(self, pipeline):
        report = data_io.read_report(pipeline / "eval" / "eval_report.json")
        assert set(report) == {"pairwise", "cluster", "cluster_stats"}
        pw = report["pairwise"]
        assert 0.0 <= pw["precision"] <= 1.0
        assert 0.0 <= pw["recall"] <= 1.0
        assert pw["tp"] + pw["fp"] + pw["fn"] + pw["tn"] == pw["pairs"]
        cl = report["cluster"]
        assert 0.0 <= cl["mean_precision"] <= 1.0
        assert 0.0 <= cl["f1"] <= 1.0
        assert report["cluster_stats"]["profile_count"] > 0

    def test_tuning_report_shape(self, pipeline):
        report = data_io.read_report(pipeline / "tune" / "tuning_report.json")
        assert report["model_type"] == "threshold"
        assert report["winner"]["hyperparameters"]["beta"] is not None
        assert len(report["combinations"]) == 10

    def test_trained_model_records_digest(self, pipeline):
        artifact = data_io.read_report(pipeline / "model" / "model.json")
        assert artifact["format_version"] == 1
        assert artifact["model_type"] == "threshold"
        assert artifact["training_digest"]

    def test_usage_report_has_both_views(self, pipeline):
        report = data_io.read_report(pipeline / "metrics" / "usage_report.json")
        assert set(report) == {"merged", "unmerged"}
        for section in report.values():
            assert set(section["metrics"]) == {
                "total_stays", "tenure_days", "shelters_visited", "episodes",
            }

    def test_episode_hist_format(self, pipeline):
        lines = (pipeline / "metrics" / "episode_hist.csv").read_text().splitlines()
        assert lines[0] == "stays,episodes"
        assert all(len(line.split(",")) == 2 for line in lines[1:])

    def test_link_from_encoded_matches_link_from_pairs(self, pipeline, tmp_path):
        out = tmp_path / "links2.csv"
        assert (
            run(
                "link",
                "--model", pipeline / "model" / "model.json",
                "--encoded", pipeline / "enc" / "encoded.jsonl",
                "--floor", 0.5,
                "--out", out,
            )
            == 0
        )
        assert out.read_bytes() == (pipeline / "links" / "links.csv").read_bytes()

    def test_synth_rerun_is_byte_identical(self, pipeline, tmp_path):
        assert run("synth", "--n-originals", 40, "--seed", 13, "--out", tmp_path / "again") == 0
        for name in ("profiles.csv", "truth.csv", "synth_stats.json"):
            assert (tmp_path / "again" / name).read_bytes() == (
                pipeline / "synth" / name
            ).read_bytes()

    def test_pairs_parallel_rerun_is_byte_identical(self, pipeline, tmp_path):
        out = tmp_path / "pairs2.csv"
        assert (
            run(
                "pairs",
                "--encoded", pipeline / "enc" / "encoded.jsonl",
                "--truth", pipeline / "synth" / "truth.csv",
                "--floor", 0.5,
                "--workers", 2,
                "--block-size", 17,
                "--out", out,
            )
            == 0
        )
        assert out.read_bytes() == (pipeline / "pairs" / "pairs.csv").read_bytes()


class TestKeyHandling:
    def test_env_key_accepted(self, tmp_path, monkeypatch, pipeline):
        monkeypatch.setenv("HHLINK_KEY", TEST_KEY.decode())
        out = tmp_path / "enc.jsonl"
        assert (
            run("encode", "--profiles", pipeline / "synth" / "profiles.csv", "--out", out)
            == 0
        )
        assert out.read_bytes() == (pipeline / "enc" / "encoded.jsonl").read_bytes()

    def test_missing_key_is_usage_error(self, tmp_path, monkeypatch, pipeline, capsys):
        monkeypatch.delenv("HHLINK_KEY", raising=False)
        code = run(
            "encode",
            "--profiles", pipeline / "synth" / "profiles.csv",
            "--out", tmp_path / "enc.jsonl",
        )
        assert code == 1
        assert "HHLINK_KEY" in capsys.readouterr().err

    def test_empty_key_file_rejected(self, tmp_path, monkeypatch, pipeline):
        monkeypatch.delenv("HHLINK_KEY", raising=False)
        key_file = tmp_path / "empty.key"
        key_file.write_text("\n")
        code = run(
            "encode",
            "--profiles", pipeline / "synth" / "profiles.csv",
            "--key-file", key_file,
            "--out", tmp_path / "enc.jsonl",
        )
        assert code == 1


class TestConfigFile:
    def test_config_supplies_defaults(self, pipeline, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# pair stage settings\nfloor=0.6\nblock_size=33\n")
        out = tmp_path / "pairs.csv"
        assert (
            run(
                "pairs",
                "--config", cfg,
                "--encoded", pipeline / "enc" / "encoded.jsonl",
                "--out", out,
            )
            == 0
        )
        manifest = data_io.read_report(tmp_path / "manifest.json")
        assert manifest["config"]["floor"] == 0.6
        assert manifest["config"]["block_size"] == 33

    def test_explicit_flag_beats_config(self, pipeline, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("floor=0.6\n")
        out = tmp_path / "pairs.csv"
        assert (
            run(
                "pairs",
                "--config", cfg,
                "--encoded", pipeline / "enc" / "encoded.jsonl",
                "--floor", 0.55,
                "--out", out,
            )
            == 0
        )
        manifest = data_io.read_report(tmp_path / "manifest.json")
        assert manifest["config"]["floor"] == 0.55

    def test_malformed_config_line(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("floor 0.6\n")
        assert run("pairs", "--config", cfg, "--encoded", "x", "--out", "y") == 1
        assert "KEY=VALUE" in capsys.readouterr().err


class TestExitCodes:
    def test_missing_required_flag(self, capsys):
        assert run("encode", "--out", "x.jsonl") == 1
        assert "required" in capsys.readouterr().err

    def test_unknown_command(self):
        assert run("frobnicate") == 1

    def test_missing_input_file(self, tmp_path, capsys):
        assert (
            run("cluster", "--links", tmp_path / "nope.csv",
                "--encoded", tmp_path / "nope.jsonl", "--out", tmp_path / "c.csv")
            == 1
        )
        assert "error:" in capsys.readouterr().err

    def test_link_needs_a_source(self, pipeline, tmp_path, capsys):
        code = run("link", "--model", pipeline / "model" / "model.json",
                   "--out", tmp_path / "l.csv")
        assert code == 1
        assert "--pairs or --encoded" in capsys.readouterr().err

    def test_eval_needs_a_section(self, tmp_path):
        assert run("eval", "--out", tmp_path / "r.json") == 1

    def test_train_requires_labels(self, pipeline, tmp_path, capsys):
        unlabeled = tmp_path / "pairs.csv"
        assert (
            run("pairs", "--encoded", pipeline / "enc" / "encoded.jsonl",
                "--out", unlabeled)
            == 0
        )
        code = run("train", "--model", "threshold", "--pairs", unlabeled,
                   "--out", tmp_path / "m.json")
        assert code == 1
        assert "label" in capsys.readouterr().err

    def test_internal_error_exits_two(self, pipeline, tmp_path, monkeypatch, capsys):
        def boom(*args, **kwargs):
            raise RuntimeError("synthetic failure")

        monkeypatch.setattr(cli.data_io, "write_profiles", boom)
        code = run("synth", "--n-originals", 3, "--seed", 1, "--out", tmp_path / "s")
        assert code == 2
        assert "Traceback" in capsys.readouterr().err

    def test_help_exits_zero(self):
        with pytest.raises(SystemExit) as exc:
            run("--help")
        assert exc.value.code == 0

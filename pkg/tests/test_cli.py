import json

import numpy as np
import pytest
from click.testing import CliRunner

from voxenc import matrixio, report
from voxenc.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def _synth_dir(runner, tmp_path, preset="linear", extra=()):
    out = tmp_path / f"data_{preset}"
    res = runner.invoke(main, ["synth", "--preset", preset, "--seed", "3",
                               "--out", str(out), *extra])
    assert res.exit_code == 0, res.output
    return out


def test_synth_writes_dataset(runner, tmp_path):
    out = _synth_dir(runner, tmp_path, "linear")
    manifest = matrixio.read_manifest(out / "manifest.json")
    assert matrixio.validate_manifest(manifest) == []
    feats = matrixio.read_matrix(out / "features.fmx")
    y = matrixio.read_matrix(out / manifest.subjects[0].response_path)
    assert feats.shape[0] == y.shape[0]


def test_score_and_contrast_roundtrip(runner, tmp_path):
    out = _synth_dir(runner, tmp_path, "linear")
    scores = tmp_path / "scores.fmx"
    rep = tmp_path / "scores.json"
    res = runner.invoke(main, ["score", "--features", str(out / "features.fmx"),
                               "--response", str(out / "sub000.fmx"),
                               "--manifest", str(out / "manifest.json"),
                               "--out", str(scores), "--report", str(rep)])
    assert res.exit_code == 0, res.output
    r = matrixio.read_matrix(scores)
    assert r.shape == (50,)
    doc = json.loads(rep.read_text())
    assert report.validate_report(doc) == []
    res = runner.invoke(main, ["contrast", "--a", str(scores), "--b", str(scores),
                               "--out", str(tmp_path / "delta.fmx")])
    assert res.exit_code == 0
    assert np.all(matrixio.read_matrix(tmp_path / "delta.fmx") == 0)


def test_missing_input_exit_2(runner, tmp_path):
    res = runner.invoke(main, ["score", "--features", str(tmp_path / "nope.fmx"),
                               "--response", str(tmp_path / "nope.fmx"),
                               "--manifest", str(tmp_path / "nope.json"),
                               "--out", str(tmp_path / "o.fmx")])
    assert res.exit_code == 2
    assert "not found" in res.output


def test_group_stats_cmd(runner, tmp_path):
    rng = np.random.default_rng(0)
    values = rng.normal(0.5, 0.2, size=(10, 15))
    matrixio.write_matrix(tmp_path / "group.fmx", values)
    out = tmp_path / "stats.json"
    res = runner.invoke(main, ["group-stats", "--in", str(tmp_path / "group.fmx"),
                               "--q", "0.05", "--out", str(out)])
    assert res.exit_code == 0, res.output
    doc = json.loads(out.read_text())
    assert doc["n_targets"] == 15
    assert doc["n_significant"] == 15  # strong shift: everything survives


def test_ctc_eval_cmd(runner, tmp_path):
    p = np.full((4, 3), 1 / 3)
    matrixio.write_matrix(tmp_path / "lp.fmx", np.log(p))
    (tmp_path / "targets.txt").write_text("1 2")
    res = runner.invoke(main, ["ctc-eval", "--logprobs", str(tmp_path / "lp.fmx"),
                               "--targets", str(tmp_path / "targets.txt")])
    assert res.exit_code == 0, res.output
    assert "log_likelihood" in res.output


def test_hrf_convolve_cmd(runner, tmp_path):
    rng = np.random.default_rng(1)
    matrixio.write_matrix(tmp_path / "act.fmx", rng.normal(size=(6000, 3)))
    res = runner.invoke(main, ["hrf-convolve", "--in", str(tmp_path / "act.fmx"),
                               "--out", str(tmp_path / "aligned.fmx"),
                               "--n-scans", "60"])
    assert res.exit_code == 0, res.output
    assert matrixio.read_matrix(tmp_path / "aligned.fmx").shape == (60, 3)


def test_featurize_cmd(runner, tmp_path):
    from scipy.io import wavfile

    rng = np.random.default_rng(2)
    pcm = (rng.uniform(-0.5, 0.5, 16000) * 32767).astype(np.int16)
    wavfile.write(tmp_path / "a.wav", 16000, pcm)
    res = runner.invoke(main, ["featurize", "--wav", str(tmp_path / "a.wav"),
                               "--kind", "spectrogram", "--out", str(tmp_path / "spec.fmx")])
    assert res.exit_code == 0, res.output
    assert matrixio.read_matrix(tmp_path / "spec.fmx").shape[1] == 161


class TestRun:
    def _config(self, tmp_path, **kw):
        cfg = {
            "out_dir": str(tmp_path / "run_out"),
            "synth": {"preset": "replica", "n_subjects": 6, "n_targets": 15,
                      "n_scans": 60, "n_features": 6, "n_time_activation": 6100,
                      "snr": 1.0},
            "seed": 4,
            **kw,
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg))
        return path, cfg

    def test_replica_run_produces_report(self, runner, tmp_path):
        path, cfg = self._config(tmp_path)
        res = runner.invoke(main, ["run", "--config", str(path)])
        assert res.exit_code == 0, res.output
        out_dir = tmp_path / "run_out"
        doc = json.loads((out_dir / "report.json").read_text())
        assert report.validate_report(doc) == []
        assert doc["group"]["positive_mean_delta"] > 0
        assert (out_dir / "resolved_config.json").exists()
        assert (out_dir / "scores_per_level.svg").read_text().startswith("<svg")

    def test_rerun_byte_identical_excluding_timings(self, runner, tmp_path):
        path, _ = self._config(tmp_path)
        assert runner.invoke(main, ["run", "--config", str(path)]).exit_code == 0
        doc1 = json.loads((tmp_path / "run_out" / "report.json").read_text())
        assert runner.invoke(main, ["run", "--config", str(path)]).exit_code == 0
        doc2 = json.loads((tmp_path / "run_out" / "report.json").read_text())
        doc1["stages"].pop("timings_seconds")
        doc2["stages"].pop("timings_seconds")
        assert json.dumps(doc1, sort_keys=True) == json.dumps(doc2, sort_keys=True)

    def test_unknown_key_rejected(self, runner, tmp_path):
        path, cfg = self._config(tmp_path)
        cfg["bogus_key"] = 1
        path.write_text(json.dumps(cfg))
        res = runner.invoke(main, ["run", "--config", str(path)])
        assert res.exit_code == 2
        assert "unknown config keys" in res.output

    def test_missing_config_exit_2(self, runner, tmp_path):
        res = runner.invoke(main, ["run", "--config", str(tmp_path / "none.json")])
        assert res.exit_code == 2


def test_report_schema_validation():
    good = {"schema_version": report.REPORT_SCHEMA_VERSION, "stages": {}, "scores": {}, "contrasts": {}}
    assert report.validate_report(good) == []
    assert report.validate_report({"stages": {}}) != []


def test_bar_chart_svg_structure():
    svg = report.bar_chart_svg(["a", "b"], [0.5, -0.2], title="t")
    assert svg.startswith("<svg") and svg.endswith("</svg>")
    assert svg.count("<rect") == 2

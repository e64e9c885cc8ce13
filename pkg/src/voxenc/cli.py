"""Command-line entry point chaining the whole pipeline.

Exit codes: 0 success, 1 computation error, 2 usage/input error.
"""

from __future__ import annotations

import json
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import contrast as contrast_mod
from . import ctc as ctc_mod
from . import dsp, groupstats, hemo, matrixio, report, synthbench
from .encode import (
    DEFAULT_LAMBDA_GRID,
    brain_score,
    detrend_blocks,
    make_split_plan,
)
from .types import FeatureMatrix, ResponseMatrix

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_USAGE = 2


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(path: str) -> np.ndarray:
    p = Path(path)
    if not p.exists():
        _fail(EXIT_USAGE, f"input file not found: {p}")
    try:
        return matrixio.read_matrix(p)
    except matrixio.MatrixParseError as exc:
        _fail(EXIT_USAGE, str(exc))
    raise AssertionError("unreachable")


def _default_threads() -> int:
    return int(os.environ.get("VOXENC_THREADS", "1"))


@click.group()
def main() -> None:
    """Model-to-brain encoding toolkit."""


@main.command()
@click.option("--wav", "wav_path", required=True, help="input WAV file")
@click.option("--kind", type=click.Choice(["spectrogram", "mel"]), default="spectrogram")
@click.option("--out", "out_path", required=True)
@click.option("--n-mels", default=80, show_default=True)
@click.option("--mel-variant", type=click.Choice(["slaney", "htk"]), default="slaney")
def featurize(wav_path: str, kind: str, out_path: str, n_mels: int, mel_variant: str) -> None:
    """Extract spectrogram or mel-filterbank features from audio."""
    if not Path(wav_path).exists():
        _fail(EXIT_USAGE, f"input file not found: {wav_path}")
    try:
        signal, rate = dsp.read_wav(wav_path)
        mono = dsp.resample_to_mono_16k(signal, rate)
        if kind == "spectrogram":
            feats = dsp.power_spectrogram(mono, dsp.StftConfig())
        else:
            feats = dsp.mel_filterbank(mono, dsp.MelConfig(n_mels=n_mels, mel_variant=mel_variant))
    except ValueError as exc:
        _fail(EXIT_COMPUTE, str(exc))
        return
    matrixio.write_matrix(out_path, feats.data)
    click.echo(f"wrote {feats.data.shape[0]}x{feats.data.shape[1]} {kind} to {out_path}")


@main.command("hrf-convolve")
@click.option("--in", "in_path", required=True)
@click.option("--out", "out_path", required=True)
@click.option("--input-rate", default=50.0, show_default=True)
@click.option("--tr", default=2.0, show_default=True)
@click.option("--n-scans", type=int, required=True)
@click.option("--normalize/--no-normalize", default=True, show_default=True)
def hrf_convolve(in_path: str, out_path: str, input_rate: float, tr: float, n_scans: int, normalize: bool) -> None:
    """Normalize activations, convolve with the HRF, downsample to TR."""
    data = _load(in_path)
    try:
        feats = FeatureMatrix(data, input_rate)
        out = hemo.hrf_align(feats, n_scans, tr, normalize=normalize)
    except ValueError as exc:
        _fail(EXIT_COMPUTE, str(exc))
        return
    matrixio.write_matrix(out_path, out.data)
    click.echo(f"wrote {out.data.shape[0]}x{out.data.shape[1]} aligned features to {out_path}")


@main.command()
@click.option("--features", required=True, help="comma-separated feature files, column-concatenated")
@click.option("--response", "response_path", required=True)
@click.option("--manifest", "manifest_path", required=True)
@click.option("--out", "out_path", required=True, help="per-target mean R (FMX1)")
@click.option("--report", "report_path", default=None)
@click.option("--threads", default=None, type=int)
@click.option("--detrend/--no-detrend", default=True, show_default=True)
def score(features: str, response_path: str, manifest_path: str, out_path: str,
          report_path: str | None, threads: int | None, detrend: bool) -> None:
    """Cross-validated ridge brain scores per target."""
    if not Path(manifest_path).exists():
        _fail(EXIT_USAGE, f"input file not found: {manifest_path}")
    manifest = matrixio.read_manifest(manifest_path)
    problems = matrixio.validate_manifest(manifest)
    if problems:
        _fail(EXIT_USAGE, "; ".join(problems))
    mats = [_load(p) for p in features.split(",")]
    X = np.hstack(mats)
    Y = _load(response_path)
    threads = threads if threads is not None else _default_threads()
    try:
        resp = ResponseMatrix(Y)
        if detrend:
            resp = detrend_blocks(resp, manifest.blocks)
        plan = make_split_plan(manifest.blocks)
        sm = brain_score(X, resp.data, plan, n_threads=threads)
    except ValueError as exc:
        _fail(EXIT_COMPUTE, str(exc))
        return
    matrixio.write_matrix(out_path, sm.r_mean)
    if report_path:
        report.write_report(
            report_path,
            {
                "stages": {"score": {"n_folds": plan.n_folds, "n_targets": sm.n_targets}},
                "scores": report.summarize_scores(sm.r_mean, manifest.rois or None),
                "contrasts": {},
            },
        )
    click.echo(f"mean R = {sm.r_mean.mean():.4f} over {sm.n_targets} targets")


@main.command("contrast")
@click.option("--a", "a_path", required=True)
@click.option("--b", "b_path", required=True)
@click.option("--out", "out_path", required=True)
def contrast_cmd(a_path: str, b_path: str, out_path: str) -> None:
    """Elementwise delta-R between two score files (a minus b)."""
    a = _load(a_path)
    b = _load(b_path)
    if a.shape != b.shape:
        _fail(EXIT_USAGE, f"target mismatch: {a.shape} vs {b.shape}")
    matrixio.write_matrix(out_path, a - b)
    click.echo(f"mean delta R = {(a - b).mean():.4f}")


@main.command("group-stats")
@click.option("--in", "in_path", required=True, help="subjects x targets matrix")
@click.option("--alternative", type=click.Choice(["greater", "two_sided"]), default="greater")
@click.option("--q", default=0.05, show_default=True)
@click.option("--rois", "rois_path", default=None, help="manifest JSON with ROI lists")
@click.option("--out", "out_path", required=True)
def group_stats(in_path: str, alternative: str, q: float, rois_path: str | None, out_path: str) -> None:
    """Wilcoxon across subjects per target, BH-FDR across targets."""
    values = _load(in_path)
    try:
        stats = groupstats.group_test(values, alternative, q)
    except ValueError as exc:
        _fail(EXIT_COMPUTE, str(exc))
        return
    doc = {
        "q": q,
        "alternative": alternative,
        "n_subjects": int(values.shape[0]),
        "n_targets": int(values.shape[1]),
        "n_significant": int(stats.significant.sum()),
        "p_raw": [None if np.isnan(p) else float(p) for p in stats.p_raw],
        "significant": stats.significant.tolist(),
    }
    if rois_path:
        manifest = matrixio.read_manifest(rois_path)
        mean_vals = values.mean(axis=0)
        doc["roi_means"] = {
            name: groupstats.roi_mean(mean_vals, idx) for name, idx in manifest.rois.items()
        }
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(f"{doc['n_significant']}/{doc['n_targets']} targets significant at q={q}")


@main.command("ctc-eval")
@click.option("--logprobs", "logprobs_path", required=True)
@click.option("--targets", "targets_path", required=True, help="UTF-8 space-separated label indices")
def ctc_eval(logprobs_path: str, targets_path: str) -> None:
    """Print CTC log-likelihood and the greedy decode."""
    lp = _load(logprobs_path)
    if not Path(targets_path).exists():
        _fail(EXIT_USAGE, f"input file not found: {targets_path}")
    text = Path(targets_path).read_text(encoding="utf-8").split()
    try:
        targets = [int(t) for t in text]
        inst = ctc_mod.CtcInstance(lp, targets)
    except ValueError as exc:
        _fail(EXIT_USAGE, str(exc))
        return
    ll = ctc_mod.ctc_log_likelihood(inst)
    decoded = ctc_mod.ctc_greedy_decode(lp)
    click.echo(f"log_likelihood = {ll:.10g}")
    click.echo("decoded = " + " ".join(map(str, decoded)))


@main.command()
@click.option("--preset", type=click.Choice(["linear", "null", "replica"]), required=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True)
@click.option("--n-subjects", default=None, type=int)
@click.option("--n-targets", default=None, type=int)
@click.option("--n-scans", default=None, type=int)
def synth(preset: str, seed: int, out_dir: str, n_subjects: int | None,
          n_targets: int | None, n_scans: int | None) -> None:
    """Generate a synthetic dataset plus manifest into a directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    overrides = {"seed": seed}
    if n_subjects is not None:
        overrides["n_subjects"] = n_subjects
    if n_targets is not None:
        overrides["n_targets"] = n_targets
    if n_scans is not None:
        overrides["n_scans"] = n_scans
    if preset == "null":
        overrides.setdefault("n_subjects", 20)
        overrides["snr"] = 0.0
    elif preset == "replica":
        overrides.setdefault("n_subjects", 20)
    cfg = synthbench.SynthConfig(**overrides)
    _write_synth_dataset(out, preset, cfg)
    click.echo(f"wrote {preset} dataset to {out}")


def _write_synth_dataset(out: Path, preset: str, cfg: synthbench.SynthConfig) -> None:
    from .rng import CounterRng

    blocks = synthbench.even_blocks(cfg.n_scans, cfg.n_blocks)
    features = []
    subjects = []
    if preset == "replica":
        _, a_tr = synthbench._make_features(cfg, CounterRng(cfg.seed, stream=0))
        cfg_b = synthbench.SynthConfig(**{**cfg.__dict__, "seed": cfg.seed + 1})
        _, b_tr = synthbench._make_features(cfg_b, CounterRng(cfg_b.seed, stream=0))
        matrixio.write_matrix(out / "features_a.fmx", a_tr.data)
        matrixio.write_matrix(out / "features_b.fmx", b_tr.data)
        features = [
            matrixio.FeatureRecord("model_a", "features_a.fmx", 1.0 / cfg.tr_seconds),
            matrixio.FeatureRecord("model_b", "features_b.fmx", 1.0 / cfg.tr_seconds),
        ]
        for i in range(cfg.n_subjects):
            rng = CounterRng(cfg.seed, stream=1000 + i)
            y, _ = synthbench._mix_response(b_tr.data, cfg, rng)
            name = f"sub{i:03d}.fmx"
            matrixio.write_matrix(out / name, y)
            subjects.append(matrixio.SubjectRecord(f"sub{i:03d}", name))
    else:
        _, at_tr = synthbench._make_features(cfg, CounterRng(cfg.seed, stream=0))
        matrixio.write_matrix(out / "features.fmx", at_tr.data)
        features = [matrixio.FeatureRecord("synth", "features.fmx", 1.0 / cfg.tr_seconds)]
        for i in range(cfg.n_subjects):
            rng = CounterRng(cfg.seed, stream=i + 1)
            if preset == "null":
                y = rng.normal((cfg.n_scans, cfg.n_targets))
            else:
                y, _ = synthbench._mix_response(at_tr.data, cfg, rng)
            name = f"sub{i:03d}.fmx"
            matrixio.write_matrix(out / name, y)
            subjects.append(matrixio.SubjectRecord(f"sub{i:03d}", name))
    manifest = matrixio.DatasetManifest(
        subjects=subjects,
        features=features,
        blocks=blocks,
        rois={"all": list(range(cfg.n_targets))},
        n_rows=cfg.n_scans,
        n_targets=cfg.n_targets,
    )
    matrixio.write_manifest(out / "manifest.json", manifest)


_RUN_KEYS = {
    "out_dir", "threads", "seed", "synth", "features", "response", "manifest",
    "lambda_grid", "q", "alternative", "detrend",
}


def _resolve_run_config(doc: dict) -> dict:
    unknown = set(doc) - _RUN_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "out_dir" not in doc:
        raise ValueError("config requires out_dir")
    resolved = {
        "threads": _default_threads(),
        "seed": 0,
        "q": 0.05,
        "alternative": "greater",
        "detrend": True,
        "lambda_grid": {"min": 10.0, "max": 1e8, "num": 20},
        **doc,
    }
    return resolved


def _grid_from(cfg: dict) -> np.ndarray:
    g = cfg["lambda_grid"]
    return np.logspace(np.log10(g["min"]), np.log10(g["max"]), int(g["num"]))


@main.command()
@click.option("--config", "config_path", required=True, help="JSON run configuration")
def run(config_path: str) -> None:
    """Run the full pipeline from a JSON config; writes reports and SVG bars."""
    if not Path(config_path).exists():
        _fail(EXIT_USAGE, f"input file not found: {config_path}")
    try:
        doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
        cfg = _resolve_run_config(doc)
    except (json.JSONDecodeError, ValueError) as exc:
        _fail(EXIT_USAGE, str(exc))
        return
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        snapshot = out_dir / "resolved_config.json"
        snapshot.write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(snapshot)
        _run_pipeline(cfg, out_dir, written)
    except FileNotFoundError as exc:
        for p in written:
            p.unlink(missing_ok=True)
        _fail(EXIT_USAGE, f"run failed: {exc}")
    except Exception as exc:
        for p in written:
            p.unlink(missing_ok=True)
        _fail(EXIT_COMPUTE, f"run failed: {type(exc).__name__}: {exc}")
    click.echo(f"pipeline complete; report at {out_dir / 'report.json'}")


def _run_pipeline(cfg: dict, out_dir: Path, written: list[Path]) -> None:
    timings: dict[str, float] = {}
    grid = _grid_from(cfg)
    threads = int(cfg["threads"])

    t0 = time.perf_counter()
    if "synth" in cfg:
        synth_cfg_doc = dict(cfg["synth"])
        preset = synth_cfg_doc.pop("preset", "replica")
        synth_cfg_doc.setdefault("seed", cfg["seed"])
        scfg = synthbench.SynthConfig(**synth_cfg_doc)
        data_dir = out_dir / "data"
        data_dir.mkdir(exist_ok=True)
        _write_synth_dataset(data_dir, preset, scfg)
        written.extend(data_dir.iterdir())
        manifest_path = data_dir / "manifest.json"
        base = data_dir
    else:
        manifest_path = Path(cfg["manifest"])
        base = manifest_path.parent
    timings["synth"] = time.perf_counter() - t0

    manifest = matrixio.read_manifest(manifest_path)
    problems = matrixio.validate_manifest(manifest)
    if problems:
        raise ValueError("manifest invalid: " + "; ".join(problems))
    if "features" in cfg:
        feature_records = [matrixio.FeatureRecord(f["name"], f["path"], f.get("sample_rate", 1.0))
                           for f in cfg["features"]]
        base = Path(".")
    else:
        feature_records = manifest.features
    feature_mats = {f.name: matrixio.read_matrix(base / f.path) for f in feature_records}
    names = [f.name for f in feature_records]
    plan = make_split_plan(manifest.blocks)

    # score every concatenation level for every subject
    t0 = time.perf_counter()
    levels = [np.hstack([feature_mats[n] for n in names[: L + 1]]) for L in range(len(names))]
    per_subject_scores: list[list[np.ndarray]] = []
    for sub in manifest.subjects:
        y = matrixio.read_matrix(base / sub.response_path)
        resp = ResponseMatrix(y)
        if cfg["detrend"]:
            resp = detrend_blocks(resp, manifest.blocks)
        level_scores = [
            brain_score(X, resp.data, plan, grid, n_threads=threads).r_mean for X in levels
        ]
        per_subject_scores.append(level_scores)
    timings["score"] = time.perf_counter() - t0

    # contrasts: per-level deltas relative to the previous level
    t0 = time.perf_counter()
    n_levels = len(names)
    contrasts: dict[str, dict] = {}
    group_block = {}
    if n_levels >= 2:
        deltas = np.array(
            [[s[L] - s[L - 1] for L in range(1, n_levels)] for s in per_subject_scores]
        )  # subjects x (levels-1) x targets
        for L in range(1, n_levels):
            d = deltas[:, L - 1, :]
            contrasts[f"{names[L]}_vs_{names[L - 1]}"] = {
                "mean_delta_r": float(d.mean()),
                "per_level_index": L,
            }
        if len(manifest.subjects) >= 5:
            top_delta = np.array([s[-1] - s[0] for s in per_subject_scores])
            stats = groupstats.group_test(top_delta, cfg["alternative"], cfg["q"])
            group_block = {
                "contrast": f"{names[-1]}_vs_{names[0]}",
                "n_significant": int(stats.significant.sum()),
                "n_targets": int(stats.significant.size),
                "positive_mean_delta": float(top_delta.mean()),
            }
            matrixio.write_matrix(out_dir / "group_delta.fmx", top_delta)
            written.append(out_dir / "group_delta.fmx")
    timings["contrast"] = time.perf_counter() - t0

    mean_scores_per_level = [
        float(np.mean([s[L] for s in per_subject_scores])) for L in range(n_levels)
    ]
    svg = report.bar_chart_svg(
        names, mean_scores_per_level, title="mean brain score per concatenation level"
    )
    (out_dir / "scores_per_level.svg").write_text(svg, encoding="utf-8")
    written.append(out_dir / "scores_per_level.svg")
    if n_levels >= 2:
        bar_labels = [f"L{L}" for L in range(1, n_levels)]
        bar_vals = [contrasts[f"{names[L]}_vs_{names[L - 1]}"]["mean_delta_r"] for L in range(1, n_levels)]
        (out_dir / "delta_per_level.svg").write_text(
            report.bar_chart_svg(bar_labels, bar_vals, title="mean delta R per level"),
            encoding="utf-8",
        )
        written.append(out_dir / "delta_per_level.svg")

    subject_mean = np.mean([s[-1] for s in per_subject_scores], axis=0)
    doc = {
        "stages": {"timings_seconds": timings},
        "scores": {
            "per_level_mean_r": dict(zip(names, mean_scores_per_level)),
            **report.summarize_scores(subject_mean, manifest.rois or None),
        },
        "contrasts": contrasts,
        "group": group_block,
        "config_snapshot": "resolved_config.json",
    }
    report.write_report(out_dir / "report.json", doc)
    written.append(out_dir / "report.json")


if __name__ == "__main__":
    main()

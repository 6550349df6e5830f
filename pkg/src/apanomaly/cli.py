"""Command-line front end.

Subcommands wire the pipeline together: simulate a scenario, featurize a
session log, train the detectors, score a run, detect anomalous slots,
evaluate a scenario family, or reproduce the full evaluation tree.

Exit codes: 0 success, 2 validation error, 3 numeric failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import shutil
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import config as cfg
from . import detector as det
from . import evaluate as ev
from . import features as feat
from . import hmm as hmm_mod
from . import pca as pca_mod
from . import plots
from . import session_sim as sim
from .errors import NumericError, ValidationError

EPILOG = """\
File formats (all text, comma-separated, one header row):
  session log     ap_id,station_id,start_s,end_s,input_octets,output_octets,
                  input_packets,output_packets   (times with 3 decimals)
  feature matrix  slot_index + the 7 per-slot features
  likelihood      slot_index,loglik
  detections      JSON with method, slots, per-series detail and the config
  models          JSON (HMM: pi, A, means, covariances, variance floor;
                  PCA: mean, scale, components, explained variance ratio)
Scenario configs are flat `key = value` files; run `repro --help` or see the
README for the key list. Unknown keys are errors.
"""


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_scenario(args) -> sim.ScenarioSpec:
    file_cfg = cfg.parse_config_text(_read(args.config)) if args.config else {}
    overrides = cfg.parse_overrides(args.set or [])
    return cfg.build_scenario(file_cfg, overrides, seed=args.seed)


def _detect_config(args) -> det.HistogramThresholdConfig:
    tails = args.tails or ("low" if args.method == "hmm" else "both")
    return det.HistogramThresholdConfig(bin_count=args.bins,
                                        mode_fraction=args.mode_fraction,
                                        tails=tails)


def _cmd_simulate(args) -> int:
    spec = _load_scenario(args)
    events = sim.simulate(spec)
    _write_atomic(args.out, sim.format_session_log(events))
    manifest = cfg.format_config(cfg.scenario_to_config(spec))
    _write_atomic(args.out + ".config", manifest)
    return 0


def _cmd_featurize(args) -> int:
    events = sim.parse_session_log(_read(args.sessions))
    series = feat.featurize(events, args.ap, args.slot, args.duration)
    _write_atomic(args.out, feat.format_feature_matrix(series))
    return 0


def _cmd_train(args) -> int:
    matrices = [feat.parse_feature_matrix(_read(path)).matrix for path in args.features]
    pooled = np.concatenate(matrices, axis=0)
    pca_model = pca_mod.fit_pca(pooled, k=args.components)
    sequences = [pca_mod.transform(pca_model, m) for m in matrices]
    train_config = hmm_mod.TrainConfig(max_iterations=args.max_iterations,
                                       loglik_tolerance=args.tolerance,
                                       restarts=args.restarts, seed=args.seed)
    initial = hmm_mod.init_random(args.states, np.concatenate(sequences, axis=0), args.seed)
    model, trace = hmm_mod.baum_welch(initial, sequences, train_config)
    hmm_mod.save_model(model, args.out_model, train_config)
    if args.out_pca:
        pca_mod.save_pca(pca_model, args.out_pca)
    print(f"trained {args.states}-state model on {len(sequences)} sequences, "
          f"{len(trace)} iterations, final log-likelihood {trace[-1]:.6f}")
    return 0


def _cmd_score(args) -> int:
    model = hmm_mod.load_model(args.model)
    pca_model = pca_mod.load_pca(args.pca)
    series = feat.parse_feature_matrix(_read(args.features))
    ll = hmm_mod.score_run(model, pca_model, series)
    _write_atomic(args.out, hmm_mod.format_likelihood_series(ll))
    return 0


def _cmd_detect(args) -> int:
    config = _detect_config(args)
    if args.method == "hmm":
        if not args.series:
            raise ValidationError("detect: --method hmm requires --series")
        series = hmm_mod.parse_likelihood_series(_read(args.series))
        result = det.detect_hmm(series, config)
    elif args.method == "raw":
        if not args.features:
            raise ValidationError("detect: --method raw requires --features")
        series = feat.parse_feature_matrix(_read(args.features))
        result = det.detect_raw(series, config)
    else:
        if not (args.features and args.pca):
            raise ValidationError("detect: --method pca requires --features and --pca")
        series = feat.parse_feature_matrix(_read(args.features))
        result = det.detect_pca(series, pca_mod.load_pca(args.pca), config)
    _write_atomic(args.out, det.format_detection(result))
    return 0


def _parse_seeds(text: str) -> tuple[int, ...]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(s) for s in text.split(",") if s)


def _experiment_spec(family: str, seeds: tuple[int, ...]) -> ev.ExperimentSpec:
    return ev.ExperimentSpec(family=family, test_seeds=seeds)


def _write_family_tree(result: ev.ExperimentResult, family_dir: str,
                       manifest: list[tuple[str, str]]) -> None:
    spec = result.spec
    summary = ev.summarize(result)
    for run in result.runs:
        run_dir = os.path.join(family_dir, str(run.seed))
        scenario = ev.family_scenario(spec.family, run.seed, spec.base)
        fingerprint = ev.scenario_fingerprint(scenario)
        outputs = {
            "sessions.csv": sim.format_session_log(run.events),
            "features.csv": feat.format_feature_matrix(run.features),
            "likelihood.csv": hmm_mod.format_likelihood_series(run.likelihood),
            "likelihood_markers.csv": plots.format_series_markers(
                run.likelihood, run.detections[det.METHOD_HMM]),
            "likelihood.svg": plots.render_series_svg(
                run.likelihood, run.detections[det.METHOD_HMM]),
            "scenario.config": cfg.format_config(cfg.scenario_to_config(scenario)),
        }
        for method, detection in run.detections.items():
            outputs[f"detections_{method}.json"] = det.format_detection(detection)
        for name, text in outputs.items():
            path = os.path.join(run_dir, name)
            _write_atomic(path, text)
            manifest.append((os.path.relpath(path, os.path.dirname(family_dir)), fingerprint))
    train_fp = ev.scenario_fingerprint(ev.family_scenario("normal", 0, spec.base))
    for name, text in (
            ("summary.csv", plots.format_boxplot_data(summary)),
            ("summary.svg", plots.render_boxplot_svg(summary))):
        path = os.path.join(family_dir, name)
        _write_atomic(path, text)
        manifest.append((os.path.relpath(path, os.path.dirname(family_dir)), train_fp))


def _cmd_eval(args) -> int:
    seeds = _parse_seeds(args.seeds)
    spec = _experiment_spec(args.family, seeds)
    result = ev.run_experiment(spec)
    manifest: list[tuple[str, str]] = []
    family_dir = os.path.join(args.out, args.family)
    _write_family_tree(result, family_dir, manifest)
    lines = ["path,spec_fingerprint"] + [f"{p},{fp}" for p, fp in sorted(manifest)]
    _write_atomic(os.path.join(args.out, "manifest.csv"), "\n".join(lines) + "\n")
    summary = ev.summarize(result)
    for method in ev.METHODS:
        med_p = summary.quantiles["precision"][method]["median"]
        med_r = summary.quantiles["recall"][method]["median"]
        r_text = "n/a" if med_r is None else f"{med_r:.3f}"
        print(f"{args.family} {method}: median precision {med_p:.3f}, median recall {r_text}")
    return 0


def _run_family(family: str) -> ev.ExperimentResult:
    return ev.run_experiment(_experiment_spec(family, ev.DEFAULT_TEST_SEEDS))


def _cmd_repro(args) -> int:
    out = os.path.abspath(args.out)
    if os.path.exists(out) and os.listdir(out):
        raise OSError(f"repro: output directory {out!r} already exists and is not empty")
    staging = out + ".tmp"
    if os.path.exists(staging):
        shutil.rmtree(staging)
    os.makedirs(staging)

    families = list(ev.FAMILIES)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = dict(zip(families, pool.map(_run_family, families)))
    else:
        results = {family: _run_family(family) for family in families}

    manifest: list[tuple[str, str]] = []
    summaries: dict[str, ev.ScoreSummary] = {}
    for family in families:  # canonical order regardless of completion order
        result = results[family]
        summaries[family] = ev.summarize(result)
        _write_family_tree(result, os.path.join(staging, family), manifest)
    report = ev.compare_methods(summaries)
    report_lines = ["family,metric,raw_median,pca_median,hmm_median,ordering"]
    for family in families:
        entry = report["families"][family]
        for metric in ("precision", "recall"):
            meds = entry[metric]["medians"]
            cells = [("n/a" if meds[m] is None else f"{meds[m]:.6f}")
                     for m in (det.METHOD_RAW, det.METHOD_PCA, det.METHOD_HMM)]
            report_lines.append(
                f"{family},{metric},{','.join(cells)},{'>'.join(entry[metric]['ordering'])}")
    for name, value in report["claims"].items():
        report_lines.append(f"# claim {name}: {'holds' if value else 'FAILS'}")
    _write_atomic(os.path.join(staging, "comparison.csv"), "\n".join(report_lines) + "\n")
    manifest.append(("comparison.csv", ev.scenario_fingerprint(sim.ScenarioSpec())))
    lines = ["path,spec_fingerprint"] + [f"{p},{fp}" for p, fp in sorted(manifest)]
    _write_atomic(os.path.join(staging, "manifest.csv"), "\n".join(lines) + "\n")

    if os.path.exists(out):
        os.rmdir(out)
    os.replace(staging, out)
    for name, value in report["claims"].items():
        print(f"claim {name}: {'holds' if value else 'FAILS'}")
    print(f"evaluation tree written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apanomaly",
        description="Simulate WLAN access-point usage and detect anomalous time-slots.",
        epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario and write its session log",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="flat key=value scenario file (defaults used if omitted)")
    p.add_argument("--seed", type=int, default=None, help="override run.seed")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    p.add_argument("--out", required=True, help="session log output path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("featurize", help="aggregate a session log into per-slot features")
    p.add_argument("--sessions", required=True, help="session log path")
    p.add_argument("--ap", type=int, required=True, help="AP id to featurize")
    p.add_argument("--slot", type=float, default=15.0, help="slot length in seconds")
    p.add_argument("--duration", type=float, default=600.0, help="run duration in seconds")
    p.add_argument("--out", required=True, help="feature matrix output path")
    p.set_defaults(func=_cmd_featurize)

    p = sub.add_parser("train", help="fit the PCA reduction and the normal-behavior HMM")
    p.add_argument("--features", nargs="+", required=True,
                   help="one or more training feature matrices")
    p.add_argument("--states", type=int, default=3, help="hidden state count")
    p.add_argument("--components", type=int, default=3, help="PCA component count")
    p.add_argument("--restarts", type=int, default=5, help="random restarts")
    p.add_argument("--max-iterations", type=int, default=20)
    p.add_argument("--tolerance", type=float, default=1e-6,
                   help="relative log-likelihood improvement cutoff")
    p.add_argument("--seed", type=int, default=0, help="initialization seed")
    p.add_argument("--out-model", required=True, help="HMM model output path")
    p.add_argument("--out-pca", help="PCA model output path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("score", help="per-slot log-likelihood of a run under a trained model")
    p.add_argument("--model", required=True, help="HMM model path")
    p.add_argument("--pca", required=True, help="PCA model path")
    p.add_argument("--features", required=True, help="feature matrix path")
    p.add_argument("--out", required=True, help="likelihood series output path")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("detect", help="flag anomalous slots with the quarter-of-mode rule")
    p.add_argument("--series", help="likelihood series path (hmm method)")
    p.add_argument("--features", help="feature matrix path (raw/pca methods)")
    p.add_argument("--pca", help="PCA model path (pca method)")
    p.add_argument("--method", choices=("hmm", "raw", "pca"), required=True)
    p.add_argument("--bins", type=int, default=None,
                   help="histogram bin count (default: ceil(sqrt(N)))")
    p.add_argument("--mode-fraction", type=float, default=0.25,
                   help="cut at bins below this fraction of the mode frequency")
    p.add_argument("--tails", choices=("low", "both"), default=None,
                   help="scan direction (default: low for hmm, both otherwise)")
    p.add_argument("--out", required=True, help="detections output path")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("eval", help="train on normal replicates, score one scenario family")
    p.add_argument("--family", choices=ev.FAMILIES, required=True)
    p.add_argument("--seeds", default="1..10", help="test seeds, e.g. 1..10 or 1,3,5")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("repro", help="run every scenario family end-to-end")
    p.add_argument("--out", required=True, help="output directory (must not exist)")
    p.add_argument("--jobs", type=int, default=1, help="concurrent family cells")
    p.set_defaults(func=_cmd_repro)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

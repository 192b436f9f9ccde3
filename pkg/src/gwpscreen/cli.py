"""``gwp-screen`` command line: featurize, train, predict, analyze.

Exit codes are 0 on success, 1 for a domain failure (bad rows, too few
successful trials) and 2 for I/O or artifact problems.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from gwpscreen import __version__, nnet
from gwpscreen.analysis import evaluate, histogram, parity_triples, pc_loadings, permutation_sensitivity
from gwpscreen.descriptors import DESCRIPTOR_NAMES, FEATURE_SCHEMA_VERSION, FeatureMatrix, featurize
from gwpscreen.errors import ArtifactVersionError, GwpScreenError, NotEnoughTrials
from gwpscreen.io import (
    ConfigError,
    DatasetError,
    ExperimentConfig,
    load_config,
    load_ensemble,
    read_dataset,
    read_smiles_table,
    save_ensemble,
    sha256_file,
    write_json,
)
from gwpscreen.molgraph import parse_smiles
from gwpscreen.tuner import autotune, ensemble_top_k, predict, prepare_dataset

log = logging.getLogger("gwpscreen.cli")

EXIT_OK, EXIT_FAIL, EXIT_IO = 0, 1, 2

TRIAL_COLUMNS = ("trial", "epochs", "layers", "neurons", "batch", "activation",
                 "rmse_qt", "r2_qt", "rmse_orig", "r2_orig", "status")


def _err(msg: str) -> None:
    print(f"gwp-screen: {msg}", file=sys.stderr)


def _featurize_row(smiles: str) -> list[float] | str:
    try:
        return list(featurize(parse_smiles(smiles)).values())
    except GwpScreenError as exc:
        return f"{type(exc).__name__}: {exc}"


def _featurize_all(smiles: list[str], workers: int) -> list[list[float] | str]:
    if workers > 1 and len(smiles) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_featurize_row, smiles, chunksize=8))
    return [_featurize_row(s) for s in smiles]


def _fmt(x: float) -> str:
    return repr(float(x))


# --------------------------------------------------------------------------
# featurize


def cmd_featurize(args: argparse.Namespace) -> int:
    try:
        rows = read_smiles_table(args.input)
    except (OSError, UnicodeDecodeError, DatasetError) as exc:
        _err(f"cannot read {args.input}: {exc}")
        return EXIT_IO
    results = _featurize_all([s for _, _, s in rows], args.workers)
    ids, values, failures = [], [], 0
    for (n, mid, smi), res in zip(rows, results):
        if isinstance(res, str):
            failures += 1
            _err(f"row {n} (id {mid!r}, smiles {smi!r}): {res}")
        else:
            ids.append(mid)
            values.append(res)
    out = Path(args.output)
    if failures:
        out = out.with_name(out.name + ".partial")
    matrix = FeatureMatrix.build(DESCRIPTOR_NAMES, ids, np.array(values, dtype=float).reshape(len(ids), -1))
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        if out.suffix == ".npz" or out.name.endswith(".npz.partial"):
            matrix.save(out)
        else:
            matrix.to_csv(out)
            write_json(
                out.with_name(out.name + ".meta.json"),
                {"schema_version": FEATURE_SCHEMA_VERSION, "drop_list": list(matrix.drop_list),
                 "n_rows": len(ids), "n_failed": failures, "package_version": __version__},
            )
    except OSError as exc:
        _err(f"cannot write {out}: {exc}")
        return EXIT_IO
    print(f"featurized {len(ids)} of {len(rows)} rows -> {out}")
    return EXIT_FAIL if failures else EXIT_OK


# --------------------------------------------------------------------------
# train


def _load_experiment(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
    elif args.input and args.output:
        cfg = ExperimentConfig(dataset=str(Path(args.input).resolve()), output_dir=str(Path(args.output).resolve()))
    else:
        raise ConfigError("give --config, or both --input and --output")
    return cfg.with_overrides(
        dataset=str(Path(args.input).resolve()) if args.input else None,
        output_dir=str(Path(args.output).resolve()) if args.output else None,
        seed=args.seed,
        workers=args.workers,
        budget=args.budget,
        k=args.k,
    )


def _prepare(cfg: ExperimentConfig, workers: int):
    records = read_dataset(cfg.dataset)
    results = _featurize_all([r.smiles for r in records], workers)
    bad = [(r.id, res) for r, res in zip(records, results) if isinstance(res, str)]
    if bad:
        raise DatasetError(f"{len(bad)} molecule(s) failed featurization", [(0, f"{i}: {m}") for i, m in bad])
    features = FeatureMatrix.build(DESCRIPTOR_NAMES, [r.id for r in records], np.array(results, dtype=float))
    y = np.array([r.gwp100 for r in records])
    return records, prepare_dataset(features, y, cfg.seed, cfg.pca_threshold)


def _write_trials(path: Path, trials) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_COLUMNS)
        for t in trials:
            s = t.summary()
            w.writerow([_fmt(s[c]) if isinstance(s[c], float) else s[c] for c in TRIAL_COLUMNS])


def cmd_train(args: argparse.Namespace) -> int:
    try:
        cfg = _load_experiment(args)
        if not Path(cfg.dataset).is_file():
            raise ConfigError(f"dataset {cfg.dataset} does not exist")
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
    except (ConfigError, OSError) as exc:
        _err(str(exc))
        return EXIT_IO
    try:
        _, data = _prepare(cfg, cfg.workers)
    except DatasetError as exc:
        _err(str(exc))
        for n, msg in exc.problems:
            _err(f"  row {n}: {msg}" if n else f"  {msg}")
        return EXIT_FAIL
    except (OSError, UnicodeDecodeError) as exc:
        _err(f"cannot read dataset: {exc}")
        return EXIT_IO
    except GwpScreenError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_FAIL
    log.info("%d compounds, %d principal components", data.n, data.scores.shape[1])
    trials = autotune(data, cfg.search_space, cfg.budget, cfg.seed, cfg.workers)
    _write_trials(out / "trials.csv", trials)
    dataset_hash = sha256_file(cfg.dataset)
    manifest = {
        "package_version": __version__,
        "seed": cfg.seed,
        "config": cfg.fingerprint(),
        "config_hash": cfg.config_hash(),
        "dataset_hash": dataset_hash,
        "n_compounds": data.n,
        "n_components": int(data.scores.shape[1]),
        "n_trials_ok": sum(t.ok for t in trials),
        "kernel_backend": nnet.BACKEND,
    }
    write_json(out / "manifest.json", manifest)
    try:
        ensemble = ensemble_top_k(trials, data, cfg.k, cfg.ensemble_average_scale)
    except NotEnoughTrials as exc:
        _err(f"NotEnoughTrials: {exc}")
        return EXIT_FAIL
    ensemble.metadata.update(
        {
            "seed": cfg.seed,
            "config_hash": cfg.config_hash(),
            "dataset_hash": dataset_hash,
            "test_ids": [data.ids[i] for i in data.split.test],
            "n_repeats": cfg.n_repeats,
            "reference_rmse": cfg.reference_rmse,
            "reference_r2": cfg.reference_r2,
            "reference_n_components": cfg.reference_n_components,
        }
    )
    save_ensemble(out / "ensemble.json", ensemble)
    best = trials[0]
    print(f"trained {len(trials)} trials; best rmse_qt {best.rmse_qt:.4f}; ensemble of {cfg.k} -> {out / 'ensemble.json'}")
    return EXIT_OK


# --------------------------------------------------------------------------
# predict


def cmd_predict(args: argparse.Namespace) -> int:
    if not args.model:
        _err("predict needs --model")
        return EXIT_IO
    try:
        ensemble = load_ensemble(args.model)
        rows = read_smiles_table(args.input)
        records = predict(ensemble, [s for _, _, s in rows], [i for _, i, _ in rows])
    except ArtifactVersionError as exc:
        _err(f"ArtifactVersionError: {exc}")
        return EXIT_IO
    except (OSError, UnicodeDecodeError, DatasetError) as exc:
        _err(f"cannot read {args.input}: {exc}")
        return EXIT_IO
    lines = []
    for (n, _, _), r in zip(rows, records):
        if r.ok:
            lines.append([r.id, _fmt(r.gwp100_pred), _fmt(r.qt_value), str(r.clamped).lower(), ""])
        else:
            _err(f"row {n} (id {r.id!r}): {r.error}")
            lines.append([r.id, "", "", "", r.error])
    try:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "gwp100_pred", "qt_value", "clamped", "error"])
            w.writerows(lines)
    except OSError as exc:
        _err(f"cannot write {args.output}: {exc}")
        return EXIT_IO
    n_ok = sum(r.ok for r in records)
    print(f"predicted {n_ok} of {len(records)} molecules -> {args.output}")
    return EXIT_OK if n_ok or not records else EXIT_FAIL


# --------------------------------------------------------------------------
# analyze


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) if isinstance(v, float) else v for v in r])


def cmd_analyze(args: argparse.Namespace) -> int:
    if not (args.model and args.input and args.output):
        _err("analyze needs --model, --input and --output")
        return EXIT_IO
    try:
        ensemble = load_ensemble(args.model)
        records = read_dataset(args.input)
    except ArtifactVersionError as exc:
        _err(f"ArtifactVersionError: {exc}")
        return EXIT_IO
    except (OSError, UnicodeDecodeError) as exc:
        _err(f"cannot read inputs: {exc}")
        return EXIT_IO
    except DatasetError as exc:
        _err(str(exc))
        return EXIT_FAIL
    meta = ensemble.metadata
    results = _featurize_all([r.smiles for r in records], 1)
    keep = [i for i, res in enumerate(results) if not isinstance(res, str)]
    x = np.array([results[i] for i in keep], dtype=float)
    y = np.array([records[i].gwp100 for i in keep])
    ids = [records[i].id for i in keep]
    test_ids = set(meta.get("test_ids", []))
    test = np.array([j for j, mid in enumerate(ids) if mid in test_ids], dtype=int)
    pool = np.array([j for j, mid in enumerate(ids) if mid not in test_ids], dtype=int)
    if test.size == 0 or pool.size < 2:
        _err("dataset shares no test compounds with the ensemble")
        return EXIT_FAIL
    scores = ensemble.pipeline.transform(x)
    seed = args.seed if args.seed is not None else int(meta.get("seed", 0))
    n_repeats = int(meta.get("n_repeats", 30))
    ref_rmse = args.reference_rmse if args.reference_rmse is not None else meta.get("reference_rmse")
    ref_r2 = args.reference_r2 if args.reference_r2 is not None else meta.get("reference_r2")

    test_m = evaluate(ensemble, scores[test], y[test])
    pool_m = evaluate(ensemble, scores[pool], y[pool])
    sens = permutation_sensitivity(ensemble, scores[pool], y[pool], seed, n_repeats)
    loadings = [pc_loadings(ensemble.pipeline.pca, j, 5) for j in sens.top(3)]
    edges_b, counts_b = histogram(y[pool], 10)
    edges_a, counts_a = histogram(ensemble.qt.transform(y[pool]), 10)
    parity = parity_triples(ensemble, scores[test], y[test])

    out = Path(args.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
        report = {
            "n_compounds": len(ids),
            "n_test": int(test.size),
            "n_pool": int(pool.size),
            "n_components": ensemble.pipeline.n_components,
            "dataset_hash": sha256_file(args.input),
            "trained_dataset_hash": meta.get("dataset_hash"),
            "test_metrics": test_m.to_dict(),
            "pool_metrics": pool_m.to_dict(),
            "reference": {"rmse_orig": ref_rmse, "r2_orig": ref_r2,
                          "n_components": meta.get("reference_n_components")},
            "sensitivity": sens.to_dict(),
            "loadings": [r for rep in loadings for r in rep.rows()],
            "histograms": {
                "before_qt": {"edges": edges_b.tolist(), "counts": counts_b.tolist()},
                "after_qt": {"edges": edges_a.tolist(), "counts": counts_a.tolist()},
            },
        }
        write_json(out / "report.json", report)
        write_json(out / "metrics.json", {"test": test_m.to_dict(), "pool": pool_m.to_dict(),
                                          "reference": report["reference"]})
        write_json(out / "sensitivity.json", sens.to_dict())
        _write_csv(out / "sensitivity.csv", ["rank", "pc", "impact", "importance", "importance_se"],
                   [list(r.values()) for r in sens.rows()])
        _write_csv(out / "loadings.csv", ["pc", "descriptor", "loading"],
                   [list(r.values()) for r in report["loadings"]])
        hist_rows = [
            [name, float(lo), float(hi), int(c)]
            for name, edges, counts in (("before_qt", edges_b, counts_b), ("after_qt", edges_a, counts_a))
            for lo, hi, c in zip(edges[:-1], edges[1:], counts)
        ]
        _write_csv(out / "histograms.csv", ["which", "bin_low", "bin_high", "count"], hist_rows)
        _write_csv(out / "parity.csv", ["truth", "prediction", "model_id"], parity)
    except OSError as exc:
        _err(f"cannot write reports: {exc}")
        return EXIT_IO

    ref_pcs = meta.get("reference_n_components")
    lines = [
        f"test set: {test.size} compounds of {len(ids)}",
        f"principal components retained: {ensemble.pipeline.n_components}"
        + (f"   reference {ref_pcs}" if ref_pcs is not None else ""),
        f"test RMSE (original) {test_m.rmse_orig:.1f}   R2 (original) {test_m.r2_orig:.3f}",
        f"test RMSE (QT)       {test_m.rmse_qt:.4f}   R2 (QT)       {test_m.r2_qt:.3f}",
    ]
    if ref_rmse is not None or ref_r2 is not None:
        lines.append(f"reference RMSE {ref_rmse}   reference R2 {ref_r2}")
    lines.append("top PCs by |impact|: " + ", ".join(f"{lab} {val:+.1f}" for lab, val in sens.bars()[:3]))
    for rep in loadings:
        lines.append(f"  {rep.label}: " + ", ".join(f"{n} {v:+.4f}" for n, v in rep.pairs))
    text = "\n".join(lines) + "\n"
    (out / "report.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gwp-screen", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", help="INI experiment config")
        sp.add_argument("--input", help="input CSV")
        sp.add_argument("--output", help="output file or directory")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--budget", type=int)
        sp.add_argument("--k", type=int)

    f = sub.add_parser("featurize", help="descriptor matrix from an id,smiles[,...] CSV")
    common(f)
    f.set_defaults(func=cmd_featurize)
    t = sub.add_parser("train", help="auto-tune networks and write the top-k ensemble")
    common(t)
    t.set_defaults(func=cmd_train)
    pr = sub.add_parser("predict", help="GWP100 predictions for an id,smiles CSV")
    common(pr)
    pr.add_argument("--model", help="ensemble JSON artifact")
    pr.set_defaults(func=cmd_predict)
    a = sub.add_parser("analyze", help="test metrics, PC sensitivity, loadings and histograms")
    common(a)
    a.add_argument("--model", help="ensemble JSON artifact")
    a.add_argument("--reference-rmse", type=float, help="reference test RMSE to print beside the measured one")
    a.add_argument("--reference-r2", type=float, help="reference test R2 to print beside the measured one")
    a.set_defaults(func=cmd_analyze)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "featurize":
        missing = [flag for flag in ("input", "output") if not getattr(args, flag)]
        if missing:
            _err(f"featurize needs --{' and --'.join(missing)}")
            return EXIT_IO
        args.workers = args.workers or 1
    if args.command == "predict" and not (args.input and args.output):
        _err("predict needs --input and --output")
        return EXIT_IO
    if args.command == "analyze" and args.config and not args.model:
        try:
            cfg = load_config(args.config)
        except ConfigError as exc:
            _err(str(exc))
            return EXIT_IO
        args.model = str(Path(cfg.output_dir) / "ensemble.json")
        args.input = args.input or cfg.dataset
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: curate, train, evaluate, ablate, predict, bench.

Configuration comes from an optional TOML file plus flag overrides; flags
win, and REP3NET_SEED overrides whatever seed either of them set. Exit
codes: 0 success, 1 usage, 2 data error, 3 numeric failure. Failures emit
one machine-readable JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .checkpoint import load_checkpoint
from .data import TargetScaler, curate, make_cv_splits
from .exceptions import DataError, NumericError, Rep3NetError
from .model import (
    FusionConfig,
    Rep3Net,
    TrainedModel,
    ablation_ordering_flags,
    format_ablation_table,
)
from .pipeline import (
    PRNG_ID,
    RunConfig,
    build_modality_data,
    config_hash,
    data_for_smiles,
    dict_hash,
    run_ablation,
    run_training,
    write_curation_artifacts,
)

MODALITY_NAMES = ("descriptors", "embeddings", "graph")


class _UsageError(Exception):
    """Bad command line that argparse cannot catch (missing config value)."""


class _Parser(argparse.ArgumentParser):
    # spec fixes usage errors at exit code 1; argparse defaults to 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self._exit_with(message))

    @staticmethod
    def _exit_with(message: str) -> int:
        _emit_error("UsageError", message)
        return 1


def _emit_error(kind: str, message: str) -> None:
    line = json.dumps({"error": kind, "message": message}, sort_keys=True)
    print(line, file=sys.stderr)


def _parse_modalities(text: str) -> frozenset:
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    unknown = sorted(set(tokens) - set(MODALITY_NAMES))
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown modalities {unknown}; choose from {list(MODALITY_NAMES)}"
        )
    if not tokens:
        raise argparse.ArgumentTypeError("at least one modality is required")
    return frozenset(tokens)


def _add_io_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML config file; flags override it")
    p.add_argument("--input", help="activity CSV (ChEMBL-style columns)")
    p.add_argument("--output", help="output directory")
    p.add_argument("--embeddings", help="R3EMB1 embedding store")


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--lr-min", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--weight-decay", type=float)
    p.add_argument("--dropout", type=float)
    p.add_argument("--fc1-width", type=int)
    p.add_argument("--fc2-width", type=int)
    p.add_argument("--gcn-hidden", type=int)
    p.add_argument("--gcn-dropout", type=float)
    p.add_argument("--modalities", type=_parse_modalities,
                   help="comma list from descriptors,embeddings,graph")
    p.add_argument("--variance-threshold", type=float)
    p.add_argument("--correlation-threshold", type=float)


_FUSION_FLAGS = (
    ("seed", "seed"),
    ("epochs", "epochs"),
    ("lr", "lr"),
    ("lr_min", "lr_min"),
    ("batch_size", "batch_size"),
    ("weight_decay", "weight_decay"),
    ("dropout", "dropout_p"),
    ("fc1_width", "fc1_width"),
    ("fc2_width", "fc2_width"),
    ("gcn_hidden", "gcn_hidden"),
    ("gcn_dropout", "gcn_dropout"),
)


def _build_run_config(args, *, need_output: bool = True) -> RunConfig:
    payload = {}
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path, "rb") as fh:
                payload = tomllib.load(fh)
        except OSError as exc:
            raise DataError(f"cannot read config file {config_path}: {exc}")
        except tomllib.TOMLDecodeError as exc:
            raise DataError(f"malformed config file {config_path}: {exc}")
    fusion = payload.pop("fusion", {})
    if not isinstance(fusion, dict):
        raise DataError("config key 'fusion' must be a table")

    for attr, key in (
        ("input", "input_csv"),
        ("output", "output_dir"),
        ("embeddings", "embeddings_path"),
        ("folds", "folds"),
        ("variance_threshold", "variance_threshold"),
        ("correlation_threshold", "correlation_threshold"),
    ):
        value = getattr(args, attr, None)
        if value is not None:
            payload[key] = value
    for attr, key in _FUSION_FLAGS:
        value = getattr(args, attr, None)
        if value is not None:
            fusion[key] = value
    modalities = getattr(args, "modalities", None)
    if modalities is not None:
        fusion["use_descriptors"] = "descriptors" in modalities
        fusion["use_embeddings"] = "embeddings" in modalities
        fusion["use_graph"] = "graph" in modalities

    env_seed = os.environ.get("REP3NET_SEED")
    if env_seed is not None:
        try:
            fusion["seed"] = int(env_seed)
        except ValueError:
            raise DataError(f"REP3NET_SEED must be an integer, got {env_seed!r}")

    if not payload.get("input_csv"):
        raise _UsageError("an input CSV is required (--input or config input_csv)")
    if not payload.get("output_dir"):
        if need_output:
            raise _UsageError(
                "an output directory is required (--output or config output_dir)"
            )
        payload["output_dir"] = "."
    payload["fusion"] = fusion
    return RunConfig.from_dict(payload)


def _provenance_line(h: str) -> str:
    return f"# config_hash={h} prng={PRNG_ID}"


def cmd_curate(args) -> int:
    config = _build_run_config(args)
    out_dir = Path(config.output_dir)
    compounds, report = write_curation_artifacts(config, out_dir)
    print(_provenance_line(config_hash(config)))
    print(json.dumps(report.as_dict(), sort_keys=True))
    print(f"wrote {out_dir / 'compounds.csv'} ({len(compounds)} compounds)")
    return 0


def cmd_train(args) -> int:
    config = _build_run_config(args)
    result = run_training(config, jobs=args.jobs)
    print(_provenance_line(config_hash(config)))
    for i, report in enumerate(result["fold_reports"]):
        print(
            f"fold {i}: test_mse={report.mse:.6f} r2={report.r2:.6f} "
            f"pearson={report.pearson:.6f}"
        )
    agg = result["aggregate"]
    print(
        f"aggregate over {agg.k} folds: "
        f"mse={agg.mean['mse']:.6f} ± {agg.ci_half_width['mse']:.6f} (95% CI)"
    )
    print(f"wrote {result['output_dir']}")
    return 0


def cmd_evaluate(args) -> int:
    model = load_checkpoint(args.checkpoint)
    compounds, _ = curate(args.input)
    data = build_modality_data(compounds, model.config, args.embeddings)
    if args.fold is not None:
        splits = make_cv_splits(len(compounds), seed=model.config.seed,
                                k=args.folds)
        if not 0 <= args.fold < len(splits):
            raise DataError(f"fold {args.fold} out of range for k={args.folds}")
        indices = splits[args.fold].test
        scope = f"fold {args.fold} test split"
    else:
        indices = list(range(len(compounds)))
        scope = "all compounds"
    report = model.evaluate(data, indices)
    natural = model.natural_units_errors(data, indices)
    print(_provenance_line(dict_hash(model.config.as_dict())))
    print(json.dumps(
        {"scope": scope, "metrics_standardized": report.as_dict(),
         "natural_units": natural},
        sort_keys=True,
    ))
    return 0


def cmd_ablate(args) -> int:
    config = _build_run_config(args)
    rows = run_ablation(config)
    print(_provenance_line(config_hash(config)))
    print(format_ablation_table(rows))
    for flag in ablation_ordering_flags(rows):
        print(f"ordering: {flag}")
    print(f"wrote {Path(config.output_dir) / 'ablation.csv'}")
    return 0


def cmd_predict(args) -> int:
    model = load_checkpoint(args.checkpoint)
    data = data_for_smiles(args.smiles, model.config, args.embeddings)
    standardized = model.predict_standardized(data, range(data.n))
    if not np.all(np.isfinite(standardized)):
        raise NumericError("model produced a non-finite prediction")
    natural = model.scaler.invert(standardized)
    print(_provenance_line(dict_hash(model.config.as_dict())))
    print("canonical_smiles\tpic50_standardized\tpic50")
    for smi, z, y in zip(data.smiles, standardized, natural):
        print(f"{smi}\t{float(z)!r}\t{float(y)!r}")
    return 0


def _bench_model(args) -> TrainedModel:
    if args.checkpoint:
        return load_checkpoint(args.checkpoint)
    # no checkpoint: time a randomly initialized graph-only network
    config = FusionConfig(use_descriptors=False, use_embeddings=False,
                          use_graph=True)
    net = Rep3Net(config, desc_width=0, emb_width=0,
                  rng=np.random.default_rng(0))
    return TrainedModel(net=net, scaler=TargetScaler(mean=0.0, std=1.0),
                        config=config, best_epoch=0)


def cmd_bench(args) -> int:
    if args.repeats < 1:
        raise _UsageError(f"--repeats must be >= 1, got {args.repeats}")
    model = _bench_model(args)
    print(f"# repeats={args.repeats}; timings are machine dependent "
          f"and non-deterministic")
    for smi in args.smiles:
        t0 = time.perf_counter()
        for _ in range(args.repeats):
            data = data_for_smiles([smi], model.config, args.embeddings)
        featurize_ms = (time.perf_counter() - t0) / args.repeats * 1e3

        t0 = time.perf_counter()
        for _ in range(args.repeats):
            model.predict_standardized(data, [0])
        forward_ms = (time.perf_counter() - t0) / args.repeats * 1e3
        print(f"{smi}\tfeaturize_ms={featurize_ms:.4f}"
              f"\tforward_ms={forward_ms:.4f}")
    return 0


def cmd_embed_check(args) -> int:
    from .embeddings import read_store

    store = read_store(args.store)
    print(f"{args.store}: ok, {len(store.entries)} embeddings, dim={store.dim}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rep3net",
                     description="multimodal pIC50 prediction pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curate", help="filter and aggregate a CSV")
    _add_io_flags(p)
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("train", help="cross-validated training run")
    _add_io_flags(p)
    _add_train_flags(p)
    p.add_argument("--jobs", type=int, default=1,
                   help="train up to N folds concurrently")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a checkpoint on a dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True, help="activity CSV")
    p.add_argument("--embeddings")
    p.add_argument("--fold", type=int,
                   help="restrict to this fold's test split")
    p.add_argument("--folds", type=int, default=5,
                   help="fold count used to recompute splits")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="train the 7-row modality grid")
    _add_io_flags(p)
    _add_train_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("predict", help="pIC50 for ad-hoc SMILES")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--embeddings")
    p.add_argument("smiles", nargs="+")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("bench", help="per-molecule latency timings")
    p.add_argument("--checkpoint")
    p.add_argument("--embeddings")
    p.add_argument("--smiles", nargs="+", default=["CCO"])
    p.add_argument("--repeats", type=int, default=1000)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("embed-check", help="validate an R3EMB1 store")
    p.add_argument("store")
    p.set_defaults(func=cmd_embed_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse help exits 0; our error() override exits 1
        return int(exc.code or 0)
    try:
        return int(args.func(args))
    except _UsageError as exc:
        _emit_error("UsageError", str(exc))
        return 1
    except NumericError as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 3
    except Rep3NetError as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 2
    except OSError as exc:
        _emit_error("OSError", str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Run orchestration: curated artifacts, per-fold training, aggregate tables.

Every artifact here is a pure function of its RunConfig: no timestamps,
sorted JSON keys, floats written through repr. Each output carries the
config hash and the PRNG identifier so reruns are diffable and a second
run over the same inputs produces byte-identical files.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .checkpoint import save_checkpoint
from .chem import canonical_smiles, parse_smiles
from .data import CuratedCompound, curate, make_cv_splits, write_curated_csv
from .descriptors import descriptor_matrix
from .embeddings import join, read_store
from .exceptions import DataError
from .graphs import build_graph
from .metrics import METRIC_NAMES, aggregate_folds
from .model import (
    FusionConfig,
    ModalityData,
    ablate,
    ablation_ordering_flags,
    format_ablation_table,
    train_fold,
)

# np.random.default_rng bit generator, fixed project wide; recorded in every
# artifact so a different generator cannot silently change the results.
PRNG_ID = "PCG64"


@dataclass
class RunConfig:
    """Paths, fold count and filter thresholds around a FusionConfig."""

    input_csv: str
    output_dir: str
    embeddings_path: Optional[str] = None
    folds: int = 5
    variance_threshold: float = 0.01
    correlation_threshold: float = 0.9
    fusion: FusionConfig = field(default_factory=FusionConfig)

    def __post_init__(self) -> None:
        if not self.input_csv:
            raise DataError("input_csv is required")
        if not self.output_dir:
            raise DataError("output_dir is required")
        if self.folds < 2:
            raise DataError(f"folds must be >= 2, got {self.folds}")
        if self.variance_threshold < 0:
            raise DataError("variance_threshold must be >= 0")
        if not 0 < self.correlation_threshold <= 1:
            raise DataError("correlation_threshold must be in (0, 1]")

    @property
    def seed(self) -> int:
        return self.fusion.seed

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["fusion"] = self.fusion.as_dict()
        return out

    @classmethod
    def from_dict(cls, payload: dict) -> "RunConfig":
        payload = dict(payload)
        fusion = payload.pop("fusion", {})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise DataError(f"unknown run config keys: {unknown}")
        return cls(fusion=FusionConfig.from_dict(fusion), **payload)


def dict_hash(payload: dict) -> str:
    """sha256 over the canonical compact JSON form of a plain dict."""
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def config_hash(config: RunConfig) -> str:
    return dict_hash(config.as_dict())


def _provenance(config: RunConfig) -> dict:
    return {"config_hash": config_hash(config), "prng": PRNG_ID}


def _write_json(path: Path, payload: dict) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    path.write_text(text, encoding="utf-8")


def build_modality_data(
    compounds,
    fusion: FusionConfig,
    embeddings_path: Optional[str] = None,
    *,
    require_all: bool = False,
) -> ModalityData:
    """Featurize curated compounds into the modalities the run needs.

    Re-parses each canonical SMILES once and reuses the molecule for both
    descriptors and graphs. With require_all every modality is built no
    matter what the fusion flags say (the ablation grid needs all three).
    """
    if not compounds:
        raise DataError("no curated compounds to featurize")
    smiles = [c.canonical_smiles for c in compounds]
    targets = np.array([c.pic50 for c in compounds], dtype=np.float64)
    need_desc = require_all or fusion.use_descriptors
    need_graph = require_all or fusion.use_graph
    need_emb = require_all or fusion.use_embeddings

    descriptors = embeddings = graphs = None
    if need_desc or need_graph:
        mols = [parse_smiles(s) for s in smiles]
        if need_desc:
            descriptors = descriptor_matrix(mols)
        if need_graph:
            graphs = [build_graph(m) for m in mols]
    if need_emb:
        if not embeddings_path:
            raise DataError("embeddings requested but no embeddings_path given")
        store = read_store(embeddings_path)
        matrix, _, _ = join(store, smiles, missing="error")
        embeddings = matrix
    return ModalityData(
        smiles=smiles,
        targets=targets,
        descriptors=descriptors,
        embeddings=embeddings,
        graphs=graphs,
    )


def write_curation_artifacts(config: RunConfig, out_dir: Path):
    """Curate the input CSV into out_dir; returns (compounds, drop report)."""
    out_dir.mkdir(parents=True, exist_ok=True)
    compounds, report = curate(config.input_csv)
    write_curated_csv(out_dir / "compounds.csv", compounds)
    _write_json(
        out_dir / "report.json",
        {**_provenance(config), "drop_report": report.as_dict(),
         "n_compounds": len(compounds)},
    )
    return compounds, report


def _fold_report_payload(config, split, model, report, natural) -> dict:
    return {
        **_provenance(config),
        "fold": split.fold_index,
        "best_epoch": model.best_epoch,
        "n_train": len(split.train),
        "n_val": len(split.val),
        "n_test": len(split.test),
        "metrics_standardized": report.as_dict(),
        "natural_units": natural,
    }


def _aggregate_csv(config: RunConfig, reports, path: Path) -> None:
    agg = aggregate_folds(reports)
    prov = _provenance(config)
    lines = [f"# config_hash={prov['config_hash']} prng={prov['prng']}"]
    fold_cols = ",".join(f"fold_{i}" for i in range(agg.k))
    lines.append(f"metric,mean,ci95_half_width,{fold_cols}")
    for name in METRIC_NAMES:
        values = ",".join(repr(getattr(r, name)) for r in reports)
        lines.append(
            f"{name},{agg.mean[name]!r},{agg.ci_half_width[name]!r},{values}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_training(config: RunConfig, jobs: int = 1) -> dict:
    """Full run: curate, featurize, train k folds, aggregate.

    Layout under config.output_dir:
      curated/ compounds.csv report.json
      folds/fold_{i}/ checkpoint.r3ckpt history.json report.json
      aggregate.csv run_config.json
    Fold training is independent, so jobs > 1 trains folds concurrently
    without changing any output byte.
    """
    if jobs < 1:
        raise DataError(f"jobs must be >= 1, got {jobs}")
    if config.fusion.use_embeddings and not config.embeddings_path:
        raise DataError("embedding modality enabled but no embeddings_path given")
    out = Path(config.output_dir)
    compounds, _ = write_curation_artifacts(config, out / "curated")
    data = build_modality_data(compounds, config.fusion, config.embeddings_path)
    splits = make_cv_splits(len(compounds), seed=config.seed, k=config.folds)

    def train_one(i: int):
        split = splits[i]
        fold_dir = out / "folds" / f"fold_{i}"
        fold_dir.mkdir(parents=True, exist_ok=True)
        model, history = train_fold(
            data,
            split,
            config.fusion,
            variance_threshold=config.variance_threshold,
            correlation_threshold=config.correlation_threshold,
        )
        save_checkpoint(model, fold_dir / "checkpoint.r3ckpt")
        _write_json(
            fold_dir / "history.json",
            {
                **_provenance(config),
                "fold": i,
                "best_epoch": model.best_epoch,
                "train_loss": history.train_loss,
                "val_mse": history.val_mse,
                "lr": history.lr,
            },
        )
        report = model.evaluate(data, split.test)
        natural = model.natural_units_errors(data, split.test)
        _write_json(
            fold_dir / "report.json",
            _fold_report_payload(config, split, model, report, natural),
        )
        return report

    if jobs == 1:
        reports = [train_one(i) for i in range(config.folds)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(train_one, range(config.folds)))

    _aggregate_csv(config, reports, out / "aggregate.csv")
    _write_json(
        out / "run_config.json",
        {
            **_provenance(config),
            "config": config.as_dict(),
            "n_compounds": len(compounds),
        },
    )
    return {
        "output_dir": str(out),
        "fold_reports": reports,
        "aggregate": aggregate_folds(reports),
    }


def run_ablation(config: RunConfig) -> list:
    """Train the 7-row modality grid and write ablation.csv / ablation.txt."""
    if config.embeddings_path is None:
        raise DataError("ablation needs all modalities; embeddings_path missing")
    out = Path(config.output_dir)
    compounds, _ = write_curation_artifacts(config, out / "curated")
    data = build_modality_data(
        compounds, config.fusion, config.embeddings_path, require_all=True
    )
    splits = make_cv_splits(len(compounds), seed=config.seed, k=config.folds)
    rows = ablate(
        data,
        splits,
        config.fusion,
        variance_threshold=config.variance_threshold,
        correlation_threshold=config.correlation_threshold,
    )

    prov = _provenance(config)
    lines = [f"# config_hash={prov['config_hash']} prng={prov['prng']}"]
    cols = ",".join(f"{m}_mean,{m}_ci95" for m in METRIC_NAMES)
    lines.append(f"modalities,{cols}")
    for row in rows:
        cells = ",".join(
            f"{row.aggregate.mean[m]!r},{row.aggregate.ci_half_width[m]!r}"
            for m in METRIC_NAMES
        )
        lines.append(f"{row.label},{cells}")
    (out / "ablation.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    table = format_ablation_table(rows)
    flags = ablation_ordering_flags(rows)
    if flags:
        notes = "\n".join(f"# ordering: {f}" for f in flags)
    else:
        notes = "# ordering: agrees with the reference grid on every pair"
    (out / "ablation.txt").write_text(
        f"{lines[0]}\n{table}\n{notes}\n", encoding="utf-8"
    )
    return rows


def data_for_smiles(
    smiles_list,
    fusion: FusionConfig,
    embeddings_path: Optional[str] = None,
) -> ModalityData:
    """Featurize ad-hoc SMILES for prediction with a trained model.

    Targets are placeholder zeros; predict paths never read them. The
    embedding store must cover every canonical SMILES when the model
    uses that modality.
    """
    if not smiles_list:
        raise DataError("no SMILES given")
    mols = [parse_smiles(s) for s in smiles_list]
    canon = [canonical_smiles(m) for m in mols]
    descriptors = descriptor_matrix(mols) if fusion.use_descriptors else None
    graphs = [build_graph(m) for m in mols] if fusion.use_graph else None
    embeddings = None
    if fusion.use_embeddings:
        if not embeddings_path:
            raise DataError(
                "model uses embeddings; pass the store that covers these SMILES"
            )
        store = read_store(embeddings_path)
        embeddings, _, _ = join(store, canon, missing="error")
    return ModalityData(
        smiles=canon,
        targets=np.zeros(len(canon), dtype=np.float64),
        descriptors=descriptors,
        embeddings=embeddings,
        graphs=graphs,
    )

"""Versioned binary checkpoint for trained models.

Layout: 6 magic bytes "R3CKPT", u32 LE version, u32 LE manifest byte
length, a UTF-8 JSON manifest, then the raw C-order little-endian array
bytes back to back in manifest order. Weights and running statistics are
<f4; the four feature-stat arrays are <f8 (they are float64 in memory and
the round trip must be lossless). The scaler scalars, config, retained
column indices and best_epoch live in the manifest. Serialization is
byte-deterministic: sorted JSON keys, no timestamps.
"""

from __future__ import annotations

import json
from typing import Optional

import numpy as np

from .descriptors.filtering import FeatureStats
from .data import TargetScaler
from .exceptions import DataError, FormatError
from .model import FusionConfig, Rep3Net, TrainedModel

MAGIC = b"R3CKPT"
VERSION = 1

_DTYPES = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8")}


def _collect_arrays(model: TrainedModel):
    """(name, array) pairs in serialization order."""
    pairs = [(name, arr) for name, arr in model.net.state_arrays().items()]
    if model.desc_stats is not None:
        pairs.append(("desc_stats.mean", model.desc_stats.mean))
        pairs.append(("desc_stats.std", model.desc_stats.std))
    if model.emb_stats is not None:
        pairs.append(("emb_stats.mean", model.emb_stats.mean))
        pairs.append(("emb_stats.std", model.emb_stats.std))
    return pairs


def save_checkpoint(model: TrainedModel, path) -> None:
    cfg = model.config
    if cfg.use_descriptors and model.desc_stats is None:
        raise DataError("model uses descriptors but has no fitted stats")
    if cfg.use_embeddings and model.emb_stats is None:
        raise DataError("model uses embeddings but has no fitted stats")
    pairs = _collect_arrays(model)
    manifest = {
        "config": cfg.as_dict(),
        "best_epoch": int(model.best_epoch),
        "scaler": {"mean": float(model.scaler.mean), "std": float(model.scaler.std)},
        "desc": None
        if model.desc_stats is None
        else {
            "in_width": int(model.desc_in_width),
            "retained": [int(i) for i in model.desc_stats.retained],
        },
        "emb": None
        if model.emb_stats is None
        else {
            "in_width": int(model.emb_in_width),
            "retained": [int(i) for i in model.emb_stats.retained],
        },
        "arrays": [
            {
                "name": name,
                "shape": list(arr.shape),
                "dtype": "<f8" if arr.dtype == np.float64 else "<f4",
            }
            for name, arr in pairs
        ],
    }
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.uint32(VERSION).tobytes())
        fh.write(np.uint32(len(blob)).tobytes())
        fh.write(blob)
        for entry, (name, arr) in zip(manifest["arrays"], pairs):
            fh.write(np.ascontiguousarray(arr, dtype=_DTYPES[entry["dtype"]]).tobytes())


def _read_exact(fh, n: int, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise FormatError(f"truncated checkpoint: expected {n} bytes of {what}, got {len(buf)}")
    return buf


_ARCH_FIELDS = (
    "use_descriptors",
    "use_embeddings",
    "use_graph",
    "fc1_width",
    "fc2_width",
    "gcn_hidden",
)


def load_checkpoint(path, expected_config: Optional[FusionConfig] = None) -> TrainedModel:
    """Rebuild a TrainedModel; every stored array is restored bit-exactly.

    expected_config, when given, must agree with the stored config on the
    modality flags and layer widths (training hyperparameters may differ).
    """
    with open(path, "rb") as fh:
        if _read_exact(fh, len(MAGIC), "magic") != MAGIC:
            raise FormatError("not an R3CKPT checkpoint")
        version = int(np.frombuffer(_read_exact(fh, 4, "version"), dtype="<u4")[0])
        if version != VERSION:
            raise FormatError(f"unsupported checkpoint version {version}")
        blob_len = int(np.frombuffer(_read_exact(fh, 4, "manifest length"), dtype="<u4")[0])
        blob = _read_exact(fh, blob_len, "manifest")
        try:
            manifest = json.loads(blob.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError(f"corrupt checkpoint manifest: {exc}") from exc
        for key in ("config", "best_epoch", "scaler", "desc", "emb", "arrays"):
            if key not in manifest:
                raise FormatError(f"checkpoint manifest missing key {key!r}")
        arrays = {}
        for entry in manifest["arrays"]:
            dtype = _DTYPES.get(entry.get("dtype"))
            if dtype is None:
                raise FormatError(f"unknown checkpoint dtype {entry.get('dtype')!r}")
            shape = tuple(int(d) for d in entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = _read_exact(fh, count * dtype.itemsize, f"array {entry['name']}")
            arrays[entry["name"]] = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
        if fh.read(1) != b"":
            raise FormatError("trailing bytes after checkpoint arrays")

    config = FusionConfig.from_dict(manifest["config"])
    if expected_config is not None:
        diffs = [
            f"{name}: checkpoint {getattr(config, name)!r} vs expected {getattr(expected_config, name)!r}"
            for name in _ARCH_FIELDS
            if getattr(config, name) != getattr(expected_config, name)
        ]
        if diffs:
            raise DataError("checkpoint does not fit the requested architecture: " + "; ".join(diffs))

    def stats_from(tag: str) -> Optional[FeatureStats]:
        meta = manifest[tag]
        if meta is None:
            return None
        for suffix in ("mean", "std"):
            if f"{tag}_stats.{suffix}" not in arrays:
                raise FormatError(f"checkpoint missing array {tag}_stats.{suffix}")
        return FeatureStats(
            mean=arrays[f"{tag}_stats.mean"],
            std=arrays[f"{tag}_stats.std"],
            retained=[int(i) for i in meta["retained"]],
        )

    desc_stats = stats_from("desc")
    emb_stats = stats_from("emb")
    if config.use_descriptors and desc_stats is None:
        raise FormatError("checkpoint config uses descriptors but stores no stats")
    if config.use_embeddings and emb_stats is None:
        raise FormatError("checkpoint config uses embeddings but stores no stats")

    net = Rep3Net(
        config,
        desc_width=len(desc_stats.retained) if desc_stats is not None else 0,
        emb_width=int(manifest["emb"]["in_width"]) if emb_stats is not None else 0,
        rng=np.random.default_rng(0),
    )
    state = {
        name: arr
        for name, arr in arrays.items()
        if not name.startswith(("desc_stats.", "emb_stats."))
    }
    net.load_state_arrays(state)

    scaler = TargetScaler(
        mean=float(manifest["scaler"]["mean"]), std=float(manifest["scaler"]["std"])
    )
    return TrainedModel(
        net=net,
        scaler=scaler,
        config=config,
        best_epoch=int(manifest["best_epoch"]),
        desc_stats=desc_stats,
        desc_in_width=int(manifest["desc"]["in_width"]) if desc_stats is not None else 0,
        emb_stats=emb_stats,
        emb_in_width=int(manifest["emb"]["in_width"]) if emb_stats is not None else 0,
    )

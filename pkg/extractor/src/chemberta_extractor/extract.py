"""Embed canonical SMILES with a frozen masked language model.

The model is used purely as a feature extractor: inference runs in eval
mode under no_grad, one fixed-size vector per unique canonical SMILES from
the last hidden layer. Default pooling is the mean over non-padding token
states, which makes a molecule's embedding independent of how the batch
around it was padded; `cls` pooling (first token) is available for
comparison.
"""

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .store import write_store

DEFAULT_MODEL = "seyonec/ChemBERTa-zinc-base-v1"
TOOL_VERSION = "0.1.0"
POOLINGS = ("mean", "cls")


class ExtractError(RuntimeError):
    """Extraction cannot proceed (bad input file, model load failure, ...)."""


@dataclass
class ExtractionManifest:
    """Provenance written alongside every store."""

    model: str
    pooling: str
    dim: int
    count: int
    tool_version: str = TOOL_VERSION
    skipped: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "pooling": self.pooling,
            "dim": self.dim,
            "count": self.count,
            "tool_version": self.tool_version,
            "skipped": list(self.skipped),
        }

    def write(self, path) -> None:
        payload = json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"
        directory = os.path.dirname(os.path.abspath(path)) or "."
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".json.tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def manifest_path(store_path) -> str:
    return str(store_path) + ".manifest.json"


def read_unique_smiles(csv_path):
    """Unique canonical SMILES in first-seen order, plus unusable rows.

    Empty or non-string cells cannot be embedded; they are returned in the
    skipped list so the manifest records them.
    """
    try:
        frame = pd.read_csv(csv_path)
    except Exception as exc:
        raise ExtractError(f"cannot read {csv_path}: {exc}") from exc
    if "canonical_smiles" not in frame.columns:
        raise ExtractError(f"{csv_path} has no canonical_smiles column")
    seen, unique, skipped = set(), [], []
    for i, cell in enumerate(frame["canonical_smiles"]):
        if not isinstance(cell, str) or not cell.strip():
            skipped.append(f"row {i}: empty or non-string SMILES")
            continue
        smi = cell.strip()
        if smi not in seen:
            seen.add(smi)
            unique.append(smi)
    return unique, skipped


def load_model(model_id):
    """Tokenizer + model in eval mode; any load failure is an ExtractError."""
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except Exception as exc:
        raise ExtractError(f"cannot load model {model_id!r}: {exc}") from exc
    model.eval()
    return tokenizer, model


def pool_hidden(hidden, attention_mask, pooling: str):
    """Reduce (batch, tokens, dim) hidden states to (batch, dim)."""
    if pooling == "mean":
        mask = attention_mask.unsqueeze(-1).to(hidden.dtype)
        return (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
    if pooling == "cls":
        return hidden[:, 0]
    raise ExtractError(f"unknown pooling {pooling!r}; choose from {POOLINGS}")


def embed_smiles(tokenizer, model, smiles, pooling: str = "mean", batch_size: int = 32):
    """Returns ({smiles: float32 vector}, [skip records]).

    A SMILES the tokenizer rejects is recorded and skipped rather than
    failing the whole run.
    """
    import torch

    if batch_size < 1:
        raise ExtractError(f"batch_size must be >= 1, got {batch_size}")
    if pooling not in POOLINGS:
        raise ExtractError(f"unknown pooling {pooling!r}; choose from {POOLINGS}")

    usable, skipped = [], []
    for smi in smiles:
        try:
            tokenizer(smi, truncation=True)
        except Exception as exc:
            skipped.append(f"{smi}: tokenizer failure: {exc}")
            continue
        usable.append(smi)

    entries = {}
    with torch.no_grad():
        for start in range(0, len(usable), batch_size):
            batch = usable[start : start + batch_size]
            enc = tokenizer(
                batch, padding=True, truncation=True, return_tensors="pt"
            )
            hidden = model(**enc).last_hidden_state
            pooled = pool_hidden(hidden, enc["attention_mask"], pooling)
            vecs = pooled.cpu().numpy().astype(np.float32)
            for smi, vec in zip(batch, vecs):
                entries[smi] = vec
    return entries, skipped


def extract(
    input_csv,
    out_path,
    model_id: str = DEFAULT_MODEL,
    pooling: str = "mean",
    batch_size: int = 32,
) -> ExtractionManifest:
    """Embed every unique canonical SMILES in input_csv into out_path.

    Writes the store and a `<out>.manifest.json` next to it, both
    atomically, and returns the manifest.
    """
    smiles, skipped = read_unique_smiles(input_csv)
    tokenizer, model = load_model(model_id)
    entries, tok_skipped = embed_smiles(
        tokenizer, model, smiles, pooling=pooling, batch_size=batch_size
    )
    skipped = skipped + tok_skipped
    if not entries:
        raise ExtractError(f"no embeddable rows in {input_csv}")
    dim = write_store(out_path, entries)
    manifest = ExtractionManifest(
        model=str(model_id),
        pooling=pooling,
        dim=dim,
        count=len(entries),
        skipped=skipped,
    )
    manifest.write(manifest_path(out_path))
    return manifest

"""Frozen-transformer SMILES embedding extraction into R3EMB1 stores."""

from .extract import (
    DEFAULT_MODEL,
    POOLINGS,
    TOOL_VERSION,
    ExtractError,
    ExtractionManifest,
    embed_smiles,
    extract,
    load_model,
    manifest_path,
    pool_hidden,
    read_unique_smiles,
)
from .store import MAGIC, StoreError, write_store

__version__ = TOOL_VERSION

__all__ = [
    "DEFAULT_MODEL",
    "ExtractError",
    "ExtractionManifest",
    "MAGIC",
    "POOLINGS",
    "StoreError",
    "embed_smiles",
    "extract",
    "load_model",
    "manifest_path",
    "pool_hidden",
    "read_unique_smiles",
    "write_store",
    "__version__",
]

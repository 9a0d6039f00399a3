"""Multimodal potency prediction from SMILES.

Subpackages: chem (parsing/canonicalization), descriptors, graphs
(featurization), nn (tensor layers and optimizer), gcn (graph encoder),
data (curation/splits), embeddings (binary store), model, metrics,
pipeline, cli.

The names re-exported here cover the standard workflow: curate a raw
activity CSV, build modality inputs, train cross-validated folds, and
persist or reload the result. Everything else stays importable from its
subpackage.
"""

from .checkpoint import load_checkpoint, save_checkpoint
from .chem import canonical_smiles, parse_smiles
from .data import curate, make_cv_splits, read_curated_csv, write_curated_csv
from .descriptors import DescriptorPipeline, compute_descriptors, descriptor_matrix
from .embeddings import EmbeddingStore, read_store, write_store
from .exceptions import (
    DataError,
    FormatError,
    NotFittedError,
    NumericError,
    Rep3NetError,
)
from .graphs import build_graph
from .metrics import MetricsReport, aggregate_folds, compute_report
from .model import (
    FusionConfig,
    ModalityData,
    Rep3Net,
    TrainedModel,
    ablate,
    train_fold,
)
from .pipeline import RunConfig, build_modality_data, run_ablation, run_training

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "DescriptorPipeline",
    "EmbeddingStore",
    "FormatError",
    "FusionConfig",
    "MetricsReport",
    "ModalityData",
    "NotFittedError",
    "NumericError",
    "Rep3Net",
    "Rep3NetError",
    "RunConfig",
    "TrainedModel",
    "ablate",
    "aggregate_folds",
    "build_graph",
    "build_modality_data",
    "canonical_smiles",
    "compute_descriptors",
    "compute_report",
    "curate",
    "descriptor_matrix",
    "load_checkpoint",
    "make_cv_splits",
    "parse_smiles",
    "read_curated_csv",
    "read_store",
    "run_ablation",
    "run_training",
    "save_checkpoint",
    "train_fold",
    "write_curated_csv",
    "write_store",
    "__version__",
]

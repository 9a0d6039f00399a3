"""Descriptor computation and the filtering/normalization pipeline."""

from .compute import (
    SCHEMA,
    SCHEMA_ID,
    DescriptorVector,
    compute_descriptors,
    descriptor_matrix,
)
from .crippen import crippen_contributions, crippen_logp, crippen_mr
from .external import read_external_descriptors
from .filtering import (
    EPS,
    DescriptorPipeline,
    FeatureStats,
    correlation_filter,
    denormalize,
    fit_stats,
    normalize,
    variance_filter,
)
from .tpsa import tpsa

__all__ = [
    "SCHEMA",
    "SCHEMA_ID",
    "DescriptorPipeline",
    "DescriptorVector",
    "EPS",
    "FeatureStats",
    "compute_descriptors",
    "correlation_filter",
    "crippen_contributions",
    "crippen_logp",
    "crippen_mr",
    "denormalize",
    "descriptor_matrix",
    "fit_stats",
    "normalize",
    "read_external_descriptors",
    "tpsa",
    "variance_filter",
]

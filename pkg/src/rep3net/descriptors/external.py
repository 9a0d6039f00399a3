"""External descriptor ingestion.

Accepts a CSV with a header row whose first column holds record keys
(canonical SMILES in the training pipeline) and remaining columns hold
named numeric descriptors. Lets users substitute their own descriptor set
for the native one.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

from ..exceptions import DataError, NumericError


def read_external_descriptors(path) -> tuple[list[str], list[str], np.ndarray]:
    """Returns (keys, descriptor_names, matrix) from a descriptor CSV."""
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except Exception as exc:  # pandas raises a zoo of parse errors
        raise DataError(f"cannot read descriptor CSV {path}: {exc}") from exc
    if frame.shape[1] < 2:
        raise DataError("descriptor CSV needs a key column plus descriptors")
    key_col = frame.columns[0]
    keys = frame[key_col].astype(str).tolist()
    if len(set(keys)) != len(keys):
        dupes = frame[key_col][frame[key_col].duplicated()].tolist()
        raise DataError(f"duplicate keys in descriptor CSV: {dupes[:5]}")
    names = [str(c) for c in frame.columns[1:]]
    try:
        matrix = frame.iloc[:, 1:].to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DataError(f"non-numeric descriptor values: {exc}") from exc
    if not np.all(np.isfinite(matrix)):
        bad = np.argwhere(~np.isfinite(matrix))[:5].tolist()
        raise NumericError(f"non-finite descriptor entries at {bad}")
    return keys, names, matrix

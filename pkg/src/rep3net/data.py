"""Activity data curation, pIC50 targets, CV splits and target scaling.

Curation order per row (first failing check is the counted drop reason):
missing_smiles, units_not_nm, relation_not_equals, missing_value,
nonnumeric_value, nonpositive_value, unparseable_smiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .chem import canonical_smiles, parse_smiles
from .exceptions import DataError, NumericError, Rep3NetError

PRNG_ID = "PCG64"

DEFAULT_COLUMNS = {
    "record_id": "molecule_chembl_id",
    "smiles": "canonical_smiles",
    "relation": "standard_relation",
    "value": "standard_value",
    "units": "standard_units",
}

KEPT_RELATIONS = ("=",)

DROP_REASONS = (
    "missing_smiles",
    "units_not_nm",
    "relation_not_equals",
    "missing_value",
    "nonnumeric_value",
    "nonpositive_value",
    "unparseable_smiles",
)


@dataclass
class ActivityRecord:
    record_id: str
    smiles: str
    relation: str
    ic50_nm: float


@dataclass
class CuratedCompound:
    canonical_smiles: str
    ic50_nm_median: float
    pic50: float
    pic50_std: Optional[float] = None  # filled per fold by the trainer


@dataclass
class DropReport:
    total_rows: int = 0
    kept: int = 0
    dropped: dict = field(default_factory=lambda: {r: 0 for r in DROP_REASONS})

    def as_dict(self) -> dict:
        return {"total_rows": self.total_rows, "kept": self.kept, **self.dropped}


@dataclass
class FoldSplit:
    fold_index: int
    train: list
    val: list
    test: list

    def __post_init__(self) -> None:
        combined = self.train + self.val + self.test
        if len(set(combined)) != len(combined):
            raise DataError(f"fold {self.fold_index} splits overlap")


def _clean(cell) -> str:
    if cell is None or (isinstance(cell, float) and math.isnan(cell)):
        return ""
    return str(cell).strip()


def load_and_filter(path, columns: Optional[dict] = None):
    """Read an activity CSV, returning (records, DropReport)."""
    cols = dict(DEFAULT_COLUMNS)
    if columns:
        cols.update(columns)
    try:
        frame = pd.read_csv(path, dtype=str)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read activity CSV {path}: {exc}") from exc
    missing = [c for c in cols.values() if c not in frame.columns]
    if missing:
        raise DataError(f"activity CSV missing required columns: {missing}")

    report = DropReport(total_rows=len(frame))
    records = []
    for _, row in frame.iterrows():
        smiles = _clean(row[cols["smiles"]])
        if not smiles:
            report.dropped["missing_smiles"] += 1
            continue
        if _clean(row[cols["units"]]) != "nM":
            report.dropped["units_not_nm"] += 1
            continue
        if _clean(row[cols["relation"]]) not in KEPT_RELATIONS:
            report.dropped["relation_not_equals"] += 1
            continue
        raw_value = _clean(row[cols["value"]])
        if not raw_value:
            report.dropped["missing_value"] += 1
            continue
        try:
            value = float(raw_value)
        except ValueError:
            report.dropped["nonnumeric_value"] += 1
            continue
        if not math.isfinite(value) or value <= 0:
            report.dropped["nonpositive_value"] += 1
            continue
        try:
            parse_smiles(smiles)
        except Rep3NetError:
            report.dropped["unparseable_smiles"] += 1
            continue
        records.append(
            ActivityRecord(
                record_id=_clean(row[cols["record_id"]]),
                smiles=smiles,
                relation="=",
                ic50_nm=value,
            )
        )
    report.kept = len(records)
    return records, report


def to_pic50(ic50_nm: float) -> float:
    """pIC50 = -log10(IC50 in molar) = 9 - log10(IC50 in nM)."""
    if not (isinstance(ic50_nm, (int, float)) and math.isfinite(ic50_nm)):
        raise DataError(f"ic50 must be a finite number, got {ic50_nm!r}")
    if ic50_nm <= 0:
        raise DataError(f"ic50 must be positive, got {ic50_nm}")
    return 9.0 - math.log10(ic50_nm)


def aggregate_duplicates(records: Sequence[ActivityRecord]):
    """Group by canonical SMILES, take the median IC50 per group."""
    groups: dict = {}
    for rec in records:
        key = canonical_smiles(parse_smiles(rec.smiles))
        groups.setdefault(key, []).append(rec.ic50_nm)
    compounds = []
    for key in sorted(groups):
        median = float(np.median(np.asarray(groups[key], dtype=np.float64)))
        compounds.append(
            CuratedCompound(
                canonical_smiles=key,
                ic50_nm_median=median,
                pic50=to_pic50(median),
            )
        )
    return compounds


def curate(path, columns: Optional[dict] = None):
    records, report = load_and_filter(path, columns=columns)
    return aggregate_duplicates(records), report


def write_curated_csv(path, compounds: Sequence[CuratedCompound]) -> None:
    frame = pd.DataFrame(
        {
            "canonical_smiles": [c.canonical_smiles for c in compounds],
            "ic50_nm_median": [repr(c.ic50_nm_median) for c in compounds],
            "pic50": [repr(c.pic50) for c in compounds],
        }
    )
    frame.to_csv(path, index=False)


def read_curated_csv(path):
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read curated CSV {path}: {exc}") from exc
    required = ["canonical_smiles", "ic50_nm_median", "pic50"]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataError(f"curated CSV missing columns: {missing}")
    compounds = []
    for _, row in frame.iterrows():
        compounds.append(
            CuratedCompound(
                canonical_smiles=str(row["canonical_smiles"]),
                ic50_nm_median=float(row["ic50_nm_median"]),
                pic50=float(row["pic50"]),
            )
        )
    return compounds


def make_cv_splits(n: int, seed: int = 42, k: int = 5):
    """Shuffled k-fold partition with a 5%-of-total validation carve-out.

    Test fold i is the shuffled slice [i*n//k, (i+1)*n//k); validation takes
    round(0.05*n) indices from the head of the remainder (preserving shuffle
    order); the rest train.
    """
    if n < 20:
        raise DataError(f"need at least 20 samples for 75:5:20 splits, got {n}")
    if k < 2:
        raise DataError(f"k must be >= 2, got {k}")
    perm = np.random.default_rng(seed).permutation(n)
    val_size = int(round(0.05 * n))
    splits = []
    for i in range(k):
        lo, hi = i * n // k, (i + 1) * n // k
        test = perm[lo:hi]
        remainder = np.concatenate([perm[:lo], perm[hi:]])
        val = remainder[:val_size]
        train = remainder[val_size:]
        if len(train) == 0 or len(val) == 0:
            raise DataError(f"fold {i} has an empty split (n={n}, k={k})")
        splits.append(
            FoldSplit(
                fold_index=i,
                train=[int(j) for j in train],
                val=[int(j) for j in val],
                test=[int(j) for j in test],
            )
        )
    return splits


@dataclass
class TargetScaler:
    mean: float
    std: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.mean) or not math.isfinite(self.std):
            raise NumericError("scaler parameters must be finite")
        if self.std <= 0:
            raise NumericError(f"scaler std must be positive, got {self.std}")

    @classmethod
    def fit(cls, y) -> "TargetScaler":
        arr = np.asarray(y, dtype=np.float64)
        if arr.size == 0:
            raise DataError("cannot fit scaler on empty targets")
        std = float(arr.std())  # population std, StandardScaler convention
        if std == 0.0:
            raise NumericError("target std is zero; cannot standardize")
        return cls(mean=float(arr.mean()), std=std)

    def apply(self, y) -> np.ndarray:
        return (np.asarray(y, dtype=np.float64) - self.mean) / self.std

    def invert(self, y) -> np.ndarray:
        return np.asarray(y, dtype=np.float64) * self.std + self.mean

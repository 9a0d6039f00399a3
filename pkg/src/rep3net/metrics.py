"""Regression metrics and cross-fold aggregation.

Correlations on degenerate (constant) inputs return NaN and are flagged in
the report instead of raising, so one bad fold cannot abort a run. All
arithmetic is float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .base import check_vector
from .exceptions import DataError, NumericError

# two-sided 95% Student-t quantiles, t_{0.975, df}
_T_TABLE = {
    1: 12.706204736, 2: 4.302652730, 3: 3.182446305, 4: 2.776445105,
    5: 2.570581836, 6: 2.446911851, 7: 2.364624252, 8: 2.306004135,
    9: 2.262157163, 10: 2.228138852, 11: 2.200985160, 12: 2.178812830,
    13: 2.160368656, 14: 2.144786688, 15: 2.131449546, 16: 2.119905299,
    17: 2.109815578, 18: 2.100922040, 19: 2.093024054, 20: 2.085963447,
    21: 2.079613845, 22: 2.073873068, 23: 2.068657611, 24: 2.063898562,
    25: 2.059538553, 26: 2.055529439, 27: 2.051830516, 28: 2.048407142,
    29: 2.045229642,
}
_Z_975 = 1.959963985

METRIC_NAMES = ("mse", "rmse", "mae", "r2", "pearson", "spearman")


def _pair(y, y_hat):
    a = check_vector(y, "y")
    b = check_vector(y_hat, "y_hat")
    if a.size == 0:
        raise DataError("metrics on empty input")
    if a.shape != b.shape:
        raise DataError(f"length mismatch: {a.shape} vs {b.shape}")
    return a, b


def mse(y, y_hat) -> float:
    a, b = _pair(y, y_hat)
    return float(np.mean((a - b) ** 2))


def rmse(y, y_hat) -> float:
    return math.sqrt(mse(y, y_hat))


def mae(y, y_hat) -> float:
    a, b = _pair(y, y_hat)
    return float(np.mean(np.abs(a - b)))


def r2(y, y_hat) -> float:
    a, b = _pair(y, y_hat)
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0.0:
        raise NumericError("r2 undefined: actuals are constant")
    ss_res = float(np.sum((a - b) ** 2))
    return 1.0 - ss_res / ss_tot


def pearson(y, y_hat) -> float:
    """Sample correlation; NaN if either vector is constant."""
    a, b = _pair(y, y_hat)
    # test constancy on the values, not the centered residuals: the mean of
    # n identical non-representable values can round a few ulps away, which
    # would leave a ~1e-17 denominator instead of an exact zero
    if np.all(a == a[0]) or np.all(b == b[0]):
        return float("nan")
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(np.sum(da * da)) * float(np.sum(db * db)))
    if denom == 0.0:
        return float("nan")
    return float(np.clip(np.sum(da * db) / denom, -1.0, 1.0))


def average_ranks(x) -> np.ndarray:
    """1-based ranks, ties receiving the mean of their rank range."""
    x = check_vector(x, "x")
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.float64)
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(y, y_hat) -> float:
    """Pearson correlation of average ranks; NaN when a side is all ties."""
    a, b = _pair(y, y_hat)
    if a.size < 2:
        raise DataError("spearman needs length >= 2")
    return pearson(average_ranks(a), average_ranks(b))


@dataclass
class MetricsReport:
    mse: float
    rmse: float
    mae: float
    r2: float
    pearson: float
    spearman: float
    n: int
    flags: list = field(default_factory=list)

    def as_dict(self) -> dict:
        out = {name: getattr(self, name) for name in METRIC_NAMES}
        out["n"] = self.n
        out["flags"] = ";".join(self.flags)
        return out


def compute_report(y, y_hat) -> MetricsReport:
    a, b = _pair(y, y_hat)
    flags = []
    p = pearson(a, b)
    s = spearman(a, b)
    if math.isnan(p):
        flags.append("pearson_degenerate")
    if math.isnan(s):
        flags.append("spearman_degenerate")
    return MetricsReport(
        mse=mse(a, b),
        rmse=rmse(a, b),
        mae=mae(a, b),
        r2=r2(a, b),
        pearson=p,
        spearman=s,
        n=int(a.size),
        flags=flags,
    )


@dataclass
class FoldAggregate:
    k: int
    mean: dict
    ci_half_width: dict
    flags: list = field(default_factory=list)


def aggregate_folds(reports, confidence: float = 0.95, method: str = "t"):
    """Per-metric fold mean and 95%-CI half-width t_{0.975,k-1} * s / sqrt(k)."""
    reports = list(reports)
    k = len(reports)
    if k < 2:
        raise DataError(f"need at least 2 fold reports, got {k}")
    if confidence != 0.95:
        raise DataError("only the 95% level is tabulated")
    if method == "t":
        if k - 1 not in _T_TABLE:
            raise DataError(f"t quantile not tabulated for {k} folds")
        quantile = _T_TABLE[k - 1]
    elif method == "normal":
        quantile = _Z_975
    else:
        raise DataError(f"unknown CI method {method!r}")

    means = {}
    half_widths = {}
    flags = []
    for name in METRIC_NAMES:
        values = np.array([getattr(r, name) for r in reports], dtype=np.float64)
        if np.isnan(values).any():
            flags.append(f"{name}_degenerate_folds")
        means[name] = float(values.mean())
        s = float(values.std(ddof=1))
        half_widths[name] = quantile * s / math.sqrt(k)
    return FoldAggregate(k=k, mean=means, ci_half_width=half_widths, flags=flags)

"""Learning-curve statistics: smoothing, cross-seed aggregation, final-window summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

from ..errors import ShapeError


def smooth(curve, window: int = 11) -> list[float]:
    """Centered moving average; near the ends the window shrinks symmetrically."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be an odd integer >= 1")
    x = np.asarray(curve, dtype=np.float64)
    n = x.shape[0]
    half = window // 2
    csum = np.concatenate([[0.0], np.cumsum(x)])
    out = []
    for i in range(n):
        h = min(half, i, n - 1 - i)
        if h == 0:
            out.append(float(x[i]))
        else:
            out.append(float((csum[i + h + 1] - csum[i - h]) / (2 * h + 1)))
    return out


@dataclass
class Aggregate:
    mean: np.ndarray
    std: np.ndarray
    smoothed_mean: np.ndarray
    final_mean: float
    final_units: int
    n_seeds: int

    @property
    def n_units(self) -> int:
        return self.mean.shape[0]


def returns_matrix(records) -> np.ndarray:
    """[seeds x units] array; all records must cover the same number of units."""
    if not records:
        raise ShapeError("need at least one record")
    lengths = {len(r.returns) for r in records}
    if len(lengths) != 1:
        raise ShapeError(f"records cover different numbers of units: {sorted(lengths)}")
    return np.array([r.returns for r in records], dtype=np.float64)


def aggregate(records, final_units: int | None = None, window: int = 11) -> Aggregate:
    """Per-unit mean and population std across seeds, plus the mean over the last ``final_units`` units."""
    mat = returns_matrix(records)
    n_units = mat.shape[1]
    final_units = n_units if final_units is None else final_units
    if not 1 <= final_units <= n_units:
        raise ValueError(f"final_units must lie in [1, {n_units}]")
    mean = mat.mean(axis=0)
    std = mat.std(axis=0)
    return Aggregate(mean, std, np.array(smooth(mean, window)), float(mean[-final_units:].mean()), final_units,
                     mat.shape[0])


def final_window(records, final_units: int) -> np.ndarray:
    """Each seed's mean return over its last ``final_units`` units."""
    mat = returns_matrix(records)
    if not 1 <= final_units <= mat.shape[1]:
        raise ValueError(f"final_units must lie in [1, {mat.shape[1]}]")
    return mat[:, -final_units:].mean(axis=1)


def sign_test(wins: int, losses: int) -> float:
    """One-sided exact sign test p-value for ``wins`` out of ``wins + losses`` (ties dropped)."""
    n = wins + losses
    if n == 0:
        return 1.0
    return float(binomtest(wins, n, 0.5, alternative="greater").pvalue)


def pooled_std(a, b) -> float:
    """sqrt of the average of the two groups' population variances."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.sqrt(0.5 * (a.var() + b.var())))

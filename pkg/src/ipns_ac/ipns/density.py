"""Minibatch density estimates and the high-visitation-density (HVD) point.

The density of a point ``z*`` against a set ``P`` is

    den_P(z*, P) = exp(-(1/L) * sum_l w_l * ||z* - z_l||),   w_l = exp(-c * ||z* - z_l||)

so close neighbours count and far points fade out. The buffer density
averages ``den_P`` over ``I`` minibatches of ``L = round(wp% * n)`` points,
and the HVD point is the best of ``J`` sampled candidates, refreshed every
``M`` stored states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..numerics import RngStream


class EncodedStateBuffer:
    """Append-only store of (encoded) states backed by a doubling array."""

    def __init__(self, dim: int, initial_capacity: int = 1024):
        self.dim = dim
        self._data = np.empty((max(1, initial_capacity), dim))
        self.n = 0

    def __len__(self) -> int:
        return self.n

    def append(self, z) -> None:
        if self.n == self._data.shape[0]:
            grown = np.empty((2 * self._data.shape[0], self.dim))
            grown[: self.n] = self._data[: self.n]
            self._data = grown
        self._data[self.n] = z
        self.n += 1

    def extend(self, zs) -> None:
        for z in np.asarray(zs, dtype=np.float64):
            self.append(z)

    @property
    def data(self) -> np.ndarray:
        return self._data[: self.n]

    def checksum(self) -> str:
        import hashlib

        return hashlib.sha256(np.ascontiguousarray(self.data).tobytes()).hexdigest()


def _weighted_distance(z_star: np.ndarray, points: np.ndarray, c: float) -> np.ndarray:
    """Per-point terms exp(-c d) * d along the last axis."""
    d = np.sqrt(np.sum((points - z_star) ** 2, axis=-1))
    return np.exp(-c * d) * d


def den_p(z_star, minibatch, c: float) -> float:
    """Density of ``z_star`` estimated from one minibatch; lies in (0, 1]."""
    pts = np.asarray(minibatch, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.shape[0] == 0:
        raise DomainError("empty minibatch")
    if c <= 0:
        raise DomainError("c must be positive")
    z_star = np.asarray(z_star, dtype=np.float64)
    return float(np.exp(-np.mean(_weighted_distance(z_star, pts, c))))


def minibatch_size(n: int, wp: float) -> int:
    """round(wp% of n), half up, never below one."""
    return max(1, int(math.floor(wp / 100.0 * n + 0.5)))


def density(z_star, buffer, n_batches: int, wp: float, c: float, rng: RngStream) -> float:
    """Average of ``den_p`` over ``n_batches`` uniformly drawn minibatches.

    Minibatch members are drawn with replacement. When the minibatch size
    reaches the buffer size the minibatch is the whole buffer, which makes
    this equal to ``abs_density``.
    """
    data = buffer.data if isinstance(buffer, EncodedStateBuffer) else np.asarray(buffer, dtype=np.float64)
    n = data.shape[0]
    if n == 0:
        raise DomainError("empty buffer")
    size = minibatch_size(n, wp)
    if size >= n:
        return den_p(z_star, data, c)
    idx = rng.integers(0, n, size=(n_batches, size))
    z_star = np.asarray(z_star, dtype=np.float64)
    per_batch = np.exp(-np.mean(_weighted_distance(z_star, data[idx], c), axis=1))
    return float(np.mean(per_batch))


def abs_density(z_star, buffer, c: float) -> float:
    """Exhaustive density against every stored point."""
    data = buffer.data if isinstance(buffer, EncodedStateBuffer) else np.asarray(buffer, dtype=np.float64)
    if data.shape[0] == 0:
        raise DomainError("empty buffer")
    return den_p(z_star, data, c)


def abs_densities(buffer, c: float) -> np.ndarray:
    """``abs_density`` of every stored point, in buffer order. O(n^2)."""
    data = buffer.data if isinstance(buffer, EncodedStateBuffer) else np.asarray(buffer, dtype=np.float64)
    if data.shape[0] == 0:
        raise DomainError("empty buffer")
    return np.array([den_p(z, data, c) for z in data])


def abs_hvd(buffer, c: float) -> tuple[np.ndarray, int]:
    """Point of highest absolute density and its index (lowest index on ties)."""
    data = buffer.data if isinstance(buffer, EncodedStateBuffer) else np.asarray(buffer, dtype=np.float64)
    dens = abs_densities(data, c)
    i = int(np.argmax(dens))
    return data[i].copy(), i


@dataclass
class HvdEstimate:
    point: np.ndarray | None = None
    computed_at_step: int = 0
    valid: bool = False
    index: int = -1


def hvd_candidates(n: int, n_candidates: int, rng: RngStream) -> np.ndarray:
    """Candidate indices drawn without replacement; all indices in order once J >= n."""
    if n_candidates >= n:
        return np.arange(n)
    return rng.choice(n, size=n_candidates, replace=False)


def estimate_hvd(buffer, update_every: int, n_candidates: int, n_batches: int, wp: float, c: float,
                 rng: RngStream, previous: HvdEstimate | None = None) -> HvdEstimate:
    """Refresh the HVD estimate when the buffer size is a multiple of ``update_every``.

    Below the cut-in (``n < update_every``) the estimate stays invalid; between
    refresh points ``previous`` is returned unchanged.
    """
    data = buffer.data if isinstance(buffer, EncodedStateBuffer) else np.asarray(buffer, dtype=np.float64)
    n = data.shape[0]
    if previous is None:
        previous = HvdEstimate()
    if n < update_every or n % update_every != 0:
        return previous
    cand = hvd_candidates(n, n_candidates, rng)
    scores = np.array([density(data[i], data, n_batches, wp, c, rng) for i in cand])
    best = int(cand[int(np.argmax(scores))])
    return HvdEstimate(data[best].copy(), n, True, best)


class HvdTracker:
    """Holds the cached HVD estimate for a growing buffer and counts refreshes."""

    def __init__(self, update_every: int, n_candidates: int, n_batches: int, wp: float, c: float, rng: RngStream):
        self.update_every = update_every
        self.n_candidates = n_candidates
        self.n_batches = n_batches
        self.wp = wp
        self.c = c
        self.rng = rng
        self.estimate = HvdEstimate()
        self.recompute_steps: list[int] = []

    def update(self, buffer) -> HvdEstimate:
        new = estimate_hvd(buffer, self.update_every, self.n_candidates, self.n_batches, self.wp, self.c,
                           self.rng, self.estimate)
        if new is not self.estimate:
            self.recompute_steps.append(new.computed_at_step)
            self.estimate = new
        return self.estimate

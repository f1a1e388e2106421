"""Novelty, plausible-novelty scores and the intrinsic reward zeta."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import NotReadyError
from ..numerics import RngStream
from .density import HvdEstimate

TINY = np.finfo(np.float64).tiny


def _hvd_point(hvd) -> np.ndarray:
    if isinstance(hvd, HvdEstimate):
        if not hvd.valid:
            raise NotReadyError("HVD estimate not available before the cut-in threshold")
        return hvd.point
    return np.asarray(hvd, dtype=np.float64)


def novelty(z, hvd) -> float:
    """Euclidean distance from ``z`` to the HVD point."""
    return float(np.linalg.norm(np.asarray(z, dtype=np.float64) - _hvd_point(hvd)))


def pn_score(s, z, hvd, value_fn: Callable[[np.ndarray], np.ndarray]) -> float:
    """Plausible novelty: novelty of the code ``z`` times V of the raw state ``s``."""
    eta = novelty(z, hvd)
    return eta * float(np.asarray(value_fn(np.asarray(s, dtype=np.float64)[None, :])).reshape(-1)[0])


def zeta_from_gap(gap) -> np.ndarray | float:
    """2 / (e^g + e^-g), floored at the smallest positive double so it stays in (0, 1]."""
    x = np.abs(np.asarray(gap, dtype=np.float64))
    e = np.exp(-x)
    out = np.maximum(2.0 * e / (1.0 + e * e), TINY)
    return float(out) if out.ndim == 0 else out


@dataclass
class IntrinsicReward:
    zeta: float
    xi: float
    xi_max: float
    gap: float


def intrinsic_reward(s, z, hvd, value_fn, decode_fn, n_samples: int, rng: RngStream, sigma: float = 0.1,
                     use_novelty: bool = True, use_value: bool = True) -> IntrinsicReward:
    """Score ``n_samples`` Gaussian perturbations of ``z`` against ``z`` itself.

    Each perturbed code is decoded to stand in for its raw state when the
    V-network is queried. Disabling ``use_novelty`` or ``use_value`` fixes
    that factor of the score to 1 (ablations).
    """
    if n_samples < 1:
        raise ValueError("need at least one perturbation sample")
    z = np.asarray(z, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    hvd_point = _hvd_point(hvd) if use_novelty else None
    z_hat = z + rng.normal(0.0, sigma, size=(n_samples, z.shape[0]))
    if use_novelty:
        eta = np.linalg.norm(z - hvd_point)
        eta_hat = np.linalg.norm(z_hat - hvd_point, axis=1)
    else:
        eta, eta_hat = 1.0, np.ones(n_samples)
    if use_value:
        v = np.asarray(value_fn(np.vstack([s[None, :], decode_fn(z_hat)]))).reshape(-1)
        v0, v_hat = v[0], v[1:]
    else:
        v0, v_hat = 1.0, np.ones(n_samples)
    xi = float(eta * v0)
    xi_max = float(np.max(eta_hat * v_hat))
    gap = xi_max - xi
    return IntrinsicReward(zeta_from_gap(gap), xi, xi_max, gap)


def augment(reward: float, zeta: float, beta: float, epsilon: float, rng: RngStream,
            usable: bool = True) -> tuple[float, bool]:
    """Decide whether this transition carries an intrinsic reward.

    Returns ``(zeta, True)`` with probability ``1 - epsilon`` when usable,
    otherwise the sentinel ``(0.0, False)``; the mix with ``reward`` happens
    at update time.
    """
    if not 0.0 <= beta < 1.0 or not 0.0 <= epsilon < 1.0:
        raise ValueError("beta and epsilon must lie in [0, 1)")
    if not usable:
        return 0.0, False
    if epsilon > 0.0 and rng.random() < epsilon:
        return 0.0, False
    return float(zeta), True

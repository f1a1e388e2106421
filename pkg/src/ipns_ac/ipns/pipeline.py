from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from ..errors import ConfigError
from ..numerics import RngStream
from .autoencoder import Autoencoder
from .density import EncodedStateBuffer, HvdTracker
from .reward import augment, intrinsic_reward

# mode -> (encode states, novelty factor, V factor)
ABLATION_MODES = {
    "full": (True, True, True),
    "se_sns": (True, True, False),
    "sns_only": (False, True, False),
    "sns_pns": (False, True, True),
    "pns_only": (False, False, True),
    "none": (False, False, False),
}


@dataclass
class IpnsConfig:
    hvd_every: int = 500          # M
    n_samples: int = 25           # K
    n_candidates: int = 5         # J
    n_batches: int = 100          # I
    batch_percent: float = 1.0    # wp
    weight_c: float = 1.0         # c
    beta: float = 1e-4
    epsilon: float = 0.0
    latent_dim: int = 5
    sigma: float = 0.1
    n_encode: int = 10_000
    ae_epochs: int = 200
    ae_batch_size: int = 64
    ae_lr: float = 1e-3

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not 0.0 <= self.beta < 1.0:
            raise ConfigError("beta must lie in [0, 1)")
        if not 0.0 <= self.epsilon < 1.0:
            raise ConfigError("epsilon must lie in [0, 1)")
        if not 0.0 < self.batch_percent < 100.0:
            raise ConfigError("mini-batch factor must lie in (0, 100)")
        for name in ("hvd_every", "n_samples", "n_candidates", "n_batches", "latent_dim", "n_encode"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.weight_c <= 0 or self.sigma <= 0:
            raise ConfigError("weight multiplier c and perturbation scale must be positive")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class IpnsPipeline:
    """Per-run IPNS state: encoded-state buffer, HVD tracker, and the reward hook.

    ``observe`` is called once per environment step with the state the action
    was taken from and returns the ``(zeta, assigned)`` fields to store in the
    transition. Randomness comes from two dedicated streams so the host
    agent's random sequence is untouched.
    """

    def __init__(self, config: IpnsConfig, state_dim: int, seed: int, mode: str = "full",
                 autoencoder: Autoencoder | None = None, value_fn=None):
        if mode not in ABLATION_MODES or mode == "none":
            raise ConfigError(f"IPNS mode must be one of {[m for m in ABLATION_MODES if m != 'none']}")
        self.config = config
        self.mode = mode
        self.encode_states, self.use_novelty, self.use_value = ABLATION_MODES[mode]
        if self.encode_states and autoencoder is None:
            raise ConfigError(f"mode {mode!r} needs a trained autoencoder")
        if self.use_value and value_fn is None:
            raise ConfigError(f"mode {mode!r} needs a V-network")
        self.autoencoder = autoencoder
        self.value_fn = value_fn
        self.rng = RngStream("ipns", seed)
        dim = autoencoder.latent_dim if self.encode_states else state_dim
        self.buffer = EncodedStateBuffer(dim)
        self.hvd = HvdTracker(config.hvd_every, config.n_candidates, config.n_batches, config.batch_percent,
                              config.weight_c, RngStream("hvd", seed))
        self.assigned = 0
        self.last = None

    @property
    def needs_value_net(self) -> bool:
        return self.use_value

    def _code(self, s: np.ndarray) -> np.ndarray:
        return self.autoencoder.encode(s) if self.encode_states else s

    def _decode(self, z: np.ndarray) -> np.ndarray:
        return self.autoencoder.decode(z) if self.encode_states else z

    def observe(self, state, reward: float) -> tuple[float, bool]:
        s = np.asarray(state, dtype=np.float64)
        z = self._code(s)
        self.buffer.append(z)
        usable = True
        if self.use_novelty:
            usable = self.hvd.update(self.buffer).valid
        if not usable:
            self.last = None
            return 0.0, False
        self.last = intrinsic_reward(s, z, self.hvd.estimate, self.value_fn, self._decode, self.config.n_samples,
                                     self.rng, self.config.sigma, self.use_novelty, self.use_value)
        zeta, assigned = augment(reward, self.last.zeta, self.config.beta, self.config.epsilon, self.rng, True)
        self.assigned += assigned
        return zeta, assigned

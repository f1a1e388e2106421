"""State encoder: an MLP autoencoder with a sigmoid bottleneck.

Encoder ``m -> 64 (ELU) -> 16 (ELU) -> m' (sigmoid)``; decoder mirrors it
with a linear output. Inputs are standardized with the statistics of the
pre-training rollout, and those statistics travel with the model, so
``encode``/``decode`` work on raw states.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError
from ..numerics import AdamState, MlpParams, RngStream, adam_step, backward, forward_cached, init_mlp, mlp_forward

FORMAT_VERSION = 1

ENCODER_HIDDEN = (64, 16)


class AutoencoderWarning(UserWarning):
    pass


@dataclass
class Autoencoder:
    encoder: MlpParams
    decoder: MlpParams
    mean: np.ndarray
    std: np.ndarray
    history: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.encoder.activations[-1] != "sigmoid":
            raise ShapeError("encoder must end in a sigmoid bottleneck")
        if self.decoder.in_dim != self.encoder.out_dim or self.decoder.out_dim != self.encoder.in_dim:
            raise ShapeError("decoder does not mirror the encoder")
        if self.latent_dim >= self.state_dim:
            raise ShapeError(f"latent dim {self.latent_dim} must be below state dim {self.state_dim}")

    @property
    def state_dim(self) -> int:
        return self.encoder.in_dim

    @property
    def latent_dim(self) -> int:
        return self.encoder.out_dim

    def encode(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=np.float64)
        if s.shape[-1] != self.state_dim:
            raise ShapeError(f"state dim {s.shape[-1]} != {self.state_dim}")
        return mlp_forward(self.encoder, (s - self.mean) / self.std)

    def decode(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        if z.shape[-1] != self.latent_dim:
            raise ShapeError(f"code dim {z.shape[-1]} != {self.latent_dim}")
        return mlp_forward(self.decoder, z) * self.std + self.mean

    def reconstruct(self, s) -> np.ndarray:
        return self.decode(self.encode(s))

    def save(self, path) -> None:
        meta = {
            "format": "ipns-autoencoder",
            "version": FORMAT_VERSION,
            "encoder": {"sizes": self.encoder.sizes, "activations": self.encoder.activations},
            "decoder": {"sizes": self.decoder.sizes, "activations": self.decoder.activations},
            "history": self.history,
        }
        with open(path, "wb") as fh:
            np.savez(fh, meta=np.array(json.dumps(meta)), encoder=self.encoder.flat, decoder=self.decoder.flat,
                     mean=self.mean, std=self.std)

    @classmethod
    def load(cls, path) -> "Autoencoder":
        with np.load(path, allow_pickle=False) as f:
            meta = json.loads(str(f["meta"]))
            if meta.get("format") != "ipns-autoencoder" or meta.get("version") != FORMAT_VERSION:
                raise ValueError(f"{path}: not a version-{FORMAT_VERSION} autoencoder file")
            enc = MlpParams(meta["encoder"]["sizes"], meta["encoder"]["activations"], f["encoder"].copy())
            dec = MlpParams(meta["decoder"]["sizes"], meta["decoder"]["activations"], f["decoder"].copy())
            return cls(enc, dec, f["mean"].copy(), f["std"].copy(), list(meta["history"]))


def build_autoencoder(state_dim: int, latent_dim: int, rng: RngStream, mean=None, std=None) -> Autoencoder:
    h1, h2 = ENCODER_HIDDEN
    enc = init_mlp((state_dim, h1, h2, latent_dim), ("elu", "elu", "sigmoid"), rng)
    dec = init_mlp((latent_dim, h2, h1, state_dim), ("elu", "elu", "linear"), rng)
    mean = np.zeros(state_dim) if mean is None else np.asarray(mean, dtype=np.float64)
    std = np.ones(state_dim) if std is None else np.asarray(std, dtype=np.float64)
    return Autoencoder(enc, dec, mean, std)


def reconstruction_mse(ae: Autoencoder, states) -> float:
    """Mean squared reconstruction error in raw state units."""
    states = np.asarray(states, dtype=np.float64)
    return float(np.mean((ae.reconstruct(states) - states) ** 2))


def train_autoencoder(states, latent_dim: int, rng: RngStream, epochs: int = 200, batch_size: int = 64,
                      lr: float = 1e-3, target_mse: float = 0.01) -> Autoencoder:
    """Fit an autoencoder to random-rollout states by minimizing raw-space reconstruction MSE.

    Warns (``AutoencoderWarning``) if the final raw-space MSE is above ``target_mse``.
    """
    states = np.asarray(states, dtype=np.float64)
    if states.ndim != 2 or states.shape[0] < 1:
        raise ShapeError("states must be a non-empty [N x m] array")
    mean = states.mean(axis=0)
    std = states.std(axis=0)
    std = np.where(std < 1e-8, 1.0, std)
    ae = build_autoencoder(states.shape[1], latent_dim, rng, mean, std)
    x_all = (states - mean) / std
    n, m = x_all.shape
    # loss is measured on raw states; only the network inputs are standardized
    weight = std * std
    enc_opt = AdamState.for_params(ae.encoder, lr)
    dec_opt = AdamState.for_params(ae.decoder, lr)
    for _ in range(epochs):
        order = rng.generator.permutation(n)
        for start in range(0, n, batch_size):
            x = x_all[order[start:start + batch_size]]
            z, enc_cache = forward_cached(ae.encoder, x)
            x_hat, dec_cache = forward_cached(ae.decoder, z)
            d_out = (2.0 / x.size) * (x_hat - x) * weight
            dec_grads, dz = backward(ae.decoder, dec_cache, d_out, input_grad=True)
            enc_grads, _ = backward(ae.encoder, enc_cache, dz)
            adam_step(ae.decoder, dec_grads, dec_opt)
            adam_step(ae.encoder, enc_grads, enc_opt)
        ae.history.append(reconstruction_mse(ae, states))
    final = ae.history[-1] if ae.history else reconstruction_mse(ae, states)
    if final > target_mse:
        warnings.warn(f"autoencoder reconstruction MSE {final:.4g} above target {target_mse}", AutoencoderWarning)
    return ae

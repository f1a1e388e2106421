"""Dense feed-forward networks with hand-written backprop, Adam, and seeded RNG streams.

All parameters of one network live in a single contiguous float64 vector
(``MlpParams.flat``); per-layer weight and bias arrays are views into it.
That keeps Adam, soft target updates and checkpointing to a handful of
vectorized operations.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ShapeError

ACTIVATIONS = ("relu", "elu", "tanh", "sigmoid", "linear")

# expit(36) < 1 in float64; beyond this the sigmoid would round to exactly 1.
SIGMOID_CLAMP = 36.0


class MlpParams:
    """Weights and biases of a fully connected network.

    Layer ``k`` maps ``sizes[k]`` inputs to ``sizes[k + 1]`` outputs and applies
    ``activations[k]``. Weight matrices are stored ``[out x in]``.
    """

    def __init__(self, sizes: Sequence[int], activations: Sequence[str], flat: np.ndarray | None = None):
        sizes = tuple(int(s) for s in sizes)
        activations = tuple(activations)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ShapeError(f"invalid layer sizes {sizes}")
        if len(activations) != len(sizes) - 1:
            raise ShapeError(f"{len(sizes) - 1} layers but {len(activations)} activations")
        for act in activations:
            if act not in ACTIVATIONS:
                raise ValueError(f"unknown activation {act!r}")
        self.sizes = sizes
        self.activations = activations
        n = sum(o * i + o for i, o in zip(sizes[:-1], sizes[1:]))
        if flat is None:
            flat = np.zeros(n)
        else:
            flat = np.ascontiguousarray(flat, dtype=np.float64)
            if flat.shape != (n,):
                raise ShapeError(f"expected {n} parameters, got shape {flat.shape}")
        self.flat = flat
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        offset = 0
        for i, o in zip(sizes[:-1], sizes[1:]):
            self.weights.append(flat[offset:offset + o * i].reshape(o, i))
            offset += o * i
            self.biases.append(flat[offset:offset + o])
            offset += o

    @classmethod
    def from_layers(cls, layers: Sequence[tuple[np.ndarray, np.ndarray, str]]) -> "MlpParams":
        """Build from explicit ``(W, b, activation)`` triples."""
        if not layers:
            raise ShapeError("need at least one layer")
        sizes = [np.shape(layers[0][0])[1]]
        for k, (w, b, _) in enumerate(layers):
            w = np.asarray(w, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64)
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ShapeError(f"layer {k}: weight {w.shape} / bias {b.shape} mismatch")
            if w.shape[1] != sizes[-1]:
                raise ShapeError(f"layer {k} expects {w.shape[1]} inputs, previous layer gives {sizes[-1]}")
            sizes.append(w.shape[0])
        params = cls(sizes, [act for _, _, act in layers])
        for k, (w, b, _) in enumerate(layers):
            params.weights[k][...] = w
            params.biases[k][...] = b
        return params

    @property
    def layers(self) -> list[tuple[np.ndarray, np.ndarray, str]]:
        return list(zip(self.weights, self.biases, self.activations))

    @property
    def in_dim(self) -> int:
        return self.sizes[0]

    @property
    def out_dim(self) -> int:
        return self.sizes[-1]

    def copy(self) -> "MlpParams":
        return MlpParams(self.sizes, self.activations, self.flat.copy())

    def zeros_like(self) -> "MlpParams":
        return MlpParams(self.sizes, self.activations)

    def __repr__(self) -> str:
        arch = " -> ".join(str(s) for s in self.sizes)
        return f"MlpParams({arch}, {'/'.join(self.activations)})"


class RngStream:
    """A named, seedable random stream.

    The stream id is hashed into the seed sequence, so streams sharing a seed
    but differing in id are statistically independent and never advance
    each other.
    """

    def __init__(self, stream_id: str, seed: int):
        self.stream_id = stream_id
        self.seed = int(seed)
        key = zlib.crc32(stream_id.encode("utf-8"))
        seq = np.random.SeedSequence(entropy=self.seed & (2**64 - 1), spawn_key=(key,))
        self._gen = np.random.Generator(np.random.PCG64(seq))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def random(self, size=None):
        return self._gen.random(size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def choice(self, a, size=None, replace=True):
        return self._gen.choice(a, size=size, replace=replace)

    def get_state(self) -> dict:
        return self._gen.bit_generator.state

    def set_state(self, state: dict) -> None:
        self._gen.bit_generator.state = state

    def __repr__(self) -> str:
        return f"RngStream({self.stream_id!r}, seed={self.seed})"


def init_mlp(sizes: Sequence[int], activations: Sequence[str], rng: RngStream) -> MlpParams:
    """Xavier-uniform weights, zero biases."""
    params = MlpParams(sizes, activations)
    for w in params.weights:
        fan_out, fan_in = w.shape
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        w[...] = rng.uniform(-limit, limit, size=w.shape)
    return params


def _activate(z: np.ndarray, act: str) -> np.ndarray:
    """Apply ``act``; may overwrite ``z``."""
    if act == "linear":
        return z
    if act == "relu":
        return np.maximum(z, 0.0, out=z)
    if act == "tanh":
        return np.tanh(z, out=z)
    if act == "elu":
        return np.where(z > 0.0, z, np.expm1(np.minimum(z, 0.0)))
    # sigmoid
    z = np.clip(z, -SIGMOID_CLAMP, SIGMOID_CLAMP)
    return 1.0 / (1.0 + np.exp(-z))


def _activation_grad(out: np.ndarray, act: str) -> np.ndarray | None:
    """Derivative of the activation expressed through its output; None means 1."""
    if act == "linear":
        return None
    if act == "relu":
        return out > 0.0
    if act == "tanh":
        return 1.0 - out * out
    if act == "elu":
        return np.where(out > 0.0, 1.0, out + 1.0)
    return out * (1.0 - out)


def _as_batch(params: MlpParams, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != params.in_dim:
        raise ShapeError(f"network expects input dim {params.in_dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("non-finite network input")
    return x, single


def mlp_forward(params: MlpParams, x) -> np.ndarray:
    """Evaluate the network on a vector ``[in]`` or a batch ``[B x in]``."""
    h, single = _as_batch(params, x)
    for w, b, act in params.layers:
        z = h @ w.T
        z += b
        h = _activate(z, act)
    return h[0] if single else h


def forward_cached(params: MlpParams, x) -> tuple[np.ndarray, list[np.ndarray]]:
    """Batched forward pass that also returns every layer's output for backprop.

    ``cache[0]`` is the input, ``cache[k + 1]`` the output of layer ``k``.
    """
    h, _ = _as_batch(params, x)
    cache = [h]
    for w, b, act in params.layers:
        z = h @ w.T
        z += b
        h = _activate(z, act)
        cache.append(h)
    return h, cache


def backward(
    params: MlpParams,
    cache: list[np.ndarray],
    upstream: np.ndarray,
    param_grads: bool = True,
    input_grad: bool = False,
) -> tuple[MlpParams | None, np.ndarray | None]:
    """Backpropagate ``upstream`` (dLoss/dOutput, ``[B x out]``) through a cached pass.

    Returns ``(grads, dinput)``; either may be skipped, which saves the
    corresponding matrix products.
    """
    g = np.asarray(upstream, dtype=np.float64)
    if g.ndim == 1:
        g = g[None, :]
    if g.shape != cache[-1].shape:
        raise ShapeError(f"upstream gradient {g.shape} does not match output {cache[-1].shape}")
    grads = params.zeros_like() if param_grads else None
    for k in range(len(params.sizes) - 2, -1, -1):
        d = _activation_grad(cache[k + 1], params.activations[k])
        if d is not None:
            g = g * d
        if grads is not None:
            np.dot(g.T, cache[k], out=grads.weights[k])
            np.sum(g, axis=0, out=grads.biases[k])
        if k > 0 or input_grad:
            g = g @ params.weights[k]
    return grads, (g if input_grad else None)


def mlp_backward(params: MlpParams, x, upstream) -> MlpParams:
    """Parameter gradient of ``<upstream, forward(x)>``, shaped like ``params``."""
    out, cache = forward_cached(params, x)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.ndim == 1:
        upstream = upstream[None, :]
    if upstream.shape != out.shape:
        raise ShapeError(f"upstream gradient {upstream.shape} does not match output {out.shape}")
    grads, _ = backward(params, cache, upstream)
    return grads


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: MlpParams, lr: float = 3e-4, **kwargs) -> "AdamState":
        n = params.flat.shape[0]
        return cls(np.zeros(n), np.zeros(n), 0, lr, **kwargs)

    def copy(self) -> "AdamState":
        return AdamState(self.m.copy(), self.v.copy(), self.step, self.lr, self.beta1, self.beta2, self.eps)


def adam_step(params: MlpParams, grads, state: AdamState) -> tuple[MlpParams, AdamState]:
    """One bias-corrected Adam update. Mutates and returns ``params`` and ``state``."""
    g = grads.flat if isinstance(grads, MlpParams) else np.asarray(grads, dtype=np.float64)
    if g.shape != params.flat.shape or state.m.shape != params.flat.shape:
        raise ShapeError("gradient / optimizer state shape does not match parameters")
    if state.step < 0:
        raise ValueError("negative Adam step counter")
    state.step += 1
    tmp = np.empty_like(g)
    state.m *= state.beta1
    np.multiply(g, 1.0 - state.beta1, out=tmp)
    state.m += tmp
    state.v *= state.beta2
    np.multiply(g, g, out=tmp)
    tmp *= 1.0 - state.beta2
    state.v += tmp
    # m_hat / (sqrt(v_hat) + eps), evaluated in place
    np.sqrt(state.v, out=tmp)
    tmp /= np.sqrt(1.0 - state.beta2 ** state.step)
    tmp += state.eps
    np.divide(state.m, tmp, out=tmp)
    tmp *= state.lr / (1.0 - state.beta1 ** state.step)
    params.flat -= tmp
    return params, state


def soft_update(target: MlpParams, online: MlpParams, tau: float) -> None:
    """target <- (1 - tau) * target + tau * online, in place."""
    target.flat *= 1.0 - tau
    target.flat += tau * online.flat


def grad_check(
    params: MlpParams,
    x,
    loss_fn: Callable[[np.ndarray], tuple[float, np.ndarray]],
    h: float = 1e-5,
) -> float:
    """Max relative error between backprop and central differences.

    ``loss_fn`` maps the network output to ``(loss, dloss/doutput)``.
    """
    out, cache = forward_cached(params, x)
    _, dout = loss_fn(out)
    grads, _ = backward(params, cache, np.asarray(dout, dtype=np.float64).reshape(out.shape))
    analytic = grads.flat
    probe = params.copy()
    numeric = np.empty_like(analytic)
    for i in range(probe.flat.shape[0]):
        orig = probe.flat[i]
        probe.flat[i] = orig + h
        lp, _ = loss_fn(mlp_forward(probe, x))
        probe.flat[i] = orig - h
        lm, _ = loss_fn(mlp_forward(probe, x))
        probe.flat[i] = orig
        numeric[i] = (lp - lm) / (2.0 * h)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))

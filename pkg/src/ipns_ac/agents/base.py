from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from ..errors import ConfigError, DomainError, InsufficientDataError
from ..numerics import AdamState, MlpParams, RngStream, adam_step, backward, forward_cached, init_mlp, mlp_forward, soft_update
from .replay import Batch, Transition

ALGORITHMS = ("sac", "ddpg", "td3")

DEFAULT_HIDDEN = {"sac": (256, 256), "ddpg": (400, 300), "td3": (256, 256)}


@dataclass
class AgentConfig:
    algorithm: str = "sac"
    gamma: float = 0.99
    tau: float = 1e-2
    batch_size: int = 100
    lr: float = 3e-4
    alpha: float = 0.2
    action_noise: float = 0.1
    policy_noise: float = 0.2
    noise_clip: float = 0.5
    policy_delay: int = 2
    start_timesteps: int = 1000
    buffer_size: int = 1_000_000
    hidden: tuple[int, ...] = ()
    v_hidden: tuple[int, ...] = (256, 256)
    log_std_min: float = -20.0
    log_std_max: float = 2.0

    def __post_init__(self):
        self.hidden = tuple(int(h) for h in self.hidden)
        self.v_hidden = tuple(int(h) for h in self.v_hidden)
        if not self.hidden and self.algorithm in DEFAULT_HIDDEN:
            self.hidden = DEFAULT_HIDDEN[self.algorithm]
        self.validate()

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError("gamma must lie in (0, 1)")
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError("tau must lie in (0, 1]")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.lr <= 0 or self.alpha < 0:
            raise ConfigError("lr must be positive and alpha non-negative")
        if self.policy_delay < 1 or self.start_timesteps < 0 or self.buffer_size < 1:
            raise ConfigError("policy_delay, start_timesteps and buffer_size out of range")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def compose_reward(transition: Transition, beta: float, usable: bool | None = None) -> float:
    """(1 - beta) * r + beta * zeta when an intrinsic reward is assigned, else r."""
    if usable is None:
        usable = transition.intrinsic
    if not usable:
        return transition.reward
    return (1.0 - beta) * transition.reward + beta * transition.zeta


def compose_rewards(batch: Batch, beta: float) -> np.ndarray:
    mixed = (1.0 - beta) * batch.rewards + beta * batch.zetas
    return np.where(batch.intrinsic, mixed, batch.rewards)


@dataclass
class Network:
    """Online parameters with optional target copy and their optimizer."""

    params: MlpParams
    opt: AdamState
    target: MlpParams | None = None

    @classmethod
    def create(cls, sizes, activations, rng: RngStream, lr: float, with_target: bool = True) -> "Network":
        params = init_mlp(sizes, activations, rng)
        return cls(params, AdamState.for_params(params, lr), params.copy() if with_target else None)


def mse_step(net: Network, inputs: np.ndarray, targets: np.ndarray) -> float:
    """One Adam step on mean((net(x) - y)^2) for a scalar-output network."""
    out, cache = forward_cached(net.params, inputs)
    diff = out[:, 0] - targets
    grads, _ = backward(net.params, cache, (2.0 / diff.shape[0]) * diff[:, None])
    adam_step(net.params, grads, net.opt)
    return float(np.mean(diff * diff))


class Agent:
    """Shared machinery: action scaling, the IPNS V-network, parameter bookkeeping.

    Actions handed to and received from the environment are in env units;
    networks work on actions rescaled to [-1, 1].
    """

    algorithm = ""

    def __init__(self, state_dim: int, action_dim: int, action_low, action_high,
                 config: AgentConfig, seed: int, value_net: bool = False):
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.low = np.asarray(action_low, dtype=np.float64)
        self.high = np.asarray(action_high, dtype=np.float64)
        self.scale = (self.high - self.low) / 2.0
        self.offset = (self.high + self.low) / 2.0
        self.config = config
        self.seed = seed
        self.init_rng = RngStream("init", seed)
        self.update_rng = RngStream("update", seed)
        self.updates = 0
        self.nets: dict[str, Network] = {}
        self._build()
        if value_net:
            rng = RngStream("vnet_init", seed)
            sizes = (state_dim, *config.v_hidden, 1)
            self.nets["value"] = Network.create(sizes, ["relu"] * len(config.v_hidden) + ["linear"], rng, config.lr)

    def _build(self) -> None:
        raise NotImplementedError

    @property
    def has_value_net(self) -> bool:
        return "value" in self.nets

    def to_env(self, a: np.ndarray) -> np.ndarray:
        return self.offset + self.scale * a

    def from_env(self, a: np.ndarray) -> np.ndarray:
        return (np.asarray(a, dtype=np.float64) - self.offset) / self.scale

    def _check_state(self, state) -> np.ndarray:
        s = np.asarray(state, dtype=np.float64)
        if s.shape[-1] != self.state_dim:
            raise DomainError(f"state dim {s.shape[-1]} != {self.state_dim}")
        if not np.all(np.isfinite(s)):
            raise DomainError("non-finite state")
        return s

    def act(self, state, deterministic: bool = False, rng: RngStream | None = None) -> np.ndarray:
        s = self._check_state(state)
        if not deterministic and rng is None:
            raise ValueError("stochastic actions need an rng stream")
        return self.to_env(self._act(s, deterministic, rng))

    def _act(self, s: np.ndarray, deterministic: bool, rng: RngStream | None) -> np.ndarray:
        raise NotImplementedError

    def update(self, batch: Batch, beta: float = 0.0, index: int | None = None) -> dict:
        """One gradient step on critics (and actor); ``index`` overrides the 1-based update counter."""
        if len(batch) < 1:
            raise InsufficientDataError("empty batch")
        self.updates += 1
        return self._update(batch, beta, self.updates if index is None else index)

    def _update(self, batch: Batch, beta: float, index: int) -> dict:
        raise NotImplementedError

    def _soft(self, *names: str) -> None:
        for name in names:
            net = self.nets[name]
            soft_update(net.target, net.params, self.config.tau)

    def value(self, states) -> np.ndarray:
        """V-network estimate(s) for raw state(s)."""
        out = mlp_forward(self.nets["value"].params, states)
        return out[..., 0]

    def v_update(self, batch: Batch) -> float:
        """One TD(0) step on the V-network with the extrinsic reward; returns mean delta^2."""
        if len(batch) < 1:
            raise InsufficientDataError("empty batch")
        net = self.nets["value"]
        g = self.config.gamma
        v_next = mlp_forward(net.target, batch.next_states)[:, 0]
        target = batch.rewards + g * (1.0 - batch.dones) * v_next
        loss = mse_step(net, batch.states, target)
        soft_update(net.target, net.params, self.config.tau)
        return loss

    def td_errors(self, batch: Batch) -> np.ndarray:
        net = self.nets["value"]
        v_next = mlp_forward(net.target, batch.next_states)[:, 0]
        v_now = mlp_forward(net.params, batch.states)[:, 0]
        return batch.rewards + self.config.gamma * (1.0 - batch.dones) * v_next - v_now

    def parameters(self) -> dict[str, np.ndarray]:
        """Flat view of every parameter vector, keyed ``net`` / ``net.target``."""
        out = {}
        for name, net in self.nets.items():
            out[name] = net.params.flat
            if net.target is not None:
                out[name + ".target"] = net.target.flat
        return out

    def checksum(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for key, arr in sorted(self.parameters().items()):
            h.update(key.encode())
            h.update(arr.tobytes())
        return h.hexdigest()


def mlp_sizes(in_dim: int, hidden, out_dim: int) -> tuple[int, ...]:
    return (in_dim, *hidden, out_dim)

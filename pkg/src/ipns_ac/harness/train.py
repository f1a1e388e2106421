"""The collect/update training loop, deterministic evaluation, and multi-seed execution."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .._malloc import tune_allocator
from ..agents import ReplayBuffer, Transition, make_agent
from ..environments import Env, make_env, random_rollout
from ..errors import DomainError
from ..ipns import ABLATION_MODES, Autoencoder, IpnsPipeline, train_autoencoder
from ..numerics import RngStream
from .config import RunConfig


@dataclass
class RunRecord:
    """Evaluation returns of one seed: ``returns[u]`` is the mean return after unit ``u + 1``."""

    seed: int
    unit: int
    returns: list[float]
    wall_clock: float = 0.0
    config: dict = field(default_factory=dict)
    rng_seeds: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @property
    def n_units(self) -> int:
        return len(self.returns)

    @property
    def steps(self) -> list[int]:
        return [(u + 1) * self.unit for u in range(self.n_units)]

    def same_curve(self, other: "RunRecord") -> bool:
        """Equality of everything except wall-clock time."""
        return (self.seed == other.seed and self.unit == other.unit and self.returns == other.returns
                and self.rng_seeds == other.rng_seeds)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "unit": self.unit, "returns": list(self.returns), "wall_clock": self.wall_clock,
                "config": self.config, "rng_seeds": self.rng_seeds, "stats": self.stats}

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(int(d["seed"]), int(d["unit"]), [float(r) for r in d["returns"]], float(d.get("wall_clock", 0.0)),
                   d.get("config", {}), d.get("rng_seeds", {}), d.get("stats", {}))


class RandomPolicy:
    """Uniform-random actions with the agent ``act`` signature; used for the random-policy reference."""

    def __init__(self, env: Env, seed: int):
        self.env = env
        self.rng = RngStream("random_policy", seed)

    def act(self, state, deterministic: bool = True, rng=None) -> np.ndarray:
        return self.env.sample_action(self.rng)


def evaluate(agent, env: Env, episodes: int = 5, rng: RngStream | None = None) -> float:
    """Mean undiscounted return of ``episodes`` full episodes with deterministic actions."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    if rng is None:
        rng = RngStream("eval", 0)
    total = 0.0
    for _ in range(episodes):
        s = env.reset(rng)
        while True:
            res = env.step(agent.act(s, deterministic=True))
            total += res.reward
            s = res.next_state
            if res.done or res.truncated:
                break
    return total / episodes


def pretrain_autoencoder(env_name: str, latent_dim: int, seed: int = 0, steps: int = 10_000,
                         epochs: int = 200, batch_size: int = 64, lr: float = 1e-3) -> Autoencoder:
    """Fit the state encoder on a random-policy rollout run on its own env instance."""
    rng = RngStream("ae", seed)
    env = make_env(env_name)
    env.reset(rng)
    states = random_rollout(env, steps, rng)
    return train_autoencoder(states, latent_dim, rng, epochs=epochs, batch_size=batch_size, lr=lr)


def autoencoder_for(config: RunConfig) -> Autoencoder | None:
    """The autoencoder a run needs: loaded from ``config.autoencoder`` or trained, or None if unused."""
    if not config.ipns or not ABLATION_MODES[config.ablation][0]:
        return None
    if config.autoencoder:
        ae = Autoencoder.load(config.autoencoder)
        if ae.latent_dim != config.ipns_config.latent_dim:
            raise DomainError(f"autoencoder latent dim {ae.latent_dim} != configured {config.ipns_config.latent_dim}")
        return ae
    ic = config.ipns_config
    return pretrain_autoencoder(config.env, ic.latent_dim, config.ae_seed, ic.n_encode, ic.ae_epochs,
                                ic.ae_batch_size, ic.ae_lr)


class Trainer:
    """One seed of one configuration. ``run`` executes the full step budget."""

    def __init__(self, config: RunConfig, seed: int, autoencoder: Autoencoder | None = None):
        config.validate()
        self.config = config
        self.seed = seed
        self.env = make_env(config.env)
        self.eval_env = make_env(config.env)
        spec = self.env.spec
        self.env_rng = RngStream("env", seed)
        self.policy_rng = RngStream("policy", seed)
        self.replay_rng = RngStream("replay", seed)
        self.eval_rng = RngStream("eval", seed)
        encode, _, use_value = ABLATION_MODES[config.mode]
        self.agent = make_agent(spec, config.agent, seed, value_net=use_value)
        self.pipeline = None
        if config.ipns:
            if encode and autoencoder is None:
                autoencoder = autoencoder_for(config)
            self.pipeline = IpnsPipeline(config.ipns_config, spec.state_dim, seed, config.mode,
                                         autoencoder if encode else None,
                                         self.agent.value if use_value else None)
        self.beta = config.ipns_config.beta if config.ipns else 0.0
        capacity = int(min(config.agent.buffer_size, config.steps))
        self.buffer = ReplayBuffer(spec.state_dim, spec.action_dim, capacity)
        self.env_steps = 0
        self.encode_steps = config.ipns_config.n_encode if (config.ipns and encode) else 0
        self.on_step = None

    def _step(self, action):
        self.env_steps += 1
        return self.env.step(action)

    def run(self) -> RunRecord:
        tune_allocator()
        cfg = self.config
        start = time.perf_counter()
        returns = []
        s = self.env.reset(self.env_rng)
        warmup = cfg.agent.start_timesteps
        batch_size = cfg.agent.batch_size
        value_updates = self.agent.has_value_net
        for t in range(1, cfg.steps + 1):
            if t <= warmup:
                a = self.env.sample_action(self.policy_rng)
            else:
                a = self.agent.act(s, deterministic=False, rng=self.policy_rng)
            res = self._step(a)
            if self.pipeline is not None:
                zeta, assigned = self.pipeline.observe(s, res.reward)
            else:
                zeta, assigned = 0.0, False
            tr = Transition(s, a, res.reward, zeta, res.next_state, res.done, assigned)
            self.buffer.push(tr)
            if self.on_step is not None:
                self.on_step(t, tr)
            s = res.next_state
            if res.done or res.truncated:
                s = self.env.reset(self.env_rng)
            if t >= warmup and len(self.buffer) >= batch_size:
                batch = self.buffer.sample(batch_size, self.replay_rng)
                self.agent.update(batch, self.beta)
                if value_updates:
                    self.agent.v_update(batch)
            if t % cfg.unit == 0:
                returns.append(evaluate(self.agent, self.eval_env, cfg.eval_episodes, self.eval_rng))
        stats = {"env_steps": self.env_steps, "encode_steps": self.encode_steps, "updates": self.agent.updates}
        if self.pipeline is not None:
            stats["hvd_recomputes"] = list(self.pipeline.hvd.recompute_steps)
            stats["intrinsic_assigned"] = self.pipeline.assigned
        rng_seeds = {"seed": self.seed, "ae_seed": cfg.ae_seed,
                     "streams": ["env", "policy", "replay", "eval", "init", "update", "vnet_init", "ipns", "hvd"]}
        return RunRecord(self.seed, cfg.unit, returns, time.perf_counter() - start, cfg.to_dict(), rng_seeds, stats)


def train_run(config: RunConfig, seed: int, autoencoder: Autoencoder | None = None) -> RunRecord:
    return Trainer(config, seed, autoencoder).run()


def _worker(args) -> dict:
    config_dict, seed, ae_path = args
    config = RunConfig.from_dict(config_dict)
    ae = Autoencoder.load(ae_path) if ae_path else None
    return train_run(config, seed, ae).to_dict()


def train_seeds(config: RunConfig, seeds=None, autoencoder: Autoencoder | None = None,
                ae_path: str | None = None) -> list[RunRecord]:
    """Run every seed, in worker processes when ``config.workers > 1``. Results keep seed order.

    A shared autoencoder is trained once up front so all seeds see the same encoder.
    """
    seeds = list(config.seeds if seeds is None else seeds)
    if autoencoder is None:
        autoencoder = autoencoder_for(config)
    if config.workers <= 1 or len(seeds) == 1:
        return [train_run(config, s, autoencoder) for s in seeds]
    import tempfile
    import os

    with tempfile.TemporaryDirectory() as tmp:
        if autoencoder is not None and ae_path is None:
            ae_path = os.path.join(tmp, "autoencoder.npz")
            autoencoder.save(ae_path)
        jobs = [(config.to_dict(), s, ae_path if autoencoder is not None else None) for s in seeds]
        with ProcessPoolExecutor(max_workers=min(config.workers, len(seeds))) as pool:
            return [RunRecord.from_dict(d) for d in pool.map(_worker, jobs)]

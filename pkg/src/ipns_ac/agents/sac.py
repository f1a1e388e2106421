"""Soft actor-critic with a fixed entropy coefficient.

When IPNS mixes in an intrinsic reward with weight beta, the entropy bonus is
scaled by the same (1 - beta) as the extrinsic reward, so the backup matches
(1 - beta)(r + alpha H) + beta zeta.
"""

from __future__ import annotations

import numpy as np

from ..numerics import RngStream, adam_step, backward, forward_cached, mlp_forward
from .base import Agent, Network, compose_rewards, mlp_sizes, mse_step
from .replay import Batch

LOG_2PI = np.log(2.0 * np.pi)
LOG_2 = np.log(2.0)


def squash_correction(u: np.ndarray) -> np.ndarray:
    """log(1 - tanh(u)^2), evaluated without cancellation."""
    return 2.0 * (LOG_2 - u - np.logaddexp(0.0, -2.0 * u))


class SACAgent(Agent):
    algorithm = "sac"

    def _build(self) -> None:
        c = self.config
        s, a = self.state_dim, self.action_dim
        relu = ["relu"] * len(c.hidden)
        self.nets["policy"] = Network.create(mlp_sizes(s, c.hidden, 2 * a), relu + ["linear"], self.init_rng, c.lr,
                                             with_target=False)
        for name in ("q1", "q2"):
            self.nets[name] = Network.create(mlp_sizes(s + a, c.hidden, 1), relu + ["linear"], self.init_rng, c.lr)

    def _heads(self, out: np.ndarray):
        mean = out[:, : self.action_dim]
        raw = out[:, self.action_dim:]
        log_std = np.clip(raw, self.config.log_std_min, self.config.log_std_max)
        return mean, raw, log_std

    def _act(self, s, deterministic, rng):
        out = mlp_forward(self.nets["policy"].params, s[None, :] if s.ndim == 1 else s)
        mean, _, log_std = self._heads(out)
        if deterministic:
            a = np.tanh(mean)
        else:
            a = np.tanh(mean + np.exp(log_std) * rng.normal(size=mean.shape))
        return a[0] if s.ndim == 1 else a

    def sample(self, states: np.ndarray, rng: RngStream):
        """Reparameterized sample: (action, log-prob) for a batch of states."""
        mean, _, log_std = self._heads(mlp_forward(self.nets["policy"].params, states))
        eps = rng.normal(size=mean.shape)
        u = mean + np.exp(log_std) * eps
        logp = np.sum(-0.5 * eps * eps - log_std - 0.5 * LOG_2PI - squash_correction(u), axis=1)
        return np.tanh(u), logp

    def critic_targets(self, batch: Batch, beta: float, next_actions: np.ndarray, next_logp: np.ndarray) -> np.ndarray:
        c = self.config
        alpha = (1.0 - beta) * c.alpha
        x2 = np.concatenate([batch.next_states, next_actions], axis=1)
        q1t = mlp_forward(self.nets["q1"].target, x2)[:, 0]
        q2t = mlp_forward(self.nets["q2"].target, x2)[:, 0]
        soft_q = np.minimum(q1t, q2t) - alpha * next_logp
        return compose_rewards(batch, beta) + c.gamma * (1.0 - batch.dones) * soft_q

    def _update(self, batch: Batch, beta: float, index: int) -> dict:
        c = self.config
        alpha = (1.0 - beta) * c.alpha
        rng = self.update_rng
        n = len(batch)

        a2, logp2 = self.sample(batch.next_states, rng)
        y = self.critic_targets(batch, beta, a2, logp2)
        x = np.concatenate([batch.states, self.from_env(batch.actions)], axis=1)
        q1_loss = mse_step(self.nets["q1"], x, y)
        q2_loss = mse_step(self.nets["q2"], x, y)

        policy = self.nets["policy"]
        out, cache = forward_cached(policy.params, batch.states)
        mean, raw, log_std = self._heads(out)
        std = np.exp(log_std)
        eps = rng.normal(size=mean.shape)
        u = mean + std * eps
        a = np.tanh(u)
        logp = np.sum(-0.5 * eps * eps - log_std - 0.5 * LOG_2PI - squash_correction(u), axis=1)

        xa = np.concatenate([batch.states, a], axis=1)
        q1o, c1 = forward_cached(self.nets["q1"].params, xa)
        q2o, c2 = forward_cached(self.nets["q2"].params, xa)
        use1 = (q1o[:, 0] <= q2o[:, 0]).astype(np.float64)
        q_min = np.minimum(q1o[:, 0], q2o[:, 0])
        actor_loss = float(np.mean(alpha * logp - q_min))

        _, dx1 = backward(self.nets["q1"].params, c1, (-use1 / n)[:, None], param_grads=False, input_grad=True)
        _, dx2 = backward(self.nets["q2"].params, c2, (-(1.0 - use1) / n)[:, None], param_grads=False, input_grad=True)
        d_a = (dx1 + dx2)[:, self.state_dim:]
        d_u = d_a * (1.0 - a * a) + (alpha / n) * 2.0 * a
        d_mean = d_u
        d_log_std = d_u * std * eps - alpha / n
        d_log_std = d_log_std * ((raw >= c.log_std_min) & (raw <= c.log_std_max))
        grads, _ = backward(policy.params, cache, np.concatenate([d_mean, d_log_std], axis=1))
        adam_step(policy.params, grads, policy.opt)

        self._soft("q1", "q2")
        return {"q1_loss": q1_loss, "q2_loss": q2_loss, "actor_loss": actor_loss,
                "entropy": float(-np.mean(logp))}

from __future__ import annotations

import numpy as np

from ..numerics import adam_step, backward, forward_cached, mlp_forward
from .base import Agent, Network, compose_rewards, mlp_sizes, mse_step
from .replay import Batch


class DDPGAgent(Agent):
    algorithm = "ddpg"

    def _build(self) -> None:
        c = self.config
        s, a = self.state_dim, self.action_dim
        relu = ["relu"] * len(c.hidden)
        self.nets["actor"] = Network.create(mlp_sizes(s, c.hidden, a), relu + ["tanh"], self.init_rng, c.lr)
        self._build_critics(relu)

    def _build_critics(self, relu) -> None:
        c = self.config
        sizes = mlp_sizes(self.state_dim + self.action_dim, c.hidden, 1)
        self.nets["critic"] = Network.create(sizes, relu + ["linear"], self.init_rng, c.lr)

    def _act(self, s, deterministic, rng):
        a = mlp_forward(self.nets["actor"].params, s)
        if deterministic:
            return a
        return np.clip(a + rng.normal(0.0, self.config.action_noise, size=a.shape), -1.0, 1.0)

    def critic_targets(self, batch: Batch, beta: float) -> np.ndarray:
        a2 = mlp_forward(self.nets["actor"].target, batch.next_states)
        x2 = np.concatenate([batch.next_states, a2], axis=1)
        q_next = mlp_forward(self.nets["critic"].target, x2)[:, 0]
        return compose_rewards(batch, beta) + self.config.gamma * (1.0 - batch.dones) * q_next

    def _actor_step(self, states: np.ndarray, critic: str) -> float:
        actor = self.nets["actor"]
        a, cache = forward_cached(actor.params, states)
        q, cq = forward_cached(self.nets[critic].params, np.concatenate([states, a], axis=1))
        n = states.shape[0]
        _, dx = backward(self.nets[critic].params, cq, np.full((n, 1), -1.0 / n), param_grads=False, input_grad=True)
        grads, _ = backward(actor.params, cache, dx[:, self.state_dim:])
        adam_step(actor.params, grads, actor.opt)
        return float(-np.mean(q))

    def _update(self, batch: Batch, beta: float, index: int) -> dict:
        y = self.critic_targets(batch, beta)
        x = np.concatenate([batch.states, self.from_env(batch.actions)], axis=1)
        critic_loss = mse_step(self.nets["critic"], x, y)
        actor_loss = self._actor_step(batch.states, "critic")
        self._soft("critic", "actor")
        return {"critic_loss": critic_loss, "actor_loss": actor_loss}

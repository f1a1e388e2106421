from __future__ import annotations

import numpy as np

from ..numerics import RngStream, mlp_forward
from .base import Network, compose_rewards, mlp_sizes, mse_step
from .ddpg import DDPGAgent
from .replay import Batch


class TD3Agent(DDPGAgent):
    """Clipped double-Q, target policy smoothing, delayed actor updates."""

    algorithm = "td3"

    def _build_critics(self, relu) -> None:
        c = self.config
        sizes = mlp_sizes(self.state_dim + self.action_dim, c.hidden, 1)
        for name in ("q1", "q2"):
            self.nets[name] = Network.create(sizes, relu + ["linear"], self.init_rng, c.lr)

    def smoothing_noise(self, shape, rng: RngStream) -> np.ndarray:
        c = self.config
        return np.clip(rng.normal(0.0, c.policy_noise, size=shape), -c.noise_clip, c.noise_clip)

    def critic_targets(self, batch: Batch, beta: float, noise: np.ndarray | None = None) -> np.ndarray:
        a2 = mlp_forward(self.nets["actor"].target, batch.next_states)
        if noise is None:
            noise = self.smoothing_noise(a2.shape, self.update_rng)
        a2 = np.clip(a2 + noise, -1.0, 1.0)
        x2 = np.concatenate([batch.next_states, a2], axis=1)
        q1t = mlp_forward(self.nets["q1"].target, x2)[:, 0]
        q2t = mlp_forward(self.nets["q2"].target, x2)[:, 0]
        return compose_rewards(batch, beta) + self.config.gamma * (1.0 - batch.dones) * np.minimum(q1t, q2t)

    def _update(self, batch: Batch, beta: float, index: int) -> dict:
        y = self.critic_targets(batch, beta)
        x = np.concatenate([batch.states, self.from_env(batch.actions)], axis=1)
        report = {"q1_loss": mse_step(self.nets["q1"], x, y), "q2_loss": mse_step(self.nets["q2"], x, y)}
        if index % self.config.policy_delay == 0:
            report["actor_loss"] = self._actor_step(batch.states, "q1")
            self._soft("q1", "q2", "actor")
        return report

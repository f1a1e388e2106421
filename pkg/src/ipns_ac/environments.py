"""Built-in continuous-control environments.

Three small analytic systems share a reset/step interface:

``planar_reacher``
    Two-link arm driven by joint torques (a damped double integrator on the
    joint angles). State (10): cos q1, cos q2, sin q1, sin q2, target xy,
    end-effector velocity xy, target minus end-effector xy.
    Reward ``-||d||^2 - ||a||^2``; 50-step episodes.
``pendulum_swingup``
    Torque-limited pendulum. State (3): cos th, sin th, th_dot.
    Reward ``-(th^2 + 0.1 th_dot^2 + 0.001 u^2)``; 200-step episodes.
``point_mass_2d`` / ``point_mass_2d_sparse``
    Planar double integrator with a goal. State (6): position, velocity,
    goal. Dense reward ``-||p - g||``; sparse reward 1 inside the goal
    radius, else 0.

None of them terminate early: episodes end only on the time limit, which
sets ``truncated``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, ShapeError
from .numerics import RngStream

DT = 0.05


@dataclass(frozen=True)
class EnvSpec:
    name: str
    state_dim: int
    action_dim: int
    action_low: tuple[float, ...]
    action_high: tuple[float, ...]
    max_steps: int

    def __post_init__(self):
        if self.state_dim < 1 or self.action_dim < 1 or self.max_steps < 1:
            raise ConfigError(f"invalid env spec {self}")
        if len(self.action_low) != self.action_dim or len(self.action_high) != self.action_dim:
            raise ConfigError("action bounds must have one entry per action dimension")
        if any(lo >= hi for lo, hi in zip(self.action_low, self.action_high)):
            raise ConfigError("action low must be below high in every dimension")


@dataclass
class StepResult:
    next_state: np.ndarray
    reward: float
    done: bool
    truncated: bool
    clipped: bool = False


class Env:
    """Base class: subclasses provide ``spec``, ``_reset`` and ``_advance``."""

    spec: EnvSpec

    def __init__(self):
        self.t = 0
        self.clip_count = 0
        self._low = np.asarray(self.spec.action_low, dtype=np.float64)
        self._high = np.asarray(self.spec.action_high, dtype=np.float64)

    def reset(self, rng: RngStream) -> np.ndarray:
        self.t = 0
        self._reset(rng)
        return self.observe()

    def step(self, action, rng: RngStream | None = None) -> StepResult:
        a = np.asarray(action, dtype=np.float64).reshape(-1)
        if a.shape != (self.spec.action_dim,):
            raise ShapeError(f"{self.spec.name} expects {self.spec.action_dim} action dims, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DomainError("non-finite action")
        clipped_a = np.clip(a, self._low, self._high)
        clipped = bool(np.any(clipped_a != a))
        if clipped:
            self.clip_count += 1
        reward = self._advance(clipped_a)
        self.t += 1
        return StepResult(self.observe(), float(reward), False, self.t >= self.spec.max_steps, clipped)

    def sample_action(self, rng: RngStream) -> np.ndarray:
        return rng.uniform(self._low, self._high)

    def observe(self) -> np.ndarray:
        raise NotImplementedError

    def _reset(self, rng: RngStream) -> None:
        raise NotImplementedError

    def _advance(self, action: np.ndarray) -> float:
        raise NotImplementedError


def reacher_reward(displacement, action) -> float:
    d = np.asarray(displacement, dtype=np.float64)
    a = np.asarray(action, dtype=np.float64)
    return -float(d @ d) - float(a @ a)


class PlanarReacher(Env):
    spec = EnvSpec("planar_reacher", 10, 2, (-1.0, -1.0), (1.0, 1.0), 50)

    def __init__(self, link1: float = 0.1, link2: float = 0.11, gain: float = 10.0,
                 damping: float = 2.0, max_speed: float = 10.0, init_angle: float = np.pi):
        self.link1 = link1
        self.link2 = link2
        self.gain = gain
        self.damping = damping
        self.max_speed = max_speed
        self.init_angle = init_angle
        self.q = np.zeros(2)
        self.qdot = np.zeros(2)
        self.target = np.array([link1 + link2, 0.0])
        super().__init__()

    def fingertip(self, q=None) -> np.ndarray:
        q = self.q if q is None else q
        return np.array([
            self.link1 * np.cos(q[0]) + self.link2 * np.cos(q[0] + q[1]),
            self.link1 * np.sin(q[0]) + self.link2 * np.sin(q[0] + q[1]),
        ])

    def fingertip_velocity(self) -> np.ndarray:
        q, qd = self.q, self.qdot
        s1, c1 = np.sin(q[0]), np.cos(q[0])
        s12, c12 = np.sin(q[0] + q[1]), np.cos(q[0] + q[1])
        jac = np.array([
            [-self.link1 * s1 - self.link2 * s12, -self.link2 * s12],
            [self.link1 * c1 + self.link2 * c12, self.link2 * c12],
        ])
        return jac @ qd

    def _reset(self, rng: RngStream) -> None:
        self.q = rng.uniform(-self.init_angle, self.init_angle, size=2)
        self.qdot = np.zeros(2)
        r_min = abs(self.link1 - self.link2)
        r_max = self.link1 + self.link2
        radius = np.sqrt(rng.uniform(r_min**2, r_max**2))
        angle = rng.uniform(-np.pi, np.pi)
        self.target = radius * np.array([np.cos(angle), np.sin(angle)])

    def _advance(self, action: np.ndarray) -> float:
        # semi-implicit Euler on a damped double integrator
        self.qdot = self.qdot + DT * (self.gain * action - self.damping * self.qdot)
        self.qdot = np.clip(self.qdot, -self.max_speed, self.max_speed)
        self.q = self.q + DT * self.qdot
        return reacher_reward(self.fingertip() - self.target, action)

    def observe(self) -> np.ndarray:
        tip = self.fingertip()
        return np.concatenate([
            np.cos(self.q), np.sin(self.q), self.target, self.fingertip_velocity(), self.target - tip,
        ])


def pendulum_reward(theta: float, theta_dot: float, torque: float) -> float:
    """Upright (theta = 0) is the goal; theta is wrapped to [-pi, pi)."""
    return -(theta**2 + 0.1 * theta_dot**2 + 0.001 * torque**2)


class PendulumSwingup(Env):
    spec = EnvSpec("pendulum_swingup", 3, 1, (-2.0,), (2.0,), 200)

    def __init__(self, g: float = 10.0, mass: float = 1.0, length: float = 1.0,
                 max_speed: float = 8.0, init_angle: float = np.pi, init_speed: float = 1.0):
        self.g = g
        self.mass = mass
        self.length = length
        self.max_speed = max_speed
        self.init_angle = init_angle
        self.init_speed = init_speed
        self.theta = 0.0
        self.theta_dot = 0.0
        super().__init__()

    def _reset(self, rng: RngStream) -> None:
        self.theta = float(rng.uniform(-self.init_angle, self.init_angle))
        self.theta_dot = float(rng.uniform(-self.init_speed, self.init_speed))

    def _advance(self, action: np.ndarray) -> float:
        u = float(action[0])
        acc = 3.0 * self.g / (2.0 * self.length) * np.sin(self.theta) + 3.0 / (self.mass * self.length**2) * u
        self.theta_dot = float(np.clip(self.theta_dot + acc * DT, -self.max_speed, self.max_speed))
        self.theta = ((self.theta + self.theta_dot * DT + np.pi) % (2 * np.pi)) - np.pi
        # scored on the successor state, like every other env here
        return pendulum_reward(self.theta, self.theta_dot, u)

    def observe(self) -> np.ndarray:
        return np.array([np.cos(self.theta), np.sin(self.theta), self.theta_dot])


class PointMass2D(Env):
    spec = EnvSpec("point_mass_2d", 6, 2, (-1.0, -1.0), (1.0, 1.0), 100)

    def __init__(self, sparse: bool = False, goal=None, goal_range: float = 1.0, init_noise: float = 0.1,
                 goal_radius: float = 0.1, gain: float = 2.0, damping: float = 1.0, arena: float = 2.0):
        self.sparse = sparse
        self.fixed_goal = None if goal is None else np.asarray(goal, dtype=np.float64)
        self.goal_range = goal_range
        self.init_noise = init_noise
        self.goal_radius = goal_radius
        self.gain = gain
        self.damping = damping
        self.arena = arena
        self.pos = np.zeros(2)
        self.vel = np.zeros(2)
        self.goal = np.zeros(2) if goal is None else self.fixed_goal.copy()
        if sparse:
            self.spec = EnvSpec("point_mass_2d_sparse", 6, 2, (-1.0, -1.0), (1.0, 1.0), 100)
        super().__init__()

    def _reset(self, rng: RngStream) -> None:
        if self.init_noise > 0:
            self.pos = rng.uniform(-self.init_noise, self.init_noise, size=2)
        else:
            self.pos = np.zeros(2)
        self.vel = np.zeros(2)
        if self.fixed_goal is None:
            self.goal = rng.uniform(-self.goal_range, self.goal_range, size=2)
        else:
            self.goal = self.fixed_goal.copy()

    def _advance(self, action: np.ndarray) -> float:
        self.vel = self.vel + DT * (self.gain * action - self.damping * self.vel)
        self.pos = np.clip(self.pos + DT * self.vel, -self.arena, self.arena)
        dist = float(np.linalg.norm(self.pos - self.goal))
        if self.sparse:
            return 1.0 if dist < self.goal_radius else 0.0
        return -dist

    def observe(self) -> np.ndarray:
        return np.concatenate([self.pos, self.vel, self.goal])


ENV_NAMES = ("planar_reacher", "pendulum_swingup", "point_mass_2d", "point_mass_2d_sparse")


def make_env(name: str, **kwargs) -> Env:
    if name == "planar_reacher":
        return PlanarReacher(**kwargs)
    if name == "pendulum_swingup":
        return PendulumSwingup(**kwargs)
    if name == "point_mass_2d":
        return PointMass2D(sparse=False, **kwargs)
    if name == "point_mass_2d_sparse":
        return PointMass2D(sparse=True, **kwargs)
    raise ConfigError(f"unknown environment {name!r}; choose from {', '.join(ENV_NAMES)}")


def random_rollout(env: Env, steps: int, rng: RngStream) -> np.ndarray:
    """Successor states of ``steps`` uniform-random actions, resetting at episode end."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    states = np.empty((steps, env.spec.state_dim))
    env.reset(rng)
    for i in range(steps):
        res = env.step(env.sample_action(rng))
        states[i] = res.next_state
        if res.done or res.truncated:
            env.reset(rng)
    return states

"""Uniform experience replay over a fixed-capacity ring of transitions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError
from ..numerics import RngStream


@dataclass
class Transition:
    state: np.ndarray
    action: np.ndarray
    reward: float
    zeta: float
    next_state: np.ndarray
    done: bool
    # False means zeta is the unassigned sentinel (0.0)
    intrinsic: bool = False


@dataclass
class Batch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    zetas: np.ndarray
    intrinsic: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray

    def __len__(self) -> int:
        return self.rewards.shape[0]

    def transition(self, i: int) -> Transition:
        return Transition(self.states[i], self.actions[i], float(self.rewards[i]), float(self.zetas[i]),
                          self.next_states[i], bool(self.dones[i]), bool(self.intrinsic[i]))


class ReplayBuffer:
    def __init__(self, state_dim: int, action_dim: int, capacity: int = 1_000_000):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.zetas = np.zeros(capacity)
        self.intrinsic = np.zeros(capacity, dtype=bool)
        self.next_states = np.zeros((capacity, state_dim))
        self.dones = np.zeros(capacity, dtype=bool)
        self.size = 0
        self._next = 0

    def __len__(self) -> int:
        return self.size

    def push(self, t: Transition) -> None:
        i = self._next
        self.states[i] = t.state
        self.actions[i] = t.action
        self.rewards[i] = t.reward
        self.zetas[i] = t.zeta if t.intrinsic else 0.0
        self.intrinsic[i] = t.intrinsic
        self.next_states[i] = t.next_state
        self.dones[i] = t.done
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def _ordered(self) -> np.ndarray:
        """Storage indices from oldest to newest."""
        if self.size < self.capacity:
            return np.arange(self.size)
        return (np.arange(self.capacity) + self._next) % self.capacity

    def _gather(self, idx: np.ndarray) -> Batch:
        return Batch(self.states[idx], self.actions[idx], self.rewards[idx], self.zetas[idx],
                     self.intrinsic[idx], self.next_states[idx], self.dones[idx])

    def contents(self) -> Batch:
        return self._gather(self._ordered())

    def sample(self, batch_size: int, rng: RngStream) -> Batch:
        """``batch_size`` transitions drawn uniformly with replacement."""
        if self.size < batch_size:
            raise InsufficientDataError(f"buffer holds {self.size} transitions, batch needs {batch_size}")
        return self._gather(rng.integers(0, self.size, size=batch_size))

    def checksum(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for arr in (self.states, self.actions, self.rewards, self.zetas, self.intrinsic, self.next_states, self.dones):
            h.update(np.ascontiguousarray(arr[: self.size]).tobytes())
        h.update(f"{self.size}/{self._next}".encode())
        return h.hexdigest()

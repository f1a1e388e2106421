"""Off-policy actor-critic agents and experience replay."""

from ..errors import ConfigError
from .base import ALGORITHMS, Agent, AgentConfig, compose_reward, compose_rewards
from .checkpoint import load_checkpoint, save_checkpoint
from .ddpg import DDPGAgent
from .replay import Batch, ReplayBuffer, Transition
from .sac import SACAgent
from .td3 import TD3Agent

_CLASSES = {"sac": SACAgent, "ddpg": DDPGAgent, "td3": TD3Agent}


def make_agent(spec, config: AgentConfig, seed: int, value_net: bool = False) -> Agent:
    """Build an agent for an ``EnvSpec``."""
    try:
        cls = _CLASSES[config.algorithm]
    except KeyError:
        raise ConfigError(f"unknown algorithm {config.algorithm!r}") from None
    return cls(spec.state_dim, spec.action_dim, spec.action_low, spec.action_high, config, seed, value_net)


__all__ = [
    "ALGORITHMS", "Agent", "AgentConfig", "Batch", "DDPGAgent", "ReplayBuffer", "SACAgent", "TD3Agent",
    "Transition", "compose_reward", "compose_rewards", "load_checkpoint", "make_agent", "save_checkpoint",
]

"""IPNS intrinsic rewards for off-policy actor-critic agents (SAC, DDPG, TD3)."""

__version__ = "0.1.0"

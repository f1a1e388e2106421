"""Agent checkpoints: parameters, targets, optimizer moments and RNG states in one ``.npz``."""

from __future__ import annotations

import json

import numpy as np

from ..numerics import RngStream
from .base import Agent, AgentConfig

FORMAT = "ipns-agent-checkpoint"
VERSION = 1


def save_checkpoint(agent: Agent, path, streams: dict[str, RngStream] | None = None, extra: dict | None = None) -> None:
    """Write ``agent`` (and optionally named RNG streams) so a reload resumes bit-exactly."""
    arrays = {}
    nets = {}
    for name, net in agent.nets.items():
        arrays[f"{name}.params"] = net.params.flat
        arrays[f"{name}.adam_m"] = net.opt.m
        arrays[f"{name}.adam_v"] = net.opt.v
        if net.target is not None:
            arrays[f"{name}.target"] = net.target.flat
        nets[name] = {"adam_step": net.opt.step, "has_target": net.target is not None}
    cfg = {k: list(v) if isinstance(v, tuple) else v for k, v in agent.config.to_dict().items()}
    rngs = {"init": agent.init_rng.get_state(), "update": agent.update_rng.get_state()}
    meta = {
        "format": FORMAT,
        "version": VERSION,
        "state_dim": agent.state_dim,
        "action_dim": agent.action_dim,
        "action_low": agent.low.tolist(),
        "action_high": agent.high.tolist(),
        "config": cfg,
        "seed": agent.seed,
        "value_net": agent.has_value_net,
        "updates": agent.updates,
        "nets": nets,
        "agent_rngs": rngs,
        "streams": {k: {"id": s.stream_id, "seed": s.seed, "state": s.get_state()} for k, s in (streams or {}).items()},
        "extra": extra or {},
    }
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta)), **arrays)


def load_checkpoint(path) -> tuple[Agent, dict[str, RngStream], dict]:
    """Inverse of ``save_checkpoint``: returns ``(agent, streams, extra)``."""
    from . import make_agent
    from ..environments import EnvSpec

    with np.load(path, allow_pickle=False) as f:
        meta = json.loads(str(f["meta"]))
        if meta.get("format") != FORMAT or meta.get("version") != VERSION:
            raise ValueError(f"{path}: not a version-{VERSION} agent checkpoint")
        config = AgentConfig(**meta["config"])
        spec = EnvSpec("checkpoint", meta["state_dim"], meta["action_dim"], tuple(meta["action_low"]),
                       tuple(meta["action_high"]), 1)
        agent = make_agent(spec, config, meta["seed"], value_net=meta["value_net"])
        if set(agent.nets) != set(meta["nets"]):
            raise ValueError(f"{path}: network set {sorted(meta['nets'])} does not match {sorted(agent.nets)}")
        for name, info in meta["nets"].items():
            net = agent.nets[name]
            net.params.flat[:] = f[f"{name}.params"]
            net.opt.m[:] = f[f"{name}.adam_m"]
            net.opt.v[:] = f[f"{name}.adam_v"]
            net.opt.step = int(info["adam_step"])
            if info["has_target"]:
                net.target.flat[:] = f[f"{name}.target"]
    agent.updates = int(meta["updates"])
    agent.init_rng.set_state(meta["agent_rngs"]["init"])
    agent.update_rng.set_state(meta["agent_rngs"]["update"])
    streams = {}
    for key, s in meta["streams"].items():
        stream = RngStream(s["id"], s["seed"])
        stream.set_state(s["state"])
        streams[key] = stream
    return agent, streams, meta["extra"]

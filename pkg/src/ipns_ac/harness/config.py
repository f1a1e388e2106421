"""Run configuration: defaults per environment/algorithm, flat ``key = value`` files, overrides."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..agents import ALGORITHMS, AgentConfig
from ..environments import ENV_NAMES
from ..errors import ConfigError
from ..ipns import ABLATION_MODES, IpnsConfig

# Per-environment IPNS settings and run lengths.
ENV_DEFAULTS = {
    "planar_reacher": {"n_candidates": 5, "weight_c": 1.0, "latent_dim": 5, "steps": 200_000, "unit": 2000},
    "pendulum_swingup": {"n_candidates": 10, "weight_c": 3.0, "latent_dim": 2, "steps": 100_000, "unit": 2000},
    "point_mass_2d": {"n_candidates": 5, "weight_c": 1.0, "latent_dim": 4, "steps": 100_000, "unit": 2000},
    "point_mass_2d_sparse": {"n_candidates": 5, "weight_c": 1.0, "latent_dim": 4, "steps": 100_000, "unit": 2000},
}

# (beta, epsilon) per algorithm
_REACHER_BETA = {"sac": (1e-4, 0.0), "ddpg": (1e-3, 0.0), "td3": (1e-5, 0.3)}
_PENDULUM_BETA = {"sac": (0.1, 0.0), "ddpg": (1e-4, 0.0), "td3": (1e-4, 0.0)}
BETA_DEFAULTS = {
    "planar_reacher": _REACHER_BETA,
    "pendulum_swingup": _PENDULUM_BETA,
    "point_mass_2d": _REACHER_BETA,
    "point_mass_2d_sparse": _REACHER_BETA,
}

FINAL_WINDOW_STEPS = 50_000


@dataclass
class RunConfig:
    env: str = "planar_reacher"
    ipns: bool = False
    ablation: str = "full"
    steps: int = 200_000
    unit: int = 2000
    eval_episodes: int = 5
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    final_units: int = 0
    workers: int = 1
    ae_seed: int = 0
    autoencoder: str | None = None
    out: str | None = None
    agent: AgentConfig = field(default_factory=AgentConfig)
    ipns_config: IpnsConfig = field(default_factory=IpnsConfig)

    def __post_init__(self):
        self.seeds = tuple(int(s) for s in self.seeds)
        if self.final_units <= 0 and self.unit > 0:
            self.final_units = max(1, min(FINAL_WINDOW_STEPS // self.unit, self.steps // self.unit))
        self.validate()

    @property
    def algorithm(self) -> str:
        return self.agent.algorithm

    @property
    def mode(self) -> str:
        return self.ablation if self.ipns else "none"

    @property
    def n_units(self) -> int:
        return self.steps // self.unit

    def validate(self) -> None:
        if self.env not in ENV_NAMES:
            raise ConfigError(f"unknown environment {self.env!r}; choose from {', '.join(ENV_NAMES)}")
        if self.ablation not in ABLATION_MODES:
            raise ConfigError(f"unknown ablation mode {self.ablation!r}")
        if self.ipns and self.ablation == "none":
            raise ConfigError("ablation 'none' is the baseline; drop --ipns instead")
        if self.unit < 1 or self.steps < 1 or self.steps % self.unit != 0:
            raise ConfigError(f"steps ({self.steps}) must be a positive multiple of the training unit ({self.unit})")
        if self.eval_episodes < 1:
            raise ConfigError("eval_episodes must be >= 1")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        if not 1 <= self.final_units <= self.n_units:
            raise ConfigError(f"final_units must lie in [1, {self.n_units}]")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        self.agent.validate()
        self.ipns_config.validate()

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name not in ("agent", "ipns_config")}
        out["seeds"] = list(self.seeds)
        out["agent"] = {k: list(v) if isinstance(v, tuple) else v for k, v in self.agent.to_dict().items()}
        out["ipns_config"] = self.ipns_config.to_dict()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        agent = AgentConfig(**d.pop("agent", {}))
        ipns_config = IpnsConfig(**d.pop("ipns_config", {}))
        return cls(agent=agent, ipns_config=ipns_config, **d)

    def replace(self, **changes) -> "RunConfig":
        return RunConfig.from_dict({**self.to_dict(), **changes})

    def fingerprint(self) -> str:
        import hashlib

        d = self.to_dict()
        for key in ("out", "workers"):
            d.pop(key, None)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


# key -> (section, field). Section "" is RunConfig itself.
KEYS = {
    "env": ("", "env"),
    "algo": ("agent", "algorithm"),
    "algorithm": ("agent", "algorithm"),
    "ipns": ("", "ipns"),
    "ablation": ("", "ablation"),
    "steps": ("", "steps"),
    "unit": ("", "unit"),
    "eval_episodes": ("", "eval_episodes"),
    "seeds": ("", "seeds"),
    "final_units": ("", "final_units"),
    "workers": ("", "workers"),
    "ae_seed": ("", "ae_seed"),
    "autoencoder": ("", "autoencoder"),
    "out": ("", "out"),
    # agent
    "learning_rate": ("agent", "lr"),
    "discount": ("agent", "gamma"),
    "gamma": ("agent", "gamma"),
    "soft_update": ("agent", "tau"),
    "tau": ("agent", "tau"),
    "batch_size": ("agent", "batch_size"),
    "buffer_size": ("agent", "buffer_size"),
    "start_timesteps": ("agent", "start_timesteps"),
    "action_noise": ("agent", "action_noise"),
    "policy_noise": ("agent", "policy_noise"),
    "noise_clip": ("agent", "noise_clip"),
    "policy_delay": ("agent", "policy_delay"),
    "alpha": ("agent", "alpha"),
    "hidden": ("agent", "hidden"),
    "v_hidden": ("agent", "v_hidden"),
    # IPNS
    "hvd_update_frequency": ("ipns_config", "hvd_every"),
    "ipns_m": ("ipns_config", "hvd_every"),
    "irg_samples": ("ipns_config", "n_samples"),
    "ipns_k": ("ipns_config", "n_samples"),
    "hvd_candidates": ("ipns_config", "n_candidates"),
    "ipns_j": ("ipns_config", "n_candidates"),
    "hvd_minibatches": ("ipns_config", "n_batches"),
    "ipns_i": ("ipns_config", "n_batches"),
    "minibatch_factor": ("ipns_config", "batch_percent"),
    "ipns_wp": ("ipns_config", "batch_percent"),
    "weight_multiplier": ("ipns_config", "weight_c"),
    "ipns_c": ("ipns_config", "weight_c"),
    "beta": ("ipns_config", "beta"),
    "epsilon": ("ipns_config", "epsilon"),
    "latent_dim": ("ipns_config", "latent_dim"),
    "bottleneck_dim": ("ipns_config", "latent_dim"),
    "perturbation_scale": ("ipns_config", "sigma"),
    "n_encode": ("ipns_config", "n_encode"),
    "ae_epochs": ("ipns_config", "ae_epochs"),
}

_SECTION_TYPES = {"": RunConfig, "agent": AgentConfig, "ipns_config": IpnsConfig}


def _field_type(section: str, name: str) -> str:
    for f in dataclasses.fields(_SECTION_TYPES[section]):
        if f.name == name:
            return str(f.type)
    raise KeyError(name)


def _coerce(raw, type_name: str, key: str):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if type_name == "bool":
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if type_name == "int":
            return int(float(text)) if "e" in text.lower() else int(text)
        if type_name == "float":
            return float(text)
        if type_name.startswith("tuple"):
            return tuple(int(p) for p in text.replace(" ", "").split(",") if p)
        if type_name.startswith("str | None"):
            return None if text.lower() in ("", "none") else text
        return text
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def load_config_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


def build_config(values: dict | None = None, extra_keys: tuple[str, ...] = ()) -> RunConfig:
    """Resolve a RunConfig: env/algorithm defaults first, then ``values`` on top.

    Unknown keys raise ``ConfigError`` unless listed in ``extra_keys``.
    """
    values = {k.replace("-", "_"): v for k, v in (values or {}).items() if v is not None}
    unknown = [k for k in values if k not in KEYS and k not in extra_keys]
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    sections: dict[str, dict] = {"": {}, "agent": {}, "ipns_config": {}}
    for key, raw in values.items():
        if key in extra_keys:
            continue
        section, name = KEYS[key]
        sections[section][name] = _coerce(raw, _field_type(section, name), key)

    env = sections[""].get("env", "planar_reacher")
    algo = sections["agent"].get("algorithm", "sac")
    if env not in ENV_DEFAULTS:
        raise ConfigError(f"unknown environment {env!r}; choose from {', '.join(ENV_NAMES)}")
    if algo not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
    env_d = ENV_DEFAULTS[env]
    beta, eps = BETA_DEFAULTS[env][algo]
    ipns_kw = {"n_candidates": env_d["n_candidates"], "weight_c": env_d["weight_c"],
               "latent_dim": env_d["latent_dim"], "beta": beta, "epsilon": eps}
    ipns_kw.update(sections["ipns_config"])
    run_kw = {"steps": env_d["steps"], "unit": env_d["unit"]}
    run_kw.update(sections[""])
    try:
        return RunConfig(agent=AgentConfig(**sections["agent"]), ipns_config=IpnsConfig(**ipns_kw), **run_kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None

"""Baseline-vs-IPNS (or ablation) comparisons over a shared seed set."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..environments import make_env
from ..numerics import RngStream
from .config import RunConfig
from .curves import aggregate, final_window, pooled_std, sign_test
from .io import read_run, write_run
from .train import RandomPolicy, RunRecord, evaluate, train_seeds


def variant_label(config: RunConfig, mode: str) -> str:
    algo = config.algorithm.upper()
    if mode == "none":
        return algo
    if mode == "full":
        return f"{algo}+IPNS"
    return f"{algo}+{mode}"


def variant_config(config: RunConfig, mode: str) -> RunConfig:
    if mode == "none":
        return config.replace(ipns=False)
    return config.replace(ipns=True, ablation=mode)


def random_policy_records(config: RunConfig, seeds=None) -> list[RunRecord]:
    """A uniform-random policy scored with the same per-unit evaluation protocol."""
    records = []
    for seed in (config.seeds if seeds is None else seeds):
        env = make_env(config.env)
        policy = RandomPolicy(env, seed)
        rng = RngStream("eval", seed)
        returns = [evaluate(policy, env, config.eval_episodes, rng) for _ in range(config.n_units)]
        records.append(RunRecord(seed, config.unit, returns, config=config.to_dict()))
    return records


@dataclass
class VariantResult:
    label: str
    mode: str
    records: list[RunRecord]
    final_units: int

    @property
    def per_seed_final(self) -> np.ndarray:
        return final_window(self.records, self.final_units)

    @property
    def final_mean(self) -> float:
        return aggregate(self.records, self.final_units).final_mean

    @property
    def final_std(self) -> float:
        return float(self.per_seed_final.std())


@dataclass
class ComparisonReport:
    variants: list[VariantResult]
    random: VariantResult | None = None
    notes: dict = field(default_factory=dict)

    def by_mode(self, mode: str) -> VariantResult:
        for v in self.variants:
            if v.mode == mode:
                return v
        raise KeyError(mode)

    def versus(self, mode: str, reference: str = "none") -> dict:
        """Final-window statistics of ``mode`` against ``reference`` (paired by seed)."""
        a, b = self.by_mode(mode), self.by_mode(reference)
        diff = a.per_seed_final - b.per_seed_final
        return {
            "difference": a.final_mean - b.final_mean,
            "pooled_std": pooled_std(a.per_seed_final, b.per_seed_final),
            "wins": int(np.sum(diff > 0)),
            "losses": int(np.sum(diff < 0)),
            "sign_test_p": sign_test(int(np.sum(diff > 0)), int(np.sum(diff < 0))),
        }

    def against_random(self, mode: str = "none") -> dict:
        if self.random is None:
            raise ValueError("no random-policy reference in this report")
        a = self.by_mode(mode)
        diff = a.per_seed_final - self.random.per_seed_final
        wins, losses = int(np.sum(diff > 0)), int(np.sum(diff < 0))
        return {"difference": a.final_mean - self.random.final_mean, "wins": wins, "losses": losses,
                "sign_test_p": sign_test(wins, losses)}

    def table(self) -> str:
        rows = list(self.variants) + ([self.random] if self.random is not None else [])
        lines = ["| variant | R_f (final window) | std over seeds | seeds |", "|---|---:|---:|---:|"]
        for v in rows:
            lines.append(f"| {v.label} | {v.final_mean:.3f} | {v.final_std:.3f} | {len(v.records)} |")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        out = {"variants": {v.label: {"mode": v.mode, "final_mean": v.final_mean, "final_std": v.final_std,
                                      "per_seed_final": v.per_seed_final.tolist(), "final_units": v.final_units}
                            for v in self.variants}}
        if self.random is not None:
            out["random"] = {"final_mean": self.random.final_mean, "final_std": self.random.final_std,
                             "per_seed_final": self.random.per_seed_final.tolist()}
            out["baseline_vs_random"] = self.against_random("none") if any(
                v.mode == "none" for v in self.variants) else None
        base = [v for v in self.variants if v.mode == "none"]
        if base:
            out["versus_baseline"] = {v.label: self.versus(v.mode) for v in self.variants if v.mode != "none"}
        out.update(self.notes)
        return out


def run_comparison(config: RunConfig, variants=("none", "full"), seeds=None, out=None,
                   include_random: bool = True) -> ComparisonReport:
    """Train every variant on the same seeds; optionally write per-variant curves and a summary."""
    seeds = list(config.seeds if seeds is None else seeds)
    results = []
    for mode in variants:
        vcfg = variant_config(config, mode)
        records = train_seeds(vcfg, seeds)
        result = VariantResult(variant_label(config, mode), mode, records, config.final_units)
        results.append(result)
        if out is not None:
            write_run(Path(out) / mode, vcfg, records, {"label": result.label})
    random = None
    if include_random:
        random = VariantResult("random policy", "random", random_policy_records(config, seeds), config.final_units)
        if out is not None:
            write_run(Path(out) / "random", config, random.records, {"label": random.label})
    report = ComparisonReport(results, random)
    if out is not None:
        write_report(out, report)
    return report


def write_report(out, report: ComparisonReport) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "comparison.json").write_text(json.dumps(report.to_dict(), indent=2))
    (out / "comparison.md").write_text(report.table() + "\n")


def load_report(out) -> ComparisonReport:
    """Rebuild a report from the per-variant directories written by ``run_comparison``."""
    out = Path(out)
    variants, random = [], None
    for sub in sorted(p for p in out.iterdir() if (p / "manifest.json").exists()):
        config, records, manifest = read_run(sub)
        result = VariantResult(manifest.get("label", sub.name), sub.name, records, config.final_units)
        if sub.name == "random":
            random = result
        else:
            variants.append(result)
    variants.sort(key=lambda v: (v.mode != "none", v.mode))
    return ComparisonReport(variants, random)

"""Experiment orchestration: configs, the training loop, evaluation, curves and the CLI."""

from .compare import ComparisonReport, VariantResult, load_report, random_policy_records, run_comparison
from .config import BETA_DEFAULTS, ENV_DEFAULTS, KEYS, RunConfig, build_config, load_config_file, parse_config_text
from .curves import Aggregate, aggregate, final_window, pooled_std, sign_test, smooth
from .io import read_curves, read_run, source_fingerprint, write_run
from .train import RandomPolicy, RunRecord, Trainer, evaluate, pretrain_autoencoder, train_run, train_seeds

__all__ = [
    "Aggregate", "BETA_DEFAULTS", "ComparisonReport", "ENV_DEFAULTS", "KEYS", "RandomPolicy", "RunConfig",
    "RunRecord", "Trainer", "VariantResult", "aggregate", "build_config", "evaluate", "final_window",
    "load_config_file", "load_report", "parse_config_text", "pooled_std", "pretrain_autoencoder",
    "random_policy_records", "read_curves", "read_run", "run_comparison", "sign_test", "smooth",
    "source_fingerprint", "train_run", "train_seeds", "write_run",
]

"""Command-line entry point: ``ipns-ac {train,pretrain-ae,compare,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..environments import ENV_NAMES
from ..errors import ConfigError
from ..ipns import ABLATION_MODES
from .config import build_config, load_config_file
from .curves import aggregate
from .io import MANIFEST_FILE, read_run, write_aggregate, write_run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger("ipns_ac")

# CLI flag -> config key
_FLAG_KEYS = {
    "env": "env", "algo": "algo", "ablation": "ablation", "steps": "steps", "unit": "unit", "seeds": "seeds",
    "eval_episodes": "eval_episodes", "workers": "workers", "out": "out", "autoencoder": "autoencoder",
    "ipns_m": "ipns_m", "ipns_k": "ipns_k", "ipns_j": "ipns_j", "ipns_i": "ipns_i", "ipns_wp": "ipns_wp",
    "ipns_c": "ipns_c", "beta": "beta", "epsilon": "epsilon", "latent_dim": "latent_dim",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat 'key = value' config file; flags override it")
    p.add_argument("--env", choices=ENV_NAMES)
    p.add_argument("--algo", choices=("sac", "ddpg", "td3"))
    p.add_argument("--steps", help="total environment steps N")
    p.add_argument("--unit", help="steps per training unit (evaluation cadence)")
    p.add_argument("--seeds", help="comma-separated seeds")
    p.add_argument("--eval-episodes")
    p.add_argument("--workers", help="parallel worker processes")
    p.add_argument("--out", help="output directory")
    p.add_argument("--autoencoder", help="pretrained autoencoder (.npz) to reuse")
    g = p.add_argument_group("IPNS")
    g.add_argument("--ipns-m", help="HVD update period / cut-in threshold")
    g.add_argument("--ipns-k", help="perturbation samples per step")
    g.add_argument("--ipns-j", help="HVD candidates")
    g.add_argument("--ipns-i", help="minibatches per density estimate")
    g.add_argument("--ipns-wp", help="minibatch size as a percentage of the buffer")
    g.add_argument("--ipns-c", help="distance-weight multiplier")
    g.add_argument("--beta", help="intrinsic reward weight")
    g.add_argument("--epsilon", help="probability of withholding the intrinsic reward")
    g.add_argument("--latent-dim", help="autoencoder bottleneck size")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ipns-ac", description="IPNS intrinsic rewards for off-policy actor-critic agents")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    train = sub.add_parser("train", help="train one configuration over several seeds")
    _add_run_flags(train)
    train.add_argument("--ipns", action="store_true", help="enable the IPNS intrinsic reward")
    train.add_argument("--ablation", choices=[m for m in ABLATION_MODES if m != "none"])

    ae = sub.add_parser("pretrain-ae", help="train and save a state autoencoder")
    ae.add_argument("--env", choices=ENV_NAMES, required=True)
    ae.add_argument("--steps", type=int, default=10_000)
    ae.add_argument("--latent-dim", type=int, required=True)
    ae.add_argument("--epochs", type=int, default=200)
    ae.add_argument("--seed", type=int, default=0)
    ae.add_argument("--out", required=True)

    cmp_ = sub.add_parser("compare", help="baseline vs IPNS (or ablations) on shared seeds")
    _add_run_flags(cmp_)
    cmp_.add_argument("--variants", help="comma-separated modes; 'none' is the baseline (default none,full)")
    cmp_.add_argument("--no-random", action="store_true", help="skip the random-policy reference")

    rep = sub.add_parser("report", help="print the R_f table and refresh aggregate curves")
    rep.add_argument("--in", dest="in_dir", required=True)
    return parser


def _values(args, extra_keys=()) -> dict:
    values = load_config_file(args.config) if getattr(args, "config", None) else {}
    for attr, key in _FLAG_KEYS.items():
        v = getattr(args, attr, None)
        if v is not None:
            values[key] = v
    if getattr(args, "ipns", False):
        values["ipns"] = "true"
    return values


def cmd_train(args) -> int:
    from .train import train_seeds

    config = build_config(_values(args))
    out = config.out or "runs/train"
    records = train_seeds(config)
    write_run(out, config, records)
    agg = aggregate(records, config.final_units)
    print(f"{config.env} {config.algorithm}{'+ipns/' + config.ablation if config.ipns else ''}: "
          f"R_f = {agg.final_mean:.3f} over the last {config.final_units} units, {len(records)} seed(s) -> {out}")
    return EXIT_OK


def cmd_pretrain_ae(args) -> int:
    from ..ipns import reconstruction_mse
    from .train import pretrain_autoencoder

    if args.steps < 1 or args.epochs < 1:
        raise ConfigError("steps and epochs must be >= 1")
    ae = pretrain_autoencoder(args.env, args.latent_dim, args.seed, args.steps, args.epochs)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    ae.save(args.out)
    print(f"autoencoder {ae.state_dim}->{ae.latent_dim}: final MSE {ae.history[-1]:.5f} -> {args.out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    from .compare import run_comparison

    values = _values(args, extra_keys=("variants",))
    variants = values.pop("variants", None) or args.variants or "none,full"
    modes = [m.strip() for m in str(variants).split(",") if m.strip()]
    bad = [m for m in modes if m not in ABLATION_MODES]
    if bad:
        raise ConfigError(f"unknown variant(s): {', '.join(bad)}")
    config = build_config(values)
    out = config.out or "runs/compare"
    report = run_comparison(config, modes, out=out, include_random=not args.no_random)
    print(report.table())
    return EXIT_OK


def cmd_report(args) -> int:
    from .compare import load_report, write_report

    root = Path(args.in_dir)
    if not root.is_dir():
        raise ConfigError(f"no such directory: {root}")
    if (root / MANIFEST_FILE).exists():
        config, records, _ = read_run(root)
        write_aggregate(root / "aggregate.csv", records, config.final_units)
        agg = aggregate(records, config.final_units)
        print(f"R_f = {agg.final_mean:.3f} over the last {config.final_units} units ({len(records)} seeds)")
        return EXIT_OK
    report = load_report(root)
    if not report.variants and report.random is None:
        raise ConfigError(f"{root} holds no run manifests")
    for v in report.variants + ([report.random] if report.random else []):
        write_aggregate(root / v.mode / "aggregate.csv", v.records, v.final_units)
    write_report(root, report)
    print(report.table())
    if any(v.mode == "none" for v in report.variants):
        print(json.dumps(report.to_dict().get("versus_baseline", {}), indent=2))
    return EXIT_OK


COMMANDS = {"train": cmd_train, "pretrain-ae": cmd_pretrain_ae, "compare": cmd_compare, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - top-level reporting
        log.debug("run failed", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

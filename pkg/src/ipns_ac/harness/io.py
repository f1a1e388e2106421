"""Curve CSVs and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

from .config import RunConfig
from .curves import aggregate
from .train import RunRecord

CURVES_FILE = "curves.csv"
AGGREGATE_FILE = "aggregate.csv"
MANIFEST_FILE = "manifest.json"


# Files whose contents determine training results; reporting and CLI code is left out
# so cached experiment outputs survive edits to presentation.
RESULT_SOURCES = ("_malloc.py", "numerics.py", "environments.py", "agents", "ipns", "harness/train.py",
                  "harness/config.py")


def source_fingerprint() -> str:
    """Hash of the package sources that determine training results."""
    root = Path(__file__).resolve().parent.parent
    files = []
    for name in RESULT_SOURCES:
        path = root / name
        files.extend(sorted(path.rglob("*.py")) if path.is_dir() else [path])
    h = hashlib.sha256()
    for path in files:
        h.update(str(path.relative_to(root)).encode())
        h.update(path.read_bytes())
    return h.hexdigest()[:16]


def write_curves(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["unit", "step", "seed", "episodic_return"])
        for rec in records:
            for u, (step, ret) in enumerate(zip(rec.steps, rec.returns), 1):
                w.writerow([u, step, rec.seed, repr(float(ret))])


def write_aggregate(path, records, final_units: int | None = None) -> None:
    agg = aggregate(records, final_units)
    unit = records[0].unit
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["unit", "step", "mean", "std", "smoothed_mean"])
        for u in range(agg.n_units):
            w.writerow([u + 1, (u + 1) * unit, repr(float(agg.mean[u])), repr(float(agg.std[u])),
                        repr(float(agg.smoothed_mean[u]))])


def read_curves(path) -> list[RunRecord]:
    by_seed: dict[int, list[tuple[int, int, float]]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            by_seed.setdefault(int(row["seed"]), []).append(
                (int(row["unit"]), int(row["step"]), float(row["episodic_return"])))
    records = []
    for seed, rows in by_seed.items():
        rows.sort()
        unit = rows[0][1] // rows[0][0]
        records.append(RunRecord(seed, unit, [r[2] for r in rows]))
    return records


def write_run(out_dir, config: RunConfig, records, extra: dict | None = None) -> Path:
    """Write ``curves.csv``, ``aggregate.csv`` and ``manifest.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_curves(out / CURVES_FILE, records)
    write_aggregate(out / AGGREGATE_FILE, records, config.final_units)
    manifest = {
        "config": config.to_dict(),
        "config_fingerprint": config.fingerprint(),
        "source_fingerprint": source_fingerprint(),
        "seeds": [r.seed for r in records],
        "records": [r.to_dict() for r in records],
        "wall_clock_total": sum(r.wall_clock for r in records),
    }
    if extra:
        manifest.update(extra)
    (out / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2))
    return out


def read_run(out_dir) -> tuple[RunConfig, list[RunRecord], dict]:
    manifest = json.loads((Path(out_dir) / MANIFEST_FILE).read_text())
    config = RunConfig.from_dict(manifest["config"])
    records = [RunRecord.from_dict(d) for d in manifest["records"]]
    return config, records, manifest

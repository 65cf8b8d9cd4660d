"""Command-line runner: ``modflow <experiment> [--config FILE] [flags]``.

Each run writes ``<out>/<experiment>/checks.csv``, one CSV per data table and
``report.json`` (resolved config, checks, fit summaries, wall-clock time and
version).  Exit codes: 0 all checks pass, 1 a check failed, 2 bad
configuration, 3 resource limit.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import PRESETS, load_toml, resolve
from .errors import ConfigError, ResourceLimit

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3
FMT = "{:.11e}"          # 12 significant digits


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return FMT.format(float(x))
    if isinstance(x, (list, tuple)):
        return " ".join(fmt(v) for v in x)
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(FMT.format(float(x)))
    return x


def write_csv(path: Path, rows: list[dict]) -> None:
    keys: list[str] = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(keys)
        for r in rows:
            w.writerow([fmt(r.get(k, "")) for k in keys])


def write_report(cfg, outcome, wall: float, out_dir: Path) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "checks.csv", [c.row() for c in outcome.checks])
    for name, rows in outcome.tables.items():
        write_csv(out_dir / f"{name}.csv", rows)
    report = {
        "experiment": cfg.experiment, "version": __version__,
        "config": cfg.model_dump(mode="json"),
        "checks": [c.row() for c in outcome.checks],
        "info": outcome.info, "passed": outcome.passed,
        "wall_clock_s": wall, "tables": sorted(outcome.tables),
    }
    (out_dir / "report.json").write_text(json.dumps(_jsonable(report), indent=2))
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="modflow", description="Modular-flow verification experiments.")
    p.add_argument("--version", action="version", version=f"modflow {__version__}")
    sub = p.add_subparsers(dest="experiment", required=True)
    for name in PRESETS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="TOML config file")
        s.add_argument("--seed", type=int)
        s.add_argument("--jobs", type=int, help="worker processes (capped by MODFLOW_THREADS)")
        s.add_argument("--out", type=str, help="output directory")
        s.add_argument("--tolerance-scale", type=float, dest="tolerance_scale")
        s.add_argument("--quiet", action="store_true")
    return p


def run(argv=None) -> int:
    from .experiments import RUNNERS

    args = build_parser().parse_args(argv)
    try:
        data = load_toml(args.config) if args.config else {}
        cfg = resolve(args.experiment, data, seed=args.seed, jobs=args.jobs, out=args.out,
                      tolerance_scale=args.tolerance_scale)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        outcome = RUNNERS[cfg.experiment](cfg)
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    wall = time.perf_counter() - t0
    out_dir = Path(cfg.out) / cfg.experiment
    write_report(cfg, outcome, wall, out_dir)
    if not args.quiet:
        for c in outcome.checks:
            flag = "PASS" if c.passed else "FAIL"
            op = "<=" if c.mode == "le" else ">="
            print(f"{flag}  {c.name}: {fmt(c.value)} {op} {fmt(c.tol)}")
        print(f"{cfg.experiment}: {'pass' if outcome.passed else 'FAIL'} in {wall:.1f}s -> {out_dir}")
    return EXIT_OK if outcome.passed else EXIT_FAIL


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

"""Command line entry point.

    python -m diodebox run config.toml [--out DIR]
    python -m diodebox preset fig3a-rest-scan [--trials N] [--seed S] [--out DIR] [--scale desk|paper]
    python -m diodebox list-presets

Every invocation writes ``results.csv`` (one row per grid point, trajectory
or run), ``summary.csv`` (one row per case: optimum, error bars, eta),
``metadata.json`` and, for scans, one gnuplot-ready ``.dat`` file per case.
The default output directory is ``$DIODEBOX_OUT`` or ``./diodebox_out``.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import platform
import re
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, load_config, with_overrides
from .presets import PRESETS, SCALES, get_preset
from .scenario import CaseResult, RestScanCache, execute

log = logging.getLogger("diodebox")

SCHEMA_VERSION = 1
OUT_ENV = "DIODEBOX_OUT"
DEFAULT_OUT = "diodebox_out"
#: tallied trial errors above this fraction of all trials make the exit status nonzero
MAX_ERROR_RATE = 1e-3

EXIT_OK, EXIT_TRIAL_ERRORS, EXIT_CONFIG = 0, 1, 2


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def _columns(records: Sequence[dict]) -> list[str]:
    cols: list[str] = []
    for rec in records:
        for key in rec:
            if key not in cols:
                cols.append(key)
    return cols


def write_csv(path: Path, records: Sequence[dict]) -> None:
    cols = _columns(records)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for rec in records:
            w.writerow([fmt(rec[c]) if c in rec else "" for c in cols])


def _slug(labels: dict, index: int) -> str:
    text = "_".join(f"{k}{fmt(v)}" for k, v in labels.items()) or "case"
    return f"{index:03d}_" + re.sub(r"[^A-Za-z0-9.+-]+", "_", text)


def write_dat(path: Path, case: CaseResult) -> None:
    """Whitespace-separated columns; blank line whenever the first column changes (splot blocks)."""
    cols = _columns(case.rows)
    lines = [f"# {k} = {fmt(v)}" for k, v in case.labels.items()]
    lines.append("# " + " ".join(cols))
    prev = None
    for row in case.rows:
        first = row.get(cols[0])
        if prev is not None and len(cols) > 3 and first != prev:
            lines.append("")
        prev = first
        lines.append(" ".join(fmt(row.get(c, "nan")) for c in cols))
    path.write_text("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def run_cases(name: str, cases: Sequence[tuple[dict, ScenarioConfig]], out_dir: Path,
              workers: Optional[int] = None, formats=("csv", "json", "dat")) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    cache = RestScanCache()
    results = []
    for i, (labels, cfg) in enumerate(cases):
        log.info("[%d/%d] %s %s", i + 1, len(cases), name, labels)
        results.append(execute(cfg, labels, cache, workers))
    wall = time.perf_counter() - t0

    rows = [{**c.labels, **r} for c in results for r in c.rows]
    summary = [{**c.labels, **c.summary} for c in results]
    if "csv" in formats:
        write_csv(out_dir / "results.csv", rows)
        write_csv(out_dir / "summary.csv", summary)
    if "dat" in formats:
        for i, c in enumerate(results):
            if len(c.rows) > 1 and "trajectory" not in c.rows[0]:
                write_dat(out_dir / f"{_slug(c.labels, i)}.dat", c)
    n_err = sum(c.n_errors for c in results)
    n_tot = sum(c.n_trials for c in results)
    if "json" in formats:
        meta = {
            "schema_version": SCHEMA_VERSION,
            "name": name,
            "code_version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "wall_time_s": wall,
            "n_trial_errors": n_err,
            "n_trials_total": n_tot,
            "cases": [{"labels": c.labels, "master_seed": c.config.run.master_seed,
                       "config": c.config.to_dict(), "resolved": c.resolved, "summary": c.summary}
                      for c in results],
        }
        (out_dir / "metadata.json").write_text(json.dumps(_jsonable(meta), indent=2) + "\n")
    print(f"{name}: {len(results)} case(s), {n_tot} trials in {wall:.1f} s -> {out_dir}")
    if n_tot and n_err > MAX_ERROR_RATE * n_tot:
        print(f"error: {n_err} trial errors exceed {MAX_ERROR_RATE:.1%} of trials", file=sys.stderr)
        return EXIT_TRIAL_ERRORS
    return EXIT_OK


def _out_dir(arg: Optional[str], cfg_dir: Optional[str], name: str) -> Path:
    if arg:
        return Path(arg)
    if cfg_dir:
        return Path(cfg_dir)
    return Path(os.environ.get(OUT_ENV, DEFAULT_OUT)) / name


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diodebox", description="Monte Carlo atom catching by a diodic box.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress")
    p.add_argument("--workers", type=int, default=None, help="threads per ensemble (default: all cores)")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a TOML scenario config")
    r.add_argument("config", type=Path)
    r.add_argument("--trials", type=int, default=None)
    r.add_argument("--seed", type=lambda s: int(s, 0), default=None)
    r.add_argument("--out", default=None)

    pr = sub.add_parser("preset", help="run a named preset")
    pr.add_argument("name", choices=sorted(PRESETS), metavar="name")
    pr.add_argument("--trials", type=int, default=None, help="overrides --scale")
    pr.add_argument("--seed", type=lambda s: int(s, 0), default=None)
    pr.add_argument("--out", default=None)
    pr.add_argument("--scale", choices=sorted(SCALES), default="desk")

    sub.add_parser("list-presets", help="list preset names")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(message)s")
    if args.command == "list-presets":
        for name, preset in PRESETS.items():
            print(f"{name:28s} {preset.description}")
        return EXIT_OK
    try:
        if args.command == "run":
            cfg = with_overrides(load_config(args.config), args.trials, args.seed)
            out = _out_dir(args.out, cfg.output.dir, args.config.stem)
            return run_cases(args.config.stem, [({}, cfg)], out, args.workers, cfg.output.formats)
        preset = get_preset(args.name)
        n = args.trials if args.trials is not None else SCALES[args.scale]
        kwargs = {} if args.seed is None else {"seed": args.seed}
        cases = preset.cases(n, **kwargs)
        return run_cases(preset.name, cases, _out_dir(args.out, None, preset.name), args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

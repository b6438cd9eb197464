"""Turning a ScenarioConfig into numbers: auto heights, runs, scans, comparisons.

A case produces plain row dictionaries (one per grid point or trajectory) and
a one-row summary; writing them to disk is left to the caller.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .boxcatch import Wriggle, wedge_rest_optimum_seed
from .config import (AUTO, SEED, AxisConfig, ConfigError, ScenarioConfig, SweepConfig,
                     build_run_spec, complete_trajectory, grid_values, unresolved_field)
from .engine import FractionEstimate, RunSpec, run_ensemble
from .sweep import (SweepSpec, apply_point, check_wriggle_speed, compare_trajectories,
                    cooling_efficiency, optimize_2d_velocity, scan)

log = logging.getLogger(__name__)

#: rest-box optima for the wedge are taken at this run length
WEDGE_REST_T_F = 20.0
#: lower end of the default rest-box height grid
DEFAULT_Y_START = {"wedge": 0.2, "harmonic": 0.0}

COLUMN_NAMES = {
    "half_width_wB": "wB_over_l",
    "threshold_EB": "EB_over_Ei",
    "x_B": "xB_over_l",
    "y_B": "yB_over_l",
    "v_Bx": "vBx_over_nu",
    "v_By": "vBy_over_nu",
    "y_op": "yop_over_l",
    "v": "v_over_nu",
    "alpha": "alpha_rad",
    "w_B": "wB_over_l",
    "y_W0": "yW0_over_l",
    "omega_W": "omegaW_tau",
    "t_f": "tf_over_tau",
    "y_c": "yc_over_l",
    "x_H": "xH_over_l",
    "omega_H": "omegaH_tau",
}


def column_name(path: str) -> str:
    key = path.split(".", 1)[-1]
    return COLUMN_NAMES.get(key, key)


@dataclass
class CaseResult:
    labels: dict
    rows: list
    summary: dict
    #: resolved values of "auto"/"seed" fields and how they were found
    resolved: dict = field(default_factory=dict)
    n_errors: int = 0
    n_trials: int = 0
    config: Optional[ScenarioConfig] = None


class RestScanCache:
    """Rest-box optima keyed by everything that determines them."""

    def __init__(self):
        self._store: dict = {}

    def get(self, key, compute):
        if key not in self._store:
            self._store[key] = compute()
        return self._store[key]


def _rest_scan_config(cfg: ScenarioConfig) -> ScenarioConfig:
    auto = cfg.box.auto
    t_f = auto.t_f if auto.t_f is not None else (
        WEDGE_REST_T_F if cfg.trap.kind == "wedge" else cfg.run.t_f)
    start = auto.y_start if auto.y_start is not None else DEFAULT_Y_START[cfg.trap.kind]
    axis = AxisConfig("trajectory.y_B", grid_values(start, auto.y_stop, auto.y_step))
    return replace(cfg,
                   box=replace(cfg.box, trajectory={"type": "Rest", "x_B": 0.0, "y_B": 0.0}),
                   run=replace(cfg.run, t_f=t_f),
                   sweep=SweepConfig(mode="scan", axes=(axis,)))


def resolve_heights(traj: dict, cfg: ScenarioConfig, cache: RestScanCache,
                    workers=None) -> tuple[dict, dict]:
    """Replace an "auto" or "seed" height by a number; returns (trajectory, info)."""
    key = unresolved_field(traj)
    if key is None:
        return traj, {}
    if traj[key] == SEED:
        if cfg.trap.kind != "wedge":
            raise ConfigError(f"box.trajectory.{key}: 'seed' needs a wedge trap")
        y = wedge_rest_optimum_seed(cfg.box.w_B, math.radians(cfg.trap.alpha_deg))
        return {**traj, key: y}, {column_name(key): y}
    assert traj[key] == AUTO
    rest_cfg = _rest_scan_config(cfg)
    ck = (rest_cfg.trap, rest_cfg.box.w_B, rest_cfg.box.E_B, rest_cfg.run.n_trials,
          rest_cfg.run.t_f, rest_cfg.run.check_interval, rest_cfg.run.master_seed,
          rest_cfg.sweep.axes)

    def compute():
        log.info("resolving rest-box optimum for w_B=%g", cfg.box.w_B)
        axis = rest_cfg.sweep.axes[0]
        res = scan(SweepSpec(build_run_spec(rest_cfg), ((axis.path, axis.values),)), workers)
        return res.argmax[0], res.error_bar[axis.path], res.F_max

    y, (lo, hi), f_rest = cache.get(ck, compute)
    col = column_name(key)
    info = {col: y, f"{col}_lo": lo, f"{col}_hi": hi, "F_rest_max": f_rest}
    return {**traj, key: y}, info


def _check_wriggle(spec: RunSpec, limit: float) -> None:
    traj = spec.box.trajectory
    if isinstance(traj, Wriggle):
        try:
            check_wriggle_speed(traj, limit)
        except ValueError as exc:
            raise ConfigError(f"box.trajectory: {exc}") from None


def _estimate_fields(est: FractionEstimate, spec: RunSpec, eps: float) -> dict:
    report = cooling_efficiency(est, spec.box, spec.sampler, eps)
    return {"F": est.fraction_F, "stderr": est.std_error, "n_caught": est.n_caught,
            "n_trials": est.n_trials, "n_errors": est.n_errors, "eta": report.eta}


def execute(cfg: ScenarioConfig, labels: Optional[dict] = None, cache: Optional[RestScanCache] = None,
            workers=None) -> CaseResult:
    labels = dict(labels or {})
    cache = cache or RestScanCache()
    workers = workers or cfg.run.workers
    sweep = cfg.sweep
    eps = cfg.output.epsilon

    if sweep is not None and sweep.mode == "compare":
        return _execute_compare(cfg, labels, cache, workers)

    traj, resolved = resolve_heights(cfg.box.trajectory, cfg, cache, workers)
    spec = build_run_spec(cfg, traj)
    name = spec.box.trajectory.name
    resolved_cfg = replace(cfg, box=replace(cfg.box, trajectory=complete_trajectory(traj, cfg)))

    if sweep is None:
        _check_wriggle(spec, cfg.box.wriggle_speed_limit)
        est = run_ensemble(spec, workers)
        summary = {"trajectory": name, **resolved, **_estimate_fields(est, spec, eps)}
        row = {"F": est.fraction_F, "stderr": est.std_error}
        return CaseResult(labels, [row], summary, resolved, est.n_errors, est.n_trials, resolved_cfg)

    axes = tuple((a.path, a.values) for a in sweep.axes)
    sspec = SweepSpec(spec, axes, sweep.refine_rounds, sweep.budget)
    if isinstance(spec.box.trajectory, Wriggle):
        for point in itertools.product(*[v for _, v in axes]):
            _check_wriggle(apply_point(spec, dict(zip(sspec.names, point))), cfg.box.wriggle_speed_limit)
    res = optimize_2d_velocity(sspec, workers) if sweep.mode == "optimize2d" else scan(sspec, workers)
    cols = [column_name(p) for p in sspec.names]
    rows = []
    for point in sorted(res.grid_F):
        est = res.grid_F[point]
        rows.append({**dict(zip(cols, point)), "F": est.fraction_F, "stderr": est.std_error})
    best_spec = apply_point(spec, res.as_dict(res.argmax))
    summary = {"trajectory": name, **resolved}
    for col, path, value in zip(cols, sspec.names, res.argmax):
        lo, hi = res.error_bar[path]
        summary.update({col: value, f"{col}_lo": lo, f"{col}_hi": hi})
    summary.update(_estimate_fields(res.best, best_spec, eps))
    n_err = sum(e.n_errors for e in res.grid_F.values())
    n_tot = sum(e.n_trials for e in res.grid_F.values())
    return CaseResult(labels, rows, summary, resolved, n_err, n_tot, resolved_cfg)


def _execute_compare(cfg, labels, cache, workers) -> CaseResult:
    specs, names, resolved_all = [], [], {}
    seen: dict = {}
    for traj in cfg.sweep.trajectories:
        traj, resolved = resolve_heights(traj, cfg, cache, workers)
        spec = build_run_spec(cfg, traj)
        _check_wriggle(spec, cfg.box.wriggle_speed_limit)
        name = spec.box.trajectory.name
        seen[name] = seen.get(name, 0) + 1
        if seen[name] > 1:
            name = f"{name}#{seen[name]}"
        specs.append(spec)
        names.append(name)
        if resolved:
            resolved_all[name] = resolved
    table, _ = compare_trajectories(specs, names, workers)
    rows = [{"trajectory": r.name, "F": r.estimate.fraction_F, "stderr": r.estimate.std_error,
             "significant_vs_best": r.significant_vs_best} for r in table]
    best = table[0]
    best_spec = specs[names.index(best.name)]
    summary = {"trajectory": best.name, **_estimate_fields(best.estimate, best_spec, cfg.output.epsilon)}
    n_err = sum(r.estimate.n_errors for r in table)
    n_tot = sum(r.estimate.n_trials for r in table)
    return CaseResult(labels, rows, summary, resolved_all, n_err, n_tot, cfg)

"""Scenario configuration: TOML files mapped onto frozen dataclasses.

A config has the blocks ``[trap]``, ``[box]`` (with ``[box.trajectory]``),
``[run]``, an optional ``[sweep]`` and ``[output]``.  Every value is checked
on load; errors name the offending field, e.g. ``trap.alpha_deg``.

Trajectory fields shared with other blocks may be omitted: ``alpha`` defaults
to the trap half-angle, ``w_B`` to the box half-width and ``t_f`` to the run
length.  ``y_B`` (Rest) and ``y_op`` (WedgeLinear, WedgeSideParallel) also
accept ``"auto"``, resolved by a rest-box scan, or ``"seed"``, the analytic
corner-touching height.
"""
from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .boxcatch import TRAJECTORIES, BoxSpec, trajectory_from_dict
from .dynamics import TrapSpec
from .engine import DEFAULT_CHECK_INTERVAL, DESK_TRIALS, RunSpec
from .ensemble import DEFAULT_EPSILON, DEFAULT_SEED, SamplerSpec
from .sweep import DEFAULT_BUDGET, WRIGGLE_SPEED_LIMIT
from .units import G_EQUATOR, RB87_MASS, PhysicalParams, TrapKind, derive_scales

AUTO = "auto"
SEED = "seed"
#: trajectory fields that may be resolved from a rest-box scan
AUTO_FIELDS = {"Rest": "y_B", "WedgeLinear": "y_op", "WedgeSideParallel": "y_op"}
SWEEP_MODES = ("scan", "optimize2d", "compare")
FORMATS = ("csv", "json", "dat")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TrapConfig:
    kind: str = "wedge"
    alpha_deg: Optional[float] = 45.0
    mass: float = RB87_MASS
    temperature_i: float = 100e-6
    gravity: float = G_EQUATOR
    omega: float = 2 * math.pi * 50.0


@dataclass(frozen=True)
class AutoConfig:
    """Rest-box scan used to resolve ``"auto"`` heights."""

    y_start: Optional[float] = None
    y_stop: float = 1.5
    y_step: float = 0.05
    t_f: Optional[float] = None


@dataclass(frozen=True)
class BoxConfig:
    w_B: float = 0.35
    E_B: float = 0.1
    trajectory: dict = field(default_factory=lambda: {"type": "Rest"})
    wriggle_speed_limit: float = WRIGGLE_SPEED_LIMIT
    auto: AutoConfig = field(default_factory=AutoConfig)


@dataclass(frozen=True)
class RunConfig:
    n_trials: int = DESK_TRIALS
    t_f: float = 20.0
    check_interval: float = DEFAULT_CHECK_INTERVAL
    master_seed: int = DEFAULT_SEED
    workers: Optional[int] = None


@dataclass(frozen=True)
class AxisConfig:
    path: str
    values: tuple


@dataclass(frozen=True)
class SweepConfig:
    mode: str = "scan"
    axes: tuple = ()
    refine_rounds: int = 0
    budget: int = DEFAULT_BUDGET
    trajectories: tuple = ()


@dataclass(frozen=True)
class OutputConfig:
    dir: Optional[str] = None
    formats: tuple = FORMATS
    epsilon: float = DEFAULT_EPSILON


@dataclass(frozen=True)
class ScenarioConfig:
    trap: TrapConfig = field(default_factory=TrapConfig)
    box: BoxConfig = field(default_factory=BoxConfig)
    run: RunConfig = field(default_factory=RunConfig)
    sweep: Optional[SweepConfig] = None
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# parsing helpers
# --------------------------------------------------------------------------

def _fail(where: str, msg: str):
    raise ConfigError(f"{where}: {msg}")


def _section(data: dict, name: str, where: str) -> dict:
    value = data.get(name, {})
    if not isinstance(value, dict):
        _fail(where + name, "expected a table")
    return value


def _number(value, where: str, *, positive=False, integer=False, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(where, f"expected a number, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            _fail(where, f"expected an integer, got {value!r}")
        value = int(value)
    else:
        value = float(value)
        if not math.isfinite(value):
            _fail(where, "must be finite")
    if positive and not value > 0:
        _fail(where, f"must be positive, got {value}")
    return value


def _check_keys(data: dict, allowed, where: str):
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        _fail(where + unknown[0], f"unknown field (allowed: {', '.join(sorted(allowed))})")


def _names(cls) -> list[str]:
    return [f.name for f in fields(cls)]


# --------------------------------------------------------------------------
# blocks
# --------------------------------------------------------------------------

def _trap(data: dict) -> TrapConfig:
    _check_keys(data, _names(TrapConfig), "trap.")
    kind = data.get("kind", "wedge")
    if kind not in (k.value for k in TrapKind):
        _fail("trap.kind", f"expected 'wedge' or 'harmonic', got {kind!r}")
    out = {"kind": kind}
    for key in ("mass", "temperature_i", "gravity", "omega"):
        if key in data:
            out[key] = _number(data[key], f"trap.{key}", positive=True)
    if kind == "wedge":
        alpha = _number(data.get("alpha_deg", 45.0), "trap.alpha_deg")
        if not 0.0 < alpha < 90.0:
            _fail("trap.alpha_deg", f"must lie in (0, 90), got {alpha}")
        out["alpha_deg"] = alpha
    else:
        if "alpha_deg" in data:
            _fail("trap.alpha_deg", "not used by the harmonic trap")
        out["alpha_deg"] = None
    return TrapConfig(**out)


def _trajectory(data: dict, where: str) -> dict:
    if "type" not in data:
        _fail(where + "type", f"missing; one of {', '.join(TRAJECTORIES)}")
    name = data["type"]
    if name not in TRAJECTORIES:
        _fail(where + "type", f"unknown trajectory {name!r}; one of {', '.join(TRAJECTORIES)}")
    _check_keys(data, ["type", *_names(TRAJECTORIES[name])], where)
    out = {"type": name}
    for key, value in data.items():
        if key == "type":
            continue
        if value in (AUTO, SEED):
            if AUTO_FIELDS.get(name) != key:
                _fail(where + key, f"{value!r} is only allowed for {AUTO_FIELDS.get(name, 'no field')}")
            out[key] = value
        else:
            out[key] = _number(value, where + key)
    return out


def _box(data: dict) -> BoxConfig:
    _check_keys(data, _names(BoxConfig), "box.")
    traj = _trajectory(_section(data, "trajectory", "box.") or {"type": "Rest"}, "box.trajectory.")
    auto = _section(data, "auto", "box.")
    _check_keys(auto, _names(AutoConfig), "box.auto.")
    auto_cfg = AutoConfig(**{k: _number(v, f"box.auto.{k}", allow_none=True) for k, v in auto.items()})
    if not auto_cfg.y_step > 0:
        _fail("box.auto.y_step", "must be positive")
    return BoxConfig(
        w_B=_number(data.get("w_B", 0.35), "box.w_B", positive=True),
        E_B=_number(data.get("E_B", 0.1), "box.E_B", positive=True),
        trajectory=traj,
        wriggle_speed_limit=_number(data.get("wriggle_speed_limit", WRIGGLE_SPEED_LIMIT),
                                    "box.wriggle_speed_limit", positive=True),
        auto=auto_cfg,
    )


def _run(data: dict) -> RunConfig:
    _check_keys(data, _names(RunConfig), "run.")
    seed = _number(data.get("master_seed", DEFAULT_SEED), "run.master_seed", integer=True)
    if not 0 <= seed < 2 ** 64:
        _fail("run.master_seed", "must be a 64-bit unsigned integer")
    workers = data.get("workers")
    return RunConfig(
        n_trials=_number(data.get("n_trials", DESK_TRIALS), "run.n_trials", positive=True, integer=True),
        t_f=_number(data.get("t_f", 20.0), "run.t_f", positive=True),
        check_interval=_number(data.get("check_interval", DEFAULT_CHECK_INTERVAL),
                               "run.check_interval", positive=True),
        master_seed=seed,
        workers=None if workers is None else _number(workers, "run.workers", positive=True, integer=True),
    )


def grid_values(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive arithmetic grid, rounded to 12 decimals so keys compare cleanly."""
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 12) for i in range(n))


def _axis(data: dict, where: str) -> AxisConfig:
    _check_keys(data, ["path", "values", "start", "stop", "step"], where)
    if "path" not in data:
        _fail(where + "path", "missing")
    path = data["path"]
    if "values" in data:
        if not isinstance(data["values"], list) or not data["values"]:
            _fail(where + "values", "expected a non-empty list")
        values = tuple(_number(v, where + "values") for v in data["values"])
    else:
        for key in ("start", "stop", "step"):
            if key not in data:
                _fail(where + key, "missing (give either values or start/stop/step)")
        step = _number(data["step"], where + "step", positive=True)
        start = _number(data["start"], where + "start")
        stop = _number(data["stop"], where + "stop")
        if stop < start:
            _fail(where + "stop", "must not be below start")
        values = grid_values(start, stop, step)
    if any(b <= a for a, b in zip(values, values[1:])):
        _fail(where + "values", "grid must be strictly increasing")
    return AxisConfig(path, values)


def _sweep(data: dict) -> Optional[SweepConfig]:
    if not data:
        return None
    _check_keys(data, _names(SweepConfig), "sweep.")
    mode = data.get("mode", "scan")
    if mode not in SWEEP_MODES:
        _fail("sweep.mode", f"expected one of {', '.join(SWEEP_MODES)}, got {mode!r}")
    axes = tuple(_axis(a, f"sweep.axes[{i}].") for i, a in enumerate(data.get("axes", [])))
    trajs = tuple(_trajectory(t, f"sweep.trajectories[{i}].")
                  for i, t in enumerate(data.get("trajectories", [])))
    if mode == "compare" and not trajs:
        _fail("sweep.trajectories", "compare mode needs at least one trajectory")
    if mode != "compare" and not axes:
        _fail("sweep.axes", f"{mode} mode needs at least one axis")
    if mode == "optimize2d" and len(axes) != 2:
        _fail("sweep.axes", "optimize2d needs exactly two axes")
    return SweepConfig(
        mode=mode, axes=axes, trajectories=trajs,
        refine_rounds=_number(data.get("refine_rounds", 0), "sweep.refine_rounds", integer=True),
        budget=_number(data.get("budget", DEFAULT_BUDGET), "sweep.budget", positive=True, integer=True),
    )


def _output(data: dict) -> OutputConfig:
    _check_keys(data, _names(OutputConfig), "output.")
    formats = tuple(data.get("formats", FORMATS))
    for f in formats:
        if f not in FORMATS:
            _fail("output.formats", f"unknown format {f!r}; one of {', '.join(FORMATS)}")
    eps = _number(data.get("epsilon", DEFAULT_EPSILON), "output.epsilon")
    if not 0 < eps < 1:
        _fail("output.epsilon", f"must lie in (0, 1), got {eps}")
    out_dir = data.get("dir")
    if out_dir is not None and not isinstance(out_dir, str):
        _fail("output.dir", "expected a string")
    return OutputConfig(dir=out_dir, formats=formats, epsilon=eps)


def config_from_dict(data: dict) -> ScenarioConfig:
    _check_keys(data, _names(ScenarioConfig), "")
    cfg = ScenarioConfig(
        trap=_trap(_section(data, "trap", "")),
        box=_box(_section(data, "box", "")),
        run=_run(_section(data, "run", "")),
        sweep=_sweep(_section(data, "sweep", "")),
        output=_output(_section(data, "output", "")),
    )
    validate(cfg)
    return cfg


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# --------------------------------------------------------------------------
# config -> specs
# --------------------------------------------------------------------------

def trap_spec(cfg: TrapConfig) -> TrapSpec:
    kind = TrapKind(cfg.kind)
    params = PhysicalParams(mass=cfg.mass, temperature_i=cfg.temperature_i,
                            gravity=cfg.gravity if kind is TrapKind.WEDGE else None,
                            omega=cfg.omega if kind is TrapKind.HARMONIC else None)
    scales = derive_scales(params, kind)
    if kind is TrapKind.WEDGE:
        return TrapSpec.wedge(cfg.alpha_deg, scales)
    return TrapSpec.harmonic(scales)


def complete_trajectory(traj: dict, cfg: ScenarioConfig) -> dict:
    """Fill fields that default from the trap, box and run blocks."""
    cls = TRAJECTORIES[traj["type"]]
    out = dict(traj)
    names = _names(cls)
    if "alpha" in names and "alpha" not in out:
        if cfg.trap.alpha_deg is None:
            raise ConfigError(f"{traj['type']}: needs a wedge trap")
        out["alpha"] = math.radians(cfg.trap.alpha_deg)
    if "w_B" in names and "w_B" not in out:
        out["w_B"] = cfg.box.w_B
    if "t_f" in names and "t_f" not in out:
        out["t_f"] = cfg.run.t_f
    return out


def unresolved_field(traj: dict) -> Optional[str]:
    key = AUTO_FIELDS.get(traj["type"])
    if key is not None and traj.get(key) in (AUTO, SEED):
        return key
    return None


def build_run_spec(cfg: ScenarioConfig, traj: Optional[dict] = None) -> RunSpec:
    """RunSpec for the given (or the configured) trajectory; all fields must be numeric."""
    traj = complete_trajectory(traj if traj is not None else cfg.box.trajectory, cfg)
    key = unresolved_field(traj)
    if key is not None:
        raise ConfigError(f"box.trajectory.{key}: {traj[key]!r} not resolved yet")
    try:
        trajectory = trajectory_from_dict(traj)
        trap = trap_spec(cfg.trap)
        box = BoxSpec(cfg.box.w_B, cfg.box.E_B, trajectory)
        sampler = SamplerSpec(trap, cfg.trap.temperature_i, cfg.run.master_seed)
        return RunSpec(trap, box, sampler, cfg.run.n_trials, cfg.run.t_f, cfg.run.check_interval)
    except ValueError as exc:
        raise ConfigError(f"box.trajectory: {exc}") from None


def _probe(traj: dict) -> dict:
    # stand-in value so an unresolved height can still be type-checked
    key = unresolved_field(traj)
    return traj if key is None else {**traj, key: 1.0}


def validate(cfg: ScenarioConfig) -> None:
    """Check cross-block consistency without running anything."""
    from .sweep import check_path

    trajs = [cfg.box.trajectory]
    if cfg.sweep is not None:
        trajs += list(cfg.sweep.trajectories)
    for traj in trajs:
        name = traj["type"]
        needs = "harmonic" if name.startswith("Harmonic") or name == "Helix" else (
            "wedge" if name != "Rest" else None)
        if needs is not None and cfg.trap.kind != needs:
            _fail("box.trajectory.type", f"{name} needs a {needs} trap")
        build_run_spec(cfg, _probe(traj))
    if cfg.sweep is None or cfg.sweep.mode == "compare":
        return
    base = build_run_spec(cfg, _probe(cfg.box.trajectory))
    auto_key = unresolved_field(cfg.box.trajectory)
    for i, axis in enumerate(cfg.sweep.axes):
        where = f"sweep.axes[{i}].path"
        try:
            check_path(base, axis.path)
        except ValueError as exc:
            _fail(where, str(exc))
        if auto_key and axis.path == "half_width_wB":
            _fail(where, "an 'auto' height cannot be combined with a w_B axis")
        if auto_key and axis.path == f"trajectory.{auto_key}":
            _fail(where, "a scanned field cannot also be 'auto'")


def with_overrides(cfg: ScenarioConfig, n_trials=None, seed=None, out_dir=None) -> ScenarioConfig:
    run = cfg.run
    if n_trials is not None:
        run = replace(run, n_trials=int(n_trials))
    if seed is not None:
        run = replace(run, master_seed=int(seed))
    output = cfg.output if out_dir is None else replace(cfg.output, dir=str(out_dir))
    return replace(cfg, run=run, output=output)

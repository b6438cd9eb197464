"""Parameter scans, grid refinement and the cooling efficiency.

All points of one scan reuse the same trial seeds (common random numbers), so
differences in F across the grid are not blurred by different initial
ensembles.  The optimum's error bar along each axis is the contiguous range
around the argmax where F stays within 1/sqrt(N) of the maximum.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Sequence

import numpy as np
from scipy import constants

from .boxcatch import BoxSpec, BoxTrajectory, HarmonicLinear, WedgeLinear, Wriggle, max_speed_on_grid
from .engine import FractionEstimate, RunSpec, run_ensemble
from .ensemble import DEFAULT_EPSILON, SamplerSpec, initial_area

log = logging.getLogger(__name__)

#: default cap on grid points x trials for a single scan
DEFAULT_BUDGET = 2_000_000_000
WRIGGLE_SPEED_LIMIT = 0.265
REFINE_HALF_POINTS = 2


class BudgetExceededError(RuntimeError):
    pass


class ParameterPathError(ValueError):
    pass


# --------------------------------------------------------------------------
# parameter paths
# --------------------------------------------------------------------------

def _trajectory_fields(traj: BoxTrajectory) -> set[str]:
    return {f.name for f in fields(traj)}


def check_path(base: RunSpec, path: str) -> None:
    if path in ("half_width_wB", "threshold_EB"):
        return
    head, _, name = path.partition(".")
    if head == "trajectory" and name in _trajectory_fields(base.box.trajectory):
        return
    raise ParameterPathError(
        f"{path!r} is not a numeric field of BoxSpec or {base.box.trajectory.name}")


def apply_point(base: RunSpec, point: dict[str, float]) -> RunSpec:
    """Copy of ``base`` with the given parameter paths set."""
    box = base.box
    traj = box.trajectory
    traj_updates = {}
    box_updates = {}
    for path, value in point.items():
        check_path(base, path)
        value = float(value)
        if path.startswith("trajectory."):
            traj_updates[path.split(".", 1)[1]] = value
        else:
            box_updates[path] = value
    if "half_width_wB" in box_updates and "w_B" in _trajectory_fields(traj):
        traj_updates.setdefault("w_B", box_updates["half_width_wB"])
    if traj_updates:
        traj = replace(traj, **traj_updates)
    box = replace(box, trajectory=traj, **box_updates)
    return replace(base, box=box)


# --------------------------------------------------------------------------
# results
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    base: RunSpec
    axes: tuple[tuple[str, tuple[float, ...]], ...]
    refine_rounds: int = 0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        axes = tuple((path, tuple(float(v) for v in values)) for path, values in self.axes)
        object.__setattr__(self, "axes", axes)
        if not axes:
            raise ValueError("a sweep needs at least one axis")
        for path, values in axes:
            check_path(self.base, path)
            if not values:
                raise ValueError(f"axis {path!r} has an empty grid")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise ValueError(f"axis {path!r} grid must be strictly increasing")
        if self.refine_rounds < 0:
            raise ValueError("refine_rounds must be >= 0")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(path for path, _ in self.axes)

    @property
    def grid_size(self) -> int:
        return math.prod(len(v) for _, v in self.axes)


@dataclass
class SweepResult:
    names: tuple[str, ...]
    grid_F: dict[tuple[float, ...], FractionEstimate]
    argmax: tuple[float, ...]
    F_max: float
    error_bar: dict[str, tuple[float, float]]
    n_trials: int
    #: (argmax, error_bar) of every refinement round, coarsest first
    rounds: list = field(default_factory=list)

    @property
    def best(self) -> FractionEstimate:
        return self.grid_F[self.argmax]

    def as_dict(self, point: Sequence[float]) -> dict[str, float]:
        return dict(zip(self.names, point))


def error_bars(axes, grid_F: dict, argmax: tuple, n_trials: int) -> dict[str, tuple[float, float]]:
    """Contiguous range along each axis, through the argmax, with F >= F_max - 1/sqrt(N)."""
    f_max = grid_F[argmax].fraction_F
    floor = f_max - 1.0 / math.sqrt(n_trials)
    bars = {}
    for i, (name, values) in enumerate(axes):
        j = values.index(argmax[i])

        def ok(k):
            point = argmax[:i] + (values[k],) + argmax[i + 1:]
            return grid_F[point].fraction_F >= floor

        lo = j
        while lo > 0 and ok(lo - 1):
            lo -= 1
        hi = j
        while hi < len(values) - 1 and ok(hi + 1):
            hi += 1
        bars[name] = (values[lo], values[hi])
    return bars


def _evaluate(base: RunSpec, axes, cache: dict, workers) -> dict:
    names = [p for p, _ in axes]
    out = {}
    for point in itertools.product(*[v for _, v in axes]):
        if point not in cache:
            cache[point] = run_ensemble(apply_point(base, dict(zip(names, point))), workers)
        out[point] = cache[point]
    return out


def _argmax(grid: dict) -> tuple:
    # first point in grid order wins ties
    return max(grid, key=lambda p: grid[p].fraction_F)


def _check_budget(spec: SweepSpec, n_points: int) -> None:
    cost = n_points * spec.base.n_trials
    if cost > spec.budget:
        raise BudgetExceededError(
            f"{n_points} grid points x {spec.base.n_trials} trials = {cost} exceeds budget {spec.budget}")


def scan(spec: SweepSpec, workers: Optional[int] = None) -> SweepResult:
    _check_budget(spec, spec.grid_size)
    grid = _evaluate(spec.base, spec.axes, {}, workers)
    best = _argmax(grid)
    bars = error_bars(spec.axes, grid, best, spec.base.n_trials)
    return SweepResult(spec.names, grid, best, grid[best].fraction_F, bars,
                       spec.base.n_trials, [(best, bars)])


def _refined_axes(axes, center: tuple) -> tuple:
    out = []
    for (name, values), c in zip(axes, center):
        step = (min(np.diff(values)) if len(values) > 1 else abs(c) or 1.0) / 2.0
        grid = tuple(sorted({round(c + k * step, 12)
                             for k in range(-REFINE_HALF_POINTS, REFINE_HALF_POINTS + 1)}))
        out.append((name, grid))
    return tuple(out)


def refine(spec: SweepSpec, workers: Optional[int] = None) -> SweepResult:
    """Grid scan followed by ``refine_rounds`` rounds of halved spacing around the argmax."""
    extra = spec.refine_rounds * (2 * REFINE_HALF_POINTS + 1) ** len(spec.axes)
    _check_budget(spec, spec.grid_size + extra)
    cache: dict = {}
    axes = spec.axes
    grid = _evaluate(spec.base, axes, cache, workers)
    best = _argmax(grid)
    rounds = [(best, error_bars(axes, grid, best, spec.base.n_trials))]
    for _ in range(spec.refine_rounds):
        axes = _refined_axes(axes, best)
        grid = _evaluate(spec.base, axes, cache, workers)
        best = _argmax(grid)
        rounds.append((best, error_bars(axes, grid, best, spec.base.n_trials)))
    return SweepResult(spec.names, dict(cache), best, cache[best].fraction_F, rounds[-1][1],
                       spec.base.n_trials, rounds)


def optimize_2d_velocity(spec: SweepSpec, workers: Optional[int] = None) -> SweepResult:
    traj = spec.base.box.trajectory
    if not isinstance(traj, (WedgeLinear, HarmonicLinear)):
        raise ValueError(f"2D velocity optimization needs WedgeLinear or HarmonicLinear, got {traj.name}")
    if len(spec.axes) != 2:
        raise ValueError("2D velocity optimization needs exactly two axes")
    return refine(spec, workers)


# --------------------------------------------------------------------------
# cooling efficiency
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CoolingReport:
    F: float
    A_i: float
    A_B: float
    E_i: float
    E_B: float
    epsilon: float
    eta: float
    T_i: Optional[float] = None
    T_f: Optional[float] = None

    @property
    def phase_space_gain(self) -> float:
        return 10.0 ** self.eta


def thermal_de_broglie(mass: float, temperature: float) -> float:
    return constants.hbar * math.sqrt(2.0 * math.pi) / math.sqrt(mass * constants.Boltzmann * temperature)


def cooling_efficiency(est: FractionEstimate, box: BoxSpec, sampler: SamplerSpec,
                       epsilon: float = DEFAULT_EPSILON) -> CoolingReport:
    """log10 of the phase-space density gain F (A_i/A_B) (E_i/E_B); -inf when F = 0.

    Areas are in l^2 and energies in E_i; the final temperature is taken as E_B / k_B.
    """
    a_i = initial_area(sampler, epsilon)
    a_b = box.area
    f = est.fraction_F
    eta = -math.inf if f == 0 else math.log10(f * (a_i / a_b) * (1.0 / box.threshold_EB))
    t_i = sampler.temperature_i
    return CoolingReport(F=f, A_i=a_i, A_B=a_b, E_i=1.0, E_B=box.threshold_EB, epsilon=epsilon,
                         eta=eta, T_i=t_i, T_f=box.threshold_EB * t_i)


# --------------------------------------------------------------------------
# trajectory comparison
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    name: str
    estimate: FractionEstimate
    significant_vs_best: bool


def significantly_different(a: FractionEstimate, b: FractionEstimate, n_sigma: float = 3.0) -> bool:
    return abs(a.fraction_F - b.fraction_F) > n_sigma * math.hypot(a.std_error, b.std_error)


def compare_trajectories(specs: Sequence[RunSpec], names: Optional[Sequence[str]] = None,
                         workers: Optional[int] = None):
    """Run every spec and sort by F.

    Returns the rows (best first) and a matrix ``sig[i][j]`` of pairwise 3-sigma
    significance in the sorted order.
    """
    if not specs:
        raise ValueError("nothing to compare")
    ref = specs[0]
    for s in specs[1:]:
        same = (s.trap == ref.trap and s.sampler == ref.sampler and s.n_trials == ref.n_trials
                and s.t_final == ref.t_final and s.check_interval == ref.check_interval
                and s.box.half_width_wB == ref.box.half_width_wB
                and s.box.threshold_EB == ref.box.threshold_EB)
        if not same:
            raise ValueError("compared runs must share trap, seeds, w_B, E_B, t_f and check interval")
    names = list(names) if names is not None else [s.box.trajectory.name for s in specs]
    ests = [run_ensemble(s, workers) for s in specs]
    order = sorted(range(len(specs)), key=lambda i: -ests[i].fraction_F)
    best = ests[order[0]]
    rows = [ComparisonRow(names[i], ests[i], significantly_different(ests[i], best)) for i in order]
    sig = [[significantly_different(a.estimate, b.estimate) for b in rows] for a in rows]
    return rows, sig


# --------------------------------------------------------------------------
# wriggle validation
# --------------------------------------------------------------------------

def check_wriggle_speed(traj: Wriggle, limit: float = WRIGGLE_SPEED_LIMIT, n: int = 1000) -> float:
    """Peak wriggle speed on an n-point grid; raises if it exceeds ``limit``."""
    peak = max_speed_on_grid(traj, traj.t_f, n)
    if peak > limit:
        raise ValueError(f"wriggle speed reaches {peak:.4f} nu, above the limit {limit} nu")
    return peak

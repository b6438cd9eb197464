"""Box trajectories and the irreversible catch rule.

Each trajectory family is a frozen dataclass whose field names are also its
config keys.  Centers and velocities are evaluated by the same compiled code
the engine uses, so there is a single definition of every trajectory.
"""
from __future__ import annotations

import math
from dataclasses import MISSING, asdict, dataclass, fields
from enum import Enum
from typing import ClassVar, Optional

import numpy as np

from . import _kernels as K
from .dynamics import PhaseState


class Catch(Enum):
    CAUGHT = "caught"
    NOT_CAUGHT = "not_caught"


class BoxTrajectory:
    """Base class of the trajectory families."""

    kind: ClassVar[int]
    #: fields whose values are copied, in order, into the kernel parameter vector
    _layout: ClassVar[tuple[str, ...]]

    @property
    def name(self) -> str:
        return type(self).__name__

    @property
    def duration(self) -> Optional[float]:
        """Final time t_f when the family defines one."""
        return getattr(self, "t_f", None)

    def params(self) -> np.ndarray:
        p = np.zeros(8)
        for i, key in enumerate(self._layout):
            p[i] = getattr(self, key)
        return p

    def speed_bound(self) -> float:
        """Upper bound on the box speed over the whole trajectory."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"type": self.name, **asdict(self)}


@dataclass(frozen=True)
class Rest(BoxTrajectory):
    x_B: float = 0.0
    y_B: float = 0.0
    kind: ClassVar[int] = K.REST
    _layout: ClassVar = ("x_B", "y_B")

    def speed_bound(self):
        return 0.0


@dataclass(frozen=True)
class WedgeLinear(BoxTrajectory):
    v_Bx: float
    v_By: float
    y_op: float
    t_f: float
    kind: ClassVar[int] = K.WEDGE_LINEAR
    _layout: ClassVar = ("v_Bx", "v_By", "y_op", "t_f")

    def speed_bound(self):
        return math.hypot(self.v_Bx, self.v_By)


@dataclass(frozen=True)
class WedgeSideParallel(BoxTrajectory):
    """Moves parallel to the right wall, starting just outside the wedge."""

    v: float
    y_op: float
    alpha: float
    w_B: float
    kind: ClassVar[int] = K.WEDGE_SIDE_PARALLEL
    _layout: ClassVar = ("v", "y_op", "alpha", "w_B")

    def speed_bound(self):
        return abs(self.v)


@dataclass(frozen=True)
class WedgeAnalytic(BoxTrajectory):
    """Parallel to the right wall with the lower right corner sliding along it."""

    v: float
    alpha: float
    w_B: float
    kind: ClassVar[int] = K.WEDGE_ANALYTIC
    _layout: ClassVar = ("v", "alpha", "w_B")

    def speed_bound(self):
        return abs(self.v)


@dataclass(frozen=True)
class Wriggle(BoxTrajectory):
    y_W0: float
    omega_W: float
    alpha: float
    t_f: float
    w_B: float
    kind: ClassVar[int] = K.WRIGGLE
    _layout: ClassVar = ("y_W0", "omega_W", "alpha", "t_f", "w_B")

    def speed_bound(self):
        vy = abs(self.w_B - self.y_W0) / self.t_f
        y_max = max(abs(self.y_W0), abs(self.w_B))
        tan_a = math.tan(self.alpha)
        return vy + vy * tan_a + y_max * tan_a * abs(self.omega_W)


@dataclass(frozen=True)
class HarmonicLinear(BoxTrajectory):
    v_Bx: float
    y_c: float
    t_f: float
    kind: ClassVar[int] = K.HARMONIC_LINEAR
    _layout: ClassVar = ("v_Bx", "y_c", "t_f")

    def speed_bound(self):
        return abs(self.v_Bx)


@dataclass(frozen=True)
class HarmonicAnalytic(BoxTrajectory):
    """Linear pass at y = 0.55 l with speed (0.025 + 0.25 w_B / l) nu."""

    w_B: float
    t_f: float
    kind: ClassVar[int] = K.HARMONIC_ANALYTIC
    _layout: ClassVar = ("w_B", "t_f")

    def speed_bound(self):
        return abs(0.025 + 0.25 * self.w_B)

    def as_linear(self) -> HarmonicLinear:
        return HarmonicLinear(v_Bx=0.025 + 0.25 * self.w_B, y_c=0.55, t_f=self.t_f)


@dataclass(frozen=True)
class Helix(BoxTrajectory):
    x_H: float
    omega_H: float
    t_f: float
    kind: ClassVar[int] = K.HELIX
    _layout: ClassVar = ("x_H", "omega_H", "t_f")

    def speed_bound(self):
        return abs(self.x_H) / self.t_f + abs(self.x_H * self.omega_H)


TRAJECTORIES: dict[str, type[BoxTrajectory]] = {
    cls.__name__: cls
    for cls in (Rest, WedgeLinear, WedgeSideParallel, WedgeAnalytic, Wriggle,
                HarmonicLinear, HarmonicAnalytic, Helix)
}


def trajectory_from_dict(data: dict) -> BoxTrajectory:
    data = dict(data)
    try:
        cls = TRAJECTORIES[data.pop("type")]
    except KeyError as exc:
        raise ValueError(f"unknown or missing trajectory type: {exc}") from None
    names = {f.name for f in fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"{cls.__name__} has no parameter(s) {sorted(unknown)}")
    missing = {f.name for f in fields(cls) if f.default is MISSING} - set(data)
    if missing:
        raise ValueError(f"{cls.__name__} is missing parameter(s) {sorted(missing)}")
    return cls(**{k: float(v) for k, v in data.items()})


@dataclass(frozen=True)
class BoxSpec:
    half_width_wB: float
    threshold_EB: float
    trajectory: BoxTrajectory

    def __post_init__(self):
        if not self.half_width_wB > 0:
            raise ValueError(f"half_width_wB must be positive, got {self.half_width_wB}")
        if not self.threshold_EB > 0:
            raise ValueError(f"threshold_EB must be positive, got {self.threshold_EB}")
        w = getattr(self.trajectory, "w_B", None)
        if w is not None and not math.isclose(w, self.half_width_wB, rel_tol=1e-12):
            raise ValueError(
                f"{self.trajectory.name} was built for w_B={w}, box has {self.half_width_wB}")

    @property
    def area(self) -> float:
        return 4.0 * self.half_width_wB ** 2


def _check_time(traj: BoxTrajectory, t: float) -> None:
    t_f = traj.duration
    if t < 0 or (t_f is not None and t > t_f):
        raise ValueError(f"t={t} outside [0, {t_f if t_f is not None else 'inf'}] for {traj.name}")


def box_center(traj: BoxTrajectory, t: float) -> tuple[float, float]:
    _check_time(traj, t)
    xb, yb, _, _ = K.box_state(traj.kind, traj.params(), float(t))
    return xb, yb


def box_velocity(traj: BoxTrajectory, t: float) -> tuple[float, float]:
    _check_time(traj, t)
    _, _, vx, vy = K.box_state(traj.kind, traj.params(), float(t))
    return vx, vy


def try_catch(state: PhaseState, box: BoxSpec, t: float) -> Catch:
    """Caught iff the atom is strictly inside the box with relative KE strictly below E_B."""
    xb, yb, vbx, vby = K.box_state(box.trajectory.kind, box.trajectory.params(), float(t))
    hit = K.is_caught(state.x, state.y, state.px, state.py, xb, yb, vbx, vby,
                      box.half_width_wB, box.threshold_EB)
    return Catch.CAUGHT if hit else Catch.NOT_CAUGHT


def wedge_rest_optimum_seed(w_B: float, alpha: float) -> float:
    """Height at which a resting box's lower right corner touches the right wall."""
    if not (w_B > 0 and alpha > 0):
        raise ValueError("w_B and alpha must be positive")
    return w_B * (1.0 + math.tan(alpha)) / math.tan(alpha)


def max_speed_on_grid(traj: BoxTrajectory, t_f: float, n: int = 1000) -> float:
    """Largest box speed sampled on ``n`` evenly spaced times in [0, t_f]."""
    p = traj.params()
    best = 0.0
    for t in np.linspace(0.0, t_f, n):
        _, _, vx, vy = K.box_state(traj.kind, p, float(t))
        best = max(best, math.hypot(vx, vy))
    return best

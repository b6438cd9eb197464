"""Single-atom propagation in the wedge and harmonic traps.

Harmonic motion is the exact phase-space rotation (omega = 1).  Wedge motion
is a free-fall parabola (g = 1) with specular reflections at the two walls
``|x| = y tan(alpha)``, located by solving the impact-time quadratic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from . import _kernels as K
from .units import CharScales, TrapKind, from_dimensionless, to_dimensionless

#: |(|x| - y tan(alpha))| at or below this counts as touching a wall.
WALL_TOL = K.WALL_TOL


class OutsideTrapError(ValueError):
    pass


class NotOnWallError(ValueError):
    pass


class StuckAtApexError(ValueError):
    """The atom sits in the apex corner with (numerically) zero energy."""


class Wall(Enum):
    LEFT = -1
    RIGHT = 1


@dataclass(frozen=True)
class PhaseState:
    x: float
    y: float
    px: float
    py: float
    t: float = 0.0

    def mirror(self) -> "PhaseState":
        return replace(self, x=-self.x, px=-self.px)


@dataclass(frozen=True)
class TrapSpec:
    kind: TrapKind
    alpha: Optional[float] = None
    scales: Optional[CharScales] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", TrapKind(self.kind))
        if self.kind is TrapKind.WEDGE:
            if self.alpha is None or not 0.0 < self.alpha < math.pi / 2:
                raise ValueError(f"wedge half-angle must lie in (0, pi/2), got {self.alpha}")

    @classmethod
    def wedge(cls, alpha_deg: float, scales: CharScales | None = None) -> "TrapSpec":
        return cls(TrapKind.WEDGE, math.radians(alpha_deg), scales)

    @classmethod
    def harmonic(cls, scales: CharScales | None = None) -> "TrapSpec":
        return cls(TrapKind.HARMONIC, None, scales)

    @property
    def kernel_kind(self) -> int:
        return K.WEDGE if self.kind is TrapKind.WEDGE else K.HARMONIC

    @property
    def trig(self) -> tuple[float, float, float]:
        """(tan, sin, cos) of the half-angle; zeros for the harmonic trap."""
        if self.kind is TrapKind.HARMONIC:
            return 0.0, 0.0, 0.0
        return math.tan(self.alpha), math.sin(self.alpha), math.cos(self.alpha)

    def contains(self, x: float, y: float, tol: float = WALL_TOL) -> bool:
        if self.kind is TrapKind.HARMONIC:
            return True
        return y >= -tol and abs(x) - y * math.tan(self.alpha) <= tol


def state_to_dimensionless(state: PhaseState, scales: CharScales) -> PhaseState:
    """Convert a state given in SI units (m, kg m/s, s) to trap units."""
    return PhaseState(
        to_dimensionless(state.x, "length", scales),
        to_dimensionless(state.y, "length", scales),
        to_dimensionless(state.px, "momentum", scales),
        to_dimensionless(state.py, "momentum", scales),
        to_dimensionless(state.t, "time", scales),
    )


def state_from_dimensionless(state: PhaseState, scales: CharScales) -> PhaseState:
    return PhaseState(
        from_dimensionless(state.x, "length", scales),
        from_dimensionless(state.y, "length", scales),
        from_dimensionless(state.px, "momentum", scales),
        from_dimensionless(state.py, "momentum", scales),
        from_dimensionless(state.t, "time", scales),
    )


def energy(state: PhaseState, trap: TrapSpec) -> float:
    """Dimensionless Hamiltonian in units of E_i."""
    kinetic = 0.5 * (state.px ** 2 + state.py ** 2)
    if trap.kind is TrapKind.WEDGE:
        return kinetic + state.y
    return kinetic + 0.5 * (state.x ** 2 + state.y ** 2)


def physical_energy(x, y, px, py, trap: TrapSpec, mass: float, gravity=None, omega=None):
    """Hamiltonian in SI units, for cross-checking the dimensionless form."""
    kinetic = (px ** 2 + py ** 2) / (2.0 * mass)
    if trap.kind is TrapKind.WEDGE:
        return kinetic + mass * gravity * y
    return kinetic + 0.5 * mass * omega ** 2 * (x ** 2 + y ** 2)


def next_wall_event(state: PhaseState, alpha: float) -> Optional[tuple[float, Wall]]:
    """Time to the next wall impact and the wall that is hit.

    Returns None for an atom moving on the symmetry axis (x = px = 0), which
    can only fall into the apex corner.
    """
    tan_a = math.tan(alpha)
    if state.y < K.APEX_TOL and math.hypot(state.px, state.py) < K.APEX_TOL:
        raise StuckAtApexError("stuck-at-apex")
    if abs(state.x) > state.y * tan_a:
        raise OutsideTrapError(f"state {state} is not strictly inside the wedge")
    h, wall = K.next_event(state.x, state.y, state.px, state.py, tan_a, K.NO_WALL)
    if wall == K.APEX or wall == K.NO_WALL:
        return None
    return h, Wall(int(wall))


def reflect(state: PhaseState, wall: Wall, alpha: float) -> PhaseState:
    """Specular reflection off ``wall``; position and time are unchanged."""
    s = Wall(wall).value
    if abs(s * state.x - state.y * math.tan(alpha)) > WALL_TOL:
        raise NotOnWallError(f"state ({state.x}, {state.y}) is not on the {Wall(wall).name} wall")
    px, py = K.reflect_velocity(state.px, state.py, float(s), math.sin(alpha), math.cos(alpha))
    return replace(state, px=px, py=py)


def propagate(state: PhaseState, trap: TrapSpec, dt: float) -> PhaseState:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if trap.kind is TrapKind.HARMONIC:
        x, y, px, py = K.harmonic_eval(state.x, state.y, state.px, state.py, dt)
        return PhaseState(x, y, px, py, state.t + dt)
    if not trap.contains(state.x, state.y):
        raise OutsideTrapError(f"state {state} lies outside the wedge")
    tan_a, sin_a, cos_a = trap.trig
    seg = K.wedge_segment(state.x, state.y, state.px, state.py, 0.0, tan_a, sin_a, cos_a)
    seg = K.wedge_seek(seg, dt, tan_a, sin_a, cos_a)
    x, y, px, py = K.wedge_eval(seg, dt)
    if seg[7] != 0.0:
        x, y, px, py = 0.0, 0.0, 0.0, 0.0
    return PhaseState(x, y, px, py, state.t + dt)

"""Physical constants, characteristic scales and the dimensionless unit system.

All simulation code works in units of the characteristic length ``l``,
velocity ``nu``, time ``tau`` and energy ``E_i = k_B T_i``.  Physical units only
appear when a config is read or a report is written.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from scipy import constants

#: CODATA 2018 (exact) Boltzmann constant in J/K.
K_B = constants.Boltzmann
#: Mass of a 87Rb atom in kg.
RB87_MASS = 1.44316e-25
#: Gravitational acceleration at the equator in m/s^2.
G_EQUATOR = 9.78


class TrapKind(str, Enum):
    WEDGE = "wedge"
    HARMONIC = "harmonic"


@dataclass(frozen=True)
class PhysicalParams:
    mass: float = RB87_MASS
    temperature_i: float = 100e-6
    gravity: Optional[float] = None
    omega: Optional[float] = None
    boltzmann: float = K_B

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not self.temperature_i > 0:
            raise ValueError(f"temperature_i must be positive, got {self.temperature_i}")

    @property
    def beta(self) -> float:
        return 1.0 / (self.boltzmann * self.temperature_i)

    def validate(self, kind: TrapKind) -> None:
        kind = TrapKind(kind)
        if kind is TrapKind.WEDGE:
            if self.gravity is None or not self.gravity > 0:
                raise ValueError("wedge trap needs a positive gravity")
        elif self.omega is None or not self.omega > 0:
            raise ValueError("harmonic trap needs a positive omega")


@dataclass(frozen=True)
class CharScales:
    """Characteristic length, velocity, time and energy of one trap."""

    length_l: float
    velocity_nu: float
    time_tau: float
    energy_Ei: float
    mass: float

    @property
    def momentum(self) -> float:
        return self.mass * self.velocity_nu


def derive_scales(params: PhysicalParams, trap_kind: TrapKind | str) -> CharScales:
    kind = TrapKind(trap_kind)
    params.validate(kind)
    e_i = params.boltzmann * params.temperature_i
    nu = math.sqrt(e_i / params.mass)
    if kind is TrapKind.WEDGE:
        tau = nu / params.gravity
    else:
        tau = 1.0 / params.omega
    # l = nu * tau holds identically for both traps
    return CharScales(length_l=nu * tau, velocity_nu=nu, time_tau=tau,
                      energy_Ei=e_i, mass=params.mass)


def _unit(quantity: str, scales: CharScales) -> float:
    units = {
        "length": scales.length_l,
        "velocity": scales.velocity_nu,
        "time": scales.time_tau,
        "energy": scales.energy_Ei,
        "momentum": scales.momentum,
        "area": scales.length_l ** 2,
        "frequency": 1.0 / scales.time_tau,
    }
    try:
        return units[quantity]
    except KeyError:
        raise ValueError(f"unknown quantity {quantity!r}; expected one of {sorted(units)}") from None


def to_dimensionless(value, quantity: str, scales: CharScales):
    """Express a physical ``value`` of the given quantity in trap units.

    Works on scalars and numpy arrays alike.
    """
    return value / _unit(quantity, scales)


def from_dimensionless(value, quantity: str, scales: CharScales):
    return value * _unit(quantity, scales)

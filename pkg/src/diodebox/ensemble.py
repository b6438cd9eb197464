"""Canonical initial states for both traps.

Every trial draws from its own counter-based stream: trial ``k`` uses the
Philox blocks at counters ``2k`` and ``2k + 1`` under a key hashed from the
master seed, so a trial's initial state depends on (master_seed, k) only and
any index range can be generated independently of the others.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from .dynamics import PhaseState, TrapSpec
from .units import TrapKind

DEFAULT_SEED = 0xC0FFEE
DEFAULT_EPSILON = 0.01

_BLOCKS_PER_TRIAL = 2
_WORDS_PER_TRIAL = 4 * _BLOCKS_PER_TRIAL


@dataclass(frozen=True)
class SamplerSpec:
    trap: TrapSpec
    temperature_i: float = 100e-6
    master_seed: int = DEFAULT_SEED


def _philox_key(master_seed: int) -> np.ndarray:
    return np.random.SeedSequence(master_seed).generate_state(2, np.uint64)


def trial_uniforms(master_seed: int, start: int, stop: int) -> np.ndarray:
    """Uniform doubles in [0, 1), shape (stop - start, 8), one row per trial."""
    if start < 0 or stop < start:
        raise ValueError(f"bad trial range [{start}, {stop})")
    bitgen = np.random.Philox(key=_philox_key(master_seed), counter=_BLOCKS_PER_TRIAL * start)
    raw = bitgen.random_raw(_WORDS_PER_TRIAL * (stop - start))
    return ((raw >> np.uint64(11)) * (1.0 / 9007199254740992.0)).reshape(-1, _WORDS_PER_TRIAL)


def _box_muller(u1, u2):
    r = np.sqrt(-2.0 * np.log1p(-u1))
    return r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)


def _states_from_uniforms(u: np.ndarray, trap: TrapSpec) -> np.ndarray:
    out = np.empty((u.shape[0], 4))
    if trap.kind is TrapKind.WEDGE:
        # y ~ Gamma(2, 1) as the sum of two unit exponentials
        y = -np.log1p(-u[:, 0]) - np.log1p(-u[:, 1])
        out[:, 1] = y
        out[:, 0] = (2.0 * u[:, 2] - 1.0) * y * math.tan(trap.alpha)
        out[:, 2], out[:, 3] = _box_muller(u[:, 3], u[:, 4])
    else:
        out[:, 0], out[:, 1] = _box_muller(u[:, 0], u[:, 1])
        out[:, 2], out[:, 3] = _box_muller(u[:, 2], u[:, 3])
    return out


def sample_block(spec: SamplerSpec, start: int, stop: int) -> np.ndarray:
    """Initial states (x, y, px, py) of trials ``start .. stop - 1``."""
    return _states_from_uniforms(trial_uniforms(spec.master_seed, start, stop), spec.trap)


@lru_cache(maxsize=8)
def cached_block(spec: SamplerSpec, start: int, stop: int) -> np.ndarray:
    """Read-only copy of :func:`sample_block` shared by all grid points of a scan."""
    block = sample_block(spec, start, stop)
    block.setflags(write=False)
    return block


def sample_initial(spec: SamplerSpec, trial_index: int) -> PhaseState:
    if trial_index < 0:
        raise ValueError(f"trial_index must be >= 0, got {trial_index}")
    x, y, px, py = sample_block(spec, trial_index, trial_index + 1)[0]
    return PhaseState(float(x), float(y), float(px), float(py), 0.0)


def wedge_height_quantile(epsilon: float) -> float:
    """Height below which a Gamma(2, 1) atom lies with probability 1 - epsilon."""
    def tail(y):
        return (1.0 + y) * math.exp(-y) - epsilon

    # tail is decreasing on y > 0 and starts at 1 - epsilon > 0
    hi = 2.0
    while tail(hi) > 0:
        hi *= 2.0
    return optimize.brentq(tail, 0.0, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def initial_area(spec: SamplerSpec, epsilon: float = DEFAULT_EPSILON) -> float:
    """Area (in l^2) of the region holding the initial atom with probability 1 - epsilon.

    Wedge: the wedge truncated at height y_max.  Harmonic: a centered disk.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if spec.trap.kind is TrapKind.WEDGE:
        y_max = wedge_height_quantile(epsilon)
        return y_max ** 2 * math.tan(spec.trap.alpha)
    return math.pi * -2.0 * math.log(epsilon)

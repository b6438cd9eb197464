"""Monte Carlo driver: N independent atoms, each run until caught or t_final.

Trials are independent, so an index range can be split across any number of
workers.  Each trial depends only on (spec, trial_index); the result is
identical for every worker count.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from .boxcatch import BoxSpec
from .dynamics import TrapSpec
from .ensemble import SamplerSpec, cached_block

log = logging.getLogger(__name__)

DEFAULT_CHECK_INTERVAL = 0.01
DESK_TRIALS = 100_000
PAPER_TRIALS = 1_000_000
HISTOGRAM_BINS = 50


@dataclass(frozen=True)
class RunSpec:
    trap: TrapSpec
    box: BoxSpec
    sampler: SamplerSpec
    n_trials: int = DESK_TRIALS
    t_final: float = 20.0
    check_interval: float = DEFAULT_CHECK_INTERVAL

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be >= 1, got {self.n_trials}")
        if not self.t_final > 0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if not self.check_interval > 0:
            raise ValueError(f"check_interval must be positive, got {self.check_interval}")
        if self.sampler.trap != self.trap:
            raise ValueError("sampler and run use different traps")
        t_f = self.box.trajectory.duration
        if t_f is not None and t_f < self.t_final * (1 - 1e-12):
            raise ValueError(
                f"{self.box.trajectory.name} ends at t_f={t_f} before t_final={self.t_final}")


@dataclass(frozen=True)
class TrialOutcome:
    caught: bool
    catch_time: Optional[float] = None
    stuck_at_apex: bool = False


@dataclass
class TrialBatch:
    """Per-trial outcomes for trials ``start .. start + len(caught) - 1``."""

    start: int
    caught: np.ndarray
    catch_time: np.ndarray
    stuck: np.ndarray


@dataclass(frozen=True)
class FractionEstimate:
    n_caught: int
    n_trials: int
    fraction_F: float
    std_error: float
    n_errors: int = 0
    catch_times: Optional[np.ndarray] = field(default=None, compare=False)

    @classmethod
    def from_counts(cls, n_caught, n_trials, n_errors=0, catch_times=None):
        f = n_caught / n_trials
        return cls(int(n_caught), int(n_trials), f, math.sqrt(f * (1.0 - f) / n_trials),
                   int(n_errors), catch_times)


def _kernel_args(spec: RunSpec):
    tan_a, sin_a, cos_a = spec.trap.trig
    traj = spec.box.trajectory
    return (spec.trap.kernel_kind, tan_a, sin_a, cos_a, traj.kind, traj.params(),
            spec.box.half_width_wB, spec.box.threshold_EB, spec.t_final,
            spec.check_interval, traj.speed_bound())


def simulate(spec: RunSpec, start: int = 0, stop: Optional[int] = None) -> TrialBatch:
    """Run trials ``start .. stop - 1`` in the calling thread."""
    stop = spec.n_trials if stop is None else stop
    if not 0 <= start <= stop <= spec.n_trials:
        raise ValueError(f"trial range [{start}, {stop}) outside [0, {spec.n_trials})")
    init = cached_block(spec.sampler, 0, spec.n_trials)[start:stop]
    caught, catch_time, stuck = K.empty_outputs(stop - start)
    K.run_block(init, *_kernel_args(spec), caught, catch_time, stuck)
    return TrialBatch(start, caught, catch_time, stuck)


def run_trial(spec: RunSpec, trial_index: int) -> TrialOutcome:
    if not 0 <= trial_index < spec.n_trials:
        raise ValueError(f"trial_index {trial_index} outside [0, {spec.n_trials})")
    b = simulate(spec, trial_index, trial_index + 1)
    caught = bool(b.caught[0])
    return TrialOutcome(caught, float(b.catch_time[0]) if caught else None, bool(b.stuck[0]))


def simulate_all(spec: RunSpec, workers: Optional[int] = None) -> TrialBatch:
    """All trials, partitioned into contiguous index ranges across ``workers`` threads."""
    workers = workers or os.cpu_count() or 1
    workers = max(1, min(workers, spec.n_trials))
    if workers == 1:
        return simulate(spec)
    edges = np.linspace(0, spec.n_trials, workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda ab: simulate(spec, int(ab[0]), int(ab[1])),
                              zip(edges[:-1], edges[1:])))
    return TrialBatch(0,
                      np.concatenate([p.caught for p in parts]),
                      np.concatenate([p.catch_time for p in parts]),
                      np.concatenate([p.stuck for p in parts]))


def estimate(batch: TrialBatch, t_final: float, histogram: bool = False) -> FractionEstimate:
    n = batch.caught.size
    hist = None
    if histogram:
        hist, _ = np.histogram(batch.catch_time[batch.caught], bins=HISTOGRAM_BINS,
                               range=(0.0, t_final))
    # stuck-at-apex atoms that were never caught are tallied as trial errors
    n_errors = int(np.count_nonzero(batch.stuck & ~batch.caught))
    return FractionEstimate.from_counts(int(np.count_nonzero(batch.caught)), n, n_errors, hist)


def run_ensemble(spec: RunSpec, workers: Optional[int] = None,
                 histogram: bool = False) -> FractionEstimate:
    batch = simulate_all(spec, workers)
    est = estimate(batch, spec.t_final, histogram)
    log.debug("%s: F=%.6f +- %.6f", spec.box.trajectory, est.fraction_F, est.std_error)
    return est

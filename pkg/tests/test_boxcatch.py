import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from diodebox.boxcatch import (TRAJECTORIES, BoxSpec, Catch, HarmonicAnalytic, HarmonicLinear, Helix, Rest,
                               WedgeAnalytic, WedgeLinear, WedgeSideParallel, Wriggle, box_center,
                               box_velocity, max_speed_on_grid, trajectory_from_dict, try_catch,
                               wedge_rest_optimum_seed)
from diodebox.dynamics import PhaseState

A30 = math.radians(30)
A45 = math.radians(45)

SAMPLES = [
    Rest(0.1, 0.6),
    WedgeLinear(0.06, 0.12, 0.7, 20.0),
    WedgeSideParallel(0.13, 0.9, A30, 0.35),
    WedgeAnalytic(0.11, A45, 0.2),
    Wriggle(2.0, 0.25, A30, 40.0, 0.1),
    HarmonicLinear(0.075, 0.55, 60.0),
    HarmonicAnalytic(0.2, 60.0),
    Helix(1.9, 0.1, 60.0),
]
T_END = 20.0


def test_wriggle_starts_on_right_wall_and_ends_at_half_width():
    w = Wriggle(2.0, 0.25, A30, 20.0, 0.35)
    assert box_center(w, 0.0) == pytest.approx((2.0 * math.tan(A30), 2.0), abs=1e-15)
    assert box_center(w, 20.0)[1] == pytest.approx(0.35, abs=1e-15)


def test_harmonic_linear_crosses_axis_at_half_time():
    assert box_center(HarmonicLinear(0.1, 0.55, 60.0), 30.0) == pytest.approx((0.0, 0.55), abs=1e-15)


def test_closed_forms():
    wa = WedgeAnalytic(0.13, A30, 0.35)
    assert box_center(wa, 2.0) == pytest.approx(
        (0.13 * math.sin(A30) * 2 - 0.35 * (1 + math.tan(A30)), 0.13 * math.cos(A30) * 2), abs=1e-15)
    sp = WedgeSideParallel(0.13, 0.9, A30, 0.35)
    t = 3.0
    x = 0.13 * math.sin(A30) * t - 0.5 * (0.35 + (0.35 + 0.9) * math.tan(A30))
    y = 0.13 * math.cos(A30) * t - 0.5 * (0.35 - 0.9 + 0.35 / math.tan(A30))
    assert box_center(sp, t) == pytest.approx((x, y), abs=1e-15)
    h = Helix(1.9, 0.1, 60.0)
    r = 1.9 * (1 - 10 / 60)
    assert box_center(h, 10.0) == pytest.approx((r * math.cos(1.0), r * math.sin(1.0)), abs=1e-15)
    ha = HarmonicAnalytic(0.2, 60.0)
    assert box_center(ha, 40.0) == pytest.approx(((0.025 + 0.25 * 0.2) * 10.0, 0.55), abs=1e-15)
    assert box_center(ha.as_linear(), 40.0) == box_center(ha, 40.0)
    wl = WedgeLinear(0.06, 0.12, 0.7, 20.0)
    assert box_center(wl, 10.0) == pytest.approx((0.0, 0.7), abs=1e-15)


def test_rest_and_analytic_velocities():
    assert box_velocity(Rest(0.3, 0.4), 5.0) == (0.0, 0.0)
    for t in (0.0, 7.0, 100.0):
        assert box_velocity(WedgeAnalytic(0.13, A30, 0.35), t) == pytest.approx(
            (0.13 * math.sin(A30), 0.13 * math.cos(A30)), abs=1e-15)


@pytest.mark.parametrize("traj", SAMPLES, ids=lambda t: t.name)
@given(u=st.floats(0.01, 0.99))
def test_velocity_is_derivative_of_center(traj, u):
    t_end = traj.duration or T_END
    t = u * t_end
    h = 1e-6
    (x1, y1), (x0, y0) = box_center(traj, t + h), box_center(traj, t - h)
    vx, vy = box_velocity(traj, t)
    fd = ((x1 - x0) / (2 * h), (y1 - y0) / (2 * h))
    assert fd == pytest.approx((vx, vy), rel=1e-6, abs=1e-8)


@pytest.mark.parametrize("traj", SAMPLES, ids=lambda t: t.name)
def test_speed_bound_holds(traj):
    t_end = traj.duration or T_END
    assert max_speed_on_grid(traj, t_end, 2000) <= traj.speed_bound() + 1e-12


@pytest.mark.parametrize("t", [-1e-9, 20.0 + 1e-9])
def test_time_outside_trajectory(t):
    with pytest.raises(ValueError):
        box_center(WedgeLinear(0.1, 0.1, 0.7, 20.0), t)
    with pytest.raises(ValueError):
        box_velocity(WedgeLinear(0.1, 0.1, 0.7, 20.0), t)


def _box(traj=None, w=0.35, eb=0.1):
    return BoxSpec(w, eb, traj or Rest(0.0, 0.6))


def test_catch_at_center_comoving():
    traj = WedgeAnalytic(0.13, A30, 0.35)
    (x, y), (vx, vy) = box_center(traj, 4.0), box_velocity(traj, 4.0)
    assert try_catch(PhaseState(x, y, vx, vy), _box(traj), 4.0) is Catch.CAUGHT


def test_threshold_is_strict():
    eb = 0.125
    speed = math.sqrt(2 * eb)  # 0.5, exactly representable
    assert try_catch(PhaseState(0.0, 0.6, speed, 0.0), _box(eb=eb), 0.0) is Catch.NOT_CAUGHT
    assert try_catch(PhaseState(0.0, 0.6, 0.4999, 0.0), _box(eb=eb), 0.0) is Catch.CAUGHT


def test_outside_region_never_caught():
    assert try_catch(PhaseState(0.35 + 1e-9, 0.6, 0, 0), _box(eb=1e6), 0.0) is Catch.NOT_CAUGHT
    assert try_catch(PhaseState(0.0, 0.95 + 1e-9, 0, 0), _box(eb=1e6), 0.0) is Catch.NOT_CAUGHT
    assert try_catch(PhaseState(0.35, 0.6, 0, 0), _box(eb=1e6), 0.0) is Catch.NOT_CAUGHT


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-2, 2), st.floats(-2, 2), st.floats(1e-3, 2),
       st.floats(1e-3, 2))
def test_catch_monotone_in_threshold_and_width(dx, dy, vx, vy, w, eb):
    state = PhaseState(dx, 0.6 + dy, vx, vy)
    if try_catch(state, _box(w=w, eb=eb), 0.0) is Catch.CAUGHT:
        assert try_catch(state, _box(w=w * 1.5, eb=eb), 0.0) is Catch.CAUGHT
        assert try_catch(state, _box(w=w, eb=eb * 1.5), 0.0) is Catch.CAUGHT


def test_rest_optimum_seed():
    assert wedge_rest_optimum_seed(0.35, A45) == pytest.approx(0.7, rel=1e-15)
    assert wedge_rest_optimum_seed(0.35, A30) == pytest.approx(0.9562, abs=1e-4)
    assert wedge_rest_optimum_seed(0.35, math.pi / 2 - 1e-9) == pytest.approx(0.35, rel=1e-8)
    with pytest.raises(ValueError):
        wedge_rest_optimum_seed(0.0, A45)


def test_box_spec_validation():
    with pytest.raises(ValueError):
        BoxSpec(0.0, 0.1, Rest())
    with pytest.raises(ValueError):
        BoxSpec(0.1, 0.0, Rest())
    with pytest.raises(ValueError, match="w_B"):
        BoxSpec(0.2, 0.1, WedgeAnalytic(0.1, A45, 0.35))
    assert BoxSpec(0.35, 0.1, Rest()).area == pytest.approx(0.49)


@pytest.mark.parametrize("traj", SAMPLES, ids=lambda t: t.name)
def test_dict_round_trip(traj):
    assert trajectory_from_dict(traj.to_dict()) == traj


@pytest.mark.parametrize("data, msg", [
    ({"type": "Spiral"}, "unknown"),
    ({"v_Bx": 1.0}, "missing trajectory type"),
    ({"type": "Helix", "x_H": 1.0, "omega_H": 0.1}, "missing"),
    ({"type": "Rest", "z_B": 1.0}, "no parameter"),
])
def test_dict_errors(data, msg):
    with pytest.raises(ValueError, match=msg):
        trajectory_from_dict(data)


def test_registry_names():
    assert set(TRAJECTORIES) == {"Rest", "WedgeLinear", "WedgeSideParallel", "WedgeAnalytic", "Wriggle",
                                 "HarmonicLinear", "HarmonicAnalytic", "Helix"}

"""Compiled inner loops shared by the dynamics, boxcatch and engine modules.

Everything here works in dimensionless units (l, nu, tau, E_i), so the wedge
has g = 1 and the harmonic trap has omega = 1.  A wedge flight segment is a
tuple ``(x0, y0, px0, py0, t0, t_event, wall, stuck)``: the parabola starting
at ``t0`` is valid until ``t_event``, where it hits ``wall``.
"""
import math

import numpy as np
from numba import njit

WEDGE = 0
HARMONIC = 1

RIGHT = 1.0
LEFT = -1.0
APEX = 2.0
NO_WALL = 0.0

REST = 0
WEDGE_LINEAR = 1
WEDGE_SIDE_PARALLEL = 2
WEDGE_ANALYTIC = 3
WRIGGLE = 4
HARMONIC_LINEAR = 5
HARMONIC_ANALYTIC = 6
HELIX = 7

REFLECTION_SKIP = 1e-12
WALL_TOL = 1e-9
APEX_TOL = 1e-12
MAX_EVENTS_PER_SEEK = 100_000
MAX_BISECTIONS = 40

_OPTS = dict(nogil=True, cache=True)


# --------------------------------------------------------------------------
# wedge billiard
# --------------------------------------------------------------------------

@njit(**_OPTS)
def next_event(x, y, px, py, tan_a, last_wall):
    """Time until the next wall contact and the wall hit.

    Returns ``(inf, NO_WALL)`` when no contact exists.  Roots below
    REFLECTION_SKIP are ignored for the wall that was just left.
    """
    if x == 0.0 and px == 0.0:
        # on the symmetry axis the atom can only fall into the apex corner
        disc = py * py + 2.0 * y
        if disc < 0.0:
            disc = 0.0
        h = py + math.sqrt(disc)
        if h > REFLECTION_SKIP or (last_wall != APEX and h > 0.0):
            return h, APEX
        return math.inf, NO_WALL

    a = 0.5 * tan_a
    best = math.inf
    best_wall = NO_WALL
    for s in (RIGHT, LEFT):
        b = s * px - py * tan_a
        c = s * x - y * tan_a
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            continue
        sq = math.sqrt(disc)
        q = -0.5 * (b + math.copysign(sq, b))
        if q == 0.0:
            continue
        r1 = q / a
        r2 = c / q
        lo = min(r1, r2)
        hi = max(r1, r2)
        eps = REFLECTION_SKIP if s == last_wall else 0.0
        if lo > eps:
            cand = lo
        elif hi > eps:
            cand = hi
        else:
            continue
        # exact ties go to the wall the atom is heading for, keeping x <-> -x symmetry
        lean = px if px != 0.0 else x
        if cand < best or (cand == best and s * lean > 0.0):
            best = cand
            best_wall = s
    return best, best_wall


@njit(**_OPTS)
def reflect_velocity(px, py, wall, sin_a, cos_a):
    if wall == APEX:
        return -px, -py
    # inward normal of the wall x = wall * y * tan(alpha)
    nx = -wall * cos_a
    ny = sin_a
    vn = px * nx + py * ny
    return px - 2.0 * vn * nx, py - 2.0 * vn * ny


@njit(**_OPTS)
def wedge_segment(x, y, px, py, t0, tan_a, sin_a, cos_a):
    """Open a flight segment; an atom touching a wall while heading out is reflected first."""
    if y < APEX_TOL and px * px + py * py < APEX_TOL * APEX_TOL:
        return (0.0, 0.0, 0.0, 0.0, t0, math.inf, NO_WALL, 1.0)
    last = NO_WALL
    for s in (RIGHT, LEFT):
        if abs(s * x - y * tan_a) <= WALL_TOL and s * px - py * tan_a > 0.0:
            px, py = reflect_velocity(px, py, s, sin_a, cos_a)
            last = s
    h, wall = next_event(x, y, px, py, tan_a, last)
    return (x, y, px, py, t0, t0 + h, wall, 0.0)


@njit(**_OPTS)
def wedge_seek(seg, t, tan_a, sin_a, cos_a):
    """Advance a flight segment through every wall event up to time ``t``."""
    x, y, px, py, t0, tev, wall, stuck = seg
    if stuck != 0.0:
        return seg
    count = 0
    while tev <= t:
        h = tev - t0
        x = x + px * h
        y = y + py * h - 0.5 * h * h
        py = py - h
        t0 = tev
        if wall == APEX or y <= WALL_TOL:
            # impacts inside the corner zone are treated as hitting the apex itself;
            # y is kept so the snap stays energy neutral
            x = 0.0
            y = max(y, 0.0)
            wall = APEX
        else:
            # x does not enter the wedge energy, so snapping is energy neutral
            x = wall * y * tan_a
        px, py = reflect_velocity(px, py, wall, sin_a, cos_a)
        count += 1
        if (y < APEX_TOL and px * px + py * py < APEX_TOL * APEX_TOL) or count > MAX_EVENTS_PER_SEEK:
            return (0.0, 0.0, 0.0, 0.0, t0, math.inf, NO_WALL, 1.0)
        dt_ev, wall = next_event(x, y, px, py, tan_a, wall)
        tev = t0 + dt_ev
    return (x, y, px, py, t0, tev, wall, stuck)


@njit(**_OPTS)
def wedge_eval(seg, t):
    x, y, px, py, t0, tev, wall, stuck = seg
    h = t - t0
    return x + px * h, y + py * h - 0.5 * h * h, px, py - h


@njit(**_OPTS)
def harmonic_eval(x0, y0, px0, py0, t):
    c = math.cos(t)
    s = math.sin(t)
    return x0 * c + px0 * s, y0 * c + py0 * s, px0 * c - x0 * s, py0 * c - y0 * s


@njit(**_OPTS)
def atom_at(trap_kind, seg, t, tan_a, sin_a, cos_a):
    """Return (segment, x, y, vx, vy) at time ``t`` >= segment start.

    For the harmonic trap the segment is the initial state at t = 0 and is
    never modified, so positions carry no accumulated rounding.
    """
    if trap_kind == HARMONIC:
        x, y, vx, vy = harmonic_eval(seg[0], seg[1], seg[2], seg[3], t)
        return seg, x, y, vx, vy
    seg = wedge_seek(seg, t, tan_a, sin_a, cos_a)
    x, y, vx, vy = wedge_eval(seg, t)
    return seg, x, y, vx, vy


# --------------------------------------------------------------------------
# box trajectories; params layout is fixed per kind, see boxcatch
# --------------------------------------------------------------------------

@njit(**_OPTS)
def box_state(kind, p, t):
    """Box center and velocity at time ``t``: (xb, yb, vbx, vby)."""
    if kind == REST:
        return p[0], p[1], 0.0, 0.0
    if kind == WEDGE_LINEAR:
        s = t - 0.5 * p[3]
        return p[0] * s, p[1] * s + p[2], p[0], p[1]
    if kind == WEDGE_SIDE_PARALLEL:
        v, y_op, alpha, w = p[0], p[1], p[2], p[3]
        sa = math.sin(alpha)
        ca = math.cos(alpha)
        ta = math.tan(alpha)
        xb = v * sa * t - 0.5 * (w + (w + y_op) * ta)
        yb = v * ca * t - 0.5 * (w - y_op + w / ta)
        return xb, yb, v * sa, v * ca
    if kind == WEDGE_ANALYTIC:
        v, alpha, w = p[0], p[1], p[2]
        sa = math.sin(alpha)
        ca = math.cos(alpha)
        return v * sa * t - w * (1.0 + math.tan(alpha)), v * ca * t, v * sa, v * ca
    if kind == WRIGGLE:
        y0, om, alpha, tf, w = p[0], p[1], p[2], p[3], p[4]
        ta = math.tan(alpha)
        vy = (w - y0) / tf
        yb = y0 + vy * t
        c = math.cos(om * t)
        s = math.sin(om * t)
        return yb * ta * c, yb, vy * ta * c - yb * ta * om * s, vy
    if kind == HARMONIC_LINEAR:
        return p[0] * (t - 0.5 * p[2]), p[1], p[0], 0.0
    if kind == HARMONIC_ANALYTIC:
        v = 0.025 + 0.25 * p[0]
        return v * (t - 0.5 * p[1]), 0.55, v, 0.0
    # HELIX
    xh, om, tf = p[0], p[1], p[2]
    r = xh * (1.0 - t / tf)
    c = math.cos(om * t)
    s = math.sin(om * t)
    dr = -xh / tf
    return r * c, r * s, dr * c - r * om * s, dr * s + r * om * c


@njit(**_OPTS)
def is_caught(xa, ya, vxa, vya, xb, yb, vbx, vby, w, eb):
    if abs(xa - xb) < w and abs(ya - yb) < w:
        dvx = vxa - vbx
        dvy = vya - vby
        return 0.5 * (dvx * dvx + dvy * dvy) < eb
    return False


# --------------------------------------------------------------------------
# trial loop
# --------------------------------------------------------------------------

@njit(**_OPTS)
def _grid_time(k, n_grid, dt, t_final):
    if k >= n_grid:
        return t_final
    return k * dt


@njit(**_OPTS)
def run_one(x0, y0, px0, py0, trap_kind, tan_a, sin_a, cos_a,
            bkind, bp, w, eb, t_final, dt, vb_max):
    """Simulate one atom; returns (caught, catch_time, stuck).

    Catch checks happen on the grid k*dt (plus t_final).  Grid checks are
    skipped only when the atom provably cannot reach the box before them,
    using |v_atom| <= sqrt(2 E) and |v_box| <= vb_max.
    """
    if trap_kind == HARMONIC:
        energy = 0.5 * (px0 * px0 + py0 * py0 + x0 * x0 + y0 * y0)
        seg = (x0, y0, px0, py0, 0.0, math.inf, NO_WALL, 0.0)
    else:
        energy = 0.5 * (px0 * px0 + py0 * py0) + y0
        seg = wedge_segment(x0, y0, px0, py0, 0.0, tan_a, sin_a, cos_a)
    v_rel = math.sqrt(2.0 * energy) * (1.0 + 1e-9) + 1e-12 + vb_max
    n_grid = int(math.ceil(t_final / dt - 1e-9))
    half_w = 0.5 * w

    t = 0.0
    seg, xa, ya, vxa, vya = atom_at(trap_kind, seg, t, tan_a, sin_a, cos_a)
    xb, yb, vbx, vby = box_state(bkind, bp, t)
    if is_caught(xa, ya, vxa, vya, xb, yb, vbx, vby, w, eb):
        return True, t, seg[7] != 0.0

    k = 0
    while k < n_grid:
        gap = max(abs(xa - xb), abs(ya - yb)) - w
        step = 1
        if gap > 0.0:
            m = gap / (v_rel * dt) * (1.0 - 1e-9)
            if m > n_grid:
                m = n_grid
            if m > 1.0:
                step = int(m)
        k_next = min(k + step, n_grid)
        t_next = _grid_time(k_next, n_grid, dt, t_final)

        seg2, xa2, ya2, vxa2, vya2 = atom_at(trap_kind, seg, t_next, tan_a, sin_a, cos_a)
        xb2, yb2, vbx2, vby2 = box_state(bkind, bp, t_next)

        if step == 1:
            disp = max(abs((xa2 - xa) - (xb2 - xb)), abs((ya2 - ya) - (yb2 - yb)))
            if disp > half_w:
                # bisect toward t_next so a box crossing cannot be stepped over
                while True:
                    h = t_next - t
                    depth = 0
                    while True:
                        tt = t_next if depth == 0 else t + h
                        seg3, xa3, ya3, vxa3, vya3 = atom_at(trap_kind, seg, tt, tan_a, sin_a, cos_a)
                        xb3, yb3, vbx3, vby3 = box_state(bkind, bp, tt)
                        disp = max(abs((xa3 - xa) - (xb3 - xb)), abs((ya3 - ya) - (yb3 - yb)))
                        if disp <= half_w or depth >= MAX_BISECTIONS:
                            break
                        h *= 0.5
                        depth += 1
                    if depth == 0:
                        break
                    seg, xa, ya, vxa, vya = seg3, xa3, ya3, vxa3, vya3
                    xb, yb, vbx, vby = xb3, yb3, vbx3, vby3
                    t = tt
                    if is_caught(xa, ya, vxa, vya, xb, yb, vbx, vby, w, eb):
                        return True, t, seg[7] != 0.0
                seg2, xa2, ya2, vxa2, vya2 = seg3, xa3, ya3, vxa3, vya3

        seg, xa, ya, vxa, vya = seg2, xa2, ya2, vxa2, vya2
        xb, yb, vbx, vby = xb2, yb2, vbx2, vby2
        t = t_next
        k = k_next
        if is_caught(xa, ya, vxa, vya, xb, yb, vbx, vby, w, eb):
            return True, t, seg[7] != 0.0
    return False, math.nan, seg[7] != 0.0


@njit(**_OPTS)
def run_block(init, trap_kind, tan_a, sin_a, cos_a, bkind, bp, w, eb,
              t_final, dt, vb_max, caught, catch_time, stuck):
    for i in range(init.shape[0]):
        c, tc, st = run_one(init[i, 0], init[i, 1], init[i, 2], init[i, 3],
                            trap_kind, tan_a, sin_a, cos_a, bkind, bp, w, eb,
                            t_final, dt, vb_max)
        caught[i] = c
        catch_time[i] = tc
        stuck[i] = st


def empty_outputs(n):
    return np.zeros(n, dtype=np.bool_), np.full(n, np.nan), np.zeros(n, dtype=np.bool_)

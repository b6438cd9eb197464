"""Named scenario presets, one or more per figure of the wedge/harmonic study.

A preset expands into a list of cases ``(labels, ScenarioConfig)``; the labels
become leading CSV columns.  Grids follow the plotted ranges where those are
visible and are otherwise plain choices (they are echoed into the metadata).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .config import ScenarioConfig, config_from_dict, grid_values
from .engine import DESK_TRIALS, PAPER_TRIALS
from .ensemble import DEFAULT_SEED

SCALES = {"desk": DESK_TRIALS, "paper": PAPER_TRIALS}

ANGLES = (30.0, 45.0, 60.0)
WIDTHS = grid_values(0.05, 0.35, 0.05)
REST_Y_WEDGE = {"start": 0.2, "stop": 1.5, "step": 0.05}
REST_Y_HARMONIC = {"start": 0.0, "stop": 1.5, "step": 0.05}
WEDGE_VELOCITY = {"start": 0.0, "stop": 0.2, "step": 0.02}
HARMONIC_YC = {"start": 0.2, "stop": 1.0, "step": 0.1}
HARMONIC_V = {"start": 0.0, "stop": 0.2, "step": 0.025}
THRESHOLDS = grid_values(0.05, 0.4, 0.05)

# rest-box optima quoted with the velocity scans, and the quoted optimal velocities
Y_OP_QUOTED = {30.0: 0.7, 45.0: 0.6, 60.0: 0.75}
V_OPT_QUOTED = {30.0: (0.06, 0.12), 45.0: (0.08, 0.08), 60.0: (0.04, 0.06)}
# wall-parallel speed v and wriggle (y_W0, omega_W) per angle
SIDE_SPEED = {30.0: 0.13, 45.0: 0.11, 60.0: 0.11}
WRIGGLE = {30.0: (2.0, 0.25), 45.0: (1.5, 0.2), 60.0: (1.5, 0.2)}
# the 60 degree wriggle peaks near 0.45 nu, so its limit is raised explicitly
WRIGGLE_LIMIT = {30.0: 0.265, 45.0: 0.265, 60.0: 0.5}
HELIX = {"type": "Helix", "x_H": 1.9, "omega_H": 0.1}


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    build: Callable[[int, int], list]

    def cases(self, n_trials: int = DESK_TRIALS, seed: int = DEFAULT_SEED) -> list[tuple[dict, ScenarioConfig]]:
        return self.build(n_trials, seed)


def _cfg(n, seed, trap, box, t_f, sweep=None) -> ScenarioConfig:
    data = {"trap": trap, "box": box, "run": {"n_trials": n, "t_f": t_f, "master_seed": seed}}
    if sweep:
        data["sweep"] = sweep
    return config_from_dict(data)


def _wedge(alpha):
    return {"kind": "wedge", "alpha_deg": alpha}


HARMONIC = {"kind": "harmonic"}


def _fig3a(n, seed):
    return [({"alpha_deg": a, "wB_over_l": w},
             _cfg(n, seed, _wedge(a), {"w_B": w, "E_B": 0.1, "trajectory": {"type": "Rest"}}, 20.0,
                  {"mode": "scan", "axes": [{"path": "trajectory.y_B", **REST_Y_WEDGE}]}))
            for w in (0.1, 0.35) for a in ANGLES]


def _fig3b(n, seed):
    return [({"alpha_deg": a, "wB_over_l": w},
             _cfg(n, seed, _wedge(a), {"w_B": w, "E_B": 0.1, "trajectory": {"type": "Rest"}}, 20.0,
                  {"mode": "scan", "axes": [{"path": "trajectory.y_B", "start": 0.1, "stop": 1.5,
                                             "step": 0.05}]}))
            for a in ANGLES for w in WIDTHS]


def _fig4(n, seed):
    cases = []
    for a in ANGLES:
        box = {"w_B": 0.35, "E_B": 0.1,
               "trajectory": {"type": "WedgeLinear", "v_Bx": 0.0, "v_By": 0.0, "y_op": Y_OP_QUOTED[a]}}
        sweep = {"mode": "optimize2d", "refine_rounds": 2,
                 "axes": [{"path": "trajectory.v_Bx", **WEDGE_VELOCITY},
                          {"path": "trajectory.v_By", **WEDGE_VELOCITY}]}
        cases.append(({"alpha_deg": a, "trajectory": "WedgeLinear"},
                      _cfg(n, seed, _wedge(a), box, 20.0, sweep)))
        rest = {"w_B": 0.35, "E_B": 0.1, "trajectory": {"type": "Rest"}}
        cases.append(({"alpha_deg": a, "trajectory": "Rest"},
                      _cfg(n, seed, _wedge(a), rest, 20.0,
                           {"mode": "scan", "axes": [{"path": "trajectory.y_B", **REST_Y_WEDGE}]})))
    return cases


def _wedge_widths(alpha):
    v = SIDE_SPEED[alpha]
    y_w0, om = WRIGGLE[alpha]
    trajectories = {
        "Rest": {"type": "Rest", "y_B": "auto"},
        "WedgeSideParallel": {"type": "WedgeSideParallel", "v": v, "y_op": "auto"},
        "WedgeAnalytic": {"type": "WedgeAnalytic", "v": v},
        "Wriggle": {"type": "Wriggle", "y_W0": y_w0, "omega_W": om},
    }

    def build(n, seed):
        cases = []
        for t_f in (20.0, 40.0):
            for w in WIDTHS:
                for name, traj in trajectories.items():
                    box = {"w_B": w, "E_B": 0.1, "trajectory": traj,
                           "wriggle_speed_limit": WRIGGLE_LIMIT[alpha]}
                    cases.append(({"tf_over_tau": t_f, "trajectory": name, "wB_over_l": w},
                                  _cfg(n, seed, _wedge(alpha), box, t_f)))
        return cases

    return build


def _fig8(n, seed):
    cases = []
    for w in WIDTHS:
        rest = {"w_B": w, "E_B": 0.1, "trajectory": {"type": "Rest"}}
        cases.append(({"trajectory": "Rest", "wB_over_l": w},
                      _cfg(n, seed, HARMONIC, rest, 60.0,
                           {"mode": "scan", "axes": [{"path": "trajectory.y_B", **REST_Y_HARMONIC}]})))
        lin = {"w_B": w, "E_B": 0.1, "trajectory": {"type": "HarmonicLinear", "v_Bx": 0.0, "y_c": 0.0}}
        cases.append(({"trajectory": "HarmonicLinear", "wB_over_l": w},
                      _cfg(n, seed, HARMONIC, lin, 60.0,
                           {"mode": "optimize2d", "refine_rounds": 2,
                            "axes": [{"path": "trajectory.y_c", **HARMONIC_YC},
                                     {"path": "trajectory.v_Bx", **HARMONIC_V}]})))
        for traj in ({"type": "HarmonicAnalytic"}, HELIX):
            cases.append(({"trajectory": traj["type"], "wB_over_l": w},
                          _cfg(n, seed, HARMONIC, {"w_B": w, "E_B": 0.1, "trajectory": traj}, 60.0)))
    return cases


def _fig9(n, seed):
    lin = {"w_B": 0.2, "E_B": 0.1, "trajectory": {"type": "HarmonicLinear", "v_Bx": 0.0, "y_c": 0.0}}
    rest = {"w_B": 0.2, "E_B": 0.1, "trajectory": {"type": "Rest"}}
    return [
        ({"trajectory": "HarmonicLinear"},
         _cfg(n, seed, HARMONIC, lin, 60.0,
              {"mode": "optimize2d", "refine_rounds": 2,
               "axes": [{"path": "trajectory.y_c", "start": 0.2, "stop": 1.0, "step": 0.05},
                        {"path": "trajectory.v_Bx", "start": 0.0, "stop": 0.2, "step": 0.0125}]})),
        ({"trajectory": "Rest"},
         _cfg(n, seed, HARMONIC, rest, 60.0,
              {"mode": "scan", "axes": [{"path": "trajectory.y_B", **REST_Y_HARMONIC}]})),
    ]


def _fig10(n, seed):
    cases = []
    for w in (0.2, 0.35):
        for traj in ({"type": "Rest", "y_B": "auto"}, {"type": "HarmonicAnalytic"}, HELIX):
            box = {"w_B": w, "E_B": 0.1, "trajectory": traj}
            cases.append(({"wB_over_l": w, "trajectory": traj["type"]},
                          _cfg(n, seed, HARMONIC, box, 60.0,
                               {"mode": "scan", "axes": [{"path": "threshold_EB",
                                                          "values": list(THRESHOLDS)}]})))
    return cases


def _compare(n, seed):
    a = 30.0
    v = SIDE_SPEED[a]
    vx, vy = V_OPT_QUOTED[a]
    y_w0, om = WRIGGLE[a]
    sweep = {"mode": "compare", "trajectories": [
        {"type": "Rest", "y_B": "auto"},
        {"type": "WedgeLinear", "v_Bx": vx, "v_By": vy, "y_op": "auto"},
        {"type": "WedgeSideParallel", "v": v, "y_op": "auto"},
        {"type": "WedgeAnalytic", "v": v},
        {"type": "Wriggle", "y_W0": y_w0, "omega_W": om},
    ]}
    box = {"w_B": 0.35, "E_B": 0.1, "trajectory": {"type": "Rest"}}
    return [({"alpha_deg": a, "wB_over_l": 0.35}, _cfg(n, seed, _wedge(a), box, 20.0, sweep))]


PRESETS: dict[str, Preset] = {p.name: p for p in (
    Preset("fig3a-rest-scan", "wedge, box at rest: F versus y_B for three angles, w_B/l in {0.1, 0.35}",
           _fig3a),
    Preset("fig3b-rest-optimum", "wedge, box at rest: optimal y_B with error bars versus w_B", _fig3b),
    Preset("fig4-wedge-linear-velocity", "wedge, linear box: F over (v_Bx, v_By) at w_B/l = 0.35", _fig4),
    Preset("fig5-wedge30-trajectories", "wedge 30 deg: rest, side-parallel, analytic, wriggle versus w_B",
           _wedge_widths(30.0)),
    Preset("fig6-wedge45-trajectories", "wedge 45 deg: rest, side-parallel, analytic, wriggle versus w_B",
           _wedge_widths(45.0)),
    Preset("fig7-wedge60-trajectories", "wedge 60 deg: rest, side-parallel, analytic, wriggle versus w_B",
           _wedge_widths(60.0)),
    Preset("fig8-harmonic-widths", "harmonic: rest, optimized linear, analytic, helix versus w_B", _fig8),
    Preset("fig9-harmonic-linear", "harmonic, linear box: F over (y_c, v_Bx) at w_B/l = 0.2", _fig9),
    Preset("fig10-harmonic-threshold", "harmonic: F versus E_B for rest, analytic and helix boxes", _fig10),
    Preset("compare-trajectories", "wedge 30 deg, w_B/l = 0.35: all wedge trajectories ranked by F",
           _compare),
)}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; see list-presets") from None

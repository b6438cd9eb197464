import csv
import json
import math
import textwrap

import pytest

from diodebox import cli, scenario
from diodebox.config import ConfigError, build_run_spec, config_from_dict, load_config
from diodebox.engine import run_ensemble
from diodebox.presets import PRESETS, SCALES, get_preset
from diodebox.scenario import CaseResult, execute


def write(tmp_path, text, name="case.toml"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


MINIMAL = """
[trap]
kind = "wedge"
alpha_deg = 45

[box]
w_B = 0.35
E_B = 0.1
trajectory = { type = "Rest", y_B = 0.6 }

[run]
n_trials = 1000
t_f = 20
"""


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------- config


def test_minimal_config_materializes_defaults(tmp_path):
    cfg = load_config(write(tmp_path, MINIMAL))
    assert cfg.sweep is None
    assert cfg.run.master_seed == 0xC0FFEE
    assert cfg.run.check_interval == 0.01
    d = cfg.to_dict()
    assert d["trap"]["alpha_deg"] == 45
    assert tuple(d["output"]["formats"]) == ("csv", "json", "dat")


def test_parse_error_reports_location(tmp_path):
    p = write(tmp_path, "[trap]\nkind = \n")
    with pytest.raises(ConfigError, match=r"case\.toml.*line 2"):
        load_config(p)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="nope.toml"):
        load_config(tmp_path / "nope.toml")


@pytest.mark.parametrize("edit, field", [
    (("alpha_deg = 45", "alpha_deg = 95"), "trap.alpha_deg"),
    (("alpha_deg = 45", "alpha_deg = 90"), "trap.alpha_deg"),
    (("w_B = 0.35", "w_B = -1"), "box.w_B"),
    (("n_trials = 1000", "n_trials = 10.5"), "run.n_trials"),
    (("t_f = 20", "t_f = 20\ncolour = 1"), "run.colour"),
    (('type = "Rest"', 'type = "Spiral"'), "box.trajectory.type"),
    (('type = "Rest", y_B = 0.6', 'type = "Helix"'), "box.trajectory.type"),
])
def test_domain_errors_name_the_field(tmp_path, edit, field):
    p = write(tmp_path, MINIMAL.replace(*edit))
    with pytest.raises(ConfigError) as info:
        load_config(p)
    assert field in str(info.value)


def test_sweep_errors(tmp_path):
    bad_path = MINIMAL + '\n[sweep]\naxes = [{ path = "trajectory.v_Bx", values = [0.1] }]\n'
    with pytest.raises(ConfigError, match=r"sweep\.axes\[0\]"):
        load_config(write(tmp_path, bad_path))
    one_axis = MINIMAL + '\n[sweep]\nmode = "optimize2d"\naxes = [{ path = "trajectory.y_B", values = [0.5] }]\n'
    with pytest.raises(ConfigError, match="sweep.axes"):
        load_config(write(tmp_path, one_axis))
    no_step = MINIMAL + '\n[sweep]\naxes = [{ path = "trajectory.y_B", start = 0.1, stop = 1 }]\n'
    with pytest.raises(ConfigError, match=r"sweep\.axes\[0\]\.step"):
        load_config(write(tmp_path, no_step))


def test_auto_height_rules():
    base = {"trap": {"kind": "wedge", "alpha_deg": 45},
            "box": {"w_B": 0.35, "trajectory": {"type": "Rest", "y_B": "auto"}}}
    config_from_dict(base)
    with pytest.raises(ConfigError, match="box.trajectory"):
        config_from_dict({**base, "box": {"trajectory": {"type": "WedgeAnalytic", "v": "auto"}}})
    with pytest.raises(ConfigError):
        config_from_dict({**base, "sweep": {"axes": [{"path": "half_width_wB", "values": [0.1, 0.2]}]}})


def test_empty_sweep_block_is_a_single_run(tmp_path):
    cfg = load_config(write(tmp_path, MINIMAL + "\n[sweep]\n"))
    assert cfg.sweep is None
    res = execute(cfg)
    est = run_ensemble(build_run_spec(cfg))
    assert len(res.rows) == 1
    assert res.summary["F"] == est.fraction_F
    assert res.summary["n_trials"] == 1000


# ---------------------------------------------------------------- presets


def test_every_figure_has_a_preset():
    names = " ".join(PRESETS)
    for fig in range(3, 11):
        assert f"fig{fig}" in names
    assert SCALES == {"desk": 100_000, "paper": 1_000_000}


def test_fig3a_preset_contents():
    cases = get_preset("fig3a-rest-scan").cases(1000)
    combos = {(l["alpha_deg"], l["wB_over_l"]) for l, _ in cases}
    assert combos == {(a, w) for a in (30.0, 45.0, 60.0) for w in (0.1, 0.35)}
    for labels, cfg in cases:
        assert cfg.trap.kind == "wedge" and cfg.trap.alpha_deg == labels["alpha_deg"]
        assert cfg.box.w_B == labels["wB_over_l"]
        assert cfg.box.E_B == 0.1 and cfg.run.t_f == 20.0
        assert cfg.box.trajectory["type"] == "Rest"
        assert [a.path for a in cfg.sweep.axes] == ["trajectory.y_B"]
        assert cfg.run.n_trials == 1000


def test_fig9_preset_contents():
    cases = get_preset("fig9-harmonic-linear").cases()
    lin = [cfg for labels, cfg in cases if labels["trajectory"] == "HarmonicLinear"]
    assert len(lin) == 1
    cfg = lin[0]
    assert cfg.trap.kind == "harmonic"
    assert cfg.box.w_B == 0.2 and cfg.run.t_f == 60.0 and cfg.box.E_B == 0.1
    assert cfg.sweep.mode == "optimize2d"
    assert [a.path for a in cfg.sweep.axes] == ["trajectory.y_c", "trajectory.v_Bx"]
    assert cfg.run.n_trials == SCALES["desk"]


def test_presets_all_validate():
    for preset in PRESETS.values():
        for labels, cfg in preset.cases(1000, 7):
            assert cfg.run.master_seed == 7
            assert cfg.run.n_trials == 1000


# ---------------------------------------------------------------- outputs


def test_fig3a_csv_columns_and_determinism(tmp_path, monkeypatch):
    # shrink the grid so the whole preset runs in a second or two
    cases = get_preset("fig3a-rest-scan").cases(500)[:2]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.run_cases("fig3a-rest-scan", cases, out1) == 0
    assert cli.run_cases("fig3a-rest-scan", cases, out2) == 0
    header = (out1 / "results.csv").read_text().splitlines()[0].split(",")
    assert header == ["alpha_deg", "wB_over_l", "yB_over_l", "F", "stderr"]
    assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()
    assert (out1 / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()
    rows = read_csv(out1 / "results.csv")
    assert len(rows) == 2 * 27
    f = rows[0]["F"]
    assert len(f.replace(".", "").lstrip("0")) <= 9
    dats = sorted(out1.glob("*.dat"))
    assert len(dats) == 2
    meta = json.loads((out1 / "metadata.json").read_text())
    assert meta["schema_version"] == 1
    assert meta["cases"][0]["master_seed"] == 0xC0FFEE
    assert meta["cases"][0]["config"]["sweep"]["axes"][0]["path"] == "trajectory.y_B"
    for key in ("code_version", "wall_time_s", "python", "numpy"):
        assert key in meta


def test_compare_table(tmp_path):
    (labels, cfg), = get_preset("compare-trajectories").cases(2000)
    res = execute(cfg, labels)
    assert [set(r) for r in res.rows] == [{"trajectory", "F", "stderr", "significant_vs_best"}] * 5
    fs = [r["F"] for r in res.rows]
    assert fs == sorted(fs, reverse=True)
    assert res.rows[0]["significant_vs_best"] is False
    names = {r["trajectory"] for r in res.rows}
    assert names == {"Rest", "WedgeLinear", "WedgeSideParallel", "WedgeAnalytic", "Wriggle"}
    # the rest-box height found by the automatic scan is recorded
    assert "yB_over_l" in res.resolved["Rest"]
    cli.run_cases("compare", [(labels, cfg)], tmp_path)
    header = (tmp_path / "results.csv").read_text().splitlines()[0]
    assert header == "alpha_deg,wB_over_l,trajectory,F,stderr,significant_vs_best"


def test_auto_height_matches_explicit_scan():
    auto = config_from_dict({"trap": {"kind": "wedge", "alpha_deg": 45},
                             "box": {"trajectory": {"type": "Rest", "y_B": "auto"},
                                     "auto": {"y_start": 0.4, "y_stop": 0.8, "y_step": 0.1}},
                             "run": {"n_trials": 1000}})
    scan = config_from_dict({"trap": {"kind": "wedge", "alpha_deg": 45},
                             "box": {"trajectory": {"type": "Rest"}},
                             "run": {"n_trials": 1000},
                             "sweep": {"axes": [{"path": "trajectory.y_B", "start": 0.4, "stop": 0.8,
                                                 "step": 0.1}]}})
    a, s = execute(auto), execute(scan)
    assert a.resolved["yB_over_l"] == s.summary["yB_over_l"]
    assert a.summary["F"] == s.summary["F"]


def test_cli_run_writes_artifacts(tmp_path, capsys):
    cfg = write(tmp_path, MINIMAL)
    out = tmp_path / "out"
    assert cli.main(["run", str(cfg), "--trials", "300", "--seed", "0x2A", "--out", str(out)]) == 0
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["cases"][0]["master_seed"] == 42
    assert meta["n_trials_total"] == 300
    assert read_csv(out / "summary.csv")[0]["trajectory"] == "Rest"


def test_output_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("DIODEBOX_OUT", str(tmp_path / "env"))
    cfg = write(tmp_path, MINIMAL.replace("n_trials = 1000", "n_trials = 200"), "envcase.toml")
    assert cli.main(["run", str(cfg)]) == 0
    assert (tmp_path / "env" / "envcase" / "results.csv").exists()


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, MINIMAL.replace("alpha_deg = 45", "alpha_deg = 120"))
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "x")]) == cli.EXIT_CONFIG
    assert "trap.alpha_deg" in capsys.readouterr().err


def test_trial_errors_give_nonzero_exit(tmp_path, monkeypatch, capsys):
    def fake_execute(cfg, labels, cache, workers):
        return CaseResult(labels, [{"F": 0.1, "stderr": 0.01}], {"F": 0.1}, {}, n_errors, 1000, cfg)

    cfg = load_config(write(tmp_path, MINIMAL))
    monkeypatch.setattr(cli, "execute", fake_execute)
    n_errors = 1  # exactly 0.1 %: tolerated
    assert cli.run_cases("x", [({}, cfg)], tmp_path / "ok") == cli.EXIT_OK
    n_errors = 2
    assert cli.run_cases("x", [({}, cfg)], tmp_path / "bad") == cli.EXIT_TRIAL_ERRORS
    assert "trial errors" in capsys.readouterr().err


def test_list_presets(capsys):
    assert cli.main(["list-presets"]) == 0
    out = capsys.readouterr().out
    for name in PRESETS:
        assert name in out


def test_csv_number_format(tmp_path):
    cli.write_csv(tmp_path / "t.csv", [{"a": 1 / 3, "b": 7, "c": True}, {"a": math.inf, "d": "x"}])
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines == ["a,b,c,d", "0.333333333,7,true,", "inf,,,x"]


def test_empty_csv_keeps_header(tmp_path):
    cli.write_csv(tmp_path / "e.csv", [])
    assert (tmp_path / "e.csv").read_text() == "\n"

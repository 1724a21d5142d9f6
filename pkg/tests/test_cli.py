import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from photonsource import closed_form as cf
from photonsource.cli import cli
from photonsource.report import RunReport, fmt, read_csv, write_csv


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args, **kw):
    return runner.invoke(cli, [str(a) for a in args], catch_exceptions=False, **kw)


def test_square_report(runner):
    res = run(runner, "square", "--omega", 0.5, "-T", 6.75)
    assert res.exit_code == 0
    assert "P_closed_form" in res.output and "abs_diff" in res.output
    assert "0.564104" in res.output


def test_square_json_fields(runner):
    res = run(runner, "square", "--omega", 1, "-T", 100, "--json")
    rep = json.loads(res.output)
    for key in ("command", "parameters", "parameters_mhz", "results", "tolerances",
                "wall_time", "seed", "summary", "flags"):
        assert key in rep
    assert rep["summary"]["Q"] == pytest.approx(-0.667, abs=5e-3)
    assert rep["results"][0]["abs_diff"] < 1e-7


def test_square_without_drive(runner):
    rep = json.loads(run(runner, "square", "--omega", 0, "-T", 5, "--json").output)
    assert rep["results"][0]["P_hierarchy"] == pytest.approx(1.0)
    assert rep["summary"]["Q"] is None


def test_mhz_units_echo_both_systems(runner):
    rep = json.loads(run(runner, "square", "--omega", 10, "-T", 0.3375, "--gamma-mhz", 20,
                         "--json").output)
    assert rep["parameters"]["omega"] == pytest.approx(0.5)
    assert rep["parameters"]["T"] == pytest.approx(6.75)
    assert rep["parameters_mhz"]["omega"] == pytest.approx(10.0)
    assert rep["parameters_mhz"]["T"] == pytest.approx(0.3375)


def test_config_file_with_flag_override(runner, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("field = square\nomega = 0.5\nT = 3\n")
    rep = json.loads(run(runner, "square", "--config", cfg, "-T", 6.75, "--json").output)
    assert rep["parameters"]["T"] == 6.75
    assert rep["results"][1]["P_hierarchy"] == pytest.approx(0.5641, abs=1e-4)


def test_exit_status_follows_flags(runner, monkeypatch):
    assert RunReport("x", {}, []).exit_code == 0
    assert RunReport("x", {}, [], flags=["bad"]).exit_code == 1
    real = cf.cf_pn
    monkeypatch.setattr(cf, "cf_pn", lambda o, t, n: real(o, t, n) + 1e-4)
    res = run(runner, "square", "--omega", 1, "-T", 2)
    assert res.exit_code == 1
    assert "differ" in res.output


def test_raf_command(runner):
    rep = json.loads(run(runner, "raf", "--omega", 3.2, "--delta-rf", 88, "--nu-rf", 0.15,
                         "--json").output)
    probs = [r["P"] for r in rep["results"]]
    assert probs[:3] == pytest.approx([0.09, 0.68, 0.20], abs=0.01)
    assert any("window" in n for n in rep["notes"])
    rep = json.loads(run(runner, "raf", "--omega", 0, "--delta-rf", 88, "--nu-rf", 0.15,
                         "--json").output)
    assert rep["results"][0]["P"] == pytest.approx(1.0)


def test_raf_row4(runner):
    rep = json.loads(run(runner, "raf", "--omega", 5, "--delta-rf", 160, "--nu-rf", 0.15,
                         "--n-max", 8, "--json").output)
    assert rep["results"][1]["P"] == pytest.approx(0.72, abs=0.01)


def test_scan_csv(runner, tmp_path):
    out = tmp_path / "scan.csv"
    res = run(runner, "scan", "--omega", "0.05,0.5,1", "-T", "3,6.75,400", "-o", out)
    assert res.exit_code == 0
    assert out.read_text().splitlines()[0] == "omega,T,p0,p1,p2,mean_n,q"
    rows = read_csv(out)
    assert len(rows) == 9
    assert [r["omega"] for r in rows] == [0.05] * 3 + [0.5] * 3 + [1.0] * 3
    by_point = {(r["omega"], r["T"]): r for r in rows}
    assert by_point[(0.5, 6.75)]["p1"] == pytest.approx(0.56, abs=0.005)
    assert by_point[(0.05, 400.0)]["p1"] == pytest.approx(math.exp(-1), abs=0.01)
    for r in rows:
        assert r["p1"] == pytest.approx(cf.cf_pn(r["omega"], r["T"], 1), rel=1e-11, abs=1e-15)


def test_scan_grid_spec(runner, tmp_path):
    out = tmp_path / "g.csv"
    run(runner, "scan", "--omega", "0.1:1:3:log", "-T", "1:2:3", "-o", out)
    rows = read_csv(out)
    assert len(rows) == 9
    assert rows[3]["omega"] == pytest.approx(math.sqrt(0.1))
    assert [r["T"] for r in rows[:3]] == [1.0, 1.5, 2.0]
    res = runner.invoke(cli, ["scan", "--omega", "1:2", "-T", "1", "-o", str(out)])
    assert res.exit_code != 0


def test_csv_round_trip(tmp_path):
    vals = np.random.default_rng(1).uniform(-1, 1, (5, 3)) * 10.0 ** np.arange(-4, 11, 5)
    path = write_csv(tmp_path / "r.csv", ["a", "b", "c"], vals.tolist())
    back = read_csv(path)
    for row, orig in zip(back, vals):
        for key, v in zip("abc", orig):
            assert float(f"{row[key]:.12g}") == float(f"{v:.12g}")


def test_number_formatting():
    assert fmt(0.123456789) == "0.123457"
    assert fmt(None) == "-"
    assert fmt(True) == "yes"
    assert fmt(float("nan")) == "nan"


def test_optimize_commands(runner):
    rep = json.loads(run(runner, "optimize", "--target", "p1", "--omega-range", 0.5,
                         "--json").output)
    assert rep["summary"]["argmax_T"] == pytest.approx(6.75, abs=0.1)
    assert rep["summary"]["certified"] is True
    assert len(rep["results"]) == 2
    rep = json.loads(run(runner, "optimize", "--target", "p2", "--omega-range", "1:1",
                         "--t-range", "2:2", "--json").output)
    assert rep["summary"]["argmax_T"] == 2.0
    assert rep["summary"]["argmax_omega"] == 1.0
    rep = json.loads(run(runner, "optimize", "--target", "p2", "--resonant",
                         "--omega-range", 50, "--t-range", "0.5:10", "--json").output)
    assert rep["summary"]["value"] == pytest.approx(0.41, abs=0.01)


def test_optimize_raf_degenerate(runner):
    rep = json.loads(run(runner, "optimize", "--target", "p1", "--field", "raf",
                         "--omega-range", 3.2, "--delta-rf-range", 88, "--json").output)
    assert rep["summary"]["argmax_delta_rf"] == 88.0
    assert rep["summary"]["value"] == pytest.approx(0.675, abs=0.005)


def test_mc_reproducible_and_env_seed(runner, monkeypatch):
    args = ["mc", "--omega", 1, "-T", 3, "--n-traj", 2000, "--json"]
    a = json.loads(run(runner, *args, "--seed", 5).output)
    b = json.loads(run(runner, *args, "--seed", 5).output)
    assert a["results"] == b["results"] and a["seed"] == 5
    monkeypatch.setenv("PHOTONSOURCE_SEED", "5")
    c = json.loads(run(runner, *args).output)
    assert c["seed"] == 5 and c["results"] == a["results"]
    assert all(r["source"] == "closed form" for r in a["results"][:3])


def test_mc_dump(runner, tmp_path):
    dump = tmp_path / "traj.tsv"
    run(runner, "mc", "--omega", 1, "-T", 3, "--n-traj", 100, "--dump", dump)
    assert len(dump.read_text().split("\n")) == 101


def test_rerun_from_echoed_parameters(runner):
    first = json.loads(run(runner, "raf", "--omega", 2.0, "--delta-rf", 40, "--nu-rf", 0.2,
                           "--phase", 0.3, "--json").output)
    p = first["parameters"]
    second = json.loads(run(runner, "raf", "--omega", p["omega"], "--delta-rf", p["delta_rf"],
                            "--nu-rf", p["nu_rf"], "--phase", p["phase"], "--window",
                            repr(p["window"]), "--json").output)
    assert first["results"] == second["results"]


def test_reproduce_table1(runner, tmp_path):
    res = run(runner, "reproduce", "table1", "--outdir", tmp_path)
    assert res.exit_code == 0
    rows = read_csv(tmp_path / "table1.csv")
    assert len(rows) == 4
    row2 = rows[1]
    assert (row2["p0"], row2["p1"], row2["p2"]) == pytest.approx((0.09, 0.68, 0.20), abs=0.03)
    assert all(r["max_dev"] <= 0.03 for r in rows)
    # the half-period convention misses row 3 and the report says so
    assert rows[2]["max_dev_natural"] > 0.03
    assert "natural window" in res.output
    assert (tmp_path / "table1.png").stat().st_size > 0


def test_reproduce_fig9(runner, tmp_path):
    res = run(runner, "reproduce", "fig9", "--outdir", tmp_path, "--no-plot")
    assert res.exit_code == 0
    rows = read_csv(tmp_path / "fig9.csv")
    assert len(rows) == 40
    assert list(rows[0])[:3] == ["omega", "p_max", "argmax_T"]
    anchors = read_csv(tmp_path / "fig9_anchors.csv")
    assert anchors[0]["expected"] == pytest.approx(math.exp(-1))
    assert all(a["ok"] == "true" for a in anchors)
    assert not (tmp_path / "fig9.png").exists()


def test_reproduce_fig20(runner, tmp_path):
    res = run(runner, "reproduce", "fig20", "--outdir", tmp_path)
    assert res.exit_code == 0
    anchors = {a["anchor"]: a for a in read_csv(tmp_path / "fig20_anchors.csv")}
    best = anchors["global maximum"]
    assert best["value"] == pytest.approx(0.56, abs=0.01)
    assert best["omega"] == pytest.approx(1.25, abs=0.05)
    assert (tmp_path / "fig20.png").exists()


def test_reproduce_flags_set_exit_status(runner, tmp_path, monkeypatch):
    import photonsource.reproduce as rp

    monkeypatch.setattr(rp, "TABLE1_ROWS", ((88.0, 3.2, (0.5, 0.68, 0.20), (0.11, 0.68, 0.18)),))
    res = run(runner, "reproduce", "table1", "--outdir", tmp_path, "--no-plot")
    assert res.exit_code == 1
    assert "exceeds" in res.output

import json
import subprocess
import sys
import time

import pytest

from asymcp import cli
from asymcp.dynamics import Params, survival_estimate
from asymcp.lattice import LatticeGeometry, read_pgm


def run(*args):
    return cli.main([str(a) for a in args])


def _read_all(path):
    return {p.relative_to(path): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


# ---------------------------------------------------------------------------
# simulate

def test_simulate_outputs(tmp_path):
    out = tmp_path / "run"
    rc = run("simulate", "--beta1", 3, "--beta2", 4, "--gamma", 1, "--dim", 2, "--side", 20,
             "--tmax", 6, "--init", "all-2", "--snapshots", "3,6", "--out", out)
    assert rc == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,u0,u1,u2"
    assert len(lines) == 1 + 7
    assert lines[1] == "0.0,0.0,0.0,1.0"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["params"] == {"beta1": 3.0, "beta2": 4.0, "gamma": 1.0, "variant": "standard"}
    assert summary["seed"] == 0
    assert summary["config"]["side"] == 20
    assert len(summary["final_densities"]) == 3
    snap = read_pgm(out / "snapshot_t3.pgm")
    assert snap.geometry == LatticeGeometry(2, 20)
    assert (out / "snapshot_t6.pgm").exists()


def test_simulate_byte_identical(tmp_path):
    out = tmp_path / "run"
    args = ("simulate", "--beta1", 2, "--beta2", 5, "--gamma", 0.5, "--dim", 2, "--side", 16,
            "--tmax", 5, "--init", "bernoulli(0.1,0.1)", "--snapshots", "5", "--seed", 9, "--out", out)
    assert run(*args) == 0
    first = _read_all(out)
    assert run(*args) == 0
    assert _read_all(out) == first


def test_simulate_healthy_start_reports_extinction_at_zero(tmp_path):
    assert run("simulate", "--init", "healthy", "--tmax", 5, "--side", 10, "--out", tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["extinction_time"] == 0.0
    assert summary["final_densities"] == [1.0, 0.0, 0.0]


def test_simulate_replicas(tmp_path):
    assert run("simulate", "--beta1", 2, "--replicas", 3, "--side", 10, "--tmax", 2, "--out", tmp_path) == 0
    assert sorted(p.name for p in tmp_path.glob("trajectory_*.csv")) == [
        "trajectory_000.csv", "trajectory_001.csv", "trajectory_002.csv"]
    assert len(json.loads((tmp_path / "summary.json").read_text())["replicas"]) == 3


def test_simulate_forest_fire(tmp_path):
    rc = run("simulate", "--variant", "forest-fire", "--beta1", 4, "--gamma", 1, "--regrowth", 0.5,
             "--init", "all-1", "--side", 20, "--tmax", 3, "--out", tmp_path)
    assert rc == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["params"]["regrowth"] == 0.5


@pytest.mark.parametrize("args", [
    ("--beta1", -1),
    ("--variant", "forest-fire", "--beta2", 1),
    ("--init", "half"),
    ("--snapshots", "1"),
    ("--tmax", 0),
    ("--side", 2),
    ("--beta1", "fast"),
])
def test_simulate_invalid_config(tmp_path, capsys, args):
    assert run("simulate", "--out", tmp_path, *args) == cli.EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run("simulate", "--side", 5, "--tmax", 1, "--out", blocker / "sub") == cli.EXIT_IO
    assert "I/O error" in capsys.readouterr().err


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text("[simulate]\nbeta1 = 2.5\nseed = 5\nside = 12\nsample-dt = 0.5\ntmax = 2\n")
    out = tmp_path / "o"
    assert run("simulate", "--config", cfg, "--seed", 7, "--out", out) == 0
    conf = json.loads((out / "summary.json").read_text())["config"]
    assert conf["beta1"] == 2.5 and conf["side"] == 12 and conf["sample_dt"] == 0.5
    assert conf["seed"] == 7
    assert len((out / "trajectory.csv").read_text().splitlines()) == 1 + 5


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text("[simulate]\nbeta3 = 1\n")
    assert run("simulate", "--config", cfg, "--out", tmp_path) == cli.EXIT_CONFIG


def test_config_file_missing(tmp_path):
    assert run("simulate", "--config", tmp_path / "nope.ini", "--out", tmp_path) == cli.EXIT_CONFIG


# ---------------------------------------------------------------------------
# sweep

SWEEP = ("sweep", "--beta1", "1.5:3.5:0.5", "--beta2", 0, "--gamma", 0, "--side", 40, "--tmax", 15,
         "--replicas", 30, "--seed", 3)


def test_sweep_csv(tmp_path):
    assert run(*SWEEP, "--out", tmp_path) == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == cli.SWEEP_HEADER
    assert len(lines) == 1 + 5
    rows = [list(map(float, l.split(","))) for l in lines[1:]]
    assert [r[0] for r in rows] == [1.5, 2.0, 2.5, 3.0, 3.5]
    for r in rows:
        assert 0 <= r[4] <= r[3] <= r[5] <= 1
        assert 0 <= r[7] <= r[6] <= r[8] <= 1


def test_sweep_single_point_matches_survival_estimate(tmp_path):
    assert run("sweep", "--beta1", 3, "--beta2", 1, "--gamma", 0.5, "--side", 30, "--tmax", 10,
               "--replicas", 25, "--seed", 4, "--out", tmp_path) == 0
    row = (tmp_path / "sweep.csv").read_text().splitlines()[1].split(",")
    est = survival_estimate(Params(3.0, 1.0, 0.5), LatticeGeometry(1, 30), "single-1", 10.0, 25,
                            seed=4, key=(0,))
    assert float(row[3]) == est.estimate
    assert (float(row[4]), float(row[5])) == est.ci


def test_sweep_resume_after_interrupt(tmp_path, monkeypatch):
    full = tmp_path / "full"
    assert run(*SWEEP, "--out", full) == 0
    reference = (full / "sweep.csv").read_bytes()

    part = tmp_path / "part"
    calls = {"n": 0}
    real = cli.survival_estimate

    def flaky(*a, **k):
        calls["n"] += 1
        if calls["n"] == 3:
            raise KeyboardInterrupt
        return real(*a, **k)

    monkeypatch.setattr(cli, "survival_estimate", flaky)
    with pytest.raises(KeyboardInterrupt):
        run(*SWEEP, "--out", part)
    partial = (part / "sweep.csv").read_text().splitlines()
    assert len(partial) == 1 + 2
    monkeypatch.setattr(cli, "survival_estimate", real)

    resumed = {"n": 0}

    def counting(*a, **k):
        resumed["n"] += 1
        return real(*a, **k)

    monkeypatch.setattr(cli, "survival_estimate", counting)
    assert run(*SWEEP, "--out", part) == 0
    assert resumed["n"] == 3
    assert (part / "sweep.csv").read_bytes() == reference


def test_sweep_rejects_foreign_markers(tmp_path):
    assert run("sweep", "--beta1", "1,2", "--side", 10, "--tmax", 2, "--replicas", 2, "--out", tmp_path) == 0
    assert run("sweep", "--beta1", "1,3", "--side", 10, "--tmax", 2, "--replicas", 2, "--out", tmp_path) == 2


def test_sweep_rejects_duplicate_points(tmp_path):
    assert run("sweep", "--beta1", "1,1", "--out", tmp_path) == cli.EXIT_CONFIG


# ---------------------------------------------------------------------------
# meanfield, bounds, couple

def test_meanfield_report(tmp_path):
    assert run("meanfield", "--beta1", 4, "--beta2", 4, "--gamma", 1, "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "meanfield.json").read_text())
    assert rep["p12"] == pytest.approx([0.375, 0.375], abs=1e-15)
    assert rep["labels"]["p12"] == "stable"
    assert rep["final"] == pytest.approx([0.375, 0.375], abs=1e-6)
    assert (tmp_path / "meanfield.csv").read_text().startswith("t,u1,u2\n")


def test_meanfield_boundary_has_no_interior_point(tmp_path):
    assert run("meanfield", "--beta1", 1, "--beta2", 1, "--gamma", 1, "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "meanfield.json").read_text())
    assert rep["p12"] is None and rep["condition"] is False


def test_meanfield_negative_rate(tmp_path):
    assert run("meanfield", "--beta1", -2, "--out", tmp_path) != 0


def test_bounds_reports(tmp_path):
    assert run("bounds", "--dim", 2, "--gamma", 0, "--out", tmp_path / "a") == 0
    rep = json.loads((tmp_path / "a" / "bounds.json").read_text())
    assert rep["beta_bar"] == pytest.approx(61.08, abs=0.03)
    assert run("bounds", "--dim", 1, "--gamma", 0.3, "--out", tmp_path / "b") == 0
    rep = json.loads((tmp_path / "b" / "bounds.json").read_text())
    assert rep["subcritical"] is True
    assert rep["mu"] == pytest.approx(1.2 / 1.3, rel=1e-15)
    assert run("bounds", "--dim", 1, "--gamma", 0.5, "--out", tmp_path / "c") == 0
    rep = json.loads((tmp_path / "c" / "bounds.json").read_text())
    assert rep["branching"] == "not applicable"


@pytest.mark.parametrize("kind", ["beta1", "beta2", "gamma", "all"])
def test_couple_check_tables(kind, capsys):
    t0 = time.perf_counter()
    assert run("couple", "--kind", kind, "--check-tables") == 0
    assert time.perf_counter() - t0 < 1.0
    assert "0 violations" in capsys.readouterr().out


def test_couple_run_dominated(tmp_path):
    rc = run("couple", "--kind", "beta1", "--beta1", 1, "--beta2", 3, "--gamma", 0.5, "--prime", 2,
             "--side", 50, "--tmax", 20, "--replicas", 2, "--out", tmp_path)
    assert rc == 0
    for name in ("coupled_000.csv", "coupled_001.csv"):
        rows = (tmp_path / name).read_text().splitlines()
        assert rows[0] == "t,u_inf_low,u_inf_high,dominated"
        assert all(r.endswith(",1") for r in rows[1:])
    rep = json.loads((tmp_path / "couple.json").read_text())
    assert rep["closure"]["violations"] == []


def test_couple_ordering_error(tmp_path):
    assert run("couple", "--kind", "beta1", "--beta1", 3, "--beta2", 1, "--prime", 4,
               "--out", tmp_path) == cli.EXIT_CONFIG


def test_couple_demo_break(tmp_path, capsys):
    rc = run("couple", "--demo-break", "--beta1", 3, "--beta2", 1, "--gamma", 0.5, "--prime", 2,
             "--side", 20, "--tmax", 10, "--seed", 1, "--out", tmp_path)
    assert rc == cli.EXIT_COUPLING_BREAKS
    rep = json.loads((tmp_path / "break.json").read_text())
    assert rep["report"]["pair"] == "10"
    assert rep["minimal"]["pair"] == "10"
    assert "coupling breaks" in capsys.readouterr().out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "asymcp.cli", "couple", "--check-tables", "--kind", "all"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.count("0 violations") == 3

import json

import numpy as np
import pytest

from lagflow.cli import main
from lagflow.config import ConfigError, parse_config
from lagflow.grid import Grid, ScalarField, read_snapshot, write_snapshot

QUAD = """
# comment line
grid.n = 1
grid.points = 32
initial.kind = quadratic
initial.background = [[1.0]]
run.t_end = 1
run.cadence = 0.5
output.dir = quad   # trailing comment
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


@pytest.fixture
def out(tmp_path, monkeypatch):
    root = tmp_path / "out"
    monkeypatch.setenv("LAGFLOW_OUT", str(root))
    return root


def test_parse_values():
    cfg = parse_config(QUAD)
    assert cfg.grid.points == 32 and cfg.run.t_end == 1 and cfg.output.dir == "quad"
    assert cfg.initial.params == {"background": [[1.0]]}


@pytest.mark.parametrize(
    "line",
    [
        "grid.bogus = 1",
        "nosection.n = 1",
        "grid.n 1",
        "run.cfl_safety = 0",
        "initial.a = 1.0",  # not a quadratic parameter
        "grid.points = 8",
        "run.flow = implicit",
        "run.t_end = soon",
        "grid.n = 1",  # duplicate
    ],
)
def test_strict_rejection(line):
    with pytest.raises(ConfigError):
        parse_config(QUAD + line + "\n")


def test_run_quadratic(tmp_path, out, capsys):
    cfg = write(tmp_path, "q.cfg", QUAD)
    assert main(["run", str(cfg)]) == 0
    summary = json.loads((out / "quad" / "summary.json").read_text())
    assert summary["passed"] and summary["observed"]["offset_drift"] <= 1e-12
    assert summary["assertions"]["initial_property"]["passed"]
    header = (out / "quad" / "monitors.csv").read_text().splitlines()[0]
    assert header.startswith("t,lambda_min")
    assert len(list((out / "quad" / "snapshots").glob("snap_*.txt"))) == 3


def test_rerun_is_bit_identical(tmp_path, out):
    text = QUAD.replace("initial.kind = quadratic", "initial.kind = trig").replace(
        "initial.background = [[1.0]]", "initial.amplitudes = [0.3]\ninitial.wavenumbers = [[1]]"
    )
    cfg = write(tmp_path, "t.cfg", text)
    assert main(["run", str(cfg)]) == 0
    first = (out / "quad" / "monitors.csv").read_bytes()
    assert main(["--workers", "3", "run", str(cfg)]) == 0
    assert (out / "quad" / "monitors.csv").read_bytes() == first


def test_bad_resolution_exit_2(tmp_path, out, capsys):
    cfg = write(tmp_path, "b.cfg", QUAD.replace("grid.points = 32", "grid.points = 8"))
    assert main(["run", str(cfg)]) == 2
    assert "16 points" in capsys.readouterr().err


def test_failed_assertion_exit_3(tmp_path, out):
    text = QUAD + "tolerances.theta_floor = 1.0\n"  # pi/4 < 1
    assert main(["run", str(write(tmp_path, "f.cfg", text))]) == 3


def test_compare(tmp_path, out, capsys):
    a = write(tmp_path, "a.cfg", QUAD)
    b = write(tmp_path, "b.cfg", QUAD.replace("output.dir = quad", "output.dir = quad2"))
    c = write(tmp_path, "c.cfg", QUAD.replace("output.dir = quad", "output.dir = quad3").replace("0.5", "0.25"))
    for p in (a, b, c):
        assert main(["run", str(p)]) == 0
    capsys.readouterr()
    assert main(["compare", str(out / "quad"), str(out / "quad2"), "--tol", "0"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert all(v["max_discrepancy"] == 0 for v in report["columns"].values())
    assert main(["compare", str(out / "quad"), str(out / "quad2"), "--cols", "holder_ratio", "--tol", "10%"]) == 0
    assert main(["compare", str(out / "quad"), str(out / "quad3")]) == 2
    assert main(["compare", str(out / "quad"), str(out / "quad2"), "--cols", "nope"]) == 2


def test_potential_vs_gmcf(tmp_path, out, capsys):
    base = QUAD.replace("initial.kind = quadratic", "initial.kind = trig").replace(
        "initial.background = [[1.0]]",
        "initial.background = [[1.0]]\ninitial.amplitudes = [0.1]\ninitial.wavenumbers = [[1]]",
    )
    pot = write(tmp_path, "p.cfg", base.replace("output.dir = quad", "output.dir = pot"))
    orc = write(tmp_path, "o.cfg", base.replace("output.dir = quad", "output.dir = orc") + "run.flow = gmcf\n")
    assert main(["run", str(pot)]) == 0
    assert main(["run", str(orc)]) == 0
    assert (out / "orc" / "gmcf.csv").exists()
    capsys.readouterr()
    assert main(["compare", str(out / "pot"), str(out / "orc"), "--grad", "--tol", "1e-4"]) == 0
    assert json.loads(capsys.readouterr().out)["grad"]["passed"]


def test_mollify_and_rotate_commands(tmp_path, capsys):
    g = Grid.uniform(1, 64)
    snap = write_snapshot(tmp_path / "u.txt", ScalarField.from_function(g, lambda x: 0.5 * np.cos(x)))
    assert main(["mollify", str(snap), "--k", "16"]) == 0
    out = json.loads(capsys.readouterr().out)
    m, _, _ = read_snapshot(out["output"])
    assert np.abs(m.values).max() < 0.5
    assert main(["rotate", str(snap), "--sigma", "-0.7853981633974483", "--out", str(tmp_path / "r.txt")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["hessian_range_after"][0] == pytest.approx(1 / 3, abs=1e-4)
    assert main(["rotate", str(snap), "--sigma", "1.5"]) == 1


def test_pipeline_command(tmp_path, out):
    text = """
grid.n = 2
grid.points = 32
initial.kind = supercritical
run.t_end = 0.2
run.cadence = 0.1
output.dir = pipe
"""
    assert main(["pipeline-supercritical", str(write(tmp_path, "p.cfg", text))]) == 0
    summary = json.loads((out / "pipe" / "summary.json").read_text())
    assert summary["passed"] and len(summary["stages"]) == 6
    assert (out / "pipe" / "final_original.txt").exists()


def test_abort_exit_1(tmp_path, out, monkeypatch):
    import lagflow.scenario as sc
    from lagflow.flow import FlowAbort

    def boom(*a, **k):
        raise FlowAbort("non-finite", tmp_path / "snap.txt")

    monkeypatch.setattr(sc, "evolve", boom)
    assert main(["run", str(write(tmp_path, "q.cfg", QUAD))]) == 1
    summary = json.loads((out / "quad" / "summary.json").read_text())
    assert summary["abort"]["snapshot"].endswith("snap.txt")

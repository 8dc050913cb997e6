import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qevolve import cli
from qevolve.core import rectangular_barrier, step_potential


@pytest.fixture
def barrier_file(tmp_path):
    f = tmp_path / "barrier.json"
    f.write_text(json.dumps(rectangular_barrier(1.0, 1.0).to_json()))
    return str(f)


def read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return dict(zip(header, data.T))


def test_scan_csv(barrier_file, tmp_path):
    out = tmp_path / "scan.csv"
    assert cli.run(["scan", "--potential", barrier_file, "--emin", "0.5", "--emax", "0.5", "--steps", "1", "-o", str(out)]) == 0
    cols = read_csv(out)
    assert cols["T"][0] == pytest.approx(1 / math.cosh(1) ** 2, rel=1e-12)


def test_scan_json(barrier_file, tmp_path):
    out = tmp_path / "scan.json"
    args = ["scan", "--potential", barrier_file, "--emin", "0.2", "--emax", "3", "--steps", "5", "--format", "json", "-o", str(out)]
    assert cli.run(args) == 0
    data = json.loads(out.read_text())
    assert set(data) == {"E", "T", "R"}
    np.testing.assert_allclose(np.add(data["T"], data["R"]), 1.0, atol=1e-12)


def test_compare_passes(barrier_file, tmp_path, capsys):
    out = tmp_path / "cmp.csv"
    assert cli.run(["compare", "--potential", barrier_file, "--energy", "0.5", "--points", "51", "-o", str(out)]) == 0
    assert "max_relative_deviation" in capsys.readouterr().out
    cols = read_csv(out)
    assert list(cols) == ["x", "re_action_field", "im_action_field", "re_reference", "im_reference", "rel_dev"]
    assert cols["rel_dev"].max() < 1e-10


def test_compare_threshold_exit(barrier_file, tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "COMPARE_THRESHOLD", -1.0)
    assert cli.run(["compare", "--potential", barrier_file, "--energy", "0.5", "-o", str(tmp_path / "c.csv")]) == 3


def test_wavefunction(barrier_file, tmp_path):
    out = tmp_path / "wf.csv"
    args = ["wavefunction", "--potential", barrier_file, "--energy", "0.5", "--xmin", "-2", "--xmax", "3", "--points", "11", "-o", str(out)]
    assert cli.run(args) == 0
    cols = read_csv(out)
    np.testing.assert_allclose(cols["abs2"], cols["re_psi"] ** 2 + cols["im_psi"] ** 2, rtol=1e-12)
    assert cols["x"][0] == -2 and cols["x"][-1] == 3


def test_path(tmp_path):
    out = tmp_path / "path.csv"
    assert cli.run(["path", "--x0", "0", "--x1", "1", "--t", "1", "--steps", "200", "--omega", "1", "-o", str(out)]) == 0
    cols = read_csv(out)
    np.testing.assert_allclose(cols["x"], np.sin(cols["tau"]) / math.sin(1.0), atol=1e-4)


def test_hartman(tmp_path):
    out = tmp_path / "h.csv"
    assert cli.run(["hartman", "--v0", "1", "--energy", "0.5", "--wmin", "8", "--wmax", "12", "--steps", "3", "-o", str(out)]) == 0
    cols = read_csv(out)
    assert cols["tau_phase"][-1] == pytest.approx(2.0, rel=1e-2)


def test_propagate(tmp_path):
    pot = tmp_path / "free.json"
    pot.write_text('{"regions": [{"xl": "-inf", "xr": "inf", "v": 0}]}')
    out = tmp_path / "k.csv"
    args = ["propagate", "--potential", str(pot), "--t", "1", "--slices", "8", "--grid=-4,4,81", "--mode", "imag", "--x0", "0", "-o", str(out)]
    assert cli.run(args) == 0
    cols = read_csv(out)
    exact = np.exp(-cols["x"] ** 2 / 2) / math.sqrt(2 * math.pi)
    sl = slice(27, 54)
    np.testing.assert_allclose(cols["re"][sl], exact[sl], rtol=1e-6)
    full = tmp_path / "kfull.csv"
    assert cli.run(["propagate", "--potential", str(pot), "--t", "1", "--slices", "2", "--grid=-1,1,5", "--mode", "imag", "-o", str(full)]) == 0
    assert len(read_csv(full)["x"]) == 25


def test_usage_errors(barrier_file, capsys):
    assert cli.run(["scan", "--potential", barrier_file]) == 1
    assert "usage" in capsys.readouterr().err
    assert cli.run(["frobnicate"]) == 1
    assert cli.run(["scan", "--potential", "/nonexistent.json", "--emin", "0", "--emax", "1", "--steps", "2"]) == 1
    assert cli.run(["hartman", "--v0", "1", "--energy", "0.5", "--wmin", "3", "--wmax", "1", "--steps", "3"]) == 1


def test_numerical_failure_exit(tmp_path, capsys):
    pot = tmp_path / "step.json"
    pot.write_text(json.dumps(step_potential(0.0, v_left=1.0).to_json()))
    assert cli.run(["wavefunction", "--potential", str(pot), "--energy", "0.5"]) == 2
    assert "numerical failure" in capsys.readouterr().err
    coarse = ["propagate", "--potential", str(pot), "--t", "1", "--slices", "64", "--grid=-3,3,31"]
    assert cli.run(coarse) == 2


def test_byte_identical_reruns(barrier_file, tmp_path):
    for cmd in (["compare", "--energy", "0.7"], ["scan", "--emin", "0.1", "--emax", "3", "--steps", "17"]):
        a, b = tmp_path / "a.out", tmp_path / "b.out"
        for out in (a, b):
            assert cli.run(cmd[:1] + ["--potential", barrier_file] + cmd[1:] + ["-o", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()


def test_module_entry_point(barrier_file):
    proc = subprocess.run(
        [sys.executable, "-m", "qevolve", "scan", "--potential", barrier_file, "--emin", "0.5", "--emax", "1", "--steps", "2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "E,T,R"

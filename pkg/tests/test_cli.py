import csv
import json
import math
import subprocess
import sys

import pytest

from magdirac.cli import main

SMALL_WELL = """
field: {B0: 1.0, preset: step-well, depth: -0.5, radius: 2.0}
grid: {r_max: 12.0, N: 400}
window: {J: 4, energy: [-2.0, 2.0]}
converge: {resolutions: [200, 400, 800]}
"""

SMALL_COS = """
field: {B0: 1.0, preset: step-well, depth: -0.5, radius: 2.0}
potential: {preset: cos-theta, kind: gaussian, amplitude: 0.3, width: 1.0}
grid: {r_max: 12.0, N: 200}
window: {J: 4, energy: [-1.3, 1.3]}
analysis: {cluster_tol: 0.2, gap_margin: 0.2, selector_energy: 1.1}
"""

GREEN = """
field: {B0: 1.0}
green:
  z: 1.0
  points: [[0.5, 0.0, 0.0, 0.0], [0.0004, 0.0, 0.0, 0.0]]
  n_random: 10
  bn_sup: 0.001
"""


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def rows(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def run(*argv):
    return main([str(a) for a in argv])


def test_spectrum(tmp_path):
    cfg = write(tmp_path, SMALL_WELL)
    assert run("spectrum", "--config", cfg, "--out", tmp_path / "o") == 0
    eig = rows(tmp_path / "o" / "eigenvalues.csv")
    assert eig and set(eig[0]) == {"E", "channel", "residual", "bucket"}
    E = [float(r["E"]) for r in eig]
    assert E == sorted(E) and all(-2.0 <= e < 2.0 for e in E)
    cls = json.loads((tmp_path / "o" / "classification.json").read_text())
    assert cls["first_gap_count"] >= 1 and cls["pm_symmetry"] <= 1e-12
    assert cls["config"]["grid"]["N"] == 400 and cls["command"] == "spectrum"
    head = (tmp_path / "o" / "eigenvalues.csv").read_text().splitlines()[:2]
    assert head[0].startswith("# magdirac") and head[1].startswith("# config: {")


def test_spectrum_deterministic(tmp_path):
    cfg = write(tmp_path, SMALL_WELL)
    run("spectrum", "--config", cfg, "--out", tmp_path / "a", "--threads", "1")
    run("spectrum", "--config", cfg, "--out", tmp_path / "b", "--threads", "4")
    a = (tmp_path / "a" / "eigenvalues.csv").read_text()
    b = (tmp_path / "b" / "eigenvalues.csv").read_text().replace(str(tmp_path / "b"), str(tmp_path / "a"))
    assert a == b
    assert not list((tmp_path / "a").glob("*.tmp")) and not list((tmp_path / "a").glob(".*"))


def test_localize_radial(tmp_path):
    cfg = write(tmp_path, SMALL_WELL)
    assert run("localize", "--config", cfg, "--out", tmp_path / "o") == 0
    v = json.loads((tmp_path / "o" / "verdicts.json").read_text())
    assert v["channel"] == -1 and abs(v["E"] - 1.1065) < 1e-3
    assert v["gaussian"] and v["c_hat"] >= 0.225
    assert v["channel_decay"]["degenerate"]
    decay = rows(tmp_path / "o" / "decay.csv")
    assert len(decay) == 400


def test_localize_select_and_energy(tmp_path):
    cfg = write(tmp_path, SMALL_WELL)
    assert run("localize", "--config", cfg, "--out", tmp_path / "o", "--select", "1") == 0
    v = json.loads((tmp_path / "o" / "verdicts.json").read_text())
    assert v["E"] > 1.2
    assert run("localize", "--config", cfg, "--out", tmp_path / "p", "--energy", "1.24") == 0
    assert abs(json.loads((tmp_path / "p" / "verdicts.json").read_text())["E"] - 1.2432) < 1e-3


def test_localize_coupled(tmp_path):
    cfg = write(tmp_path, SMALL_COS)
    assert run("localize", "--config", cfg, "--out", tmp_path / "o") == 0
    v = json.loads((tmp_path / "o" / "verdicts.json").read_text())
    cd = v["channel_decay"]
    assert not cd["degenerate"] and cd["gamma"] > 0 and cd["r2"] >= 0.95
    assert len(rows(tmp_path / "o" / "channel_decay.csv")) == 9


def test_localize_synthetic(tmp_path):
    cfg = write(tmp_path, "analysis: {synthetic_c: 0.3, synthetic_gamma: 1.5}\nwindow: {J: 6}\n")
    assert run("localize", "--config", cfg, "--out", tmp_path / "o", "--synthetic") == 0
    v = json.loads((tmp_path / "o" / "verdicts.json").read_text())
    assert v["c_hat"] == pytest.approx(0.3, abs=1e-6)
    assert v["channel_decay"]["gamma"] == pytest.approx(1.5, abs=1e-6)


def test_ritz(tmp_path):
    cfg = write(tmp_path, "field: {B0: 1.0, preset: gaussian-well, depth: -1.0, radius: 1.0}\ngrid: {N: 800}\n")
    assert run("ritz", "--config", cfg, "--out", tmp_path / "o", "--modes", "3") == 0
    r = rows(tmp_path / "o" / "ritz.csv")
    assert len(r) == 3 and all(float(x["mu"]) < 2.0 for x in r)
    assert json.loads((tmp_path / "o" / "ritz.json").read_text())["all_below"]


def test_green(tmp_path):
    cfg = write(tmp_path, GREEN)
    assert run("green", "--config", cfg, "--out", tmp_path / "o") == 0
    k = rows(tmp_path / "o" / "kernel.csv")
    assert len(k) == 12
    assert all(float(x["sym_dev"]) <= 1e-9 for x in k)
    flagged = [x for x in k if x["flagged"] == "1"]
    assert len(flagged) == 1 and float(flagged[0]["d"]) < 1e-3
    cert = json.loads((tmp_path / "o" / "certificate.json").read_text())
    assert cert["certificate"]["passed"]
    assert cert["born"]["bn_sup_threshold"] == pytest.approx(0.003492948009691805, rel=1e-8)


def test_converge(tmp_path):
    cfg = write(tmp_path, SMALL_WELL)
    assert run("converge", "--config", cfg, "--out", tmp_path / "o") == 0
    data = json.loads((tmp_path / "o" / "converge.json").read_text())
    orders = [t["min_order"] for t in data["tracked"] if math.isfinite(t["min_order"])]
    assert orders and min(orders) >= 1.0


@pytest.mark.parametrize("argv,text", [
    (["spectrum"], "analysis: {q1: 0.5, q2: 0.9}\n"),
    (["ritz", "--modes", "0"], ""),
    (["green", "--z", repr(math.sqrt(2.0))], GREEN),
    (["converge"], "converge: {resolutions: [400]}\n"),
    (["spectrum", "--threads", "-1"], ""),
])
def test_exit_code_config(tmp_path, capsys, argv, text):
    cfg = write(tmp_path, text)
    assert run(*argv, "--config", cfg, "--out", tmp_path / "o") == 2
    assert "magdirac: error" in capsys.readouterr().err


def test_exit_code_not_gap_state(tmp_path):
    cfg = write(tmp_path, SMALL_WELL)
    assert run("localize", "--config", cfg, "--out", tmp_path / "o", "--select", "50") == 4
    assert run("localize", "--config", cfg, "--out", tmp_path / "o", "--energy", "0.3") == 4
    none = write(tmp_path, "grid: {N: 300}\nwindow: {J: 2}\n", "zero.yaml")
    assert run("localize", "--config", none, "--out", tmp_path / "z") == 4


def test_console_script(tmp_path):
    out = subprocess.run([sys.executable, "-m", "magdirac.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("magdirac ")
    out = subprocess.run(["magdirac", "ritz", "--modes", "2", "--out", str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "ritz.csv").exists()

import json

import pytest

from magdirac.config import ScenarioConfig, load_config, parse_config
from magdirac.errors import ConfigError
from magdirac.fields import FieldProfile, PotentialSpec


def test_defaults_are_complete():
    cfg = parse_config("", environ={})
    d = cfg.to_dict()
    assert set(d) >= {"field", "potential", "grid", "window", "analysis", "green", "converge", "output",
                      "source", "env_overrides"}
    assert d["grid"] == {"r_max": 12.0, "N": 2000, "scheme": "trapezoid"}
    assert d["analysis"]["q1"] == 0.9 and d["analysis"]["q2"] == 0.5
    json.dumps(d)


def test_shipped_configs_parse():
    for name in ("landau", "step_well", "cos_theta", "ritz_gaussian", "green"):
        cfg = load_config(f"configs/{name}.yaml", environ={})
        assert isinstance(cfg, ScenarioConfig) and cfg.source.endswith(f"{name}.yaml")


def test_field_and_potential_build():
    cfg = parse_config("""
field: {B0: 2.0, preset: step-well, depth: -0.5, radius: 2.0}
analysis: {Btilde: 2.2}
potential: {preset: cos-theta, kind: gaussian, amplitude: 0.3, width: 1.0}
""", environ={})
    f = cfg.field.build()
    assert isinstance(f, FieldProfile) and f.B0 == 2.0 and float(f.B(1.0)) == 1.5
    p = cfg.potential.build()
    assert isinstance(p, PotentialSpec) and p.n_max == 1


def test_fourier_harmonics():
    cfg = parse_config("""
potential:
  preset: fourier
  kind: gaussian
  width: 1.0
  harmonics:
    2: [[0.0, 1.0, 4.0], [0.2, 0.1, 0.0], [0.0, -0.1, 0.0]]
""", environ={})
    p = cfg.potential.build()
    assert p.n_max == 2 and p.kind == "fourier-table"
    assert complex(p.vhat(1.0, 2)) == pytest.approx(0.1 - 0.1j)
    with pytest.raises(ConfigError, match="harmonic"):
        parse_config("potential:\n  preset: fourier\n  harmonics:\n    1: [[0.0], [1.0]]\n", environ={})


@pytest.mark.parametrize("text,line,key", [
    ("analysis:\n  q1: 0.5\n  q2: 0.9\n", 3, "analysis.q2"),
    ("grid:\n  N: 2000\n  spacing: 0.1\n", 3, "grid.spacing"),
    ("fields:\n  B0: 1.0\n", 1, "fields"),
    ("field:\n  B0: -1.0\n", 2, "field.B0"),
    ("window:\n  energy: [1.0, -1.0]\n", 2, "window.energy"),
    ("analysis:\n  cluster_tol: 0.05\n  gap_margin: 0.1\n", 3, "analysis.gap_margin"),
    ("analysis:\n  n_modes: 0\n", 2, "analysis.n_modes"),
    ("converge:\n  resolutions: [1000]\n", 2, "converge.resolutions"),
    ("grid:\n  N: many\n", 2, "grid.N"),
])
def test_errors_name_line_and_key(text, line, key):
    with pytest.raises(ConfigError) as exc:
        parse_config(text, environ={})
    assert exc.value.line == line
    assert exc.value.key == key
    assert f"line {line}" in str(exc.value) and key in str(exc.value)


def test_q_order_message():
    with pytest.raises(ConfigError, match="q2 = 0.9 must be smaller than q1 = 0.5"):
        parse_config("analysis:\n  q1: 0.5\n  q2: 0.9\n", environ={})


def test_invalid_yaml():
    with pytest.raises(ConfigError) as exc:
        parse_config("grid: [1, 2\n", environ={})
    assert exc.value.key == "<document>"


def test_env_overrides_recorded():
    env = {"MAGDIRAC_GRID__N": "400", "MAGDIRAC_ANALYSIS__Q2": "0.4", "MAGDIRAC_BACKEND": "python",
           "UNRELATED": "1"}
    cfg = parse_config("grid:\n  N: 2000\n", environ=env)
    assert cfg.grid.N == 400 and cfg.analysis.q2 == 0.4
    assert cfg.env_overrides == {"MAGDIRAC_ANALYSIS__Q2": "0.4", "MAGDIRAC_GRID__N": "400"}
    assert cfg.to_dict()["env_overrides"]["MAGDIRAC_GRID__N"] == "400"


def test_env_override_errors():
    with pytest.raises(ConfigError):
        parse_config("", environ={"MAGDIRAC_NOPE__N": "1"})
    with pytest.raises(ConfigError):
        parse_config("", environ={"MAGDIRAC_GRID__NOPE": "1"})
    with pytest.raises(ConfigError):
        parse_config("", environ={"MAGDIRAC_ANALYSIS__Q1": "0.3"})


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.yaml", environ={})


def test_type_coercion():
    cfg = parse_config("grid:\n  r_max: 10\nwindow:\n  energy: [-1, 1]\n", environ={})
    assert isinstance(cfg.grid.r_max, float) and cfg.window.energy == [-1.0, 1.0]
    with pytest.raises(ConfigError):
        parse_config("grid:\n  N: 2.5\n", environ={})

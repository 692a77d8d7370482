"""Scenario configuration: YAML in, validated and fully resolved dataclasses out.

Every error carries the line of the offending key.  Values can be overridden
from the environment with ``MAGDIRAC_<SECTION>__<KEY>=<yaml scalar>``; the
overrides applied are recorded in :attr:`ScenarioConfig.env_overrides`.
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Any, Mapping

import yaml

from .errors import ConfigError, MagDiracError
from .fields import FieldProfile, PotentialSpec, RadialProfile

__all__ = [
    "ScenarioConfig",
    "FieldConfig",
    "PotentialConfig",
    "GridConfig",
    "WindowConfig",
    "AnalysisConfig",
    "GreenConfig",
    "ConvergeConfig",
    "OutputConfig",
    "load_config",
    "parse_config",
    "ENV_PREFIX",
]

ENV_PREFIX = "MAGDIRAC_"

FIELD_PRESETS = ("zero", "step-well", "gaussian-well", "table")
POTENTIAL_PRESETS = ("none", "radial", "cos-theta", "fourier")


@dataclass
class FieldConfig:
    B0: float = 1.0
    preset: str = "zero"
    depth: float = 0.0
    radius: float = 1.0
    table_r: list[float] = field(default_factory=list)
    table_b: list[float] = field(default_factory=list)
    decay_tail: float = 1e-12

    def build(self) -> FieldProfile:
        if self.preset == "zero":
            return FieldProfile.zero(self.B0)
        if self.preset == "step-well":
            return FieldProfile.step_well(self.B0, self.depth, self.radius, decay_tail=self.decay_tail)
        if self.preset == "gaussian-well":
            return FieldProfile.gaussian_well(self.B0, self.depth, self.radius, decay_tail=self.decay_tail)
        return FieldProfile.table(self.B0, self.table_r, self.table_b, decay_tail=self.decay_tail)


@dataclass
class PotentialConfig:
    preset: str = "none"
    kind: str = "gaussian"
    amplitude: float = 0.0
    width: float = 1.0
    # harmonic n -> [[r...], [re...], [im...]] for the "fourier" preset
    harmonics: dict[int, list[list[float]]] = field(default_factory=dict)

    def profile(self) -> RadialProfile:
        return RadialProfile(self.kind, self.amplitude, self.width)

    def build(self) -> PotentialSpec:
        if self.preset == "none":
            return PotentialSpec.none()
        if self.preset == "radial":
            return PotentialSpec.radial_only(self.profile())
        if self.preset == "cos-theta":
            return PotentialSpec.cos_theta(self.profile())
        radial = self.profile() if self.amplitude else RadialProfile()
        harm = {}
        for n, (r, re, im) in self.harmonics.items():
            harm[int(n)] = (RadialProfile.from_table(r, re), RadialProfile.from_table(r, im))
        return PotentialSpec("fourier-table", radial, harm)


@dataclass
class GridConfig:
    r_max: float = 12.0
    N: int = 2000
    scheme: str = "trapezoid"


@dataclass
class WindowConfig:
    J: int = 8
    n_max: int = 4
    energy: list[float] = field(default_factory=lambda: [-3.0, 3.0])
    max_pairs: int | None = None


@dataclass
class AnalysisConfig:
    cluster_tol: float = 0.05
    gap_margin: float = 0.05
    fit_window: list[float] = field(default_factory=lambda: [6.0, 10.0])
    alpha: float = 0.9
    floor: float = 1e-14
    channel_floor: float = 1e-15
    q1: float = 0.9
    q2: float = 0.5
    Btilde: float = 1.1
    n_modes: int = 6
    selector: int = 0
    selector_gap: int = 0
    selector_energy: float | None = None
    synthetic: bool = False
    synthetic_c: float = 0.25
    synthetic_gamma: float = 1.5


@dataclass
class GreenConfig:
    z: float = 1.0
    points: list[list[float]] = field(default_factory=list)
    n_random: int = 100
    seed: int = 0
    box: float = 3.0
    radii: list[float] = field(default_factory=lambda: [
        0.0005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0])
    eps: float = 0.1
    bn_sup: float = 0.0
    gamma: float = 1.0


@dataclass
class ConvergeConfig:
    resolutions: list[int] = field(default_factory=list)
    J_steps: list[int] = field(default_factory=lambda: [0, 2])


@dataclass
class OutputConfig:
    directory: str = "out"
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])


_SECTIONS: dict[str, type] = {
    "field": FieldConfig,
    "potential": PotentialConfig,
    "grid": GridConfig,
    "window": WindowConfig,
    "analysis": AnalysisConfig,
    "green": GreenConfig,
    "converge": ConvergeConfig,
    "output": OutputConfig,
}


@dataclass
class ScenarioConfig:
    """Resolved scenario; ``to_dict`` includes every defaulted value."""

    field: FieldConfig = dataclasses.field(default_factory=FieldConfig)
    potential: PotentialConfig = dataclasses.field(default_factory=PotentialConfig)
    grid: GridConfig = dataclasses.field(default_factory=GridConfig)
    window: WindowConfig = dataclasses.field(default_factory=WindowConfig)
    analysis: AnalysisConfig = dataclasses.field(default_factory=AnalysisConfig)
    green: GreenConfig = dataclasses.field(default_factory=GreenConfig)
    converge: ConvergeConfig = dataclasses.field(default_factory=ConvergeConfig)
    output: OutputConfig = dataclasses.field(default_factory=OutputConfig)
    source: str | None = None
    env_overrides: dict[str, str] = dataclasses.field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {name: dataclasses.asdict(getattr(self, name)) for name in _SECTIONS}
        out["potential"]["harmonics"] = {str(k): v for k, v in out["potential"]["harmonics"].items()}
        out["source"] = self.source
        out["env_overrides"] = dict(self.env_overrides)
        return out


# parsing


def _line_map(node, path=(), out=None) -> dict[tuple, int]:
    """Map key paths to 1-based source lines from a composed YAML tree."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = k.value
            out[path + (key,)] = k.start_mark.line + 1
            _line_map(v, path + (key,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            out[path + (i,)] = v.start_mark.line + 1
            _line_map(v, path + (i,), out)
    return out


def _coerce(value: Any, typ: Any, where: str) -> Any:
    """Coerce a YAML value to the annotated field type."""
    t = str(typ)
    if value is None:
        if "None" in t:
            return None
        raise ValueError("value required")
    if t.startswith("float"):
        if isinstance(value, bool):
            raise ValueError("expected a number")
        if isinstance(value, str):
            value = float(value)  # yaml leaves '1e-12' as a string
        if not isinstance(value, (int, float)):
            raise ValueError("expected a number")
        return float(value)
    if t.startswith("int"):
        if isinstance(value, bool) or not (isinstance(value, int) or (isinstance(value, float) and value.is_integer())):
            raise ValueError("expected an integer")
        return int(value)
    if t == "bool":
        if not isinstance(value, bool):
            raise ValueError("expected true or false")
        return value
    if t == "str":
        if not isinstance(value, str):
            raise ValueError("expected a string")
        return value
    if t.startswith("list[float]"):
        if not isinstance(value, list):
            raise ValueError("expected a list of numbers")
        return [_coerce(v, "float", where) for v in value]
    if t.startswith("list[int]"):
        if not isinstance(value, list):
            raise ValueError("expected a list of integers")
        return [_coerce(v, "int", where) for v in value]
    if t.startswith("list[str]"):
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ValueError("expected a list of strings")
        return list(value)
    if t.startswith("list[list[float]]"):
        if not isinstance(value, list):
            raise ValueError("expected a list of lists")
        return [_coerce(v, "list[float]", where) for v in value]
    if t.startswith("dict[int"):
        if not isinstance(value, dict):
            raise ValueError("expected a mapping of harmonic index to [r, re, im] tables")
        out = {}
        for k, v in value.items():
            tab = _coerce(v, "list[list[float]]", where)
            if len(tab) != 3:
                raise ValueError(f"harmonic {k}: expected [r, re, im]")
            out[_coerce(k, "int", where)] = tab
        return out
    raise ValueError(f"unsupported field type {t}")


def _build_section(name: str, data: Any, lines: dict[tuple, int], section_line: int):
    cls = _SECTIONS[name]
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"section must be a mapping", line=section_line, key=name)
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        line = lines.get((name, key), section_line)
        if key not in fields:
            raise ConfigError(f"unknown key (allowed: {', '.join(fields)})", line=line, key=f"{name}.{key}")
        try:
            kwargs[key] = _coerce(value, fields[key].type, f"{name}.{key}")
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc), line=line, key=f"{name}.{key}") from None
    return cls(**kwargs)


def _apply_env(raw: dict, environ: Mapping[str, str]) -> dict[str, str]:
    applied = {}
    for var in sorted(environ):
        if not var.startswith(ENV_PREFIX) or "__" not in var[len(ENV_PREFIX):]:
            continue
        if var == "MAGDIRAC_BACKEND":
            continue
        section, key = var[len(ENV_PREFIX):].split("__", 1)
        section, key = section.lower(), key
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section in environment override {var}", key=section)
        names = {f.name.lower(): f.name for f in dataclasses.fields(_SECTIONS[section])}
        if key.lower() not in names:
            raise ConfigError(f"unknown key in environment override {var}", key=f"{section}.{key}")
        try:
            value = yaml.safe_load(environ[var])
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse environment override {var}: {exc}", key=f"{section}.{key}") from None
        sec = raw.setdefault(section, {})
        if sec is None:
            sec = raw[section] = {}
        sec[names[key.lower()]] = value
        applied[var] = environ[var]
    return applied


def _validate(cfg: ScenarioConfig, lines: dict[tuple, int]) -> None:
    def fail(section: str, key: str, msg: str):
        line = lines.get((section, key), lines.get((section,)))
        raise ConfigError(msg, line=line, key=f"{section}.{key}")

    f, p, g, w, a, gr, cv, o = (cfg.field, cfg.potential, cfg.grid, cfg.window, cfg.analysis,
                                cfg.green, cfg.converge, cfg.output)
    if not f.B0 > 0:
        fail("field", "B0", "must be positive")
    if f.preset not in FIELD_PRESETS:
        fail("field", "preset", f"must be one of {', '.join(FIELD_PRESETS)}")
    if f.preset in ("step-well", "gaussian-well") and not f.radius > 0:
        fail("field", "radius", "must be positive")
    if f.preset == "table" and (len(f.table_r) < 2 or len(f.table_r) != len(f.table_b)):
        fail("field", "table_r", "table needs matching table_r/table_b of length >= 2")
    if p.preset not in POTENTIAL_PRESETS:
        fail("potential", "preset", f"must be one of {', '.join(POTENTIAL_PRESETS)}")
    if p.kind not in ("zero", "step", "gaussian"):
        fail("potential", "kind", "must be zero, step or gaussian")
    if p.preset == "fourier" and not p.harmonics:
        fail("potential", "harmonics", "fourier preset needs at least one harmonic")
    if any(n <= 0 for n in p.harmonics):
        fail("potential", "harmonics", "harmonic indices must be positive (negative ones follow by conjugation)")
    if not g.r_max > 0:
        fail("grid", "r_max", "must be positive")
    if g.N < 4:
        fail("grid", "N", "must be at least 4")
    if g.scheme not in ("trapezoid", "forward"):
        fail("grid", "scheme", "must be trapezoid or forward")
    if w.J < 0:
        fail("window", "J", "must be nonnegative")
    if w.n_max < 0:
        fail("window", "n_max", "must be nonnegative")
    if len(w.energy) != 2 or not w.energy[0] < w.energy[1]:
        fail("window", "energy", "must be [lo, hi] with lo < hi")
    if w.max_pairs is not None and w.max_pairs < 0:
        fail("window", "max_pairs", "must be nonnegative")
    if not (a.cluster_tol > 0 and a.gap_margin > 0):
        fail("analysis", "cluster_tol", "tolerances must be positive")
    if a.gap_margin > a.cluster_tol:
        fail("analysis", "gap_margin", f"gap_margin {a.gap_margin} exceeds cluster_tol {a.cluster_tol}")
    if len(a.fit_window) != 2 or not 0 <= a.fit_window[0] < a.fit_window[1]:
        fail("analysis", "fit_window", "must be [r_a, r_b] with 0 <= r_a < r_b")
    if not 0 < a.alpha < 1:
        fail("analysis", "alpha", "must lie in (0, 1)")
    if not 0 < a.q1 < 1:
        fail("analysis", "q1", "must lie in (0, 1)")
    if not 0 < a.q2 < 1:
        fail("analysis", "q2", "must lie in (0, 1)")
    if not a.q2 < a.q1:
        fail("analysis", "q2", f"q2 = {a.q2} must be smaller than q1 = {a.q1}")
    if not a.Btilde > f.B0:
        fail("analysis", "Btilde", f"must exceed B0 = {f.B0}")
    if a.n_modes < 1:
        fail("analysis", "n_modes", "must be at least 1")
    if gr.n_random < 0:
        fail("green", "n_random", "must be nonnegative")
    if any(len(pt) != 4 for pt in gr.points):
        fail("green", "points", "each point pair must be [x1, x2, x1', x2']")
    if len(gr.radii) < 2:
        fail("green", "radii", "need at least two separations")
    if not gr.eps > 0:
        fail("green", "eps", "must be positive")
    if gr.bn_sup < 0 or gr.gamma < 0:
        fail("green", "bn_sup", "bn_sup and gamma must be nonnegative")
    if cv.resolutions and (len(cv.resolutions) < 3 or any(n < 4 for n in cv.resolutions)):
        fail("converge", "resolutions", "need at least three resolutions for an order estimate")
    if not cv.J_steps or any(s < 0 for s in cv.J_steps):
        fail("converge", "J_steps", "must be a nonempty list of nonnegative steps")
    bad = [x for x in o.formats if x not in ("csv", "json")]
    if bad:
        fail("output", "formats", f"unknown formats {bad}")


def parse_config(text: str, source: str | None = None,
                 environ: Mapping[str, str] | None = None) -> ScenarioConfig:
    """Parse and validate YAML text.

    Raises
    ------
    ConfigError
        With the offending line and dotted key.
    """
    try:
        node = yaml.compose(text)
        raw = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ConfigError(f"invalid YAML: {exc.problem}", line=line, key="<document>") from None
    if raw is None:
        raw, node = {}, None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping", line=1, key="<document>")
    lines = _line_map(node) if node is not None else {}
    for key in raw:
        lines.setdefault((key,), 1)
    applied = _apply_env(raw, os.environ if environ is None else environ)
    for key in raw:
        if key not in _SECTIONS:
            raise ConfigError(f"unknown section (allowed: {', '.join(_SECTIONS)})",
                              line=lines.get((key,)), key=str(key))
    sections = {name: _build_section(name, raw.get(name), lines, lines.get((name,), 1)) for name in _SECTIONS}
    cfg = ScenarioConfig(**sections, source=source, env_overrides=applied)
    _validate(cfg, lines)
    try:
        cfg.field.build().validate()
        cfg.potential.build()
    except MagDiracError as exc:
        raise ConfigError(str(exc), line=lines.get(("field",)), key="field") from None
    return cfg


def load_config(path: str | os.PathLike | None, environ: Mapping[str, str] | None = None) -> ScenarioConfig:
    """Load a scenario file (``None`` gives the defaults plus overrides)."""
    if path is None:
        return parse_config("", None, environ)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", key=str(path)) from None
    return parse_config(text, str(path), environ)

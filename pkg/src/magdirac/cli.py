"""Command-line front end.

``magdirac {spectrum,localize,ritz,green,converge} --config FILE --out DIR``

Exit codes: 0 success, 2 configuration error (including a spectral parameter
on a Landau level), 3 solver or fit failure, 4 selected eigenvalue is not a
gap state.  Every output file embeds the resolved configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from ._backend import BACKEND
from .analysis import (
    AgmonWeight,
    channel_decay_from_masses,
    classify_spectrum,
    fit_decay,
    fit_decay_profile,
    margin_sensitivity,
    ritz_bound,
)
from .config import ScenarioConfig, load_config
from .errors import (
    ConfigError,
    DomainError,
    MagDiracError,
    NotGapStateError,
    ParameterError,
)
from .fields import radial_gauge, zero_mode
from .landau import (
    LandauSpectrum,
    born_norm_estimate,
    green_decay_certificate,
    green_kernel,
    landau_level,
)
from .radial_solver import (
    RadialGrid,
    SpectralResult,
    build_channel,
    build_coupled,
    richardson_order,
    solve_channels,
    solve_spectrum,
)

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_CONFIG", "EXIT_SOLVER", "EXIT_NOT_GAP"]

log = logging.getLogger("magdirac")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_NOT_GAP = 4


# output helpers


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header(command: str, cfg: ScenarioConfig) -> list[str]:
    return [
        f"# magdirac {__version__} {command}",
        "# config: " + json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":")),
    ]


def write_csv(path: Path, command: str, cfg: ScenarioConfig, columns: Sequence[str],
              rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    for line in _header(command, cfg):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    _atomic_write(path, buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def write_json(path: Path, command: str, cfg: ScenarioConfig, payload: dict) -> None:
    doc = {"magdirac_version": __version__, "command": command, "backend": BACKEND,
           "config": cfg.to_dict(), **payload}
    _atomic_write(path, json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


# pipeline


def _is_radial(cfg: ScenarioConfig) -> bool:
    return cfg.potential.preset in ("none", "radial")


def run_spectrum(cfg: ScenarioConfig, N: int | None = None, J: int | None = None, threads: int = 0,
                 vectors: bool = False) -> SpectralResult:
    """Solve the configured operator at resolution ``N`` and window ``J``."""
    N = cfg.grid.N if N is None else N
    J = cfg.window.J if J is None else J
    field = cfg.field.build()
    grid = RadialGrid(cfg.grid.r_max, N)
    gauge = radial_gauge(field, grid.r)
    window = tuple(cfg.window.energy)
    pot = cfg.potential.build()
    if _is_radial(cfg):
        v = pot.radial if cfg.potential.preset == "radial" else None
        parts = solve_channels(range(-J, J + 1), gauge, grid, window, v, cfg.grid.scheme, threads, vectors)
        res = SpectralResult.concatenate(parts, keep_vectors=vectors)
        if cfg.window.max_pairs is not None and len(res) > cfg.window.max_pairs:
            centre = 0.5 * (window[0] + window[1])
            keep = np.sort(np.argsort(np.abs(res.eigenvalues - centre), kind="stable")[: cfg.window.max_pairs])
            res = SpectralResult(res.eigenvalues[keep], res.channel[keep], res.residuals[keep],
                                 None if res.eigenvectors is None else res.eigenvectors[keep],
                                 res.channels, res.grid, res.window, res.norm, res.metadata)
        res.metadata.update({"J": J, "N": N, "mode": "radial"})
        return res
    op = build_coupled(J, gauge, grid, pot, cfg.grid.scheme)
    res = solve_spectrum(op, window, max_pairs=cfg.window.max_pairs, vectors=vectors)
    res.metadata.update({"J": J, "N": N, "mode": "coupled"})
    return res


def _pair_symmetry(E: np.ndarray) -> float:
    if E.size == 0:
        return 0.0
    s = np.sort(E)
    return float(np.max(np.abs(s + s[::-1])))


def _bucket(cls, e: float) -> str:
    for n, vals in cls.landau_clusters.items():
        if any(v == e for v in vals):
            return f"landau:{n}"
    for v, g in cls.gap_states:
        if v == e:
            return f"gap:{g}"
    return "none"


def _classify(cfg: ScenarioConfig, res: SpectralResult):
    a = cfg.analysis
    return classify_spectrum(res, cfg.field.B0, a.cluster_tol, a.gap_margin)


def cmd_spectrum(cfg: ScenarioConfig, out: Path, threads: int = 0) -> int:
    res = run_spectrum(cfg, threads=threads)
    cls = _classify(cfg, res)
    rows = [(e, c, r, _bucket(cls, e)) for e, c, r in zip(res.eigenvalues, res.channel, res.residuals)]
    write_csv(out / "eigenvalues.csv", "spectrum", cfg, ["E", "channel", "residual", "bucket"], rows)
    a = cfg.analysis
    margins = sorted({a.gap_margin, a.gap_margin / 2.0, min(2.0 * a.gap_margin, a.cluster_tol)})
    payload = {
        "classification": cls.to_dict(),
        "first_gap_count": cls.first_gap_count,
        "margin_sensitivity": {str(m): c for m, c in margin_sensitivity(res, cfg.field.B0, margins).items()},
        "landau_levels": {str(n): v for n, v in LandauSpectrum(cfg.field.B0, cfg.window.n_max).levels.items()},
        "n_eigenvalues": len(res),
        "pm_symmetry": _pair_symmetry(res.eigenvalues),
        "max_residual": float(res.residuals.max()) if len(res) else 0.0,
        "solver": _jsonable(res.metadata),
    }
    write_json(out / "classification.json", "spectrum", cfg, payload)
    log.info("spectrum: %d eigenvalues, first-gap count %d", len(res), cls.first_gap_count)
    return EXIT_OK


def _select_gap_state(cfg: ScenarioConfig, cls) -> float:
    a = cfg.analysis
    gaps = [e for e, _ in cls.gap_states]
    if a.selector_energy is not None:
        if not gaps:
            raise NotGapStateError("the spectrum has no gap states")
        e = min(gaps, key=lambda x: abs(x - a.selector_energy))
        if abs(e - a.selector_energy) > cls.cluster_tol:
            raise NotGapStateError(f"no gap state within {cls.cluster_tol} of E = {a.selector_energy}")
        return e
    in_gap = sorted(e for e, g in cls.gap_states if g == a.selector_gap)
    if not 0 <= a.selector < len(in_gap):
        raise NotGapStateError(f"gap-state selector {a.selector} out of range "
                               f"({len(in_gap)} states in gap {a.selector_gap})")
    return in_gap[a.selector]


def _synthetic_localize(cfg: ScenarioConfig, out: Path) -> int:
    a = cfg.analysis
    grid = RadialGrid(cfg.grid.r_max, cfg.grid.N)
    r = grid.r
    rho = np.exp(-a.synthetic_c * r**2)
    fit = fit_decay_profile(r, rho, tuple(a.fit_window), B0=cfg.field.B0, alpha=a.alpha, floor=a.floor)
    # complete pairs j, -j-1 (same |m_j|), each carrying half of exp(-2 gamma |m|)
    js = list(range(-cfg.window.J, cfg.window.J))
    masses = np.array([math.exp(-2.0 * a.synthetic_gamma * abs(2 * j + 1) / 2.0) for j in js])
    cd = channel_decay_from_masses(js, masses / 2.0, a.channel_floor)
    _write_localize(cfg, out, r, rho, js, masses / 2.0, fit, cd, {"synthetic": True, "planted_c": a.synthetic_c,
                                                           "planted_gamma": a.synthetic_gamma})
    return EXIT_OK


def _write_localize(cfg, out, r, rho, js, masses, fit, cd, extra) -> None:
    with np.errstate(divide="ignore"):
        logr = np.log(rho)
    write_csv(out / "decay.csv", "localize", cfg, ["r", "rho", "log_rho"], zip(r, rho, logr))
    write_csv(out / "channel_decay.csv", "localize", cfg, ["j", "abs_m", "mass"],
              [(j, abs(2 * j + 1) / 2.0, m) for j, m in zip(js, masses)])
    verdicts = {
        "gamma_hat": fit.gamma,
        "c_hat": fit.c,
        "alpha": fit.alpha,
        "alpha_B0_over_4": fit.alpha * fit.B0 / 4.0,
        "gaussian": fit.gaussian,
        "superexponential": fit.superexponential,
        "decay_fit": fit.to_dict(),
        "channel_decay": cd.to_dict(),
        **extra,
    }
    write_json(out / "verdicts.json", "localize", cfg, verdicts)


def cmd_localize(cfg: ScenarioConfig, out: Path, threads: int = 0) -> int:
    a = cfg.analysis
    if a.synthetic:
        return _synthetic_localize(cfg, out)
    res = run_spectrum(cfg, threads=threads, vectors=not _is_radial(cfg))
    cls = _classify(cfg, res)
    E = _select_gap_state(cfg, cls)
    k = int(np.argmin(np.abs(res.eigenvalues - E)))
    js = list(range(-cfg.window.J, cfg.window.J + 1))
    if _is_radial(cfg):
        # re-solve the one channel carrying the state, with its eigenvector
        j = int(res.channel[k])
        field = cfg.field.build()
        grid = RadialGrid(cfg.grid.r_max, cfg.grid.N)
        gauge = radial_gauge(field, grid.r)
        v = cfg.potential.build().radial if cfg.potential.preset == "radial" else None
        ch = build_channel(j, gauge, grid, v, cfg.grid.scheme)
        tol = 1e-6 * max(1.0, abs(E))
        sub = solve_spectrum(ch, (E - tol, E + tol), vectors=True)
        kk = int(np.argmin(np.abs(sub.eigenvalues - E)))
        rho = sub.amplitude(kk)
        masses = np.zeros(len(js))
        masses[js.index(j)] = float(sub.channel_masses(kk)[0])
        fit = fit_decay(sub, kk, window=tuple(a.fit_window), B0=cfg.field.B0, alpha=a.alpha, floor=a.floor)
        r = grid.r
    else:
        rho = res.amplitude(k)
        masses = res.channel_masses(k)
        fit = fit_decay(res, k, window=tuple(a.fit_window), B0=cfg.field.B0, alpha=a.alpha,
                        classification=cls, floor=a.floor)
        r = res.grid.r
    cd = channel_decay_from_masses(js, masses, a.channel_floor)
    agmon = AgmonWeight(a.q1, a.q2, cfg.field.B0, a.Btilde)
    _write_localize(cfg, out, r, rho, js, masses, fit, cd, {
        "synthetic": False, "E": E, "gap": dict((e, g) for e, g in cls.gap_states)[E],
        "channel": int(res.channel[k]),
        "agmon": {"q1": a.q1, "q2": a.q2, "Btilde": a.Btilde, "lipschitz": agmon.lipschitz,
                  "r_j": {str(j): agmon.r_j(j) for j in js}},
    })
    log.info("localize: E = %.12g, c_hat = %.6g, gamma_hat(channels) = %s", E, fit.c, cd.gamma)
    return EXIT_OK


def cmd_ritz(cfg: ScenarioConfig, out: Path, threads: int = 0) -> int:
    field = cfg.field.build()
    grid = RadialGrid(cfg.grid.r_max, cfg.grid.N)
    gauge = radial_gauge(field, grid.r)
    modes = [zero_mode(j, gauge) for j in range(cfg.analysis.n_modes)]
    rr = ritz_bound(modes, field, grid)
    write_csv(out / "ritz.csv", "ritz", cfg, ["n", "mu", "threshold_2B0", "margin"],
              [(n + 1, m, rr.threshold, rr.threshold - m) for n, m in enumerate(rr.mu)])
    write_json(out / "ritz.json", "ritz", cfg, {"mu": rr.mu, "threshold": rr.threshold, "margins": rr.margins,
                                                  "all_below": rr.all_below, "gram_cond": rr.cond})
    return EXIT_OK


def cmd_green(cfg: ScenarioConfig, out: Path, threads: int = 0) -> int:
    g = cfg.green
    B0 = cfg.field.B0
    cert = green_decay_certificate(g.z, B0, g.radii, eps=g.eps)
    pairs = [tuple(p) for p in g.points]
    rng = np.random.default_rng(g.seed)
    for _ in range(g.n_random):
        pairs.append(tuple(rng.uniform(-g.box, g.box, 4)))
    rows = []
    worst_sym = 0.0
    for x1, x2, y1, y2 in pairs:
        d = math.hypot(x1 - y1, x2 - y2)
        flagged = d < 1e-3
        if d == 0.0:
            rows.append((x1, x2, y1, y2, d, 0.0, 0.0) + (math.nan,) * 8 + (math.nan, math.nan, math.nan, 0, 0, 1))
            continue
        gv = green_kernel((x1, x2), (y1, y2), g.z, B0)
        gt = green_kernel((y1, y2), (x1, x2), g.z, B0)
        sym = float(np.max(np.abs(gt.matrix - gv.matrix.conj().T)))
        worst_sym = max(worst_sym, sym)
        certified = cert.covers(d) and not flagged
        bound = math.exp(-gv.theta) * cert.omega_at(d) if certified else math.nan
        ok = certified and gv.norm <= bound
        m = gv.matrix
        rows.append((x1, x2, y1, y2, d, gv.theta, gv.eta,
                     m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag,
                     m[1, 0].real, m[1, 0].imag, m[1, 1].real, m[1, 1].imag,
                     sym, gv.norm, bound, int(certified), int(ok), int(flagged)))
    cols = ["x1", "x2", "xp1", "xp2", "d", "theta", "eta", "G11_re", "G11_im", "G12_re", "G12_im",
            "G21_re", "G21_im", "G22_re", "G22_im", "sym_dev", "norm", "bound", "certified", "bound_ok", "flagged"]
    write_csv(out / "kernel.csv", "green", cfg, cols, rows)
    unit = born_norm_estimate(1.0, g.gamma, g.z, B0)
    payload = {
        "certificate": cert.to_dict(),
        "max_symmetry_deviation": worst_sym,
        "born": {"gamma": g.gamma, "bound_per_unit_bn_sup": unit,
                 "bn_sup_threshold": 1.0 / unit if unit > 0 else math.inf,
                 "bn_sup": g.bn_sup, "bound": born_norm_estimate(g.bn_sup, g.gamma, g.z, B0)},
    }
    write_json(out / "certificate.json", "green", cfg, payload)
    return EXIT_OK


def _track(res: SpectralResult, E: float, channel: int) -> float:
    same = res.channel == channel
    vals = res.eigenvalues[same] if np.any(same) else res.eigenvalues
    if vals.size == 0:
        return math.nan
    return float(vals[np.argmin(np.abs(vals - E))])


def cmd_converge(cfg: ScenarioConfig, out: Path, threads: int = 0) -> int:
    cv = cfg.converge
    Ns = list(cv.resolutions) if cv.resolutions else [cfg.grid.N, 2 * cfg.grid.N, 4 * cfg.grid.N]
    if len(Ns) < 3:
        raise ConfigError("need at least three resolutions", key="converge.resolutions")
    B0 = cfg.field.B0
    l1 = landau_level(1, B0)
    rows, summary = [], []
    for step in cv.J_steps:
        J = cfg.window.J + step
        runs = [run_spectrum(cfg, N=N, J=J, threads=threads) for N in Ns]
        base = runs[0]
        cls = _classify(cfg, base)
        targets = [(f"gap:{g}", e) for e, g in cls.gap_states]
        if len(base):
            k = int(np.argmin(np.abs(base.eigenvalues - l1)))
            targets.append(("landau:1", float(base.eigenvalues[k])))
        for label, e in targets:
            k = int(np.argmin(np.abs(base.eigenvalues - e)))
            ch = int(base.channel[k])
            vals = [_track(r, e, ch) for r in runs]
            orders = [richardson_order(*vals[i:i + 3], ratio=Ns[i + 1] / Ns[i]) for i in range(len(vals) - 2)]
            rows.append([J, label, ch, *vals, *orders])
            summary.append({"J": J, "label": label, "channel": ch, "values": vals, "orders": orders,
                            "min_order": min(orders) if orders else math.nan})
    cols = ["J", "label", "channel"] + [f"E_N{N}" for N in Ns] + [f"order_{i}" for i in range(len(Ns) - 2)]
    write_csv(out / "converge.csv", "converge", cfg, cols, rows)
    write_json(out / "converge.json", "converge", cfg, {"resolutions": Ns, "tracked": summary})
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "localize": cmd_localize,
    "ritz": cmd_ritz,
    "green": cmd_green,
    "converge": cmd_converge,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="magdirac", description="Spectra of 2D magnetic Dirac operators.")
    p.add_argument("--version", action="version", version=f"magdirac {__version__} ({BACKEND} kernels)")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="scenario YAML file")
    common.add_argument("--out", type=Path, default=None, help="output directory (overrides output.directory)")
    common.add_argument("--threads", type=int, default=0, help="worker threads over channels, 0 = auto")
    common.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("spectrum", parents=[common], help="eigenvalues and Landau classification")
    loc = sub.add_parser("localize", parents=[common], help="decay fits of a gap state")
    loc.add_argument("--select", type=int, default=None, help="index into the gap states")
    loc.add_argument("--energy", type=float, default=None, help="pick the gap state nearest this energy")
    loc.add_argument("--synthetic", action="store_true", help="fit planted profiles instead of solving")
    rz = sub.add_parser("ritz", parents=[common], help="Rayleigh-Ritz values on zero modes")
    rz.add_argument("--modes", type=int, default=None, help="number of zero modes")
    gr = sub.add_parser("green", parents=[common], help="Green kernel table and decay certificate")
    gr.add_argument("--z", type=float, default=None, help="spectral parameter")
    sub.add_parser("converge", parents=[common], help="Richardson orders over N, 2N, 4N")
    return p


def _apply_flags(cfg: ScenarioConfig, args) -> None:
    if getattr(args, "select", None) is not None:
        cfg.analysis.selector = args.select
    if getattr(args, "energy", None) is not None:
        cfg.analysis.selector_energy = args.energy
    if getattr(args, "synthetic", False):
        cfg.analysis.synthetic = True
    if getattr(args, "modes", None) is not None:
        if args.modes < 1:
            raise ConfigError("must be at least 1", key="analysis.n_modes (--modes)")
        cfg.analysis.n_modes = args.modes
    if getattr(args, "z", None) is not None:
        cfg.green.z = args.z
    if args.out is not None:
        cfg.output.directory = str(args.out)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        _apply_flags(cfg, args)
        if args.threads < 0:
            raise ConfigError("must be >= 0", key="--threads")
        return COMMANDS[args.command](cfg, Path(cfg.output.directory), args.threads)
    except (ConfigError, DomainError, ParameterError) as exc:
        print(f"magdirac: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotGapStateError as exc:
        print(f"magdirac: not a gap state: {exc}", file=sys.stderr)
        return EXIT_NOT_GAP
    except (MagDiracError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"magdirac: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

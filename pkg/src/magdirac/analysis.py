"""Verdicts from spectra and eigenvectors.

Gap-state classification against Landau levels, Rayleigh-Ritz bounds from
zero modes, tail fits of eigenfunction amplitudes, angular-channel decay,
Agmon weights and supersymmetry checks of single channels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import (
    IllConditionedError,
    NotGapStateError,
    ParameterError,
    TailUnderflowError,
    TooFewChannelsError,
    ToleranceOverlapError,
)
from .fields import FieldProfile, ZeroMode, cell_weights
from .landau import landau_level
from .radial_solver import ChannelOperator, SpectralResult

__all__ = [
    "SpectrumClassification",
    "classify_spectrum",
    "margin_sensitivity",
    "ritz_bound",
    "RitzResult",
    "DecayFit",
    "fit_decay",
    "fit_decay_profile",
    "ChannelDecayFit",
    "channel_decay_rate",
    "channel_decay_from_masses",
    "AgmonWeight",
    "agmon_weight",
    "SusyReport",
    "susy_check",
]


# classification

@dataclass
class SpectrumClassification:
    """Eigenvalues bucketed into Landau clusters and gap states.

    ``gap_counts[n]`` counts gap states in ``(l_n, l_{n+1})``.
    """

    B0: float
    cluster_tol: float
    gap_margin: float
    levels: dict[int, float]
    landau_clusters: dict[int, list[float]]
    gap_states: list[tuple[float, int]]
    gap_counts: dict[int, int]

    @property
    def first_gap_count(self) -> int:
        return self.gap_counts.get(0, 0)

    @property
    def n_clustered(self) -> int:
        return sum(len(v) for v in self.landau_clusters.values())

    def is_gap_state(self, E: float, tol: float = 0.0) -> bool:
        return any(abs(E - e) <= tol for e, _ in self.gap_states)

    def to_dict(self) -> dict:
        return {
            "B0": self.B0,
            "cluster_tol": self.cluster_tol,
            "gap_margin": self.gap_margin,
            "levels": {str(n): v for n, v in self.levels.items()},
            "landau_clusters": {str(n): v for n, v in self.landau_clusters.items() if v},
            "gap_states": [{"E": e, "gap": g, "margin": self.margin_of(e, g)} for e, g in self.gap_states],
            "gap_counts": {str(n): c for n, c in self.gap_counts.items()},
            "first_gap_count": self.first_gap_count,
        }

    def margin_of(self, E: float, gap: int) -> float:
        """Distance of a gap state to the nearer edge of its gap."""
        return min(E - self.levels[gap], self.levels[gap + 1] - E)


def _level_range(B0: float, emax: float) -> range:
    nmax = int(math.ceil(emax * emax / (2.0 * B0))) + 1
    return range(-nmax, nmax + 1)


def classify_spectrum(res: SpectralResult | np.ndarray, B0: float, cluster_tol: float,
                      gap_margin: float) -> SpectrumClassification:
    """Bucket eigenvalues by distance to the Landau levels.

    An eigenvalue within ``cluster_tol`` of some ``l_n`` is clustered; every
    other one is a gap state of the gap it lies in.

    Raises
    ------
    ToleranceOverlapError
        If ``gap_margin > cluster_tol`` (some eigenvalues would fall in no
        bucket) or ``cluster_tol`` reaches half the spacing between the
        levels relevant to the window.
    """
    if not (cluster_tol > 0 and gap_margin > 0):
        raise ParameterError("cluster_tol and gap_margin must be positive")
    if gap_margin > cluster_tol:
        raise ToleranceOverlapError(f"gap_margin {gap_margin} exceeds cluster_tol {cluster_tol}")
    E = np.asarray(res.eigenvalues if isinstance(res, SpectralResult) else res, dtype=float)
    if isinstance(res, SpectralResult):
        lo, hi = res.window
    else:
        lo, hi = (float(E.min()), float(E.max())) if E.size else (-1.0, 1.0)
    emax = max(abs(lo), abs(hi), float(np.max(np.abs(E))) if E.size else 0.0) + cluster_tol
    ns = _level_range(B0, emax)
    levels = {n: landau_level(n, B0) for n in ns}
    lv = np.array([levels[n] for n in ns])
    near = lv[(lv >= lo - cluster_tol) & (lv <= hi + cluster_tol)]
    if near.size >= 2:
        spacing = float(np.min(np.diff(near)))
    else:
        # one level in reach: use its distance to the neighbouring levels
        k = int(np.argmin(np.abs(lv - near[0]))) if near.size else int(np.argmin(np.abs(lv - 0.5 * (lo + hi))))
        spacing = float(min(lv[k] - lv[k - 1], lv[k + 1] - lv[k]))
    if cluster_tol >= spacing / 2.0:
        raise ToleranceOverlapError(
            f"cluster_tol {cluster_tol} must be below half the level spacing {spacing / 2.0:.6g}")
    clusters: dict[int, list[float]] = {n: [] for n in ns}
    gaps: list[tuple[float, int]] = []
    counts: dict[int, int] = {n: 0 for n in list(ns)[:-1]}
    for e in E:
        k = int(np.argmin(np.abs(lv - e)))
        if abs(lv[k] - e) <= cluster_tol:
            clusters[ns[k]].append(float(e))
            continue
        g = ns[int(np.searchsorted(lv, e)) - 1]
        gaps.append((float(e), g))
        counts[g] += 1
    return SpectrumClassification(B0, cluster_tol, gap_margin, levels, clusters, gaps, counts)


def margin_sensitivity(res: SpectralResult | np.ndarray, B0: float,
                       margins: Sequence[float]) -> dict[float, int]:
    """First-gap count as a function of the margin (``cluster_tol = margin``)."""
    return {float(m): classify_spectrum(res, B0, m, m).first_gap_count for m in margins}


# Rayleigh-Ritz

@dataclass
class RitzResult:
    """Generalized Ritz values ``M x = mu G x`` and the ``2 B0`` threshold."""

    mu: np.ndarray
    threshold: float
    M: np.ndarray
    G: np.ndarray
    cond: float

    @property
    def margins(self) -> np.ndarray:
        return self.threshold - self.mu

    @property
    def all_below(self) -> bool:
        return bool(np.all(self.mu < self.threshold))


def _as_channel_arrays(modes, r: np.ndarray) -> np.ndarray:
    """Stack modes as ``(n_modes, n_channels, N)`` over a common channel list."""
    arrays = []
    zero_js = [m.j for m in modes if isinstance(m, ZeroMode)]
    n_extra = max((np.shape(m)[0] for m in modes if not isinstance(m, ZeroMode)), default=0)
    nch = max(max(zero_js, default=-1) + 1, n_extra)
    for m in modes:
        a = np.zeros((nch, r.size), dtype=complex)
        if isinstance(m, ZeroMode):
            if m.u.shape != r.shape:
                raise ParameterError("zero mode not sampled on the grid")
            a[m.j] = m.u
        else:
            arr = np.asarray(m)
            if arr.ndim != 2 or arr.shape[1] != r.size:
                raise ParameterError("mode arrays must have shape (n_channels, N)")
            a[: arr.shape[0]] = arr
        arrays.append(a)
    return np.stack(arrays)


def ritz_bound(modes: Sequence, field: FieldProfile, grid, cond_max: float = 1e12) -> RitzResult:
    """Generalized Rayleigh-Ritz values of ``d d*`` on a span of zero modes.

    Builds ``M_nm = 2 <u_n | B u_m>`` and ``G_nm = <u_n | u_m>`` on the grid
    (channels ``j >= 0`` stacked; :class:`ZeroMode` entries sit in channel
    ``j``) and solves ``M x = mu G x``.

    Raises
    ------
    IllConditionedError
        If ``cond(G) > cond_max``.
    """
    if len(modes) < 1:
        raise ParameterError("ritz_bound needs at least one mode")
    r = grid.r if hasattr(grid, "r") else np.asarray(grid, dtype=float)
    U = _as_channel_arrays(modes, r)
    w = cell_weights(r)
    Bw = field.B(r) * w
    G = np.einsum("ack,bck,k->ab", U.conj(), U, w)
    M = 2.0 * np.einsum("ack,bck,k->ab", U.conj(), U, Bw)
    G = 0.5 * (G + G.conj().T)
    M = 0.5 * (M + M.conj().T)
    cond = float(np.linalg.cond(G))
    if not math.isfinite(cond) or cond > cond_max:
        raise IllConditionedError(
            f"Gram matrix condition number {cond:.3g} exceeds {cond_max:.3g}; use fewer modes or orthogonalize")
    if np.all(np.abs(G.imag) == 0) and np.all(np.abs(M.imag) == 0):
        G, M = G.real, M.real
    mu = sla.eigh(M, G, eigvals_only=True)
    return RitzResult(np.sort(mu), 2.0 * field.B0, M, G, cond)


# decay fits

@dataclass
class DecayFit:
    """Least-squares tail fits of ``-log rho`` on ``[r_a, r_b]``.

    ``gamma`` from ``-log rho ~ gamma r``, ``c`` from ``-log rho ~ c r**2``,
    ``c_log``/``beta`` from ``-log rho ~ c r**2 + beta log r``.  Residuals
    are RMS values of the respective fits.  ``windows`` lists the expanding
    sub-window fits behind the superexponential verdict.
    """

    window: tuple[float, float]
    n_nodes: int
    gamma: float
    c: float
    c_log: float
    beta: float
    residual_exp: float
    residual_gauss: float
    residual_log: float
    windows: list[dict]
    superexponential: bool
    gaussian: bool
    alpha: float
    B0: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "window", "n_nodes", "gamma", "c", "c_log", "beta", "residual_exp", "residual_gauss",
            "residual_log", "windows", "superexponential", "gaussian", "alpha", "B0")} | {
            "alpha_B0_over_4": self.alpha * self.B0 / 4.0}


def _lstsq(cols: list[np.ndarray], y: np.ndarray) -> tuple[np.ndarray, float]:
    X = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    res = y - X @ coef
    return coef, float(np.sqrt(np.mean(res * res)))


def fit_decay_profile(r, rho, window: tuple[float, float] = (6.0, 10.0), B0: float = 1.0,
                      alpha: float = 0.9, floor: float = 1e-14, min_nodes: int = 20,
                      n_windows: int = 4, flat_ratio: float = 0.25, abs_tol: float = 1e-9) -> DecayFit:
    """Tail fits of an amplitude profile ``rho(r)``.

    Verdicts: ``superexponential`` when, over ``n_windows`` windows
    ``[r_a, r_b']`` growing to ``[r_a, r_b]``, the exponential-fit residual
    increases strictly while the Gaussian-fit residual stays below
    ``flat_ratio`` times it (or below ``abs_tol``); ``gaussian`` when
    ``c >= alpha * B0 / 4``.

    Raises
    ------
    TailUnderflowError
        Fewer than ``min_nodes`` nodes in the window above ``floor * max(rho)``.
    """
    r = np.asarray(r, dtype=float)
    rho = np.abs(np.asarray(rho, dtype=float))
    ra, rb = map(float, window)
    if not rb > ra:
        raise ParameterError("fit window must have r_b > r_a")
    peak = float(np.max(rho))
    sel = (r >= ra) & (r <= rb)
    ok = sel & (rho > floor * peak) & (rho > 0)
    # stop at the first underflow so the fit never straddles the floor
    idx = np.flatnonzero(sel)
    good = idx[np.cumprod(ok[idx]).astype(bool)] if idx.size else idx
    if good.size < min_nodes:
        raise TailUnderflowError(
            f"only {good.size} tail nodes above floor {floor:g} in [{ra}, {rb}]; need {min_nodes}")
    rt = r[good]
    y = -np.log(rho[good])
    one = np.ones_like(rt)

    def fits(mask):
        (g, _), re = _lstsq([rt[mask], one[mask]], y[mask])
        (c, _), rg = _lstsq([rt[mask] ** 2, one[mask]], y[mask])
        return g, c, re, rg

    gamma, c, res_e, res_g = fits(np.ones(rt.size, bool))
    (c_log, beta, _), res_l = _lstsq([rt**2, np.log(rt), one], y)
    wins = []
    for i in range(1, n_windows + 1):
        top = ra + (rt[-1] - ra) * i / n_windows
        mask = rt <= top + 1e-12
        if mask.sum() < max(3, min_nodes // n_windows):
            continue
        g_i, c_i, re_i, rg_i = fits(mask)
        wins.append({"r_b": float(top), "gamma": float(g_i), "c": float(c_i),
                     "residual_exp": re_i, "residual_gauss": rg_i})
    re_seq = [w["residual_exp"] for w in wins]
    growing = len(wins) >= 2 and all(b > a for a, b in zip(re_seq, re_seq[1:])) and re_seq[-1] > abs_tol
    flat = all(w["residual_gauss"] <= max(flat_ratio * w["residual_exp"], abs_tol) for w in wins)
    return DecayFit(
        window=(ra, rb), n_nodes=int(rt.size), gamma=float(gamma), c=float(c), c_log=float(c_log),
        beta=float(beta), residual_exp=res_e, residual_gauss=res_g, residual_log=res_l, windows=wins,
        superexponential=bool(growing and flat), gaussian=bool(c >= alpha * B0 / 4.0), alpha=alpha, B0=B0)


def fit_decay(res: SpectralResult, eig_index: int, grid=None, window: tuple[float, float] = (6.0, 10.0),
              B0: float | None = None, alpha: float = 0.9,
              classification: SpectrumClassification | None = None, **kw) -> DecayFit:
    """Tail fits of the spinor amplitude of eigenvector ``eig_index``.

    If ``classification`` is given, the eigenvalue must be one of its gap
    states (:class:`NotGapStateError` otherwise).
    """
    if not 0 <= eig_index < len(res):
        raise ParameterError(f"eigenvalue index {eig_index} out of range")
    E = float(res.eigenvalues[eig_index])
    if classification is not None and not classification.is_gap_state(E):
        raise NotGapStateError(f"eigenvalue {E:.12g} is not a gap state")
    if B0 is None:
        B0 = classification.B0 if classification is not None else 1.0
    r = (grid or res.grid).r
    return fit_decay_profile(r, res.amplitude(eig_index), window, B0=B0, alpha=alpha, **kw)


@dataclass
class ChannelDecayFit:
    """Fit of ``log(mass)`` against ``|m_j|``; ``gamma = -slope / 2``."""

    gamma: float
    slope: float
    r2: float
    abs_m: np.ndarray
    mass: np.ndarray
    populated: int
    degenerate: bool

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "slope": self.slope, "r2": self.r2,
                "abs_m": self.abs_m.tolist(), "mass": self.mass.tolist(),
                "populated": self.populated, "degenerate": self.degenerate}


def channel_decay_from_masses(js: Sequence[int], masses: Sequence[float], floor: float = 1e-15,
                              min_groups: int = 3, strict: bool = False) -> ChannelDecayFit:
    """Decay fit from per-channel masses.

    Channels ``j`` and ``-j-1`` share ``|m_j|`` and are summed.  Groups with
    mass below ``floor * max`` are dropped.  With fewer than ``min_groups``
    groups the fit is flagged degenerate, or :class:`TooFewChannelsError` is
    raised when ``strict``.
    """
    js = np.asarray(js, dtype=int)
    masses = np.asarray(masses, dtype=float)
    absm = np.abs(2 * js + 1) / 2.0
    keys = np.unique(absm)
    grouped = np.array([masses[absm == k].sum() for k in keys])
    keep = grouped > floor * grouped.max() if grouped.max() > 0 else np.zeros(keys.size, bool)
    x, y = keys[keep], grouped[keep]
    if x.size < min_groups:
        if strict:
            raise TooFewChannelsError(f"only {x.size} populated channel groups; need {min_groups}")
        return ChannelDecayFit(math.nan, math.nan, math.nan, x, y, int(x.size), True)
    ly = np.log(y)
    (slope, icpt), _ = _lstsq([x, np.ones_like(x)], ly)
    pred = slope * x + icpt
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ChannelDecayFit(float(-slope / 2.0), float(slope), float(r2), x, y, int(x.size), False)


def channel_decay_rate(res: SpectralResult, eig_index: int, floor: float = 1e-15, min_J: int = 4,
                       strict: bool = False) -> ChannelDecayFit:
    """Angular-channel decay rate of eigenvector ``eig_index`` of a coupled run."""
    if not 0 <= eig_index < len(res):
        raise ParameterError(f"eigenvalue index {eig_index} out of range")
    if len(res.channels) < 2 * min_J + 1:
        raise ParameterError(f"channel decay needs a window with J >= {min_J}")
    return channel_decay_from_masses(res.channels, res.channel_masses(eig_index), floor, strict=strict)


# Agmon weights

@dataclass(frozen=True)
class AgmonWeight:
    """Piecewise-quadratic weight ``rho(r, j)`` with parameters ``q1 > q2``."""

    q1: float
    q2: float
    B0: float
    Btilde: float

    def __post_init__(self) -> None:
        if not (0 < self.q2 < self.q1 < 1):
            raise ParameterError(f"need 0 < q2 < q1 < 1, got q1={self.q1}, q2={self.q2}")
        if not (self.B0 > 0 and self.Btilde > self.B0):
            raise ParameterError(f"need Btilde > B0 > 0, got B0={self.B0}, Btilde={self.Btilde}")

    @property
    def lipschitz(self) -> float:
        """Bound on ``|rho(r, j1) - rho(r, j2)| / |j1 - j2|``."""
        return self.q2 * self.Btilde / ((self.q1**2 - self.q2**2) * self.B0)

    def r_j(self, j: int) -> float:
        m = (2 * j + 1) / 2.0
        if m < 0:
            return 0.0
        return math.sqrt(4.0 * self.Btilde * m / ((self.q1**2 - self.q2**2) * self.B0**2))

    def rho(self, r, j: int) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        m = (2 * j + 1) / 2.0
        base = self.q2 * self.B0 / 4.0
        if m < 0:
            return base * r**2
        rj = self.r_j(j)
        return np.where(r >= rj, base * (r**2 - rj**2), 0.0)

    def table(self, r, js: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        """``(r(j) for js, rho[j_index, r_index])``."""
        rj = np.array([self.r_j(j) for j in js])
        return rj, np.stack([self.rho(r, j) for j in js])

    def weighted_norm(self, res: SpectralResult, eig_index: int) -> float:
        """``sum_j int exp(2 rho(r, j)) |psi(r, j)|**2 dr`` on the grid."""
        r = res.grid.r
        v = res.eigenvectors[eig_index]
        tot = 0.0
        for ci, j in enumerate(res.channels):
            dens = np.sum(np.abs(v[ci]) ** 2, axis=-1)
            tot += float(np.sum(np.exp(2.0 * self.rho(r, j)) * dens) * res.grid.dr)
        return tot


def agmon_weight(r, j: int, q1: float, q2: float, B0: float, Btilde: float):
    """``(r(j), rho(r, j))`` of the Agmon weight."""
    w = AgmonWeight(q1, q2, B0, Btilde)
    out = w.rho(r, j)
    return w.r_j(j), (float(out) if np.ndim(out) == 0 else out)


# supersymmetry

@dataclass
class SusyReport:
    """Worst deviations of the three supersymmetry checks.

    (i) ``symmetry``: ``max |E_k + E_{n-1-k}|``; (ii) ``intertwining``:
    positive ``E**2`` against the nonzero spectrum of ``a^T a``, plus the
    distance between the nonzero spectra of ``a^T a`` and ``a a^T``; (iii)
    ``union``: ``spec(a^T a) + spec(a a^T)`` against ``spec(K**2)``.
    """

    symmetry: float
    intertwining: float
    partner_distance: float
    union: float
    passed: bool
    tol_symmetry: float
    tol_spectra: float
    potential_stripped: bool = False
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "symmetry", "intertwining", "partner_distance", "union", "passed", "tol_symmetry",
            "tol_spectra", "potential_stripped")}


def _partner_tridiagonals(d: np.ndarray, e: np.ndarray, pinned: int = 0):
    """Tridiagonal forms of ``a^T a`` and ``a a^T`` for bidiagonal ``a``.

    ``d`` is the diagonal of ``a`` and ``e[k]`` the entry ``a[k+1, k]``;
    the first ``pinned`` rows of ``a`` are dropped.
    """
    d_ata = d.copy()
    d_ata[:pinned] = 0.0
    e_pad = np.concatenate([e, [0.0]])
    ata = (d_ata * d_ata + e_pad * e_pad, e * d[1:])
    aat = (d * d + np.concatenate([[0.0], e * e]), e * d[:-1])
    return ata, (aat[0][pinned:], aat[1][pinned:])


def _scaled(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Worst ``|x - y|`` absolute and scaled by ``max(1, |x|, |y|)``."""
    if x.size != y.size:
        return math.inf, math.inf
    if x.size == 0:
        return 0.0, 0.0
    d = np.abs(x - y)
    return float(d.max()), float(np.max(d / np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))))


def susy_check(channel: ChannelOperator | np.ndarray, tol_symmetry: float = 1e-12,
               tol_spectra: float = 1e-10, zero_tol: float = 1e-8,
               e_max: float | None = None, n_u: int | None = None) -> SusyReport:
    """Check the supersymmetric structure of one channel.

    ``channel`` is a :class:`ChannelOperator` (a radial potential, if any, is
    stripped) or an assembled matrix ``[[0, X], [a, 0]]`` whose upper block
    has ``n_u`` rows (default: half the size); in
    the latter case ``X`` need not equal ``a^T`` (partner spectra are always
    taken from the lower block), which makes the check usable as a negative
    control.  Spectra are computed by LAPACK routines
    independent of the bisection solver.  Partner eigenvalues below
    ``zero_tol`` count as zero.

    With ``e_max`` only ``|E| <= e_max`` (and partner eigenvalues up to
    ``e_max**2``) are compared.  Deviations are scaled by
    ``max(1, |value|)``: the top of a fine-grid spectrum sits near
    ``(2/dr)**2`` where one ulp already exceeds ``1e-10``.  Unscaled worst
    deviations are kept in ``details``.
    """
    if e_max is not None and not e_max > 0:
        raise ParameterError("e_max must be positive")
    stripped = False
    if isinstance(channel, ChannelOperator):
        stripped = channel.has_potential
        _, off = channel.tridiagonal()
        # bisection is sign-symmetric on a zero-diagonal tridiagonal
        z0 = np.zeros(off.size + 1)
        if e_max is None:
            ev = sla.eigvalsh_tridiagonal(z0, off, lapack_driver="stebz")
        else:
            ev = sla.eigvalsh_tridiagonal(z0, off, select="v", select_range=(-e_max, e_max),
                                          lapack_driver="stebz")
        pu, pw = channel.pin_u, channel.pin_w
        (ad, ao), (bd, bo) = _partner_tridiagonals(channel.a_diag[pu:], channel.a_sub[pu:], pw - pu)
        ata = sla.eigvalsh_tridiagonal(ad, ao)
        aat = sla.eigvalsh_tridiagonal(bd, bo)
    else:
        K = np.asarray(channel, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ParameterError("assembled channel must be a square matrix")
        if n_u is None:
            if K.shape[0] % 2:
                raise ParameterError("give n_u for an assembled channel of odd size")
            n_u = K.shape[0] // 2
        N, M = n_u, K.shape[0] - n_u
        a, X = K[N:, :N], K[:N, N:]
        K0 = np.block([[np.zeros((N, N)), X], [a, np.zeros((M, M))]])
        ev = sla.eigvalsh(K0) if np.array_equal(X, a.T) else np.linalg.eigvals(K0)
        ata = sla.eigvalsh(a.T @ a)
        aat = sla.eigvalsh(a @ a.T)
    imag = 0.0
    for arr in (ev, ata, aat):
        if np.iscomplexobj(arr):
            imag = max(imag, float(np.max(np.abs(np.imag(arr)))))
    ev = np.sort(np.real(ev))
    ata_r, aat_r = np.sort(np.real(ata)), np.sort(np.real(aat))
    if e_max is not None:
        ev = ev[np.abs(ev) <= e_max]
    n_ev = ev.size
    sym_abs, sym = _scaled(ev, -ev[::-1])
    nz = lambda x: x[np.abs(x) > zero_tol]
    pos = ev[ev > 0]
    p2 = nz(pos * pos)
    ata_nz, aat_nz = nz(ata_r), nz(aat_r)
    if e_max is not None:
        # compare as many partner eigenvalues as the window holds
        ata_nz, aat_nz = ata_nz[: p2.size], aat_nz[: p2.size]
    inter_abs, inter = _scaled(p2, ata_nz)
    part_abs, partner = _scaled(ata_nz, aat_nz)
    union_all = np.sort(np.concatenate([ata_r, aat_r]))
    k2 = np.sort(ev * ev)
    if e_max is not None:
        union_all = union_all[:n_ev]
    union_abs, union = _scaled(union_all, k2)
    inter, inter_abs = max(inter, imag), max(inter_abs, imag)
    passed = bool(sym <= tol_symmetry and inter <= tol_spectra and partner <= tol_spectra
                  and union <= tol_spectra)
    details = {"n": int(n_ev), "e_max": e_max, "imag": imag,
               "smallest_partner": float(ata_nz[0]) if ata_nz.size else math.nan,
               "symmetry_abs": sym_abs, "intertwining_abs": inter_abs,
               "partner_abs": part_abs, "union_abs": union_abs}
    return SusyReport(sym, inter, partner, union, passed, tol_symmetry, tol_spectra, stripped, details)

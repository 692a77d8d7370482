"""Constant-field model: Landau levels, Green kernel, decay certificates.

With ``theta = B0 |x - x'|**2 / 4``, ``eta = -(B0/2)(x1 x2' - x2 x1')`` and
``alpha_+ = -z**2/(2 B0)``, ``alpha_- = alpha_+ + 1`` the resolvent kernel of
the constant-field Dirac operator (vector potential ``(B0/2)(-x2, x1)``) is

    G0(x, x'; z) = exp(i eta - theta) [[W11, W12], [-conj(W12), W22]]

    W11 = z Gamma(alpha_+) U(alpha_+, 1, 2 theta) / (4 pi)
    W22 = z Gamma(alpha_-) U(alpha_-, 1, 2 theta) / (4 pi)
    W12 = B0 Gamma(alpha_-) U(alpha_-, 2, 2 theta) (i (x1 - x1') + (x2 - x2')) / (4 pi)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from ._backend import kernels
from .errors import CoincidentPointError, OnSpectrumError, ParameterError
from .specfun import gamma as _gamma
from .specfun import hyperu

__all__ = [
    "landau_level",
    "LandauSpectrum",
    "GreenKernelValue",
    "green_kernel",
    "kernel_norm",
    "DecayCertificate",
    "green_decay_certificate",
    "born_norm_estimate",
    "resolvent_residual",
    "ON_SPECTRUM_TOL",
]

ON_SPECTRUM_TOL = 1e-8


def landau_level(n: int, B0: float) -> float:
    """``sgn(n) sqrt(2 |n| B0)``."""
    if int(n) != n:
        raise ParameterError(f"Landau index must be an integer, got {n}")
    if not B0 > 0:
        raise ParameterError(f"B0 must be positive, got {B0}")
    n = int(n)
    if n == 0:
        return 0.0
    return math.copysign(math.sqrt(2.0 * abs(n) * B0), n)


@dataclass(frozen=True)
class LandauSpectrum:
    """Levels ``l_n`` for ``|n| <= n_max``."""

    B0: float
    n_max: int
    levels: dict[int, float] = field(init=False)

    def __post_init__(self) -> None:
        if self.n_max < 0:
            raise ParameterError("n_max must be nonnegative")
        lv = {n: landau_level(n, self.B0) for n in range(-self.n_max, self.n_max + 1)}
        object.__setattr__(self, "levels", lv)

    def nearest(self, E: float) -> tuple[int, float]:
        """Index and distance of the level nearest to ``E``."""
        n = int(round(math.copysign(E * E / (2.0 * self.B0), E)))
        best = min((k for k in (n - 1, n, n + 1)), key=lambda k: abs(landau_level(k, self.B0) - E))
        return best, abs(landau_level(best, self.B0) - E)


def _check_off_spectrum(z: float, B0: float) -> None:
    n = int(round(math.copysign(z * z / (2.0 * B0), z)))
    dist = min(abs(z - landau_level(k, B0)) for k in (n - 1, n, n + 1))
    if dist <= ON_SPECTRUM_TOL:
        raise OnSpectrumError(f"z = {z!r} lies within {ON_SPECTRUM_TOL:g} of a Landau level")


def _gamma_u(a: float, b: int, x: float) -> float:
    """``Gamma(a) U(a, b, x)``; for ``a > 0`` this is the bare integral."""
    if a > 0:
        return kernels.hyperu_integral(a, float(b), x)[0]
    return _gamma(a) * hyperu(a, b, x).value


@lru_cache(maxsize=65536)
def _omega_scalars(theta: float, z: float, B0: float) -> tuple[float, float, float]:
    """``(W11, W22, W12 / direction factor)`` as functions of ``theta``."""
    ap = -z * z / (2.0 * B0)
    am = ap + 1.0
    x = 2.0 * theta
    c = 1.0 / (4.0 * math.pi)
    w11 = c * z * _gamma_u(ap, 1, x)
    w22 = c * z * _gamma_u(am, 1, x)
    w12 = c * B0 * _gamma_u(am, 2, x)
    return w11, w22, w12


@dataclass(frozen=True)
class GreenKernelValue:
    """``G0(x, x'; z)`` with its ``theta`` and ``eta``."""

    x: tuple[float, float]
    xp: tuple[float, float]
    z: float
    B0: float
    matrix: np.ndarray
    theta: float
    eta: float

    @property
    def norm(self) -> float:
        """Largest singular value."""
        return float(np.linalg.norm(self.matrix, 2))


def green_kernel(x, xp, z: float, B0: float) -> GreenKernelValue:
    """Green kernel of the constant-field Dirac operator at real ``z``.

    Raises
    ------
    OnSpectrumError
        If ``z`` is within ``1e-8`` of a Landau level.
    CoincidentPointError
        If ``x == x'``.
    """
    if not B0 > 0:
        raise ParameterError(f"B0 must be positive, got {B0}")
    z = float(z)
    _check_off_spectrum(z, B0)
    x1, x2 = map(float, x)
    y1, y2 = map(float, xp)
    d1, d2 = x1 - y1, x2 - y2
    dist2 = d1 * d1 + d2 * d2
    if dist2 == 0.0:
        raise CoincidentPointError("green_kernel is singular at x == x'")
    theta = B0 * dist2 / 4.0
    eta = -(B0 / 2.0) * (x1 * y2 - x2 * y1)
    w11, w22, w12 = _omega_scalars(theta, z, B0)
    o12 = w12 * complex(d2, d1)
    phase = complex(math.cos(eta), math.sin(eta)) * math.exp(-theta)
    mat = phase * np.array([[w11, o12], [-o12.conjugate(), w22]], dtype=complex)
    return GreenKernelValue((x1, x2), (y1, y2), z, float(B0), mat, theta, eta)


def kernel_norm(d: float, z: float, B0: float) -> float:
    """``||G0||`` at separation ``d`` (independent of direction and base point)."""
    return green_kernel((d, 0.0), (0.0, 0.0), z, B0).norm


@dataclass
class DecayCertificate:
    """Empirical majorant ``omega`` and the bound on ``d exp(-eps d) omega(d)``.

    ``fit_C``/``fit_p`` model the tail ``omega ~ C d**p``; ``bound`` is the
    larger of the sampled maximum and the analytic supremum of the model.
    """

    z: float
    B0: float
    eps: float
    radii: list[float]
    norms: list[float]
    omega: list[float]
    q: list[float]
    excluded: list[float]
    fit_C: float
    fit_p: float
    bound: float
    passed: bool
    safety: float = 1.1
    n_directions: int = 16

    def covers(self, d: float) -> bool:
        return self.radii[0] <= d <= self.radii[-1]

    def omega_at(self, d: float) -> float:
        """Majorant at ``d``, interpolated in log between sampled radii (NaN outside)."""
        if not self.covers(d):
            return math.nan
        return float(np.exp(np.interp(d, self.radii, np.log(self.omega))))

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "z", "B0", "eps", "radii", "norms", "omega", "q", "excluded", "fit_C", "fit_p", "bound",
            "passed", "safety", "n_directions")}


def green_decay_certificate(z: float, B0: float, radii: Sequence[float], eps: float = 0.1,
                            n_directions: int = 16, safety: float = 1.1,
                            min_separation: float = 1e-3) -> DecayCertificate:
    """Certify ``||G0(d)|| <= exp(-theta(d)) omega(d)`` with ``d exp(-eps d) omega`` bounded.

    For each separation the operator norm is maximized over ``n_directions``
    directions (and base points on a circle of radius ``d``, which only move
    the phase).  ``omega = safety * max ||G0|| exp(theta)``.  Separations
    below ``min_separation`` are excluded and listed.
    """
    _check_off_spectrum(float(z), B0)
    radii = sorted(float(d) for d in radii)
    used = [d for d in radii if d >= min_separation]
    excluded = [d for d in radii if d < min_separation]
    if len(used) < 2:
        raise ParameterError("certificate needs at least two separations >= min_separation")
    norms, omega, q = [], [], []
    for d in used:
        best = 0.0
        for k in range(n_directions):
            t = 2.0 * math.pi * k / n_directions
            e = (math.cos(t), math.sin(t))
            base = (0.5 * d * e[1], -0.5 * d * e[0])
            g = green_kernel((base[0] + d * e[0], base[1] + d * e[1]), base, z, B0)
            best = max(best, g.norm)
        th = B0 * d * d / 4.0
        om = safety * best * math.exp(th)
        norms.append(best)
        omega.append(om)
        q.append(d * math.exp(-eps * d) * om)
    dd, oo = np.array(used), np.array(omega)
    tail = dd >= max(1.0, float(np.median(dd)))
    if tail.sum() < 2:
        tail = dd >= dd[len(dd) // 2]
    p, logC = np.polyfit(np.log(dd[tail]), np.log(oo[tail] / safety), 1)
    C = float(math.exp(logC))
    # the model must majorize the tail samples
    C *= float(np.max(oo[tail] / (safety * C * dd[tail] ** p)))
    if p + 1 > 0:
        dstar = (p + 1) / eps
        sup_model = safety * C * dstar ** (p + 1) * math.exp(-(p + 1))
    else:
        sup_model = safety * C * float(dd[tail][0]) ** (p + 1) * math.exp(-eps * float(dd[tail][0]))
    bound = max(float(np.max(q)), sup_model)
    passed = bool(np.all(np.isfinite(q)) and math.isfinite(bound) and math.isfinite(p))
    return DecayCertificate(float(z), float(B0), eps, used, norms, omega, q, excluded, C, float(p),
                            bound, passed, safety, n_directions)


@lru_cache(maxsize=256)
def _born_integral(gamma: float, z: float, B0: float, safety: float) -> float:
    from scipy import integrate

    f = lambda rho: rho * rho * math.exp(gamma * rho) * safety * kernel_norm(rho, z, B0)
    # truncate where the integrand falls below 1e-16 of its peak
    grid = np.linspace(1e-3, 12.0 / math.sqrt(B0) + 4.0 * gamma / B0 + 8.0, 400)
    vals = np.array([f(r) for r in grid])
    peak = float(vals.max())
    above = np.flatnonzero(vals >= 1e-16 * peak)
    rmax = float(grid[min(above[-1] + 1, grid.size - 1)])
    val, _ = integrate.quad(f, 0.0, rmax, epsabs=0.0, epsrel=1e-10, limit=400)
    return 2.0 * math.pi * val


def born_norm_estimate(bn_sup: float, gamma: float, z: float, B0: float, safety: float = 1.1) -> float:
    """Young-inequality bound ``bn_sup * int |y| exp(gamma |y| - theta(y)) omega(y) dy``.

    ``omega`` is the empirical majorant ``safety * ||G0|| exp(theta)``, so the
    integrand reduces to ``safety * |y| exp(gamma |y|) ||G0(y)||``.  Linear in
    ``bn_sup`` by construction.
    """
    if bn_sup < 0 or gamma < 0:
        raise ParameterError("bn_sup and gamma must be nonnegative")
    _check_off_spectrum(float(z), B0)
    if bn_sup == 0:
        return 0.0
    return float(bn_sup) * _born_integral(float(gamma), float(z), float(B0), float(safety))


def _test_spinor(x1, x2, centre, width, coef):
    """Gaussian spinor ``coef * phi`` and ``(D - z) f`` pieces (before ``-z f``)."""
    c1, c2 = centre
    s2 = width * width
    phi = np.exp(-((x1 - c1) ** 2 + (x2 - c2) ** 2) / (2.0 * s2))
    dphi1 = -(x1 - c1) / s2 * phi
    dphi2 = -(x2 - c2) / s2 * phi
    return phi, dphi1, dphi2


def apply_dirac(x1, x2, B0: float, z: float, centre=(0.3, -0.2), width: float = 0.8,
                coef=(1.0, 0.5 - 0.25j)) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Gaussian test spinor ``f`` and ``(D - z) f`` in closed form.

    ``D = sigma . (-i grad - A)`` with ``A = (B0/2)(-x2, x1)``.
    Returns ``(f1, f2, g1, g2)`` with ``g = (D - z) f``.
    """
    phi, p1, p2 = _test_spinor(x1, x2, centre, width, coef)
    A1, A2 = -0.5 * B0 * x2, 0.5 * B0 * x1
    f1, f2 = coef[0] * phi, coef[1] * phi
    # pi_k = -i d_k - A_k applied to phi
    pi1 = -1j * p1 - A1 * phi
    pi2 = -1j * p2 - A2 * phi
    g1 = coef[1] * (pi1 - 1j * pi2) - z * f1
    g2 = coef[0] * (pi1 + 1j * pi2) - z * f2
    return f1, f2, g1, g2


def resolvent_residual(xp, z: float, B0: float, n: int = 30, R: float = 7.0,
                       centre=(0.3, -0.2), width: float = 0.8, coef=(1.0, 0.5 - 0.25j)) -> float:
    """``max |int G0(x', x; z) [(D - z) f](x) dx - f(x')|`` for a Gaussian spinor.

    Polar product rule around ``x'``: Gauss-Legendre in ``s`` with
    ``rho = R s**2`` (absorbs the kernel singularity) and the trapezoid rule in
    angle; ``n`` nodes each.
    """
    s, ws = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (s + 1.0)
    ws = 0.5 * ws
    rho = R * s * s
    drho = 2.0 * R * s * ws
    phis = 2.0 * np.pi * np.arange(n) / n
    wphi = 2.0 * np.pi / n
    xp = (float(xp[0]), float(xp[1]))
    acc = np.zeros(2, dtype=complex)
    for rk, wk in zip(rho, drho):
        for ph in phis:
            x = (xp[0] + rk * math.cos(ph), xp[1] + rk * math.sin(ph))
            G = green_kernel(xp, x, z, B0).matrix
            _, _, g1, g2 = apply_dirac(np.array(x[0]), np.array(x[1]), B0, z, centre, width, coef)
            acc += G @ np.array([complex(g1), complex(g2)]) * (wk * rk * wphi)
    f1, f2, _, _ = apply_dirac(np.array(xp[0]), np.array(xp[1]), B0, z, centre, width, coef)
    return float(np.max(np.abs(acc - np.array([complex(f1), complex(f2)]))))

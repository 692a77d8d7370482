"""Magnetic fields, gauges, zero modes and angular potentials.

Radial profiles are described by :class:`RadialProfile` (closed-form presets
or a linearly interpolated table).  A :class:`FieldProfile` is a constant
field ``B0`` plus such a perturbation ``b``.  The radial gauge uses
``A(r) = r^-1 int_0^r B(s) s ds`` and ``h' = A`` with ``h(0) = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import integrate, special

from .errors import GridError, ParameterError

__all__ = [
    "RadialProfile",
    "FieldProfile",
    "RadialGauge",
    "ZeroMode",
    "PotentialSpec",
    "radial_gauge",
    "transversal_gauge",
    "zero_mode",
    "fourier_coeffs",
    "cell_weights",
    "ein",
]

_PROFILE_KINDS = ("zero", "step", "gaussian", "table")


def ein(x: np.ndarray | float) -> np.ndarray:
    """Entire exponential integral ``int_0^x (1 - e^-t)/t dt`` for ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 1.0
    xs = x[small]
    # alternating series, 25 terms reach machine precision on [0, 1)
    term = xs.copy()
    acc = xs.copy()
    for k in range(2, 26):
        term = -term * xs / k
        acc = acc + term / k
    out[small] = acc
    xl = x[~small]
    out[~small] = np.euler_gamma + np.log(xl) + special.exp1(xl)
    return out


def cell_weights(r: np.ndarray) -> np.ndarray:
    """Midpoint-cell quadrature weights for nodes ``r``.

    On the half-offset grid ``r_k = (k - 1/2) dr`` every weight equals ``dr``.
    """
    r = np.asarray(r, dtype=float)
    if r.size == 1:
        return np.array([2.0 * r[0]])
    mids = 0.5 * (r[1:] + r[:-1])
    first = max(0.0, r[0] - (r[1] - r[0]) / 2.0)
    last = r[-1] + (r[-1] - r[-2]) / 2.0
    edges = np.concatenate([[first], mids, [last]])
    return np.diff(edges)


@dataclass(frozen=True)
class RadialProfile:
    """Radial function ``r -> f(r)``.

    Kinds: ``zero``; ``step`` (``amplitude`` on ``r <= width``);
    ``gaussian`` (``amplitude * exp(-(r/width)**2)``); ``table`` (linear
    interpolation of ``table_r``/``table_v``, zero beyond the last node).
    """

    kind: str = "zero"
    amplitude: float = 0.0
    width: float = 1.0
    table_r: tuple[float, ...] = ()
    table_v: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _PROFILE_KINDS:
            raise ParameterError(f"unknown profile kind {self.kind!r}")
        if self.kind in ("step", "gaussian") and not self.width > 0:
            raise ParameterError("profile width must be positive")
        if self.kind == "table":
            tr = np.asarray(self.table_r, dtype=float)
            if tr.size < 2 or len(self.table_v) != tr.size:
                raise ParameterError("table profile needs matching r and v arrays of length >= 2")
            if np.any(np.diff(tr) <= 0) or tr[0] < 0:
                raise GridError("table radii must be nonnegative and strictly increasing")

    @classmethod
    def from_table(cls, r, v) -> "RadialProfile":
        return cls("table", table_r=tuple(float(x) for x in r), table_v=tuple(float(x) for x in v))

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(r)
        if self.kind == "step":
            return np.where(r <= self.width, self.amplitude, 0.0)
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-((r / self.width) ** 2))
        return np.interp(r, self.table_r, self.table_v, right=0.0)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Radii where the profile is not smooth."""
        if self.kind == "step":
            return (self.width,)
        if self.kind == "table":
            return tuple(self.table_r)
        return ()

    def sup(self) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind in ("step", "gaussian"):
            return abs(self.amplitude)
        return float(np.max(np.abs(self.table_v)))

    def support_radius(self, tail: float) -> float:
        """Radius beyond which ``|f| <= tail``."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "step":
            return self.width if abs(self.amplitude) > tail else 0.0
        if self.kind == "gaussian":
            if abs(self.amplitude) <= tail:
                return 0.0
            if tail <= 0:
                return math.inf
            return self.width * math.sqrt(math.log(abs(self.amplitude) / tail))
        v = np.abs(np.asarray(self.table_v))
        big = np.flatnonzero(v > tail)
        if big.size == 0:
            return 0.0
        k = big[-1]
        return float(self.table_r[min(k + 1, len(self.table_r) - 1)])

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind in ("step", "gaussian"):
            d.update(amplitude=self.amplitude, width=self.width)
        elif self.kind == "table":
            d.update(r=list(self.table_r), v=list(self.table_v))
        return d


@dataclass(frozen=True)
class FieldProfile:
    """Magnetic field ``B(r) = B0 + b(r)``.

    ``sign`` may be ``"nonpositive"`` or ``"nonnegative"``; it is checked by
    sampling, as is ``|b| <= decay_tail`` beyond ``support_radius``.
    """

    B0: float
    b: RadialProfile = field(default_factory=RadialProfile)
    decay_tail: float = 1e-12
    support_radius: float | None = None
    sign: str | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.B0) and self.B0 > 0):
            raise ParameterError(f"B0 must be positive, got {self.B0}")
        if self.decay_tail < 0:
            raise ParameterError("decay_tail must be nonnegative")
        if self.support_radius is None:
            object.__setattr__(self, "support_radius", self.b.support_radius(self.decay_tail))
        if self.support_radius < 0:
            raise ParameterError("support_radius must be nonnegative")
        if self.sign not in (None, "nonpositive", "nonnegative"):
            raise ParameterError(f"unknown sign constraint {self.sign!r}")
        self.validate()

    # presets
    @classmethod
    def zero(cls, B0: float = 1.0) -> "FieldProfile":
        return cls(B0)

    @classmethod
    def step_well(cls, B0: float, depth: float, radius: float, **kw) -> "FieldProfile":
        return cls(B0, RadialProfile("step", depth, radius), **kw)

    @classmethod
    def gaussian_well(cls, B0: float, depth: float, width: float, **kw) -> "FieldProfile":
        return cls(B0, RadialProfile("gaussian", depth, width), **kw)

    @classmethod
    def table(cls, B0: float, r, b, **kw) -> "FieldProfile":
        return cls(B0, RadialProfile.from_table(r, b), **kw)

    def validate(self, n_samples: int = 4001) -> None:
        """Sampling checks of the tail bound and the sign flag."""
        R = float(self.support_radius)
        if math.isfinite(R):
            rs = np.linspace(R, R + 10.0 + 2.0 * R, n_samples)[1:]
            if np.any(np.abs(self.b(rs)) > self.decay_tail * (1 + 1e-12)):
                raise ParameterError("b exceeds decay_tail beyond support_radius")
        if self.sign is not None:
            top = R if math.isfinite(R) and R > 0 else 10.0
            rs = np.concatenate([np.linspace(0.0, 1.5 * top, n_samples), list(self.b.breakpoints)])
            bv = self.b(rs)
            if self.sign == "nonpositive" and np.any(bv > 0):
                raise ParameterError("b is not nonpositive")
            if self.sign == "nonnegative" and np.any(bv < 0):
                raise ParameterError("b is not nonnegative")

    def B(self, r) -> np.ndarray:
        return self.B0 + self.b(r)

    def b2d(self, p) -> float:
        """Perturbation as a function on the plane."""
        p = np.asarray(p, dtype=float)
        return float(self.b(np.hypot(p[0], p[1])))

    def to_dict(self) -> dict:
        return {"B0": self.B0, "b": self.b.to_dict(), "decay_tail": self.decay_tail,
                "support_radius": self.support_radius, "sign": self.sign}


@dataclass(frozen=True)
class RadialGauge:
    """Radial gauge sampled on ``r``: vector potential ``A`` and ``h`` with ``h' = A``."""

    r: np.ndarray
    A: np.ndarray
    h: np.ndarray
    field: FieldProfile
    method: str

    def simpson_residual(self) -> float:
        """Max over node pairs of ``|h[k+2] - h[k] - Simpson(A)|``, uniform grids only."""
        d = np.diff(self.r)
        if not np.allclose(d, d[0], rtol=1e-12, atol=0):
            raise GridError("simpson_residual needs a uniform grid")
        dr = d[0]
        simp = dr / 3.0 * (self.A[:-2] + 4.0 * self.A[1:-1] + self.A[2:])
        return float(np.max(np.abs(self.h[2:] - self.h[:-2] - simp)))

    def derivative_residual(self) -> float:
        """Max ``|central difference of h - A|``; ``O(spacing**2)`` for smooth fields."""
        dh = (self.h[2:] - self.h[:-2]) / (self.r[2:] - self.r[:-2])
        return float(np.max(np.abs(dh - self.A[1:-1])))


def _check_grid(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or r.size < 2:
        raise GridError("grid must be a 1-D array with at least two nodes")
    if not np.all(np.isfinite(r)) or r[0] <= 0:
        raise GridError("grid nodes must be finite and positive")
    if np.any(np.diff(r) <= 0):
        raise GridError("grid must be strictly increasing")
    return r


def _closed_form(b: RadialProfile, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if b.kind == "zero":
        return np.zeros_like(r), np.zeros_like(r)
    d = b.amplitude
    if b.kind == "step":
        R = b.width
        rm = np.minimum(r, R)
        A = d * rm**2 / (2.0 * r)
        h = np.where(r <= R, d * r**2 / 4.0, d * R**2 / 4.0 + d * R**2 / 2.0 * np.log(np.maximum(r, R) / R))
        return A, h
    w = b.width
    X = (r / w) ** 2
    A = d * w**2 * (-np.expm1(-X)) / (2.0 * r)
    h = d * w**2 / 4.0 * ein(X)
    return A, h


def _quadrature(b: RadialProfile, r: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    # F(r) = int_0^r b s ds, G(r) = int_0^r b s ln s ds, h_b = F ln r - G
    knots = np.unique(np.concatenate([[0.0], r, [p for p in b.breakpoints if 0 < p < r[-1]]]))
    F_k = np.zeros(knots.size)
    G_k = np.zeros(knots.size)
    fF = lambda s: float(b(s)) * s
    fG = lambda s: float(b(s)) * s * math.log(s) if s > 0 else 0.0
    for i in range(1, knots.size):
        lo, hi = knots[i - 1], knots[i]
        F_k[i] = F_k[i - 1] + integrate.quad(fF, lo, hi, epsabs=tol * 1e-3, epsrel=tol, limit=200)[0]
        G_k[i] = G_k[i - 1] + integrate.quad(fG, lo, hi, epsabs=tol * 1e-3, epsrel=tol, limit=200)[0]
    idx = np.searchsorted(knots, r)
    F = F_k[idx]
    G = G_k[idx]
    return F / r, F * np.log(r) - G


def radial_gauge(field: FieldProfile, r_grid, method: str = "auto", tol: float = 1e-11) -> RadialGauge:
    """Sample the radial gauge on ``r_grid``.

    Parameters
    ----------
    method : {"auto", "closed", "quadrature"}
        ``closed`` uses analytic integrals of the presets, ``quadrature``
        integrates ``b`` adaptively between grid nodes.  ``auto`` picks
        ``closed`` whenever available.
    """
    r = _check_grid(r_grid)
    if method == "auto":
        method = "quadrature" if field.b.kind == "table" else "closed"
    if method == "closed":
        if field.b.kind == "table":
            raise ParameterError("table profiles have no closed-form gauge")
        Ab, hb = _closed_form(field.b, r)
    elif method == "quadrature":
        Ab, hb = _quadrature(field.b, r, tol)
    else:
        raise ParameterError(f"unknown gauge method {method!r}")
    A = field.B0 * r / 2.0 + Ab
    h = field.B0 * r**2 / 4.0 + hb
    return RadialGauge(r=r, A=A, h=h, field=field, method=method)


def transversal_gauge(b: Callable | FieldProfile, x) -> np.ndarray:
    """Transversal-gauge potential ``a(x) = int_0^1 b(s x) s ds * (-x2, x1)``.

    ``b`` is a callable on points of the plane or a :class:`FieldProfile`
    (whose radial perturbation is used).
    """
    x = np.asarray(x, dtype=float)
    if isinstance(b, FieldProfile):
        prof = b.b
        rx = float(np.hypot(*x))
        if rx == 0.0:
            return np.zeros(2)
        pts = sorted({p / rx for p in prof.breakpoints if 0 < p < rx})
        f = lambda s: float(prof(s * rx)) * s
    else:
        pts = []
        f = lambda s: float(b(s * x)) * s
    val = integrate.quad(f, 0.0, 1.0, points=pts or None, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    return val * np.array([-x[1], x[0]])


@dataclass(frozen=True)
class ZeroMode:
    """Channel zero mode ``u_j(r) = r**m_j * exp(-h(r))`` (unnormalized)."""

    j: int
    m: float
    r: np.ndarray
    u: np.ndarray
    norm: float

    @property
    def normalized(self) -> np.ndarray:
        return self.u / self.norm


def zero_mode(j: int, gauge: RadialGauge) -> ZeroMode:
    """Zero mode of the channel-``j`` lowering factor on the gauge grid."""
    if int(j) != j or j < 0:
        raise ParameterError(f"zero modes exist only for integer j >= 0, got {j}")
    j = int(j)
    m = (2 * j + 1) / 2.0
    r = gauge.r
    logu = m * np.log(r) - gauge.h
    u = np.exp(logu)
    norm = math.sqrt(float(np.sum(cell_weights(r) * u * u)))
    return ZeroMode(j=j, m=m, r=r, u=u, norm=norm)


@dataclass(frozen=True)
class PotentialSpec:
    """Scalar potential ``V(r, theta) = sum_n vhat(r, n) exp(i n theta)``.

    ``radial`` holds ``vhat(., 0)``; ``harmonics`` maps ``n > 0`` to a pair
    of radial profiles (real part, imaginary part) of ``vhat(., n)``; the
    negative modes follow from ``vhat(r, -n) = conj(vhat(r, n))``.
    """

    kind: str = "none"
    radial: RadialProfile = field(default_factory=RadialProfile)
    harmonics: Mapping[int, tuple[RadialProfile, RadialProfile]] = field(default_factory=dict)
    analytic: bool = True
    tail: float = 1e-12

    def __post_init__(self) -> None:
        if self.kind not in ("none", "radial", "cos-theta", "fourier-table"):
            raise ParameterError(f"unknown potential kind {self.kind!r}")
        for n in self.harmonics:
            if int(n) != n or n <= 0:
                raise ParameterError("harmonic keys must be positive integers")

    @classmethod
    def none(cls) -> "PotentialSpec":
        return cls()

    @classmethod
    def radial_only(cls, w: RadialProfile) -> "PotentialSpec":
        return cls("radial", radial=w)

    @classmethod
    def cos_theta(cls, w: RadialProfile) -> "PotentialSpec":
        """``V = w(r) cos(theta)``, so ``vhat(., +-1) = w / 2``."""
        half = RadialProfile(w.kind, w.amplitude / 2.0, w.width,
                             w.table_r, tuple(v / 2.0 for v in w.table_v))
        return cls("cos-theta", harmonics={1: (half, RadialProfile())})

    @property
    def n_max(self) -> int:
        return max(self.harmonics, default=0)

    def vhat(self, r, n: int) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if n == 0:
            return self.radial(r).astype(complex)
        pair = self.harmonics.get(abs(n))
        if pair is None:
            return np.zeros(r.shape, dtype=complex)
        re, im = pair[0](r), pair[1](r)
        return re + 1j * im if n > 0 else re - 1j * im

    def synthesize(self, r, theta) -> np.ndarray:
        """Resum the Fourier series at points ``(r, theta)`` (broadcast)."""
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        out = self.vhat(r, 0).real.copy()
        for n in self.harmonics:
            out += 2.0 * np.real(self.vhat(r, n) * np.exp(1j * n * theta))
        return out

    def sup_norm(self, r) -> float:
        """Bound on ``||V||_inf`` sampled on ``r`` (sum of harmonic moduli)."""
        tot = np.abs(self.vhat(r, 0))
        for n in self.harmonics:
            tot = tot + 2.0 * np.abs(self.vhat(r, n))
        return float(np.max(tot))

    def radial_derivative_sup(self, r) -> float:
        """Sampled ``max |d/dr vhat(r, n)|`` over all stored modes (tail check)."""
        r = np.asarray(r, dtype=float)
        worst = 0.0
        for n in [0, *self.harmonics]:
            v = self.vhat(r, n)
            worst = max(worst, float(np.max(np.abs(np.gradient(v, r)))))
        return worst

    def to_dict(self) -> dict:
        return {"kind": self.kind, "radial": self.radial.to_dict(),
                "harmonics": {int(n): [p[0].to_dict(), p[1].to_dict()] for n, p in self.harmonics.items()},
                "analytic": self.analytic}


def fourier_coeffs(v, n_max: int, r=None, n_theta: int | None = None, analytic: bool = True) -> PotentialSpec:
    """Angular Fourier coefficients of a real potential.

    Parameters
    ----------
    v : callable or ndarray
        ``v(r, theta)`` evaluable on broadcast arrays, or samples of shape
        ``(len(r), n_theta)`` on the uniform grid ``theta_k = 2 pi k / n_theta``.
    n_max : int
        Highest harmonic kept.
    r : array_like
        Radial nodes; coefficients are tabulated there and linearly
        interpolated in between.
    """
    if int(n_max) != n_max or n_max < 0:
        raise ParameterError(f"n_max must be a nonnegative integer, got {n_max}")
    n_max = int(n_max)
    if r is None:
        raise ParameterError("fourier_coeffs needs radial nodes r")
    r = _check_grid(r)
    if callable(v):
        nt = n_theta or max(64, 4 * n_max + 8)
        theta = 2.0 * np.pi * np.arange(nt) / nt
        samples = np.asarray(v(r[:, None], theta[None, :]), dtype=float)
    else:
        samples = np.asarray(v, dtype=float)
        if samples.ndim != 2 or samples.shape[0] != r.size:
            raise ParameterError("sampled potential must have shape (len(r), n_theta)")
        nt = samples.shape[1]
    if 2 * n_max >= nt:
        raise ParameterError("n_theta too small for the requested n_max")
    c = np.fft.fft(samples, axis=1) / nt  # c[:, n] = vhat(r, n), c[:, -n] = vhat(r, -n)
    rt = tuple(float(x) for x in r)
    radial = RadialProfile.from_table(rt, c[:, 0].real)
    harmonics = {}
    for n in range(1, n_max + 1):
        sym = 0.5 * (c[:, n] + np.conj(c[:, -n]))
        harmonics[n] = (RadialProfile.from_table(rt, sym.real), RadialProfile.from_table(rt, sym.imag))
    return PotentialSpec("fourier-table", radial=radial, harmonics=harmonics, analytic=analytic)

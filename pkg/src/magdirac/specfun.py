"""Real-parameter special functions for the constant-field Green kernel.

Kummer's U is evaluated from its Laplace-type integral for ``a > 0`` and by
the three-term contiguous relation in ``a`` below that.  The exponential
integral is provided as an independent oracle (``U(1, 1, x) = e^x E1(x)``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._backend import kernels
from .errors import DomainError, ParameterError, PoleError

__all__ = [
    "SpecFunResult",
    "gamma",
    "hyperu",
    "exp_integral_e1",
    "contiguous_down",
    "contiguous_up",
]

_EPS = float(np.finfo(float).eps)
_TINY_A = 1e-8


@dataclass(frozen=True)
class SpecFunResult:
    """A function value with an estimated absolute error."""

    value: float
    est_abs_error: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.est_abs_error) and self.est_abs_error >= 0.0):
            raise ValueError("est_abs_error must be finite and nonnegative")

    def __float__(self) -> float:
        return float(self.value)


def gamma(x: float) -> float:
    """Gamma function for real ``x``.

    Raises
    ------
    PoleError
        If ``x`` is zero or a negative integer.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gamma needs a finite argument, got {x}")
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"gamma has a pole at {x:g}")
    try:
        return math.gamma(x)
    except OverflowError as exc:
        raise DomainError(f"gamma({x:g}) overflows") from exc


def contiguous_down(a: float, b: float, x: float, u1: float, u2: float) -> float:
    """``U(a)`` from ``U(a+1)`` and ``U(a+2)`` (same ``b``, ``x``).

    Uses ``U(a-1) + (b - 2a - x) U(a) + a (a - b + 1) U(a+1) = 0`` shifted by one.
    """
    ap = a + 1.0
    return -(b - 2.0 * ap - x) * u1 - ap * (ap - b + 1.0) * u2


def contiguous_up(a: float, b: float, x: float, u0: float, u1: float) -> float:
    """``U(a+2)`` from ``U(a)`` and ``U(a+1)``; inverse of :func:`contiguous_down`."""
    ap = a + 1.0
    c = ap * (ap - b + 1.0)
    if c == 0.0:
        raise ParameterError("contiguous relation is degenerate for these parameters")
    return -(u0 + (b - 2.0 * ap - x) * u1) / c


def _hyperu_positive(a: float, b: int, x: float) -> tuple[float, float]:
    integral, err = kernels.hyperu_integral(a, float(b), x)
    g = gamma(a)
    val = integral / g
    return val, err / g + 4.0 * _EPS * abs(val)


def hyperu(a: float, b: int, x: float) -> SpecFunResult:
    """Kummer's confluent hypergeometric function U(a, b, x).

    Parameters
    ----------
    a : float
        First parameter, any finite real.
    b : int
        Second parameter, 1 or 2.
    x : float
        Positive argument.

    Returns
    -------
    SpecFunResult
        Value and a propagated error estimate.
    """
    a = float(a)
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"hyperu needs x > 0, got {x}")
    if b not in (1, 2) or isinstance(b, bool):
        raise ParameterError(f"hyperu supports b in {{1, 2}}, got {b!r}")
    if not math.isfinite(a):
        raise DomainError(f"hyperu needs finite a, got {a}")
    if a == 0.0:
        return SpecFunResult(1.0, 0.0)
    if a >= _TINY_A:
        return SpecFunResult(*_hyperu_positive(a, b, x))
    if a > 0.0:
        # Gamma(a) ~ 1/a overflows near 0; one downward step from a+1, a+2
        (u1, e1), (u2, e2) = _hyperu_positive(a + 1.0, b, x), _hyperu_positive(a + 2.0, b, x)
        ap = a + 1.0
        c1, c2 = -(b - 2.0 * ap - x), -ap * (ap - b + 1.0)
        val = c1 * u1 + c2 * u2
        err = abs(c1) * e1 + abs(c2) * e2 + 2.0 * _EPS * (abs(c1 * u1) + abs(c2 * u2))
        return SpecFunResult(val, err)

    # recur downward from a0 = a + n in [0, 1) and a0 + 1
    n = math.ceil(-a)
    a0 = a + n
    if a0 >= 1.0:  # rounding in a + n
        a0 -= 1.0
        n -= 1
    if a0 == 0.0:
        u_lo, e_lo = 1.0, 0.0
    else:
        u_lo, e_lo = _hyperu_positive(a0, b, x)
    u_hi, e_hi = _hyperu_positive(a0 + 1.0, b, x)
    ak = a0
    for _ in range(n):
        ak -= 1.0
        ap = ak + 1.0
        c1 = -(b - 2.0 * ap - x)
        c2 = -ap * (ap - b + 1.0)
        u_new = c1 * u_lo + c2 * u_hi
        e_new = abs(c1) * e_lo + abs(c2) * e_hi + 2.0 * _EPS * (abs(c1 * u_lo) + abs(c2 * u_hi))
        u_hi, e_hi = u_lo, e_lo
        u_lo, e_lo = u_new, e_new
    return SpecFunResult(u_lo, e_lo)


def exp_integral_e1(x: float) -> float:
    """Exponential integral E1(x) for ``x > 0``."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"exp_integral_e1 needs x > 0, got {x}")
    return float(special.exp1(x))

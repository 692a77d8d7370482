"""Pure-Python implementations of the compiled kernels.

Same algorithms and signatures as ``_kernels``; used when the extension is
not built or when ``MAGDIRAC_BACKEND=python`` is set.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import lapack

EPS = float(np.finfo(float).eps)
SAFMIN = float(np.finfo(float).tiny)

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
# full 15-point node set on [-1, 1] and matching weights
_NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
_WK15 = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
_WG15 = np.zeros(15)
for _j in (1, 3, 5):
    _WG15[_j] = _WG[_j // 2]
    _WG15[14 - _j] = _WG[_j // 2]
_WG15[7] = _WG[3]


def _pivmin(off: np.ndarray) -> float:
    m = float(np.max(off * off)) if off.size else 0.0
    return SAFMIN * max(1.0, m)


def _counts(diag: np.ndarray, off2: np.ndarray, shifts: np.ndarray, pivmin: float) -> np.ndarray:
    """Sturm counts for a vector of shifts at once."""
    q = diag[0] - shifts
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    c = (q < 0).astype(np.int64)
    for i in range(1, diag.shape[0]):
        q = (diag[i] - shifts) - off2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        c += q < 0
    return c


def sturm_count(diag, off, shift: float) -> int:
    """Number of eigenvalues strictly below ``shift``."""
    diag = np.ascontiguousarray(diag, dtype=float)
    off = np.ascontiguousarray(off, dtype=float)
    return int(_counts(diag, off * off, np.array([float(shift)]), _pivmin(off))[0])


def bisect_eigenvalues(diag, off, lo: float, hi: float, abstol: float) -> np.ndarray:
    """All eigenvalues in ``[lo, hi)`` by bisection, vectorized over indices."""
    diag = np.ascontiguousarray(diag, dtype=float)
    off = np.ascontiguousarray(off, dtype=float)
    off2 = off * off
    pm = _pivmin(off)
    c_lo, c_hi = _counts(diag, off2, np.array([lo, hi], dtype=float), pm)
    k = int(c_hi - c_lo)
    if k <= 0:
        return np.empty(0)
    # eigenvalue index i (global) lies in [a_i, b_i): count(a_i) <= i < count(b_i)
    idx = np.arange(c_lo, c_hi)
    a = np.full(k, float(lo))
    b = np.full(k, float(hi))
    while True:
        tol = abstol + 2.0 * EPS * np.maximum(np.abs(a), np.abs(b))
        mid = 0.5 * (a + b)
        active = (b - a > tol) & (mid > a) & (mid < b)
        if not active.any():
            break
        cm = _counts(diag, off2, mid[active], pm)
        ia = np.flatnonzero(active)
        below = idx[ia] < cm
        b[ia[below]] = mid[active][below]
        a[ia[~below]] = mid[active][~below]
    return 0.5 * (a + b)


def solve_shifted(diag, off, shift: float, rhs) -> np.ndarray:
    """Solve ``(T - shift) x = rhs`` via LAPACK gttrf/gttrs.

    A singular factorization is retried with the shift nudged by
    ``eps * ||T||``, matching the tiny-pivot rule of the compiled kernel.
    """
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    nrm = float(np.max(np.abs(diag - shift)) + 2.0 * (np.max(np.abs(off)) if off.size else 0.0))
    tiny = EPS * nrm if nrm > 0 else EPS
    s = float(shift)
    for _ in range(4):
        dl, d, du, du2, ipiv, info = lapack.dgttrf(off.copy(), diag - s, off.copy())
        if info == 0:
            x, info2 = lapack.dgttrs(dl, d, du, du2, ipiv, np.asarray(rhs, dtype=float).copy())
            if info2 != 0:
                raise RuntimeError("gttrs failed")
            return x
        s += tiny
        tiny *= 2.0
    raise RuntimeError("shifted tridiagonal matrix is singular")


def _u_integrand(part: int, v: np.ndarray, a: float, b: float, x: float) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if part == 0:
            if a < 1.0:
                t = v ** (1.0 / a)
                return np.exp(-x * t) * (1.0 + t) ** (b - a - 1.0) / a
            return np.exp(-x * v) * v ** (a - 1.0) * (1.0 + v) ** (b - a - 1.0)
        w = v / (1.0 - v)
        s = w / x
        f = np.exp(-x - w) * (1.0 + s) ** (a - 1.0) * (2.0 + s) ** (b - a - 1.0) / (x * (1.0 - v) ** 2)
        return np.where((v >= 1.0) | (w > 745.0), 0.0, f)


def _gk15(part: int, lo: float, hi: float, a: float, b: float, x: float) -> tuple[float, float]:
    centr = 0.5 * (lo + hi)
    hl = 0.5 * (hi - lo)
    f = _u_integrand(part, centr + hl * _NODES, a, b, x)
    resk = float(_WK15 @ f)
    resg = float(_WG15 @ f)
    resabs = float(_WK15 @ np.abs(f)) * abs(hl)
    resasc = float(_WK15 @ np.abs(f - 0.5 * resk)) * abs(hl)
    err = abs((resk - resg) * hl)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > SAFMIN / (50.0 * EPS):
        err = max(50.0 * EPS * resabs, err)
    return resk * hl, err


def hyperu_integral(a: float, b: float, x: float, rtol: float = 1e-13, limit: int = 2000) -> tuple[float, float]:
    """``(I, err)`` with ``I = int_0^inf exp(-x t) t**(a-1) (1+t)**(b-a-1) dt``."""
    if not (a > 0.0 and x > 0.0):
        raise ValueError("hyperu_integral needs a > 0 and x > 0")
    segs = []
    for part in (0, 1):
        r, e = _gk15(part, 0.0, 1.0, a, b, x)
        segs.append([0.0, 1.0, part, r, e])
    while True:
        total = math.fsum(s[3] for s in segs)
        toterr = sum(s[4] for s in segs)
        if toterr <= rtol * abs(total) or len(segs) + 1 >= limit:
            break
        imax = max(range(len(segs)), key=lambda i: segs[i][4])
        lo, hi, part = segs[imax][:3]
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break
        r1, e1 = _gk15(part, lo, mid, a, b, x)
        r2, e2 = _gk15(part, mid, hi, a, b, x)
        segs[imax] = [lo, mid, part, r1, e1]
        segs.append([mid, hi, part, r2, e2])
    return total, toterr

# cython: language_level=3
"""Compiled hot loops.

Sturm-sequence bisection and shifted solves for symmetric tridiagonal
matrices (the permuted channel operators), and the adaptive Gauss-Kronrod
integral behind Kummer's U.  ``_kernels_py`` mirrors this API in Python.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, exp, pow, sqrt
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double EPS = 2.220446049250313e-16
cdef double SAFMIN = 2.2250738585072014e-308

# QUADPACK qk15 abscissae and weights
cdef double XGK[8]
cdef double WGK[8]
cdef double WG[4]
XGK[:] = [0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
          0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
          0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
          0.207784955007898467600689403773245, 0.0]
WGK[:] = [0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
          0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
          0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
          0.204432940075298892414161999234649, 0.209482141084727828012999174891714]
WG[:] = [0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
         0.381830050505118944950369775488975, 0.417959183673469387755102040816327]


cdef inline double _pivmin(const double[::1] off) noexcept nogil:
    cdef Py_ssize_t i
    cdef double m = 1.0
    for i in range(off.shape[0]):
        if off[i] * off[i] > m:
            m = off[i] * off[i]
    return SAFMIN * m


cdef Py_ssize_t _count(const double[::1] diag, const double[::1] off,
                       double shift, double pivmin) noexcept nogil:
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i, c = 0
    cdef double q = diag[0] - shift
    if fabs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        c += 1
    for i in range(1, n):
        q = (diag[i] - shift) - off[i - 1] * off[i - 1] / q
        if fabs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            c += 1
    return c


def sturm_count(double[::1] diag, double[::1] off, double shift):
    """Number of eigenvalues strictly below ``shift``."""
    cdef double pm = _pivmin(off)
    cdef Py_ssize_t c
    with nogil:
        c = _count(diag, off, shift, pm)
    return int(c)


def bisect_eigenvalues(double[::1] diag, double[::1] off, double lo, double hi,
                       double abstol):
    """All eigenvalues in ``[lo, hi)`` by interval bisection on Sturm counts."""
    cdef double pm = _pivmin(off)
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t c_lo, c_hi, k, top, cm, ca, cb, j
    cdef double a, b, mid, tol
    with nogil:
        c_lo = _count(diag, off, lo, pm)
        c_hi = _count(diag, off, hi, pm)
    k = c_hi - c_lo
    out = np.empty(max(k, 0), dtype=np.float64)
    if k <= 0:
        return out
    cdef double[::1] res = out
    # stack of intervals, depth bounded by 2 * (#eigs) * log2(range / tol)
    cdef Py_ssize_t cap = 4096
    cdef double* sa = <double*> malloc(cap * sizeof(double))
    cdef double* sb = <double*> malloc(cap * sizeof(double))
    cdef Py_ssize_t* sca = <Py_ssize_t*> malloc(cap * sizeof(Py_ssize_t))
    cdef Py_ssize_t* scb = <Py_ssize_t*> malloc(cap * sizeof(Py_ssize_t))
    cdef Py_ssize_t filled = 0
    try:
        with nogil:
            top = 0
            sa[0] = lo; sb[0] = hi; sca[0] = c_lo; scb[0] = c_hi
            top = 1
            while top > 0:
                top -= 1
                a = sa[top]; b = sb[top]; ca = sca[top]; cb = scb[top]
                if cb <= ca:
                    continue
                tol = abstol + 2.0 * EPS * (fabs(a) if fabs(a) > fabs(b) else fabs(b))
                mid = 0.5 * (a + b)
                if b - a <= tol or mid <= a or mid >= b:
                    for j in range(ca, cb):
                        res[j - c_lo] = mid
                    filled += cb - ca
                    continue
                cm = _count(diag, off, mid, pm)
                if top + 2 > cap:
                    break
                # push upper half first so lower half is processed first
                sa[top] = mid; sb[top] = b; sca[top] = cm; scb[top] = cb
                top += 1
                sa[top] = a; sb[top] = mid; sca[top] = ca; scb[top] = cm
                top += 1
    finally:
        free(sa); free(sb); free(sca); free(scb)
    if filled != k:
        raise RuntimeError("bisection stack exhausted")
    return out


def solve_shifted(double[::1] diag, double[::1] off, double shift, double[::1] rhs):
    """Solve ``(T - shift) x = rhs`` by LU with partial pivoting.

    Exactly-zero pivots are replaced by ``eps * ||T||`` so the routine can be
    used for inverse iteration at a computed eigenvalue.
    """
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef double fact, temp, tiny, nrm = 0.0
    d_arr = np.asarray(diag, dtype=np.float64) - shift
    du_arr = np.array(off, dtype=np.float64)
    dl_arr = np.array(off, dtype=np.float64)
    du2_arr = np.zeros(max(n - 2, 0), dtype=np.float64)
    ip_arr = np.zeros(max(n - 1, 0), dtype=np.int8)
    x_arr = np.array(rhs, dtype=np.float64)
    cdef double[::1] d = d_arr
    cdef double[::1] du = du_arr
    cdef double[::1] dl = dl_arr
    cdef double[::1] du2 = du2_arr
    cdef signed char[::1] ip = ip_arr
    cdef double[::1] x = x_arr
    with nogil:
        for i in range(n):
            temp = fabs(d[i])
            if i > 0:
                temp += fabs(dl[i - 1])
            if i < n - 1:
                temp += fabs(du[i])
            if temp > nrm:
                nrm = temp
        tiny = EPS * nrm if nrm > 0.0 else EPS
        for i in range(n - 1):
            if fabs(d[i]) >= fabs(dl[i]):
                if d[i] == 0.0:
                    d[i] = tiny
                fact = dl[i] / d[i]
                dl[i] = fact
                d[i + 1] = d[i + 1] - fact * du[i]
            else:
                fact = d[i] / dl[i]
                d[i] = dl[i]
                dl[i] = fact
                temp = du[i]
                du[i] = d[i + 1]
                d[i + 1] = temp - fact * d[i + 1]
                if i < n - 2:
                    du2[i] = du[i + 1]
                    du[i + 1] = -fact * du[i + 1]
                ip[i] = 1
        if d[n - 1] == 0.0:
            d[n - 1] = tiny
        for i in range(n - 1):
            if ip[i] == 0:
                x[i + 1] = x[i + 1] - dl[i] * x[i]
            else:
                temp = x[i]
                x[i] = x[i + 1]
                x[i + 1] = temp - dl[i] * x[i]
        x[n - 1] = x[n - 1] / d[n - 1]
        if n > 1:
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2]
        i = n - 3
        while i >= 0:
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i]
            i -= 1
    return x_arr


cdef inline double _u_integrand(int part, double v, double a, double b, double x) noexcept nogil:
    # part 0: t in [0, 1] (t = v**(1/a) when a < 1); part 1: t = 1 + w/x, w = v/(1-v)
    cdef double t, w, s
    if part == 0:
        if a < 1.0:
            t = pow(v, 1.0 / a)
            return exp(-x * t) * pow(1.0 + t, b - a - 1.0) / a
        if v == 0.0:
            return 0.0 if a > 1.0 else pow(1.0, b - a - 1.0)
        return exp(-x * v) * pow(v, a - 1.0) * pow(1.0 + v, b - a - 1.0)
    if v >= 1.0:
        return 0.0
    w = v / (1.0 - v)
    if w > 745.0:
        return 0.0
    s = w / x
    return exp(-x - w) * pow(1.0 + s, a - 1.0) * pow(2.0 + s, b - a - 1.0) / (x * (1.0 - v) * (1.0 - v))


cdef void _gk15(int part, double lo, double hi, double a, double b, double x,
                double* result, double* abserr) noexcept nogil:
    cdef double centr = 0.5 * (lo + hi)
    cdef double hlgth = 0.5 * (hi - lo)
    cdef double fc = _u_integrand(part, centr, a, b, x)
    cdef double resg = fc * WG[3]
    cdef double resk = fc * WGK[7]
    cdef double resabs = fabs(resk)
    cdef double fv1[7]
    cdef double fv2[7]
    cdef double f1, f2, absc, reskh, resasc, err
    cdef int j
    for j in range(7):
        absc = hlgth * XGK[j]
        f1 = _u_integrand(part, centr - absc, a, b, x)
        f2 = _u_integrand(part, centr + absc, a, b, x)
        fv1[j] = f1
        fv2[j] = f2
        resk += WGK[j] * (f1 + f2)
        resabs += WGK[j] * (fabs(f1) + fabs(f2))
        if j % 2 == 1:
            resg += WG[j // 2] * (f1 + f2)
    reskh = resk * 0.5
    resasc = WGK[7] * fabs(fc - reskh)
    for j in range(7):
        resasc += WGK[j] * (fabs(fv1[j] - reskh) + fabs(fv2[j] - reskh))
    result[0] = resk * hlgth
    resabs *= fabs(hlgth)
    resasc *= fabs(hlgth)
    err = fabs((resk - resg) * hlgth)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, pow(200.0 * err / resasc, 1.5))
    if resabs > SAFMIN / (50.0 * EPS):
        err = max(50.0 * EPS * resabs, err)
    abserr[0] = err


def hyperu_integral(double a, double b, double x, double rtol=1e-13, int limit=2000):
    """``(I, err)`` with ``I = int_0^inf exp(-x t) t**(a-1) (1+t)**(b-a-1) dt``.

    Requires ``a > 0`` and ``x > 0``.  Globally adaptive 7/15-point
    Gauss-Kronrod on the two mapped pieces ``t < 1`` and ``t > 1``.
    """
    if not (a > 0.0 and x > 0.0):
        raise ValueError("hyperu_integral needs a > 0 and x > 0")
    cdef double* lo = <double*> malloc(limit * sizeof(double))
    cdef double* hi = <double*> malloc(limit * sizeof(double))
    cdef double* rs = <double*> malloc(limit * sizeof(double))
    cdef double* er = <double*> malloc(limit * sizeof(double))
    cdef int* pt = <int*> malloc(limit * sizeof(int))
    cdef int n = 2, i, imax, p
    cdef double total, toterr, emax, mid, r1, e1, r2, e2
    try:
        with nogil:
            lo[0] = 0.0; hi[0] = 1.0; pt[0] = 0
            lo[1] = 0.0; hi[1] = 1.0; pt[1] = 1
            _gk15(0, 0.0, 1.0, a, b, x, &rs[0], &er[0])
            _gk15(1, 0.0, 1.0, a, b, x, &rs[1], &er[1])
            while True:
                total = 0.0
                toterr = 0.0
                imax = 0
                emax = -1.0
                for i in range(n):
                    total += rs[i]
                    toterr += er[i]
                    if er[i] > emax:
                        emax = er[i]
                        imax = i
                if toterr <= rtol * fabs(total) or n + 1 >= limit:
                    break
                p = pt[imax]
                mid = 0.5 * (lo[imax] + hi[imax])
                if mid <= lo[imax] or mid >= hi[imax]:
                    break
                _gk15(p, lo[imax], mid, a, b, x, &r1, &e1)
                _gk15(p, mid, hi[imax], a, b, x, &r2, &e2)
                lo[n] = mid; hi[n] = hi[imax]; pt[n] = p; rs[n] = r2; er[n] = e2
                hi[imax] = mid; rs[imax] = r1; er[imax] = e1
                n += 1
    finally:
        free(lo); free(hi); free(rs); free(er); free(pt)
    return total, toterr

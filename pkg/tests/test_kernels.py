import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from magdirac import BACKEND
from magdirac._backend import get_kernels

BACKENDS = ["python"]
try:
    get_kernels("compiled")
    BACKENDS.append("compiled")
except ImportError:  # pragma: no cover
    pass

# magnitudes near underflow break the dense LAPACK oracle, not the kernels
finite = st.one_of(st.just(0.0), st.floats(1e-3, 50), st.floats(-50, -1e-3))


def tridiag(n_min=2, n_max=60):
    return st.integers(n_min, n_max).flatmap(
        lambda n: st.tuples(arrays(np.float64, n, elements=finite), arrays(np.float64, n - 1, elements=finite)))


def dense(d, e):
    return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)


def test_compiled_backend_is_active():
    # the build ships the extension; the fallback is only for broken installs
    assert BACKEND == "compiled"


@pytest.mark.parametrize("name", BACKENDS)
@given(tridiag(), st.floats(-60, 60))
def test_sturm_count_matches_dense(name, de, shift):
    d, e = de
    k = get_kernels(name)
    ev = np.linalg.eigvalsh(dense(d, e))
    gap = np.min(np.abs(ev - shift))
    if gap < 1e-8 * max(1.0, np.abs(ev).max()):
        return
    assert k.sturm_count(d, e, shift) == int(np.sum(ev < shift))


@pytest.mark.parametrize("name", BACKENDS)
@given(tridiag(), st.floats(-40, 0), st.floats(0.1, 40))
def test_bisection_matches_lapack(name, de, lo, width):
    d, e = de
    hi = lo + width
    ev = np.linalg.eigvalsh(dense(d, e))
    scale = max(1.0, float(np.abs(ev).max()))
    if np.min(np.abs(ev - lo)) < 1e-9 * scale or np.min(np.abs(ev - hi)) < 1e-9 * scale:
        return
    got = get_kernels(name).bisect_eigenvalues(d, e, lo, hi, 1e-14 * scale)
    want = ev[(ev >= lo) & (ev < hi)]
    assert got.shape == want.shape
    assert np.allclose(np.sort(got), want, atol=1e-10 * scale, rtol=0)


def test_bisection_diagonal_matrix():
    d = np.array([0.0, 1.0, 2.0, 3.0])
    e = np.zeros(3)
    for name in BACKENDS:
        got = get_kernels(name).bisect_eigenvalues(d, e, 0.5, 2.5, 1e-15)
        assert np.allclose(np.sort(got), [1.0, 2.0], atol=1e-14)


def test_bisection_sign_symmetric_on_zero_diagonal(rng):
    e = rng.uniform(0.1, 5.0, 199)
    d = np.zeros(200)
    for name in BACKENDS:
        ev = get_kernels(name).bisect_eigenvalues(d, e, -20.0, 20.0, 1e-14)
        assert np.max(np.abs(np.sort(ev) + np.sort(ev)[::-1])) == 0.0


@pytest.mark.parametrize("name", BACKENDS)
@given(tridiag(3, 40), st.floats(-5, 5))
def test_solve_shifted(name, de, shift):
    d, e = de
    T = dense(d, e) - shift * np.eye(d.size)
    if np.linalg.cond(T) > 1e8:
        return
    rhs = np.linspace(-1, 1, d.size)
    x = get_kernels(name).solve_shifted(d, e, shift, rhs)
    assert np.allclose(T @ x, rhs, atol=1e-8 * np.linalg.norm(rhs) * max(1.0, np.abs(T).max()))


def test_solve_shifted_singular_shift_finite():
    d = np.array([1.0, 2.0, 3.0])
    e = np.array([0.0, 0.0])
    for name in BACKENDS:
        x = get_kernels(name).solve_shifted(d, e, 2.0, np.ones(3))
        assert np.all(np.isfinite(x))


def test_backends_agree_on_channel_spectrum(well_gauge2000, grid2000):
    from magdirac.radial_solver import build_channel

    d, e = build_channel(1, well_gauge2000, grid2000).tridiagonal()
    outs = [get_kernels(n).bisect_eigenvalues(d, e, -3.0, 3.0, 1e-13) for n in BACKENDS]
    ref = sla.eigvalsh_tridiagonal(d, e, select="v", select_range=(-3.0, 3.0))
    for o in outs:
        assert np.allclose(np.sort(o), ref, atol=1e-9)
    if len(outs) == 2:
        assert np.array_equal(outs[0], outs[1]) or np.allclose(outs[0], outs[1], atol=1e-12)


@pytest.mark.parametrize("name", BACKENDS)
@given(st.floats(0.01, 5.0), st.sampled_from([1.0, 2.0]), st.floats(1e-3, 50.0))
def test_hyperu_integral_is_gamma_times_u(name, a, b, x):
    import mpmath

    val, err = get_kernels(name).hyperu_integral(a, b, x)
    ref = float(mpmath.gamma(a) * mpmath.hyperu(a, b, x))
    assert err >= 0
    assert val == pytest.approx(ref, rel=1e-12)


def test_hyperu_integral_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernels not built")
    p, c = get_kernels("python"), get_kernels("compiled")
    for a in (0.2, 0.5, 1.0, 3.5):
        for x in (1e-3, 0.7, 20.0):
            assert c.hyperu_integral(a, 2.0, x)[0] == pytest.approx(p.hyperu_integral(a, 2.0, x)[0], rel=1e-13)


def test_get_kernels_rejects_unknown():
    with pytest.raises(ValueError):
        get_kernels("fortran")


def test_forced_python_backend(monkeypatch):
    import importlib

    import magdirac._backend as be

    monkeypatch.setenv("MAGDIRAC_BACKEND", "python")
    try:
        mod = importlib.reload(be)
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("MAGDIRAC_BACKEND")
        importlib.reload(be)
    assert math.isfinite(be.kernels.hyperu_integral(0.5, 1.0, 1.0)[0])

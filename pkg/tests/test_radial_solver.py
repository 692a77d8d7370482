import math
import warnings

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from magdirac.errors import BandwidthError, GridError, ParameterError
from magdirac.fields import FieldProfile, PotentialSpec, RadialProfile, radial_gauge
from magdirac.radial_solver import (
    RadialGrid,
    SpectralResult,
    WindowEdgeWarning,
    _select,
    build_channel,
    build_coupled,
    richardson_order,
    solve_channels,
    solve_spectrum,
)

SQRT2 = math.sqrt(2.0)


@pytest.fixture(scope="module")
def small():
    g = RadialGrid(12.0, 300)
    return g, radial_gauge(FieldProfile.step_well(1.0, -0.5, 2.0), g.r)


def test_grid_nodes():
    g = RadialGrid(12.0, 4)
    assert np.allclose(g.r, [1.5, 4.5, 7.5, 10.5])
    assert g.refined().N == 8
    assert RadialGrid.min_r_max(FieldProfile.step_well(1.0, -0.5, 2.0)) == 8.0
    assert g.has_margin(FieldProfile.zero(1.0))


@pytest.mark.parametrize("kw", [dict(r_max=0.0, N=10), dict(r_max=math.inf, N=10), dict(r_max=1.0, N=1),
                                dict(r_max=1.0, N=2.5)])
def test_grid_errors(kw):
    with pytest.raises(GridError):
        RadialGrid(**kw)


def test_gauge_grid_mismatch(small):
    g, ga = small
    with pytest.raises(GridError):
        build_channel(0, ga, RadialGrid(12.0, 301))
    with pytest.raises(ParameterError):
        build_channel(0, ga, g, scheme="backward")
    with pytest.raises(ParameterError):
        build_channel(0.5, ga, g)


@pytest.mark.parametrize("j", [-3, -1, 0, 1, 4])
@pytest.mark.parametrize("scheme", ["trapezoid", "forward"])
def test_channel_structure(small, j, scheme):
    g, ga = small
    op = build_channel(j, ga, g, scheme=scheme)
    K = op.dense()
    pu, pw = (j, j + 1) if j >= 0 else (0, 0)
    assert (op.pin_u, op.pin_w) == (pu, pw)
    assert K.shape == (op.dim, op.dim) == (2 * g.N - pu - pw,) * 2
    assert np.array_equal(K, K.T)
    full = np.diag(op.a_diag) + np.diag(op.a_sub, -1)
    assert np.array_equal(op.a_matrix().toarray(), full[pw:, pu:])
    # the tridiagonal form is a permutation of the assembled block form
    d, off = op.tridiagonal()
    T = np.diag(d) + np.diag(off, 1) + np.diag(off, -1)
    assert np.allclose(np.sort(np.linalg.eigvalsh(T)), np.sort(np.linalg.eigvalsh(K)), atol=1e-9)


def test_radial_potential_on_diagonal(small):
    g, ga = small
    prof = RadialProfile("gaussian", 0.3, 1.0)
    op = build_channel(1, ga, g, prof)
    K0 = build_channel(1, ga, g).dense()
    v = prof(g.r)
    assert np.allclose(op.dense() - K0, np.diag(np.concatenate([v[op.pin_u:], v[op.pin_w:]])))
    with pytest.raises(GridError):
        build_channel(1, ga, g, np.zeros(3))


@pytest.mark.parametrize("j", [-2, 0, 3])
def test_bisection_matches_dense(small, j):
    g, ga = small
    op = build_channel(j, ga, g, RadialProfile("gaussian", 0.2, 1.5))
    res = solve_spectrum(op, (-3.0, 3.0))
    ref = sla.eigvalsh(op.dense())
    ref = ref[(ref >= -3) & (ref < 3)]
    assert len(res) == ref.size
    assert np.max(np.abs(res.eigenvalues - ref)) <= 1e-11
    dense = solve_spectrum(op, (-3.0, 3.0), route="dense")
    assert np.allclose(dense.eigenvalues, res.eigenvalues, atol=1e-11)


def test_residual_contract_and_normalization(small):
    g, ga = small
    op = build_channel(1, ga, g)
    res = solve_spectrum(op, (-3.0, 3.0))
    assert np.all(res.residuals <= 1e-8 * res.norm)
    K = op.dense()
    for k in range(len(res)):
        v = res.eigenvectors[k, 0]
        assert g.dr * np.sum(v**2) == pytest.approx(1.0, abs=1e-12)
        assert not np.any(v[:op.pin_u, 0]) and not np.any(v[:op.pin_w, 1])
        x = np.concatenate([v[op.pin_u:, 0], v[op.pin_w:, 1]]) * math.sqrt(g.dr)
        assert np.linalg.norm(K @ x - res.eigenvalues[k] * x) <= 1e-8 * res.norm
    assert res.channel_masses(0) == pytest.approx([1.0])
    assert res.amplitude(0).shape == (g.N,)


def test_window_half_open_filter():
    vals = np.array([0.5, 1.0, 1.5, 2.0, 2.5])
    with pytest.warns(WindowEdgeWarning):
        keep, _ = _select(vals, (1.0, 2.0), None)
    assert vals[keep].tolist() == [1.0, 1.5]


def test_adjacent_windows_partition(small):
    g, ga = small
    op = build_channel(0, ga, g)
    full = solve_spectrum(op, (-3.0, 3.0), vectors=False).eigenvalues
    left = solve_spectrum(op, (-3.0, 0.77), vectors=False).eigenvalues
    right = solve_spectrum(op, (0.77, 3.0), vectors=False).eigenvalues
    assert np.all(left < 0.77) and np.all(right >= 0.77)
    assert np.allclose(np.concatenate([left, right]), full, atol=1e-12)


def test_edge_warning(small):
    g, ga = small
    op = build_channel(0, ga, g)
    ev = solve_spectrum(op, (-3.0, 3.0), vectors=False).eigenvalues
    e = float(ev[np.argmin(np.abs(ev - 1.1))])
    with pytest.warns(WindowEdgeWarning):
        solve_spectrum(op, (e + 5e-7, 3.0), vectors=False)


def test_max_pairs_keeps_centre(small):
    g, ga = small
    op = build_channel(2, ga, g)
    full = solve_spectrum(op, (-3.0, 3.0), vectors=False)
    part = solve_spectrum(op, (-3.0, 3.0), max_pairs=3, vectors=False)
    assert len(part) == 3 and part.metadata["truncated"]
    expected = np.sort(full.eigenvalues[np.argsort(np.abs(full.eigenvalues))[:3]])
    assert np.array_equal(part.eigenvalues, expected)
    assert len(solve_spectrum(op, (-3.0, 3.0), max_pairs=0, vectors=False)) == 0


@pytest.mark.parametrize("w", [(1.0, 1.0), (2.0, 1.0), (math.nan, 1.0)])
def test_bad_windows(small, w):
    g, ga = small
    with pytest.raises(ParameterError):
        solve_spectrum(build_channel(0, ga, g), w)


def test_bad_route(small):
    g, ga = small
    with pytest.raises(ParameterError):
        solve_spectrum(build_channel(0, ga, g), (-1, 1), route="magic")


def test_constant_field_examples(grid2000, zero_gauge2000):
    op = build_channel(0, zero_gauge2000, grid2000)
    zero = solve_spectrum(op, (-0.5, 0.5), vectors=False).eigenvalues
    assert zero.size == 1 and abs(zero[0]) <= 1e-3
    first = solve_spectrum(op, (0.5, 1.9), vectors=False).eigenvalues
    assert np.any(np.abs(first - SQRT2) <= 1e-2)
    assert len(solve_spectrum(op, (0.2, 0.4), vectors=False)) == 0


def test_squared_channel_levels(grid2000, zero_gauge2000):
    ata = build_channel(0, zero_gauge2000, grid2000).a_matrix()
    ata = (ata.T @ ata).toarray()
    ev = sla.eigvalsh(ata, subset_by_index=(0, 4))
    assert np.allclose(ev, 2.0 * np.arange(5), atol=2e-2)
    a_neg = build_channel(-1, zero_gauge2000, grid2000).a_matrix()
    ev_neg = sla.eigvalsh((a_neg.T @ a_neg).toarray(), subset_by_index=(0, 0))
    assert ev_neg[0] >= 1.95


def test_plus_minus_symmetry_without_potential(well_gauge2000, grid2000):
    for j in (-2, 0, 1):
        ev = solve_spectrum(build_channel(j, well_gauge2000, grid2000), (-3.0, 3.0), vectors=False).eigenvalues
        assert np.max(np.abs(ev + ev[::-1])) <= 1e-12


def test_gauge_method_invariance(grid400):
    f = FieldProfile.gaussian_well(1.0, -1.0, 1.0)
    a = radial_gauge(f, grid400.r, method="closed")
    b = radial_gauge(f, grid400.r, method="quadrature")
    ea = solve_spectrum(build_channel(1, a, grid400), (-3, 3), vectors=False).eigenvalues
    eb = solve_spectrum(build_channel(1, b, grid400), (-3, 3), vectors=False).eigenvalues
    assert np.max(np.abs(ea - eb)) <= 1e-9


def test_solve_channels_threads_agree(small):
    g, ga = small
    serial = SpectralResult.concatenate(solve_channels(range(-3, 3), ga, g, (-3, 3), threads=1))
    par = SpectralResult.concatenate(solve_channels(range(-3, 3), ga, g, (-3, 3), threads=4))
    assert np.array_equal(serial.eigenvalues, par.eigenvalues)
    assert np.all(np.diff(serial.eigenvalues) >= 0)
    assert set(serial.channel) <= set(range(-3, 3))


def test_concatenate_keeps_vectors(small):
    g, ga = small
    parts = solve_channels([-1, 0], ga, g, (0.5, 1.9), vectors=True)
    res = SpectralResult.concatenate(parts, keep_vectors=True)
    assert res.eigenvectors.shape == (len(res), 2, g.N, 2)
    for k in range(len(res)):
        m = res.channel_masses(k)
        assert m[res.channels.index(res.channel[k])] == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        SpectralResult.concatenate([])


def test_coupled_zero_potential_block_diagonal(small):
    g, ga = small
    pot = PotentialSpec.none()
    op = build_coupled(2, ga, g, pot)
    M = op.matrix.toarray()
    off = np.cumsum([0] + [ch.dim for ch in op.channels])
    assert M.shape[0] == off[-1]
    for c, ch in enumerate(op.channels):
        sl = slice(off[c], off[c + 1])
        assert np.array_equal(M[sl, sl], ch.dense())
        M[sl, sl] = 0
    assert not np.any(M)


def test_coupled_radial_matches_channels(small):
    g, ga = small
    prof = RadialProfile("gaussian", 0.4, 1.0)
    op = build_coupled(2, ga, g, PotentialSpec.radial_only(prof))
    res = solve_spectrum(op, (-2.5, 2.5), vectors=False)
    per = SpectralResult.concatenate(solve_channels(range(-2, 3), ga, g, (-2.5, 2.5), v_radial=prof))
    assert np.allclose(res.eigenvalues, per.eigenvalues, atol=1e-9)


def test_cos_theta_couples_neighbours(small):
    g, ga = small
    w = RadialProfile("gaussian", 0.6, 1.0)
    op = build_coupled(2, ga, g, PotentialSpec.cos_theta(w))
    M = op.matrix.toarray()
    off = np.cumsum([0] + [ch.dim for ch in op.channels])
    half = 0.3 * np.exp(-g.r**2)
    free = lambda ch: np.concatenate([np.arange(ch.pin_u, g.N), g.N + np.arange(ch.pin_w, g.N)])
    for l, cl in enumerate(op.channels):
        for j, cj in enumerate(op.channels):
            blk = M[off[l]:off[l + 1], off[j]:off[j + 1]]
            if abs(l - j) == 1:
                # diag(w/2) on both components, restricted to the free nodes
                full = np.diag(np.tile(half, 2))
                assert np.allclose(blk, full[np.ix_(free(cl), free(cj))])
            elif l != j:
                assert not np.any(blk)
    assert np.array_equal(M, M.conj().T)


def test_complex_harmonics_hermitian(small):
    g, ga = small
    re, im = RadialProfile("gaussian", 0.2, 1.0), RadialProfile("gaussian", 0.1, 1.0)
    op = build_coupled(1, ga, g, PotentialSpec("fourier-table", harmonics={1: (re, im)}))
    M = op.matrix.toarray()
    assert np.iscomplexobj(M) and np.array_equal(M, M.conj().T)
    res = solve_spectrum(op, (-2, 2))
    assert np.all(res.residuals <= 1e-8 * res.norm)


def test_bandwidth_error(small):
    g, ga = small
    pot = PotentialSpec("fourier-table", harmonics={3: (RadialProfile("gaussian", 0.1, 1.0), None)})
    with pytest.raises(BandwidthError):
        build_coupled(1, ga, g, pot)
    with pytest.raises(ParameterError):
        build_coupled(-1, ga, g, PotentialSpec.none())


def test_shift_invert_matches_dense(small):
    g, ga = small
    op = build_coupled(1, ga, g, PotentialSpec.cos_theta(RadialProfile("gaussian", 0.5, 1.0)))
    d = solve_spectrum(op, (0.8, 1.6), route="dense", vectors=False)
    s = solve_spectrum(op, (0.8, 1.6), route="shift-invert", vectors=False)
    assert np.allclose(d.eigenvalues, s.eigenvalues, atol=1e-9)


def test_coupled_count_monotone_in_J():
    g = RadialGrid(12.0, 300)
    ga = radial_gauge(FieldProfile.step_well(1.0, -0.5, 2.0), g.r)
    pot = PotentialSpec.cos_theta(RadialProfile("gaussian", 0.3, 1.0))
    counts = [len(solve_spectrum(build_coupled(J, ga, g, pot), (0.1, SQRT2 - 0.1), vectors=False))
              for J in (2, 4, 6)]
    assert counts == sorted(counts) and counts[0] >= 1


def test_second_order_convergence():
    f = FieldProfile.step_well(1.0, -0.5, 2.0)
    vals = []
    for N in (500, 1000, 2000):
        g = RadialGrid(12.0, N)
        ev = solve_spectrum(build_channel(0, radial_gauge(f, g.r), g), (0.5, 1.35), vectors=False).eigenvalues
        vals.append(float(ev[0]))
    assert richardson_order(*vals) >= 1.5


def test_richardson_order_examples():
    assert richardson_order(1.0 + 4e-2, 1.0 + 1e-2, 1.0 + 2.5e-3) == pytest.approx(2.0)
    assert math.isinf(richardson_order(1.0, 2.0, 2.0))
    assert math.isnan(richardson_order(1.0, 1.0, 1.0))


@given(st.floats(-2, 2), st.floats(0.5, 3), st.integers(-4, 4))
def test_pm_symmetry_property(depth, radius, j):
    g = RadialGrid(10.0, 120)
    ga = radial_gauge(FieldProfile.step_well(1.0, depth, radius), g.r)
    res = solve_spectrum(build_channel(j, ga, g), (-4.0, 4.0), vectors=False)
    ev = res.eigenvalues
    # the window is symmetric apart from its half-open end
    ev = ev[ev > -4.0]
    assert np.max(np.abs(ev + ev[::-1]), initial=0.0) <= 1e-12 * max(1.0, res.norm)


@pytest.mark.parametrize("N", [300, 1000])
@pytest.mark.parametrize("j", [0, 1, 5, 12])
def test_pinning_keeps_one_zero_mode(N, j):
    # the unpinned square factor has a near-kernel on both sides; pinning must
    # remove exactly one near-zero eigenvalue and leave the rest untouched
    g = RadialGrid(12.0, N)
    ga = radial_gauge(FieldProfile.step_well(1.0, -0.5, 2.0), g.r)
    op = build_channel(j, ga, g)
    ev = solve_spectrum(op, (-3.0, 3.0), vectors=False).eigenvalues
    assert np.sum(np.abs(ev) <= 1e-3) == 1
    full = np.diag(op.a_diag) + np.diag(op.a_sub, -1)
    sv = np.sort(sla.svdvals(full))
    assert sv[0] <= 1e-3
    pos = np.sort(ev[ev > 1e-3])
    assert np.allclose(pos, sv[1:pos.size + 1], atol=1e-10)

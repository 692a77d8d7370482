"""Channel-decomposed radial Dirac operator and its eigensolvers.

Each angular-momentum channel ``j`` (``m_j = (2j+1)/2``) is discretized on
the half-offset grid ``r_k = (k - 1/2) dr`` as

    K_j = [[V, a^T], [a, V]],    a ~ d/dr + A(r) - m_j / r,

with ``a`` lower bidiagonal.  For ``j >= 0`` the nodes inside ``r < m_j dr``
are pinned (``u_1..u_j = 0`` and ``w_1..w_{j+1} = 0``): there the forward
rows of ``a^T`` carry a kernel vector, the lattice remnant of the singular
solution ``r**(-m_j)``, which would double the zero mode.  The physical
solutions vanish like ``r**m_j`` in that region.  Because the lower block is the exact transpose
of the upper one, the spectrum of ``K_j`` (with ``V = 0``) is symmetric about
zero to machine precision.  Interleaving the two spinor components makes
``K_j`` a symmetric tridiagonal matrix, which is solved by Sturm bisection and
inverse iteration.  Channels coupled by an angular potential are assembled
into a sparse Hermitian matrix.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._backend import kernels
from .errors import BandwidthError, GridError, ParameterError, SolverError
from .fields import FieldProfile, PotentialSpec, RadialGauge, RadialProfile

__all__ = [
    "RadialGrid",
    "ChannelOperator",
    "CoupledOperator",
    "SpectralResult",
    "WindowEdgeWarning",
    "build_channel",
    "build_coupled",
    "solve_spectrum",
    "solve_channels",
    "richardson_order",
    "SCHEMES",
    "DENSE_LIMIT",
]

SCHEMES = ("trapezoid", "forward")
DENSE_LIMIT = 6000
RESIDUAL_FACTOR = 1e-8
EDGE_TOL = 1e-6
_EPS = float(np.finfo(float).eps)


class WindowEdgeWarning(UserWarning):
    """An eigenvalue sits within ``EDGE_TOL`` of a window endpoint."""


@dataclass(frozen=True)
class RadialGrid:
    """Uniform half-offset grid on ``(0, r_max)`` with ``N`` nodes."""

    r_max: float
    N: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.r_max) and self.r_max > 0):
            raise GridError(f"r_max must be positive, got {self.r_max}")
        if int(self.N) != self.N or self.N < 2:
            raise GridError(f"N must be an integer >= 2, got {self.N}")

    @property
    def dr(self) -> float:
        return self.r_max / self.N

    @property
    def r(self) -> np.ndarray:
        return (np.arange(1, self.N + 1) - 0.5) * self.dr

    @staticmethod
    def min_r_max(field: FieldProfile) -> float:
        """Smallest ``r_max`` leaving a localization margin of ``6/sqrt(B0)``."""
        return float(field.support_radius) + 6.0 / math.sqrt(field.B0)

    def has_margin(self, field: FieldProfile) -> bool:
        return self.r_max >= self.min_r_max(field)

    def refined(self, factor: int = 2) -> "RadialGrid":
        return RadialGrid(self.r_max, self.N * factor)


def _factor_bands(W: np.ndarray, dr: float, scheme: str, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and subdiagonal of the lower-bidiagonal factor ``a``.

    ``forward``: ``diag = 1/dr + W_k``, ``sub = -1/dr``.  ``trapezoid``
    averages ``W`` over neighbouring nodes but keeps forward rows for
    ``k <= max(1, j + 1)``; near the origin ``W ~ -m_j/r`` and the forward
    diagonal nearly vanishes at ``r_k = m_j dr``, so the discrete zero mode
    starts there just as ``r**m_j`` does.
    """
    fwd_diag = 1.0 / dr + W
    fwd_sub = np.full(W.size - 1, -1.0 / dr)
    if scheme == "forward":
        return fwd_diag, fwd_sub
    if scheme == "trapezoid":
        diag = 1.0 / dr + 0.5 * W
        sub = -1.0 / dr + 0.5 * W[:-1]
        k0 = min(max(1, j + 1), W.size)
        diag[:k0] = fwd_diag[:k0]
        sub[: k0 - 1] = fwd_sub[: k0 - 1]
        return diag, sub
    raise ParameterError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


@dataclass(frozen=True)
class ChannelOperator:
    """Discretized channel ``j``.

    ``a_diag``/``a_sub`` hold the lower-bidiagonal factor on all ``N`` nodes;
    ``v`` is the radial potential on the nodes (zeros when absent).  For
    ``j >= 0`` the first ``j`` nodes of ``u`` and ``j + 1`` nodes of ``w``
    are pinned to zero, so the operator has dimension ``2N - 2j - 1``.
    """

    j: int
    grid: RadialGrid
    a_diag: np.ndarray
    a_sub: np.ndarray
    v: np.ndarray
    scheme: str = "trapezoid"

    @property
    def m(self) -> float:
        return (2 * self.j + 1) / 2.0

    @property
    def N(self) -> int:
        return self.grid.N

    @property
    def dim(self) -> int:
        return 2 * self.grid.N - self.pin_u - self.pin_w

    @property
    def has_potential(self) -> bool:
        return bool(np.any(self.v != 0.0))

    @property
    def pin_u(self) -> int:
        """Leading nodes of ``u`` held at zero."""
        return self.j if self.j >= 0 else 0

    @property
    def pin_w(self) -> int:
        """Leading nodes of ``w`` held at zero."""
        return self.j + 1 if self.j >= 0 else 0

    def a_matrix(self) -> sp.csr_matrix:
        """The lower-bidiagonal factor on the free nodes, ``(N - pin_w) x (N - pin_u)``."""
        a = sp.diags([self.a_sub, self.a_diag], [-1, 0], format="csr")
        return a[self.pin_w:][:, self.pin_u:]

    def assembled(self) -> sp.csr_matrix:
        """``[[V, a^T], [a, V]]`` on the block ordering ``(u, w)`` of free nodes."""
        a = self.a_matrix()
        return sp.bmat([[sp.diags(self.v[self.pin_u:]), a.T], [a, sp.diags(self.v[self.pin_w:])]],
                       format="csr")

    def dense(self) -> np.ndarray:
        return self.assembled().toarray()

    def tridiagonal(self) -> tuple[np.ndarray, np.ndarray]:
        """Interleaved ``(w_1, u_1, w_2, u_2, ...)`` tridiagonal form of the free nodes."""
        d = np.repeat(self.v, 2)
        off = np.empty(2 * self.N - 1)
        off[0::2] = self.a_diag
        off[1::2] = self.a_sub
        p = self.pin_u + self.pin_w
        return d[p:], off[p:]

    def split_interleaved(self, x: np.ndarray) -> np.ndarray:
        """Map an interleaved vector to ``(N, 2)`` with columns ``(u, w)``."""
        x = np.concatenate([np.zeros(self.pin_u + self.pin_w, dtype=x.dtype), x])
        return np.stack([x[1::2], x[0::2]], axis=-1)

    def embed(self, x: np.ndarray) -> np.ndarray:
        """Map a block-ordered ``(u, w)`` vector of free nodes to ``(N, 2)``."""
        nu = self.N - self.pin_u
        out = np.zeros((self.N, 2), dtype=x.dtype)
        out[self.pin_u:, 0] = x[:nu]
        out[self.pin_w:, 1] = x[nu:]
        return out


def _w_profile(j: int, gauge: RadialGauge, grid: RadialGrid) -> np.ndarray:
    r = grid.r
    if gauge.r.shape != r.shape or not np.allclose(gauge.r, r, rtol=1e-13, atol=0.0):
        raise GridError("gauge is not sampled on the grid nodes")
    return gauge.A - ((2 * j + 1) / 2.0) / r


def build_channel(j: int, gauge: RadialGauge, grid: RadialGrid,
                  v_radial: RadialProfile | np.ndarray | None = None,
                  scheme: str = "trapezoid") -> ChannelOperator:
    """Assemble channel ``j``.

    Parameters
    ----------
    v_radial : RadialProfile or array, optional
        Radial scalar potential, added on the diagonal of both components.
    scheme : {"trapezoid", "forward"}
        ``forward`` uses ``diag = 1/dr + W_k``, ``sub = -1/dr``.
        ``trapezoid`` averages ``W`` over neighbouring nodes (with forward
        rows next to the origin), which gives second-order eigenvalue
        convergence with the same bidiagonal shape.
    """
    if int(j) != j:
        raise ParameterError(f"channel index must be an integer, got {j}")
    W = _w_profile(int(j), gauge, grid)
    diag, sub = _factor_bands(W, grid.dr, scheme, int(j))
    if v_radial is None:
        v = np.zeros(grid.N)
    elif isinstance(v_radial, RadialProfile):
        v = np.asarray(v_radial(grid.r), dtype=float)
    else:
        v = np.asarray(v_radial, dtype=float)
        if v.shape != (grid.N,):
            raise GridError("v_radial samples do not match the grid")
    return ChannelOperator(int(j), grid, diag, sub, v, scheme)


@dataclass(frozen=True)
class CoupledOperator:
    """Channels ``-J..J`` coupled by an angular potential.

    Block ``c = j + J`` holds the free nodes of channel ``j`` in ``(u, w)``
    order, so blocks of channels with ``j >= 0`` are ``2j + 1`` rows shorter.
    """

    J: int
    grid: RadialGrid
    channels: tuple[ChannelOperator, ...]
    matrix: sp.csr_matrix
    potential: PotentialSpec

    @property
    def js(self) -> list[int]:
        return list(range(-self.J, self.J + 1))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _free_index(ch: ChannelOperator) -> np.ndarray:
    N = ch.N
    return np.concatenate([np.arange(ch.pin_u, N), N + np.arange(ch.pin_w, N)])


def _coupling_block(vn: np.ndarray, row: ChannelOperator, col: ChannelOperator) -> sp.csr_matrix:
    """``diag(vn)`` on both components, restricted to the free nodes."""
    rows, cols = _free_index(row), _free_index(col)
    full = sp.kron(sp.identity(2), sp.diags(vn), format="csr")
    return full[rows][:, cols]


def build_coupled(J: int, gauge: RadialGauge, grid: RadialGrid, pot: PotentialSpec,
                  scheme: str = "trapezoid") -> CoupledOperator:
    """Assemble the windowed multi-channel operator."""
    if int(J) != J or J < 0:
        raise ParameterError(f"J must be a nonnegative integer, got {J}")
    J = int(J)
    if pot.n_max > 2 * J:
        raise BandwidthError(f"potential bandwidth {pot.n_max} exceeds window 2J = {2 * J}")
    r = grid.r
    N = grid.N
    v0 = pot.vhat(r, 0)
    if np.any(np.abs(v0.imag) > 0):
        raise ParameterError("vhat(r, 0) must be real")
    chans = tuple(build_channel(j, gauge, grid, v0.real, scheme) for j in range(-J, J + 1))
    nch = 2 * J + 1
    blocks: list[list] = [[None] * nch for _ in range(nch)]
    for c, ch in enumerate(chans):
        blocks[c][c] = ch.assembled()
    complex_needed = False
    for n in range(1, pot.n_max + 1):
        vn = pot.vhat(r, n)
        if not np.any(vn):
            continue
        if np.any(vn.imag != 0):
            complex_needed = True
        for c in range(nch - n):
            # row channel l = j + n couples to column j with vhat(l - j) = vhat(n)
            blk = _coupling_block(vn, chans[c + n], chans[c])
            blocks[c + n][c] = blk
            blocks[c][c + n] = blk.conj().T
    M = sp.bmat(blocks, format="csr")
    M = M.astype(complex) if complex_needed else M.real.tocsr()
    return CoupledOperator(J, grid, chans, M, pot)


@dataclass
class SpectralResult:
    """Eigenpairs found in a window.

    ``eigenvectors`` has shape ``(n_eig, n_channels, N, 2)`` with the last
    axis ``(u, w)``; each is normalized to ``dr * sum |psi|^2 = 1``.
    ``channel`` is the channel carrying most of each eigenvector's mass.
    """

    eigenvalues: np.ndarray
    channel: np.ndarray
    residuals: np.ndarray
    eigenvectors: np.ndarray | None
    channels: list[int]
    grid: RadialGrid
    window: tuple[float, float]
    norm: float
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    def channel_masses(self, k: int) -> np.ndarray:
        """Per-channel L2 mass of eigenvector ``k``."""
        if self.eigenvectors is None:
            raise ParameterError("result carries no eigenvectors")
        v = self.eigenvectors[k]
        return self.grid.dr * np.sum(np.abs(v) ** 2, axis=(1, 2))

    def amplitude(self, k: int) -> np.ndarray:
        """Spinor norm ``rho(r) = sqrt(sum_j |psi_j(r)|^2)`` on the grid."""
        if self.eigenvectors is None:
            raise ParameterError("result carries no eigenvectors")
        return np.sqrt(np.sum(np.abs(self.eigenvectors[k]) ** 2, axis=(0, 2)))

    @staticmethod
    def concatenate(results: Sequence["SpectralResult"], keep_vectors: bool = False) -> "SpectralResult":
        """Merge single-channel results; eigenvalues re-sorted."""
        if not results:
            raise ParameterError("nothing to concatenate")
        grid = results[0].grid
        chans = sorted({c for res in results for c in res.channels})
        vals = np.concatenate([res.eigenvalues for res in results])
        lab = np.concatenate([res.channel for res in results])
        resid = np.concatenate([res.residuals for res in results])
        order = np.argsort(vals, kind="stable")
        vecs = None
        if keep_vectors:
            vecs = np.zeros((vals.size, len(chans), grid.N, 2),
                            dtype=np.result_type(*[res.eigenvectors for res in results]))
            pos = 0
            for res in results:
                for k in range(len(res)):
                    for ci, c in enumerate(res.channels):
                        vecs[pos + k, chans.index(c)] = res.eigenvectors[k, ci]
                pos += len(res)
            vecs = vecs[order]
        return SpectralResult(vals[order], lab[order], resid[order], vecs, chans, grid,
                              results[0].window, max(res.norm for res in results),
                              {"merged": len(results), **results[0].metadata})


def _tridiag_extremes(d: np.ndarray, off: np.ndarray) -> tuple[float, float]:
    """Smallest and largest eigenvalue by Sturm-count bisection."""
    n = d.size
    rad = np.zeros(n)
    rad[:-1] += np.abs(off)
    rad[1:] += np.abs(off)
    lo, hi = float(np.min(d - rad)), float(np.max(d + rad))
    span = max(hi - lo, 1.0)
    out = []
    for target in (1, n):
        a, b = lo - _EPS * span, hi + _EPS * span
        # smallest x with count(x) >= target lies in (a, b]
        for _ in range(200):
            mid = 0.5 * (a + b)
            if not (a < mid < b) or b - a <= 4 * _EPS * span:
                break
            if kernels.sturm_count(d, off, mid) >= target:
                b = mid
            else:
                a = mid
        out.append(0.5 * (a + b))
    return out[0], out[1]


def _tridiag_matvec(d: np.ndarray, off: np.ndarray, x: np.ndarray) -> np.ndarray:
    y = d * x
    y[:-1] += off * x[1:]
    y[1:] += off * x[:-1]
    return y


def _inverse_iteration(d, off, evals, norm, seed: int = 12345):
    """Eigenvectors for sorted ``evals`` with reorthogonalization in clusters."""
    n = d.size
    rng = np.random.default_rng(seed)
    vecs = np.empty((evals.size, n))
    resid = np.empty(evals.size)
    cluster_gap = 1e-3 * max(norm, 1.0) / n ** 0.5
    start = 0
    for k, lam in enumerate(evals):
        if k > 0 and lam - evals[k - 1] > cluster_gap:
            start = k
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        best = None
        for it in range(6):
            y = kernels.solve_shifted(d, off, float(lam), x)
            for p in range(start, k):
                y -= (vecs[p] @ y) * vecs[p]
            nrm = np.linalg.norm(y)
            if not np.isfinite(nrm) or nrm == 0:
                raise SolverError("inverse iteration broke down", {"eigenvalue": float(lam), "iteration": it})
            x = y / nrm
            r = np.linalg.norm(_tridiag_matvec(d, off, x) - lam * x)
            if best is None or r < best[0]:
                best = (r, x.copy())
            if r <= 1e-2 * RESIDUAL_FACTOR * norm and it >= 1:
                break
        resid[k], vecs[k] = best
    return vecs, resid


def _select(vals: np.ndarray, window: tuple[float, float], max_pairs: int | None):
    lo, hi = window
    edge = (np.abs(vals - lo) <= EDGE_TOL) | (np.abs(vals - hi) <= EDGE_TOL)
    if np.any(edge):
        warnings.warn(f"eigenvalue within {EDGE_TOL:g} of window endpoint: {vals[edge]}",
                      WindowEdgeWarning, stacklevel=3)
    keep = np.flatnonzero((vals >= lo) & (vals < hi))
    truncated = False
    if max_pairs is not None and keep.size > max_pairs:
        centre = 0.5 * (lo + hi)
        keep = np.sort(keep[np.argsort(np.abs(vals[keep] - centre), kind="stable")[:max_pairs]])
        truncated = True
    return keep, truncated


def _solve_channel(op: ChannelOperator, window, max_pairs, vectors: bool) -> SpectralResult:
    d, off = op.tridiagonal()
    lam_min, lam_max = _tridiag_extremes(d, off)
    norm = max(abs(lam_min), abs(lam_max))
    lo, hi = window
    abstol = 2.0 * _EPS * norm
    vals = np.asarray(kernels.bisect_eigenvalues(d, off, lo - 2 * EDGE_TOL, hi + 2 * EDGE_TOL, abstol))
    keep, truncated = _select(vals, window, max_pairs)
    vals = vals[keep]
    X, resid = _inverse_iteration(d, off, vals, norm)
    bad = resid > RESIDUAL_FACTOR * norm
    if np.any(bad):
        raise SolverError("residual contract violated",
                          {"eigenvalues": vals[bad].tolist(), "residuals": resid[bad].tolist(), "norm": norm})
    vecs = None
    if vectors:
        vecs = np.empty((vals.size, 1, op.N, 2))
        for k in range(vals.size):
            vecs[k, 0] = op.split_interleaved(X[k]) / math.sqrt(op.grid.dr)
    meta = {"route": "tridiagonal-bisection", "backend": kernels.__name__.rsplit(".", 1)[-1],
            "scheme": op.scheme, "j": op.j, "truncated": truncated, "dim": op.dim}
    return SpectralResult(vals, np.full(vals.size, op.j), resid, vecs, [op.j], op.grid,
                          (float(lo), float(hi)), norm, meta)


def _sparse_norm2(M: sp.spmatrix) -> float:
    try:
        w = spla.eigsh(M, k=1, which="LM", return_eigenvectors=False, tol=1e-6, maxiter=5000)
        return float(abs(w[0]))
    except Exception:  # pragma: no cover - fall back to an upper bound
        return float(spla.norm(M, 1))


_SHIFT_OFFSET = 0.0123456789


def _eigsh_shifted(M, k: int, sigma: float, width: float, attempts: int = 4):
    """Shift-invert Lanczos; nudges the shift when the factorization is singular."""
    dim = M.shape[0]
    Mc = M.tocsc()
    for i in range(attempts):
        s = sigma + i * 1e-3 * width
        try:
            return spla.eigsh(Mc, k=k, sigma=s, which="LM", tol=0.0, maxiter=20 * dim)
        except spla.ArpackNoConvergence as exc:
            raise SolverError("shift-invert iteration did not converge",
                              {"k": k, "sigma": s, "converged": len(exc.eigenvalues)}) from exc
        except RuntimeError as exc:
            if "singular" not in str(exc):
                raise SolverError(f"shift-invert factorization failed: {exc}", {"k": k, "sigma": s}) from exc
    raise SolverError("shift-invert factorization singular at every trial shift", {"k": k, "sigma": sigma})


def _solve_matrix(M, chans: Sequence[ChannelOperator], grid: RadialGrid, window, max_pairs,
                  vectors: bool, route: str | None, meta: dict) -> SpectralResult:
    dim = M.shape[0]
    lo, hi = window
    if route is None:
        route = "dense" if dim <= DENSE_LIMIT else "shift-invert"
    if route == "dense":
        A = M.toarray() if sp.issparse(M) else np.asarray(M)
        ext = sla.eigvalsh(A, subset_by_index=(0, 0)), sla.eigvalsh(A, subset_by_index=(dim - 1, dim - 1))
        norm = float(max(abs(ext[0][0]), abs(ext[1][0])))
        vals, X = sla.eigh(A, subset_by_value=(lo - 2 * EDGE_TOL, hi + 2 * EDGE_TOL), driver="evr")
    elif route == "shift-invert":
        norm = _sparse_norm2(M)
        # off-centre shift: exact eigenvalues (zero modes) often sit at the centre
        sigma = 0.5 * (lo + hi) + _SHIFT_OFFSET * (hi - lo)
        k = 16
        while True:
            k = min(k, dim - 2)
            vals, X = _eigsh_shifted(M, k, sigma, hi - lo)
            order = np.argsort(vals)
            vals, X = vals[order], X[:, order]
            reach = max(sigma - lo, hi - sigma) + 2 * EDGE_TOL
            if np.max(np.abs(vals - sigma)) > reach or k >= dim - 2:
                break
            k *= 2
        sel = (vals >= lo - 2 * EDGE_TOL) & (vals < hi + 2 * EDGE_TOL)
        vals, X = vals[sel], X[:, sel]
    else:
        raise ParameterError(f"unknown route {route!r}")
    keep, truncated = _select(vals, window, max_pairs)
    vals, X = vals[keep], X[:, keep]
    R = M @ X - X * vals
    resid = np.linalg.norm(R, axis=0) / np.maximum(np.linalg.norm(X, axis=0), 1e-300)
    bad = resid > RESIDUAL_FACTOR * norm
    if np.any(bad):
        raise SolverError("residual contract violated",
                          {"eigenvalues": vals[bad].tolist(), "residuals": resid[bad].tolist(), "norm": norm})
    js = [ch.j for ch in chans]
    V = np.zeros((vals.size, len(chans), grid.N, 2), dtype=X.dtype)
    pos = 0
    for c, ch in enumerate(chans):
        for k in range(vals.size):
            V[k, c] = ch.embed(X[pos:pos + ch.dim, k])
        pos += ch.dim
    V /= math.sqrt(grid.dr)
    masses = grid.dr * np.sum(np.abs(V) ** 2, axis=(2, 3))
    lab = np.array([js[int(np.argmax(mrow))] for mrow in masses], dtype=int)
    meta = {**meta, "route": route, "truncated": truncated, "dim": dim}
    return SpectralResult(vals, lab, resid, V if vectors else None, list(js), grid,
                          (float(lo), float(hi)), norm, meta)


def solve_spectrum(op: ChannelOperator | CoupledOperator, window: tuple[float, float],
                   max_pairs: int | None = None, vectors: bool = True,
                   route: str | None = None) -> SpectralResult:
    """All eigenpairs of ``op`` with eigenvalue in ``[window[0], window[1])``.

    Single channels use tridiagonal bisection plus inverse iteration unless
    ``route="dense"`` is requested.  Coupled operators use a dense solve up
    to dimension ``DENSE_LIMIT`` and shift-invert Lanczos above it.

    Raises
    ------
    SolverError
        When the iteration fails or a residual exceeds ``1e-8 * ||M||``.
    """
    lo, hi = (float(window[0]), float(window[1]))
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ParameterError(f"window must be a finite interval with lo < hi, got {window}")
    if max_pairs is not None and max_pairs < 0:
        raise ParameterError("max_pairs must be nonnegative")
    if isinstance(op, ChannelOperator):
        if route in (None, "tridiagonal"):
            return _solve_channel(op, (lo, hi), max_pairs, vectors)
        meta = {"scheme": op.scheme, "j": op.j}
        return _solve_matrix(op.assembled(), [op], op.grid, (lo, hi), max_pairs, vectors, route, meta)
    if isinstance(op, CoupledOperator):
        meta = {"scheme": op.channels[0].scheme, "J": op.J, "potential": op.potential.to_dict()}
        return _solve_matrix(op.matrix, op.channels, op.grid, (lo, hi), max_pairs, vectors, route, meta)
    raise ParameterError(f"cannot solve {type(op).__name__}")


def solve_channels(js: Sequence[int], gauge: RadialGauge, grid: RadialGrid,
                   window: tuple[float, float], v_radial=None, scheme: str = "trapezoid",
                   threads: int = 0, vectors: bool = False) -> list[SpectralResult]:
    """Build and solve independent channels, in parallel when ``threads != 1``."""
    def work(j: int) -> SpectralResult:
        return solve_spectrum(build_channel(j, gauge, grid, v_radial, scheme), window, vectors=vectors)

    js = list(js)
    if threads == 1 or len(js) <= 1:
        return [work(j) for j in js]
    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        return list(pool.map(work, js))


def richardson_order(e1: float, e2: float, e3: float, ratio: float = 2.0) -> float:
    """Observed convergence order from values at spacings ``h, h/ratio, h/ratio**2``."""
    d1, d2 = abs(e1 - e2), abs(e2 - e3)
    if d2 == 0.0:
        return math.inf if d1 > 0 else math.nan
    if d1 == 0.0:
        return math.nan
    return math.log(d1 / d2) / math.log(ratio)

"""Band structures, wavefunctions and localisation diagnostics.

Bands come from the plane-wave Bloch Hamiltonian; :func:`fd_band_oracle`
recomputes them from a real-space finite-difference discretisation that
knows nothing about plane waves or gauges.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg
from scipy.optimize import linear_sum_assignment

from .eig import EigenSolverError, canonical_order, eig
from .model import DEFAULT_TRUNCATION, build_bloch

__all__ = [
    "BandStructure",
    "FdGrid",
    "TailProfile",
    "align_wavefunction",
    "band_sweep",
    "fd_band_oracle",
    "participation_ratio",
    "reconstruct_wavefunction",
    "tail_profile",
]


@dataclass(frozen=True)
class BandStructure:
    """Lowest ``band_count`` energies per k-point, in canonical order.

    ``order[i]`` maps the continued band labels at ``k_grid[i]`` onto the
    canonical columns, following maximal eigenvector overlap from one
    k-point to the next (see :meth:`tracked_energies`).
    """

    k_grid: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray = field(default=None, repr=False)
    order: np.ndarray = field(default=None, repr=False)
    truncation: int = DEFAULT_TRUNCATION

    @property
    def band_count(self):
        return self.energies.shape[1]

    def band(self, n):
        """Energies of band ``n`` (1-based) across the k-grid."""
        return self.energies[:, n - 1]

    def tracked_energies(self):
        if self.order is None:
            return self.energies
        return np.take_along_axis(self.energies, self.order, axis=1)

    def rows(self):
        """``(k, band, re, im)`` tuples, one per (k, band)."""
        for i, k in enumerate(self.k_grid):
            for n in range(self.band_count):
                w = self.energies[i, n]
                yield k, n + 1, w.real, w.imag


def _resolve_threads(threads):
    if threads is None:
        threads = int(os.environ.get("NHBLOCH_THREADS", "1") or 1)
    return max(1, int(threads))


def _solve_k(potential, k, M, n_bands):
    H = build_bloch(potential, k, M)
    try:
        dec = eig(H.matrix)
    except EigenSolverError as exc:
        raise EigenSolverError(f"at k={k}: {exc}", block=exc.block) from exc
    return dec.eigenvalues[:n_bands], dec.vectors[:, :n_bands]


def band_sweep(potential, k_grid, M=DEFAULT_TRUNCATION, n_bands=3, threads=None):
    """Lowest ``n_bands`` bands of ``potential`` on ``k_grid``."""
    if n_bands < 1:
        raise ValueError("n_bands must be >= 1")
    if n_bands > 2 * M - 2:
        raise ValueError(f"n_bands={n_bands} too close to the truncation edge for M={M}")
    k_grid = np.asarray(k_grid, dtype=float).ravel()
    threads = _resolve_threads(threads)
    if threads > 1 and len(k_grid) > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda k: _solve_k(potential, k, M, n_bands), k_grid))
    else:
        results = [_solve_k(potential, k, M, n_bands) for k in k_grid]
    energies = np.array([r[0] for r in results])
    vectors = np.array([r[1].T for r in results])

    order = np.empty(energies.shape, dtype=int)
    order[0] = np.arange(n_bands)
    for i in range(1, len(k_grid)):
        prev = vectors[i - 1][order[i - 1]]
        overlap = np.abs(prev.conj() @ vectors[i].T)
        _, cols = linear_sum_assignment(-overlap)
        order[i] = cols
    return BandStructure(k_grid, energies, vectors, order, M)


@dataclass(frozen=True)
class FdGrid:
    """Uniform grid of ``points`` nodes over one period with a Bloch twist
    ``exp(i k a)`` across the cell boundary."""

    points: int
    period: float
    k: float

    def __post_init__(self):
        if self.points < 64:
            raise ValueError(f"finite-difference grid needs at least 64 points, got {self.points}")

    @property
    def spacing(self):
        return self.period / self.points

    @property
    def bloch_phase(self):
        return complex(np.exp(2j * math.pi * self.k))

    @property
    def x(self):
        return np.arange(self.points) * self.spacing


def fd_matrix(potential, k, N):
    """Sparse second-order finite-difference matrix of ``-d2/dx2 + V(x)``
    acting on Bloch functions, ``psi(x + a) = exp(i k a) psi(x)``."""
    grid = FdGrid(int(N), potential.period, k)
    h = grid.spacing
    inv_h2 = 1.0 / h ** 2
    diag = 2.0 * inv_h2 + potential(grid.x)
    off = np.full(N - 1, -inv_h2, dtype=complex)
    mat = scipy.sparse.diags([off, diag, off], [-1, 0, 1], format="lil", dtype=complex)
    mat[N - 1, 0] = -inv_h2 * grid.bloch_phase
    mat[0, N - 1] = -inv_h2 * np.conj(grid.bloch_phase)
    return mat.tocsc()


def fd_band_oracle(potential, k, N=1024, n_bands=3):
    """Lowest ``n_bands`` eigenvalues of the real-space FD Hamiltonian.

    Uses shift-invert ARPACK below the bottom of the spectrum and returns
    the values in canonical order.
    """
    if N < 64:
        raise ValueError(f"N must be >= 64, got {N}")
    mat = fd_matrix(potential, k, N)
    vx = potential(FdGrid(int(N), potential.period, k).x)
    sigma = float(np.min(vx.real)) - 1.0
    nev = min(n_bands + 6, N - 2)
    v0 = np.ones(N, dtype=complex)
    vals = scipy.sparse.linalg.eigs(mat, k=nev, sigma=sigma, which="LM", v0=v0,
                                    return_eigenvectors=False, tol=1e-13)
    vals = vals[canonical_order(vals, float(np.max(np.abs(vals))))]
    return vals[:n_bands]


def participation_ratio(coeffs):
    """``(sum |a|^2)^2 / sum |a|^4``; 1 for a single plane wave."""
    p = np.abs(np.asarray(coeffs)) ** 2
    s = p.sum()
    if s == 0:
        raise ValueError("participation ratio of a zero vector is undefined")
    p = p / s
    return float(1.0 / np.sum(p * p))


def reconstruct_wavefunction(coeffs, k, x_grid, period=2 * math.pi):
    """``psi(x) = exp(i k G x) sum_m a_m exp(i m G x)``, ``m = -M..M``."""
    coeffs = np.asarray(coeffs)
    x = np.asarray(x_grid, dtype=float)
    M = (len(coeffs) - 1) // 2
    G = 2 * math.pi / period
    m = np.arange(-M, M + 1)
    return np.exp(1j * k * G * x) * (np.exp(1j * G * np.outer(x, m)) @ coeffs)


def align_wavefunction(psi):
    """Scale to unit peak amplitude and rotate so the peak is real positive."""
    psi = np.asarray(psi)
    k = int(np.argmax(np.abs(psi)))
    return psi / psi[k]


@dataclass(frozen=True)
class TailProfile:
    quadratic_coeff: float
    linear_coeff: float
    constant: float
    residuals: float
    n_points: int
    verdict: str

    @property
    def super_exponential(self):
        return self.verdict == "super-exponential"

    @property
    def center(self):
        """Vertex ``-b / 2a`` of the fitted parabola in ``m``."""
        return -self.linear_coeff / (2 * self.quadratic_coeff)


def tail_profile(coeffs, floor=1e-13, min_points=5):
    """Least-squares fit of ``ln|a_m|`` to ``c + b m + a m^2``.

    Only amplitudes above ``floor`` enter. The tail is called
    super-exponential when ``a < 0`` and ``|a| > |b| / M``.
    """
    coeffs = np.asarray(coeffs)
    if len(coeffs) < 9:
        raise ValueError("tail_profile needs at least 9 coefficients")
    M = (len(coeffs) - 1) // 2
    m = np.arange(-M, M + 1)
    amp = np.abs(coeffs)
    keep = amp > floor
    if keep.sum() < min_points:
        return TailProfile(math.nan, math.nan, math.nan, math.nan, int(keep.sum()), "inconclusive")
    mk = m[keep].astype(float)
    design = np.column_stack([np.ones_like(mk), mk, mk ** 2])
    sol, res, _, _ = np.linalg.lstsq(design, np.log(amp[keep]), rcond=None)
    c, b, a = sol
    resid = float(res[0]) if len(res) else 0.0
    verdict = "super-exponential" if (a < 0 and abs(a) > abs(b) / M) else "not super-exponential"
    return TailProfile(float(a), float(b), float(c), resid, int(keep.sum()), verdict)

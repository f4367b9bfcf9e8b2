"""Dense complex non-Hermitian eigensolver.

Balancing (permutation + diagonal scaling), Householder reduction to upper
Hessenberg form and implicitly shifted complex QR give the eigenvalues;
right eigenvectors come from inverse iteration on the balanced matrix.
Nothing here calls LAPACK, so the solver is the same on every platform.

Defective matrices (exceptional points) are not special-cased: coalescing
eigenpairs simply come back with nearly parallel eigenvectors.
"""

from dataclasses import dataclass

import numpy as np

from . import _qr

__all__ = [
    "EigenDecomposition",
    "EigenSolverError",
    "canonical_order",
    "eig",
    "eig_values_only",
    "left_eigenvectors",
]

RESIDUAL_RTOL = 1e-10
INVERSE_ITERATIONS = 3
SWEEPS_PER_DIMENSION = 30


class EigenSolverError(RuntimeError):
    """Raised when the QR iteration fails to deflate or a postcondition fails.

    ``block`` holds the (first, last) row of the stuck deflation block when
    the failure is a convergence failure, otherwise ``None``.
    """

    def __init__(self, msg, block=None):
        super().__init__(msg)
        self.block = block


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues with unit-norm right eigenvectors (columns of ``vectors``).

    Eigenvalues are in canonical order: ascending real part, ties broken by
    ascending imaginary part. Each eigenvector has Euclidean norm one and its
    largest-magnitude entry is real and positive.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def right_eigenvectors(self):
        return [self.vectors[:, i] for i in range(self.vectors.shape[1])]


def _as_matrix(matrix):
    a = np.array(matrix, dtype=np.complex128, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        raise ValueError("matrix dimension must be at least 1")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _tie_tolerance(scale):
    return 1e-9 * max(1.0, scale)


def canonical_order(values, scale=1.0):
    """Indices sorting ``values`` by real part, then imaginary part.

    Real parts closer than ``1e-9 * max(1, scale)`` count as equal, so the
    two members of a complex-conjugate pair are ordered by imaginary part
    even when rounding made their real parts differ in the last bits.
    """
    values = np.asarray(values)
    idx = np.argsort(values.real, kind="stable")
    tol = _tie_tolerance(scale)
    out = []
    start = 0
    n = len(idx)
    while start < n:
        stop = start + 1
        while stop < n and values.real[idx[stop]] - values.real[idx[stop - 1]] <= tol:
            stop += 1
        group = idx[start:stop]
        out.extend(group[np.argsort(values.imag[group], kind="stable")])
        start = stop
    return np.array(out, dtype=int)


def _balanced(a):
    b = a.copy()
    ilo, ihi, perm, scale = _qr.balance(b)
    return b, ilo, ihi, perm, scale


def _values_of_balanced(b, ilo, ihi):
    n = b.shape[0]
    w = np.empty(n, dtype=np.complex128)
    w[:ilo] = np.diag(b)[:ilo]
    w[ihi + 1:] = np.diag(b)[ihi + 1:]
    if ihi >= ilo:
        block = np.ascontiguousarray(b[ilo:ihi + 1, ilo:ihi + 1])
        size = block.shape[0]
        _qr.hessenberg(block)
        vals, status, lo, hi, _ = _qr.hessenberg_qr(block, SWEEPS_PER_DIMENSION * size)
        if status != _qr.QR_OK:
            first, last = ilo + lo, ilo + hi
            raise EigenSolverError(
                f"QR iteration did not converge after {SWEEPS_PER_DIMENSION * size} sweeps; "
                f"stuck deflation block rows {first}..{last} (balanced ordering)",
                block=(first, last),
            )
        w[ilo:ihi + 1] = vals
    return w


def _check_trace(a, values, fro):
    err = abs(np.sum(values) - np.trace(a))
    if err > RESIDUAL_RTOL * max(1.0, fro):
        raise EigenSolverError(f"trace check failed: |sum(lambda) - tr(H)| = {err:.3e}")


def eig_values_only(matrix):
    """Eigenvalues of a dense complex square matrix in canonical order."""
    a = _as_matrix(matrix)
    fro = np.linalg.norm(a)
    b, ilo, ihi, _, _ = _balanced(a)
    w = _values_of_balanced(b, ilo, ihi)
    _check_trace(a, w, fro)
    return w[canonical_order(w, fro)]


def _start_vector(n, j):
    if j == 0:
        return np.full(n, 1.0 / np.sqrt(n), dtype=np.complex128)
    m = np.arange(n)
    v = np.exp(1j * (0.6180339887498949 * j * (m + 1) ** 1.5)) * (1.0 + 0.25 * np.sin(j * (m + 1)))
    return v / np.linalg.norm(v)


def _fix_phase(v):
    k = int(np.argmax(np.abs(v)))
    if v[k] != 0:
        v = v * (abs(v[k]) / v[k])
    v = v / np.linalg.norm(v)
    v[k] = abs(v[k])  # drop rounding residue in the imaginary part
    return v


def eig(matrix):
    """Eigenvalues and unit right eigenvectors of a dense complex matrix.

    Raises :class:`EigenSolverError` when the QR iteration exceeds its
    budget of ``30 * n`` sweeps or a residual exceeds
    ``1e-10 * max(1, ||H||_F)``.
    """
    a = _as_matrix(matrix)
    n = a.shape[0]
    fro = np.linalg.norm(a)
    b, ilo, ihi, perm, scale = _balanced(a)
    w = _values_of_balanced(b, ilo, ihi)
    _check_trace(a, w, fro)
    w = w[canonical_order(w, fro)]

    bnorm = max(np.linalg.norm(b), _qr.SAFMIN)
    eps3 = _qr.ULP * bnorm
    cluster_tol = 1e3 * eps3 + 1e-8 * max(1.0, np.max(np.abs(w)))
    accept_tol = 1e2 * eps3

    ys = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        lam = w[i]
        y = _qr.inverse_iteration(b, lam, _start_vector(n, 0), eps3, INVERSE_ITERATIONS)
        partners = [j for j in range(i) if abs(w[j] - lam) <= cluster_tol]
        if partners:
            # Degenerate eigenvalue: prefer a vector orthogonal to the ones
            # already found, but only if it is still an eigenvector (it is
            # not when the matrix is defective there).
            alt = _qr.inverse_iteration(b, lam, _start_vector(n, len(partners)), eps3, INVERSE_ITERATIONS)
            basis = ys[:, partners]
            q, _ = np.linalg.qr(basis)
            alt = alt - q @ (q.conj().T @ alt)
            nrm = np.linalg.norm(alt)
            if nrm > 1e-8:
                alt = alt / nrm
                if np.linalg.norm(b @ alt - lam * alt) <= accept_tol:
                    y = alt
        ys[:, i] = y

    # back-transform: x[perm] = D y
    z = scale[:, None] * ys
    vectors = np.empty_like(z)
    vectors[perm, :] = z
    residuals = np.empty(n)
    limit = RESIDUAL_RTOL * max(1.0, fro)
    for i in range(n):
        v = _fix_phase(vectors[:, i])
        r = np.linalg.norm(a @ v - w[i] * v)
        if not r <= limit:
            # Extreme diagonal scaling (nearly one-way couplings) can wreck
            # the back-transformed vector; redo it on the unscaled matrix.
            v = _qr.inverse_iteration(a, w[i], _start_vector(n, 0), _qr.ULP * max(fro, _qr.SAFMIN),
                                      2 * INVERSE_ITERATIONS)
            v = _fix_phase(v)
            r = np.linalg.norm(a @ v - w[i] * v)
            if not r <= limit:
                raise EigenSolverError(
                    f"eigenvector residual {r:.3e} exceeds {limit:.3e} for eigenvalue {w[i]:.6g}"
                )
        vectors[:, i] = v
        residuals[i] = r
    return EigenDecomposition(eigenvalues=w, vectors=vectors, residuals=residuals)


def left_eigenvectors(matrix, eigenvalues):
    """Unit left eigenvectors ``y`` (``y^H H = lambda y^H``) matched to
    ``eigenvalues``.

    They are right eigenvectors of ``H^H`` for the conjugate eigenvalues,
    paired to the requested eigenvalues by proximity.
    """
    a = _as_matrix(matrix)
    dec = eig(a.conj().T)
    targets = np.conj(np.asarray(eigenvalues))
    used = set()
    out = np.empty((a.shape[0], len(targets)), dtype=np.complex128)
    for i, lam in enumerate(targets):
        order = np.argsort(np.abs(dec.eigenvalues - lam))
        j = next((int(j) for j in order if int(j) not in used), int(order[0]))
        used.add(j)
        out[:, i] = dec.vectors[:, j]
    return out

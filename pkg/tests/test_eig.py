import itertools

import mpmath
import numpy as np
import pytest

from nhbloch.eig import EigenSolverError, canonical_order, eig, eig_values_only, left_eigenvectors
from nhbloch.ep import truncated_models
from nhbloch.model import build_bloch, v1


def random_matrix(rng, n, kind="general"):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if kind == "hermitian":
        a = (a + a.conj().T) / 2
    elif kind == "real":
        a = a.real.astype(complex)
    elif kind == "tridiagonal":
        a = np.triu(np.tril(a, 1), -1)
    return a


def cofactor_det(a):
    """Laplace expansion along the first row; exact-arithmetic oracle in
    structure, independent of any factorisation."""
    n = a.shape[0]
    if n == 1:
        return a[0, 0]
    total = 0j
    for j in range(n):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += (-1) ** j * a[0, j] * cofactor_det(minor)
    return total


def companion_roots(a):
    """Eigenvalues as roots of det(lambda I - A), coefficients from the
    Faddeev-LeVerrier recursion in 50-digit arithmetic, roots by mpmath."""
    mpmath.mp.dps = 50
    n = a.shape[0]
    A = mpmath.matrix([[mpmath.mpc(complex(v)) for v in row] for row in a])
    coeffs = [mpmath.mpc(1)]
    M = mpmath.zeros(n, n)
    eye = mpmath.eye(n)
    for k in range(1, n + 1):
        M = A * M + coeffs[-1] * eye
        AM = A * M
        c = -sum(AM[i, i] for i in range(n)) / k
        coeffs.append(c)
    roots = mpmath.polyroots(coeffs, maxsteps=500, extraprec=200)
    return np.array([complex(r) for r in roots])


def match_multisets(x, y):
    x, y = list(x), list(y)
    worst = 0.0
    for v in x:
        j = int(np.argmin([abs(v - w) for w in y]))
        worst = max(worst, abs(v - y.pop(j)))
    return worst


def test_identity():
    dec = eig(np.eye(3))
    np.testing.assert_array_equal(dec.eigenvalues, [1, 1, 1])
    assert np.linalg.matrix_rank(dec.vectors) == 3


def test_diagonal_values_only():
    # canonical order: ascending real part
    np.testing.assert_array_equal(eig_values_only(np.diag([2, 3j])), [3j, 2])


def test_h3_at_tau1():
    m = truncated_models("H3", 1.0, 1.0)
    np.testing.assert_allclose(eig(m.matrix).eigenvalues, [0, 1, 1], atol=1e-12)


def test_h2_real_and_complex():
    m = truncated_models("H2", 1.0, 0.8)
    np.testing.assert_allclose(eig(m.matrix).eigenvalues, [-0.05, 0.55], atol=1e-14)
    m = truncated_models("H2", 1.0, 1.1)
    t = np.sqrt(0.21) / 2
    np.testing.assert_allclose(eig_values_only(m.matrix), [0.25 - 1j * t, 0.25 + 1j * t],
                               atol=1e-14)


def test_canonical_order_ties():
    vals = np.array([1 + 2j, 1 - 1e-13 - 1j, 0.5 + 0j])
    np.testing.assert_array_equal(canonical_order(vals), [2, 1, 0])


@pytest.mark.parametrize("seed", range(10))
def test_companion_matrix_oracle(seed):
    rng = np.random.default_rng(seed)
    a = random_matrix(rng, 6)
    assert match_multisets(eig_values_only(a), companion_roots(a)) < 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_eigenvector_contract(seed):
    rng = np.random.default_rng(100 + seed)
    a = random_matrix(rng, 20)
    dec = eig(a)
    fro = np.linalg.norm(a)
    for i in range(20):
        v = dec.vectors[:, i]
        assert abs(np.linalg.norm(v) - 1) < 1e-14
        k = np.argmax(np.abs(v))
        assert v[k].imag == 0 and v[k].real > 0
        assert np.linalg.norm(a @ v - dec.eigenvalues[i] * v) <= 1e-10 * max(1, fro)
    np.testing.assert_allclose(eig_values_only(a), dec.eigenvalues, atol=1e-12)


def test_triangular_and_permuted_matrices_are_exact():
    a = np.triu(np.arange(1, 26).reshape(5, 5)).astype(complex)
    np.testing.assert_array_equal(eig_values_only(a), [1, 7, 13, 19, 25])
    p = np.eye(5)[[3, 0, 4, 1, 2]]
    np.testing.assert_array_equal(eig_values_only(p @ a @ p.T), [1, 7, 13, 19, 25])


def test_jordan_block_is_measured_not_resolved():
    a = np.array([[2, 1], [0, 2]], dtype=complex)
    dec = eig(a)
    np.testing.assert_array_equal(dec.eigenvalues, [2, 2])
    assert abs(np.vdot(dec.vectors[:, 0], dec.vectors[:, 1])) > 0.999


def test_left_eigenvectors():
    rng = np.random.default_rng(7)
    a = random_matrix(rng, 8)
    dec = eig(a)
    y = left_eigenvectors(a, dec.eigenvalues)
    for i in range(8):
        lhs = y[:, i].conj() @ a
        assert np.linalg.norm(lhs - dec.eigenvalues[i] * y[:, i].conj()) < 1e-10


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        eig(np.ones((2, 3)))
    with pytest.raises(ValueError):
        eig(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        eig(np.zeros((0, 0)))


def test_solver_error_carries_block():
    err = EigenSolverError("stuck", block=(3, 5))
    assert err.block == (3, 5) and "stuck" in str(err)


def test_nearly_one_way_coupling():
    # balancing scales span ~1e130 here; eigenvectors must still satisfy the contract
    n = 9
    a = np.diag(np.arange(n, dtype=float) ** 2).astype(complex)
    for i in range(n - 1):
        a[i + 1, i] = 1.0
        a[i, i + 1] = 1e-17
    dec = eig(a)
    assert np.max(dec.residuals) <= 1e-10 * max(1, np.linalg.norm(a))


# Property suite -------------------------------------------------------------

SIZES = [1, 2, 3, 5, 8, 12, 16, 24, 32, 48, 64]
KINDS = ["general", "hermitian", "real", "tridiagonal"]
CASES = list(itertools.islice(itertools.cycle(itertools.product(SIZES, KINDS)), 200))


def property_failures(seed, n, kind):
    """Names of violated invariants for one random matrix."""
    rng = np.random.default_rng(seed)
    a = random_matrix(rng, n, kind)
    fro = np.linalg.norm(a)
    w = eig_values_only(a)
    bad = []
    if len(w) != n:
        bad.append("count")
    if abs(w.sum() - np.trace(a)) > 1e-10 * max(1, fro):
        bad.append("trace")
    if n <= 8:
        det = cofactor_det(a)
        if abs(np.prod(w) - det) > 1e-8 * max(1.0, abs(det)):
            bad.append("determinant")
    s = np.diag(np.exp(rng.uniform(-1, 1, n)))
    w2 = eig_values_only(s @ a @ np.linalg.inv(s))
    if match_multisets(w, w2) > 1e-8 * max(1, fro):
        bad.append("similarity")
    if kind == "hermitian" and np.max(np.abs(w.imag)) > 1e-10:
        bad.append("hermitian")
    return bad


@pytest.mark.parametrize("seed,case", list(enumerate(CASES)))
def test_property_suite(seed, case):
    n, kind = case
    assert property_failures(seed, n, kind) == []


def test_equal_diagonal_block_deflates():
    # exact (m + 1/2)^2 degeneracies with couplings far below rounding:
    # the trailing 2x2 blocks have equal diagonals and must still deflate
    a = build_bloch(v1(1, 0), 0.5, 12).matrix
    w = eig_values_only(a)
    assert np.max(np.abs(w.imag)) < 1e-10
    assert match_multisets(w, np.linalg.eigvalsh(a)) < 1e-12

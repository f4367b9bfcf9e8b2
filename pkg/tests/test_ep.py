import math

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from nhbloch.eig import eig_values_only
from nhbloch.ep import (Classification, EncircleError, circle, classify_ep, coalescence_metrics,
                        dispersion_exponent, encircle, ep_scan, h3_discriminant,
                        k_dispersion_exponent, riemann_sheet_grid, truncated_models,
                        two_level_matrix, two_level_model)
from nhbloch.model import build_bloch, free, v1, v1_plus_v2

V1 = lambda tau: v1(1.0, tau)
V12 = lambda tau: v1_plus_v2(1.0, tau)


def test_metrics_jordan_block():
    m = coalescence_metrics(truncated_models("H2", 1.0, 1.0).matrix, (1, 2))
    assert m.gap == 0 and m.overlap > 0.999999 and m.phase_rigidity < 1e-6


def test_metrics_hermitian():
    a = np.diag([1.0, 2.0, 3.0]).astype(complex)
    a[0, 1] = a[1, 0] = 0.3
    m = coalescence_metrics(a, (1, 2))
    assert m.overlap <= 1e-10 and m.phase_rigidity == pytest.approx(1, abs=1e-12)


def test_metrics_full_hk_dirac_point():
    m = coalescence_metrics(build_bloch(V1(1.0), 0.0, 16), (2, 3))
    assert m.overlap > 0.999 and m.phase_rigidity < 0.02


def test_metrics_diabolic_crossing():
    # Hermitian crossing of the folded parabolas m = 0, -1 at the zone edge
    m = coalescence_metrics(build_bloch(v1(0.0, 0.0), 0.5, 4), (1, 2))
    assert m.gap < 1e-12 and m.overlap < 0.5


def test_bad_band_pair():
    with pytest.raises(ValueError):
        coalescence_metrics(np.eye(3), (1, 3))


def test_scan_conventional_edge():
    rep = ep_scan(V1, 0.5, (1, 2))
    assert abs(rep.location[1] - 1) < 1e-6
    assert rep.is_ep and rep.classification is Classification.CONVENTIONAL


def test_scan_dirac_center():
    rep = ep_scan(V1, 0.0, (2, 3))
    assert abs(rep.location[1] - 1) < 1e-6
    assert rep.is_ep and rep.classification is Classification.DIRAC
    d = rep.to_dict()
    assert d["classification"] == "Dirac" and d["location"]["k"] == 0.0


def test_scan_swap():
    assert ep_scan(V12, 0.0, (2, 3)).classification is Classification.CONVENTIONAL
    assert ep_scan(V12, 0.5, (1, 2)).classification is Classification.DIRAC


def test_scan_no_interior_minimum():
    rep = ep_scan(V1, 0.0, (2, 3), tau_window=(0.2, 0.5))
    assert rep.classification is Classification.INCONCLUSIVE


def test_classify_higher_pair():
    assert classify_ep(V1, 0.0, (4, 5), 1.0) is Classification.DIRAC


def test_dirac_reality_window():
    for tau in np.linspace(0.9, 1.1, 21):
        w = eig_values_only(build_bloch(V1(tau), 0.0, 16).matrix)
        assert np.max(np.abs(w[1:3].imag)) < 1e-9


def test_conventional_transition():
    w = eig_values_only(build_bloch(V1(1.05), 0.5, 16).matrix)
    assert np.max(np.abs(w[:2].imag)) > 1e-3
    w = eig_values_only(build_bloch(V1(0.95), 0.5, 16).matrix)
    assert np.max(np.abs(w[:2].imag)) < 1e-9


def test_dispersion_exponents():
    assert dispersion_exponent(V1, 0.0, (2, 3), 1.0, side=1).exponent == pytest.approx(1, abs=0.1)
    assert dispersion_exponent(V1, 0.0, (2, 3), 1.0, side=-1).exponent == pytest.approx(1, abs=0.1)
    fit = dispersion_exponent(V1, 0.5, (1, 2), 1.0, side=1, measure="imag")
    assert fit.exponent == pytest.approx(0.5, abs=0.05)
    assert len(fit.offsets) >= 8 and fit.offsets.min() >= 1e-4 and fit.offsets.max() <= 1e-1


def test_dispersion_refuses_flat_gap():
    with pytest.raises(ValueError):
        dispersion_exponent(V1, 0.5, (1, 2), 1.0, side=-1, measure="imag")
    with pytest.raises(ValueError):
        dispersion_exponent(V1, 0.0, (2, 3), 1.0, n_samples=5)


def test_k_dispersion():
    assert k_dispersion_exponent(V1(1.0), (2, 3), 0.0).exponent == pytest.approx(1, abs=0.1)
    assert k_dispersion_exponent(V1(1.0), (1, 2), 0.5, side=-1).exponent == pytest.approx(1, abs=0.15)
    fit = k_dispersion_exponent(free(), (2, 3), 0.0, M=4)
    np.testing.assert_allclose(fit.gaps, 4 * fit.offsets, rtol=1e-10)


def test_truncated_closed_forms_examples():
    m = truncated_models("H3", 1.0, 0.6)
    np.testing.assert_allclose(np.sort(m.closed_form.real), eig_values_only(m.matrix).real,
                               atol=1e-12)
    m = truncated_models("H3_nnn", 1.0, 0.8)
    s = math.sqrt(3) * 0.3
    np.testing.assert_allclose(eig_values_only(m.matrix), [0.5 - s, 0, 0.5 + s], atol=1e-12)
    assert truncated_models("H3_nnn", 1.0, 0.8, omega=1.0).closed_form is None
    assert truncated_models("H4", 1.0, 0.8).closed_form is None
    with pytest.raises(ValueError):
        truncated_models("H5", 1.0, 0.5)


def test_h3_reality_window():
    # the pair is complex only for imaginary t (tau > 1), |t| = sqrt(tau^2 - 1) / 2
    w = 1.0
    bound = w / (2 * math.sqrt(2))
    tau_at = lambda t: math.sqrt(1 + 4 * t * t)
    for t in (0.5 * bound, 0.99 * bound):
        assert h3_discriminant(1.0, tau_at(t), w) > 0
        vals = eig_values_only(truncated_models("H3", 1.0, tau_at(t), omega=w).matrix)
        assert np.max(np.abs(vals.imag)) < 1e-10
    for t in (1.01 * bound, 1.5 * bound):
        assert h3_discriminant(1.0, tau_at(t), w) < 0
        vals = eig_values_only(truncated_models("H3", 1.0, tau_at(t), omega=w).matrix)
        assert np.max(np.abs(vals.imag)) > 1e-6
    for tau in (0.0, 0.5, 0.99):
        assert h3_discriminant(1.0, tau, w) > 0


def test_h4_diagonal_limit_adjudicates_formula():
    # t = 0 (tau = 1 keeps t_- t_+ = 0, so use V0 = 0)
    m = truncated_models("H4", 0.0, 0.5, omega=0.25, omega_prime=2.25)
    np.testing.assert_array_equal(eig_values_only(m.matrix), [0.25, 0.25, 2.25, 2.25])
    w, wp = 0.25, 2.25
    printed = [(w + wp) / 2 + s * math.sqrt((w - wp) ** 2) for s in (-1, 1)]
    assert not np.allclose(printed, [w, wp])
    halved = [(w + wp) / 2 + s * math.sqrt((w - wp) ** 2 / 4) for s in (-1, 1)]
    np.testing.assert_allclose(halved, [w, wp])


def test_h4_corrected_formula_matches_numerics():
    # the closed form needs omega' - omega = 2 V0, true for the defaults at V0 = 1
    rng = np.random.default_rng(11)
    for tau in np.concatenate([rng.uniform(0, 0.99, 8), rng.uniform(1.01, 1.3, 4)]):
        m = truncated_models("H4", 1.0, tau)
        w, wp = m.params["omega"], m.params["omega_prime"]
        t2 = (1 - tau ** 2) / 4
        root = np.sqrt((w - wp) ** 2 / 4 + 5 * t2 + 0j)
        expected = np.array([w, wp, (w + wp) / 2 - root, (w + wp) / 2 + root])
        rows, cols = linear_sum_assignment(np.abs(eig_values_only(m.matrix)[:, None] - expected))
        assert np.max(np.abs(eig_values_only(m.matrix)[rows] - expected[cols])) < 1e-10


def test_h4_reality_window():
    w, wp = 0.25, 2.25
    bound = abs(w - wp) / (2 * math.sqrt(5))
    for t, real in ((0.9 * bound, True), (1.1 * bound, False)):
        tau = math.sqrt(1 + 4 * t * t)
        vals = eig_values_only(truncated_models("H4", 1.0, tau).matrix)
        assert (np.max(np.abs(vals.imag)) < 1e-10) == real


def test_h4_omega_prime_always_eigenvalue():
    vals = eig_values_only(truncated_models("H4", 1.7, 0.3).matrix)
    assert np.min(np.abs(vals - 2.25)) < 1e-12
    assert np.min(np.abs(vals - 0.25)) > 1e-3


def test_two_level_examples():
    r = two_level_model(0, 1, 1)
    np.testing.assert_allclose(r.eigenvalues, 0, atol=1e-15)
    np.testing.assert_allclose(np.sort(two_level_model(0, 0, 1).eigenvalues.real), [-1, 1])
    np.testing.assert_allclose(two_level_model(0.3, 0.4, 0).eigenvalues, [0.3 + 0.4j, -0.3 - 0.4j])
    r = two_level_model(0.2, 0.7, 1.3)
    for i in range(2):
        v = r.vectors[:, i]
        assert np.linalg.norm(r.matrix @ v - r.eigenvalues[i] * v) < 1e-14


def test_riemann_sheets():
    mesh = riemann_sheet_grid((-2, 2), (-2, 2), 1.0, 65)
    d0 = np.isclose(mesh.delta[:, 0], 0)
    i = int(np.flatnonzero(d0)[0])
    g = mesh.g[i]
    inside, outside = np.abs(g) < 1, np.abs(g) > 1
    # on delta = 0 the real sheets touch for |g| > t, the imaginary ones for |g| < t
    np.testing.assert_allclose(mesh.re_plus[i, outside], 0, atol=1e-15)
    assert np.all(mesh.re_plus[i, inside] > 0)
    np.testing.assert_allclose(mesh.im_plus[i, inside], 0, atol=1e-15)
    assert np.all(np.abs(mesh.im_plus[i, outside]) > 0)
    far = riemann_sheet_grid((50, 60), (-1, 1), 1.0, 16)
    z = far.delta + 1j * far.g
    assert np.max(np.abs(far.re_plus - z.real)) < 0.02
    with pytest.raises(ValueError):
        riemann_sheet_grid(resolution=8)
    assert len(list(mesh.rows())) == 65 * 65


def test_riemann_sheets_continuous_off_cuts():
    mesh = riemann_sheet_grid((0.05, 2), (-2, 2), 1.0, 200)
    assert np.max(np.abs(np.diff(mesh.re_plus, axis=1))) < 0.1
    assert np.max(np.abs(np.diff(mesh.im_plus, axis=1))) < 0.1


TWO_LEVEL = lambda d, g: two_level_matrix(d, g, 1.0)


@pytest.mark.parametrize("steps", [256, 512])
def test_encircle_two_level(steps):
    res = encircle(TWO_LEVEL, circle((0, 1), 0.5), steps=steps)
    assert res.is_transposition and res.continuity_floor > 0.9
    res = encircle(TWO_LEVEL, circle((0, 0), 0.5), steps=steps)
    assert res.is_identity


def test_encircle_guards():
    with pytest.raises(ValueError):
        encircle(TWO_LEVEL, circle((0, 1), 0.5), steps=100)
    with pytest.raises(ValueError, match="exceptional point"):
        encircle(TWO_LEVEL, circle((0, 1), 0.5), avoid=[(0.5, 1.0)])
    # eigenvectors rotating faster than any refined step can follow
    def spinning(x, y):
        c, s = math.cos(1e4 * x), math.sin(1e4 * x)
        r = np.array([[c, -s], [s, c]])
        return (r @ np.diag([0.0, 1.0]) @ r.T).astype(complex)

    with pytest.raises(EncircleError, match="continuity floor"):
        encircle(spinning, circle((0, 0), 0.5))


@pytest.mark.parametrize("steps", [256, 512])
def test_encircle_dirac_identity(steps):
    fam = lambda k, tau: build_bloch(V1(tau), k, 8).matrix
    res = encircle(fam, circle((0.0, 1.0), 0.1), steps=steps, tracked=[1, 2])
    assert res.is_identity and res.to_dict()["identity"]

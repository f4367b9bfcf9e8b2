import math

import numpy as np
import pytest

from nhbloch.bands import (FdGrid, align_wavefunction, band_sweep, fd_band_oracle, fd_matrix,
                           participation_ratio, reconstruct_wavefunction, tail_profile)
from nhbloch.eig import eig
from nhbloch.gauge import gauge_angle, gauge_vector, hermitian_equivalent
from nhbloch.model import build_bloch, cosine, fig5_potential, free, v1, v1_plus_v2


def test_band_sweep_real_phase():
    bs = band_sweep(v1(1, 0.8), [-0.5, 0.0, 0.5], 32, 3)
    assert bs.band_count == 3 and bs.energies.shape == (3, 3)
    assert np.max(np.abs(bs.energies.imag)) < 1e-9
    band1 = bs.band(1).real
    assert band1[1] < band1[0] and band1[1] < band1[2]


def test_free_limit_folded_parabolas():
    k = np.linspace(-0.5, 0.5, 11)
    bs = band_sweep(free(), k, 8, 4)
    m = np.arange(-8, 9)
    expected = np.sort((m[None, :] + k[:, None]) ** 2, axis=1)[:, :4]
    np.testing.assert_allclose(bs.energies.real, expected, atol=1e-12)


def test_broken_phase_pair():
    bs = band_sweep(v1(1, 1.1), [0.5], 32, 2)
    a, b = bs.energies[0]
    assert abs(a.imag) > 1e-3 and abs(a - np.conj(b)) < 1e-10


def test_pt_band_symmetry():
    k = np.linspace(0.05, 0.45, 5)
    for tau in (0.8, 1.1):
        plus = band_sweep(v1(1, tau), k, 32, 3).energies
        minus = band_sweep(v1(1, tau), -k, 32, 3).energies
        # omega_n(k) = omega_n(-k)^* as multisets per k
        for a, b in zip(plus, minus):
            np.testing.assert_allclose(np.sort_complex(a), np.sort_complex(np.conj(b)), atol=1e-9)


def test_band_sweep_threads_agree(monkeypatch):
    k = np.linspace(-0.5, 0.5, 9)
    a = band_sweep(v1(1, 0.8), k, 16, 3, threads=1)
    b = band_sweep(v1(1, 0.8), k, 16, 3, threads=4)
    np.testing.assert_array_equal(a.energies, b.energies)
    monkeypatch.setenv("NHBLOCH_THREADS", "3")
    c = band_sweep(v1(1, 0.8), k, 16, 3)
    np.testing.assert_array_equal(a.energies, c.energies)


def test_band_sweep_rejects_edge():
    with pytest.raises(ValueError):
        band_sweep(v1(1, 0.8), [0.0], 4, 7)


def test_tracking_follows_overlap():
    bs = band_sweep(v1_plus_v2(1, 0.3), np.linspace(-0.5, 0.5, 21), 16, 4)
    tracked = bs.tracked_energies()
    assert sorted(tracked[0].real.tolist()) == sorted(bs.energies[0].real.tolist())
    for row in bs.order:
        assert sorted(row) == list(range(4))
    rows = list(bs.rows())
    assert len(rows) == 21 * 4 and rows[0][1] == 1


def test_fd_grid():
    g = FdGrid(128, 2 * math.pi, 0.25)
    assert g.spacing == pytest.approx(2 * math.pi / 128)
    assert abs(abs(g.bloch_phase) - 1) < 1e-15
    with pytest.raises(ValueError):
        FdGrid(32, 2 * math.pi, 0.0)


def test_fd_free_particle():
    w = fd_band_oracle(free(), 0.0, 512, 3)
    assert abs(w[0]) < 1e-10
    np.testing.assert_allclose(w[1:].real, 1.0, atol=1e-4)


def test_fd_matrix_is_hermitian_for_real_potential():
    a = fd_matrix(cosine(0.6), 0.3, 64).toarray()
    np.testing.assert_allclose(a, a.conj().T, atol=1e-14)


def test_fd_matches_plane_waves():
    pw = band_sweep(v1(1, 0.8), [0.0], 32, 3).energies[0]
    fd = fd_band_oracle(v1(1, 0.8), 0.0, 1024, 3)
    assert np.max(np.abs(pw - fd)) < 1e-4


def test_participation_ratio():
    e = np.zeros(9)
    e[4] = 1
    assert participation_ratio(e) == 1
    assert participation_ratio(np.ones(9)) == pytest.approx(9)
    rng = np.random.default_rng(3)
    for _ in range(20):
        v = rng.standard_normal(15) + 1j * rng.standard_normal(15)
        assert 1 <= participation_ratio(v) <= 15
    with pytest.raises(ValueError):
        participation_ratio(np.zeros(3))


def test_reconstruct_constant():
    a = np.zeros(9, dtype=complex)
    a[4] = 1
    psi = reconstruct_wavefunction(a, 0.0, np.linspace(0, 2 * math.pi, 7))
    np.testing.assert_allclose(psi, 1)


def test_reconstruct_bloch_property():
    a = eig(build_bloch(v1(1, 0.8), 0.3, 16).matrix).vectors[:, 0]
    x = np.linspace(0, 1, 5)
    np.testing.assert_allclose(reconstruct_wavefunction(a, 0.3, x + 2 * math.pi),
                               np.exp(2j * math.pi * 0.3) * reconstruct_wavefunction(a, 0.3, x),
                               atol=1e-12)


def test_ground_state_modulus_is_even():
    a = eig(build_bloch(v1(1, 0.8), 0.0, 32).matrix).vectors[:, 0]
    x = np.linspace(0, math.pi, 50)
    psi_p = np.abs(reconstruct_wavefunction(a, 0.0, x))
    psi_m = np.abs(reconstruct_wavefunction(a, 0.0, -x))
    assert np.max(np.abs(psi_p - psi_m)) < 1e-8


def test_gauge_wavefunction_correspondence():
    p = v1(1, 0.8)
    a = eig(build_bloch(p, 0.0, 32).matrix).vectors[:, 0]
    ga = gauge_vector(a, gauge_angle(p[-1], p[1]))
    at = eig(build_bloch(hermitian_equivalent(p).transformed_potential, 0.0, 32).matrix).vectors[:, 0]
    x = np.linspace(0, 2 * math.pi, 101)
    lhs = np.abs(align_wavefunction(reconstruct_wavefunction(ga, 0.0, x)))
    rhs = np.abs(align_wavefunction(reconstruct_wavefunction(at, 0.0, x)))
    assert np.max(np.abs(lhs - rhs)) < 1e-6


def test_align_wavefunction():
    psi = np.array([0.5j, -2j, 1.0])
    out = align_wavefunction(psi)
    assert out[1] == 1 and np.max(np.abs(out)) == 1


def test_tail_profile_gaussian():
    m = np.arange(-12, 13)
    tp = tail_profile(np.exp(-0.3 * m ** 2))
    assert tp.quadratic_coeff == pytest.approx(-0.3, abs=1e-9)
    assert tp.super_exponential


def test_tail_profile_exponential_is_not_super():
    m = np.arange(-12, 13)
    tp = tail_profile(np.exp(-0.8 * m))
    assert tp.quadratic_coeff == pytest.approx(0, abs=1e-12)
    assert not tp.super_exponential


def test_tail_profile_inconclusive_and_short():
    a = np.zeros(11)
    a[5] = 1
    assert tail_profile(a).verdict == "inconclusive"
    with pytest.raises(ValueError):
        tail_profile(np.ones(5))


def test_tails_super_exponential_both_frames():
    eq = cosine(0.6)
    at = eig(build_bloch(eq, 0.0, 32).matrix).vectors[:, 0]
    assert tail_profile(at).super_exponential
    # back to the asymmetric frame with the inverse gauge
    p = v1(1, 0.8)
    angle = gauge_angle(p[-1], p[1])
    inv = type(angle)(-angle.theta, angle.regime)
    assert tail_profile(gauge_vector(at, inv)).super_exponential


def test_tail_center_shift():
    eq = cosine(0.6)
    c0 = tail_profile(eig(build_bloch(eq, 0.0, 32).matrix).vectors[:, 0]).center
    c5 = tail_profile(eig(build_bloch(eq, 0.5, 32).matrix).vectors[:, 0]).center
    assert c5 - c0 == pytest.approx(-0.5, abs=1e-3)


@pytest.mark.parametrize("family", [v1, v1_plus_v2, fig5_potential])
@pytest.mark.parametrize("tau", [0.0, 0.8, 1.0, 1.1])
def test_fd_agreement_all_potentials(family, tau):
    for k in (0.0, 0.25, 0.5):
        pw = band_sweep(family(1, tau), [k], 32, 3).energies[0]
        assert np.max(np.abs(pw - fd_band_oracle(family(1, tau), k, 1024, 3))) < 1e-3
        assert np.max(np.abs(pw - fd_band_oracle(family(1, tau), k, 4096, 3))) < 1e-4

"""Figure data bundles.

Each bundle is a directory of CSV/JSON files plus ``manifest.json`` listing
every file with its columns and the panel it feeds. Output is deterministic:
the same call writes byte-identical files.
"""

import math
import os

import numpy as np

from ._io import csv_text, json_text
from .bands import (align_wavefunction, band_sweep, participation_ratio,
                    reconstruct_wavefunction, tail_profile)
from .eig import eig, eig_values_only
from .ep import dispersion_exponent, ep_scan
from .gauge import gauge_angle, gauge_vector, hermitian_equivalent
from .model import build_bloch, cosine, fig5_potential, v1, v1_plus_v2

__all__ = ["FIGURES", "write_figure"]

BAND_COLUMNS = ["k", "band", "re_omega", "im_omega"]
SWEEP_COLUMNS = ["tau", "band", "re_omega", "im_omega"]
K_GRID = np.linspace(-0.5, 0.5, 101)
TAU_GRID = np.linspace(0.8, 1.2, 81)


class _Bundle:
    def __init__(self, name, out_dir):
        self.name = name
        self.dir = os.path.join(out_dir, name)
        os.makedirs(self.dir, exist_ok=True)
        self.entries = []

    def csv(self, filename, columns, rows, panel, description):
        self._write(filename, csv_text(columns, rows))
        self.entries.append({"file": filename, "format": "csv", "columns": list(columns),
                             "panel": panel, "description": description})

    def json(self, filename, obj, panel, description, keys=None):
        self._write(filename, json_text(obj))
        self.entries.append({"file": filename, "format": "json",
                             "columns": sorted(keys if keys is not None else obj),
                             "panel": panel, "description": description})

    def _write(self, filename, text):
        with open(os.path.join(self.dir, filename), "w", newline="\n") as fh:
            fh.write(text)

    def finish(self):
        manifest = {"figure": self.name, "files": self.entries}
        self._write("manifest.json", json_text(manifest))
        return [os.path.join(self.dir, e["file"]) for e in self.entries] + [
            os.path.join(self.dir, "manifest.json")]


def _band_rows(potential, k_grid, M, n_bands, threads):
    return list(band_sweep(potential, k_grid, M, n_bands, threads).rows())


def _tau_sweep_rows(family, k, n_bands, M, taus=TAU_GRID):
    rows = []
    for tau in taus:
        w = eig_values_only(build_bloch(family(tau), k, M).matrix)
        rows.extend((tau, n + 1, w[n].real, w[n].imag) for n in range(n_bands))
    return rows


def _max_dev(rows_a, rows_b):
    a = np.array([complex(r[2], r[3]) for r in rows_a])
    b = np.array([complex(r[2], r[3]) for r in rows_b])
    return float(np.max(np.abs(a - b)))


def _ground_state(potential, k, M):
    return eig(build_bloch(potential, k, M).matrix).vectors[:, 0]


def _equivalence_bundle(b, potential, panel_bands, M, threads):
    eq = hermitian_equivalent(potential).transformed_potential
    rows = _band_rows(potential, K_GRID, M, 3, threads)
    rows_eq = _band_rows(eq, K_GRID, M, 3, threads)
    b.csv("bands_nonhermitian.csv", BAND_COLUMNS, rows, panel_bands,
          f"lowest three bands of {potential.label}")
    b.csv("bands_equivalent.csv", BAND_COLUMNS, rows_eq, panel_bands,
          f"lowest three bands of the gauge-equivalent {eq.label}")
    return eq, rows, rows_eq


def fig1(out_dir, M=32, threads=None):
    b = _Bundle("fig1", out_dir)
    pot = v1(1.0, 0.8)
    eq, rows, rows_eq = _equivalence_bundle(b, pot, "fig1(c)", M, threads)
    angle = gauge_angle(pot[-1], pot[1])
    a = _ground_state(pot, 0.0, M)
    ga = gauge_vector(a, angle)
    ga = ga / np.linalg.norm(ga)
    at = _ground_state(eq, 0.0, M)
    m = np.arange(-M, M + 1)
    b.csv("coefficients_k0.csv", ["m", "abs_a", "abs_gauge_a", "abs_equivalent_a"],
          zip(m, np.abs(a), np.abs(ga), np.abs(at)), "fig1(d)",
          "band-1 plane-wave amplitudes at k=0: original, gauge-transformed, equivalent")
    x = np.linspace(0.0, 2 * math.pi, 201)
    psi = np.abs(align_wavefunction(reconstruct_wavefunction(a, 0.0, x)))
    gpsi = np.abs(align_wavefunction(reconstruct_wavefunction(ga, 0.0, x)))
    tpsi = np.abs(align_wavefunction(reconstruct_wavefunction(at, 0.0, x)))
    b.csv("wavefunction_k0.csv", ["x", "abs_psi", "abs_gauge_psi", "abs_equivalent_psi"],
          zip(x, psi, gpsi, tpsi), "fig1(d)",
          "band-1 wavefunctions at k=0 scaled to unit peak")
    summary = {
        "max_band_deviation": _max_dev(rows, rows_eq),
        "max_abs_imag": float(max(abs(r[3]) for r in rows)),
        "participation_ratio_before": participation_ratio(a),
        "participation_ratio_after": participation_ratio(ga),
        "max_wavefunction_deviation": float(np.max(np.abs(gpsi - tpsi))),
        "gauge_theta": {"re": angle.theta.real, "im": angle.theta.imag},
    }
    b.json("summary.json", summary, "fig1", "equivalence and localisation figures")
    return b.finish()


def fig2(out_dir, M=32, threads=None):
    b = _Bundle("fig2", out_dir)
    pot = v1(1.0, 1.1)
    eq, rows, rows_eq = _equivalence_bundle(b, pot, "fig2", M, threads)
    angle = gauge_angle(pot[-1], pot[1])
    summary = {
        "max_band_deviation": _max_dev(rows, rows_eq),
        "max_abs_imag": float(max(abs(r[3]) for r in rows)),
        "gauge_theta": {"re": angle.theta.real, "im": angle.theta.imag},
        "regime": angle.regime.value,
        "equivalent_character": hermitian_equivalent(pot).character.value,
    }
    b.json("summary.json", summary, "fig2", "broken-phase equivalence figures")
    return b.finish()


def _ep_bundle(b, family, label, panel, M, threads):
    rows = _band_rows(family(1.0), K_GRID, M, 5, threads)
    b.csv("bands_tau1.csv", BAND_COLUMNS, rows, f"{panel}(a)",
          f"lowest five bands of {label} at tau=1")
    reports = {}
    for k, pair in ((0.0, (2, 3)), (0.5, (1, 2))):
        rep = ep_scan(family, k, pair)
        reports[f"k={k:g}"] = rep.to_dict()
    b.json("ep_reports.json", reports, f"{panel}(a)",
           "exceptional-point reports at k=0 (bands 2-3) and k=0.5 (bands 1-2)")
    for k, tag in ((0.0, "k0"), (0.5, "k0.5")):
        b.csv(f"tau_sweep_{tag}.csv", SWEEP_COLUMNS, _tau_sweep_rows(family, k, 5, 16),
              f"{panel}(c)", f"lowest five eigenvalues of {label} against tau at k={k:g}")
    return rows, reports


def fig3(out_dir, M=32, threads=None):
    b = _Bundle("fig3", out_dir)
    family = lambda tau: v1(1.0, tau)
    _ep_bundle(b, family, "V1(1, tau)", "fig3", M, threads)
    x = np.linspace(0.0, 2 * math.pi, 201)
    conv = _ground_state(v1(1.0, 1.0), 0.5, M)
    dirac = eig(build_bloch(v1(1.0, 1.0), 0.0, M).matrix).vectors[:, 1]
    b.csv("coalesced_wavefunctions.csv", ["x", "abs_psi_conventional", "abs_psi_dirac"],
          zip(x, np.abs(align_wavefunction(reconstruct_wavefunction(conv, 0.5, x))),
              np.abs(align_wavefunction(reconstruct_wavefunction(dirac, 0.0, x)))),
          "fig3(b)", "coalesced states at tau=1: k=0.5 band 1 and k=0 band 2, unit peak")
    return b.finish()


def fig4(out_dir, M=32, threads=None):
    b = _Bundle("fig4", out_dir)
    family = lambda tau: v1_plus_v2(1.0, tau)
    rows, _ = _ep_bundle(b, family, "V1+V2(1, tau)", "fig4", M, threads)
    surface = []
    for tau in np.linspace(0.8, 1.2, 41):
        for k in np.linspace(-0.5, 0.5, 41):
            w = eig_values_only(build_bloch(family(tau), k, 16).matrix)
            surface.extend((k, tau, n + 1, w[n].real, w[n].imag) for n in range(3))
    b.csv("surface.csv", ["k", "tau", "band", "re_omega", "im_omega"], surface, "fig4(b)",
          "lowest three eigenvalues over the (k, tau) plane")
    rows_v1 = _band_rows(v1(1.0, 1.0), K_GRID, M, 5, threads)
    b.json("summary.json", {"max_deviation_from_v1_at_tau1": _max_dev(rows, rows_v1)},
           "fig4(a)", "tau=1 band structure compared with V1 alone")
    return b.finish()


def fig5(out_dir, M=32, threads=None):
    b = _Bundle("fig5", out_dir)
    pot = fig5_potential(1.0, 0.5)
    eq, rows, rows_eq = _equivalence_bundle(b, pot, "fig5", M, threads)
    summary = {
        "max_band_deviation": _max_dev(rows, rows_eq),
        "equivalent_potential": eq.to_dict(),
    }
    b.json("summary.json", summary, "fig5", "next-nearest-neighbour equivalence")
    return b.finish()


def s1(out_dir, M=32, threads=None):
    b = _Bundle("s1", out_dir)
    pot = cosine(0.6)
    m = np.arange(-M, M + 1)
    coeffs = {k: _ground_state(pot, k, M) for k in (0.0, 0.5)}
    floor = 1e-300
    b.csv("tails.csv", ["m", "ln_abs_a_k0", "ln_abs_a_k0.5"],
          zip(m, np.log(np.maximum(np.abs(coeffs[0.0]), floor)),
              np.log(np.maximum(np.abs(coeffs[0.5]), floor))),
          "s1", "log plane-wave amplitudes of band 1 for 0.6 cos x at k=0 and k=0.5")
    fits = {}
    for k, a in coeffs.items():
        tp = tail_profile(a)
        fits[f"k={k:g}"] = {"quadratic": tp.quadratic_coeff, "linear": tp.linear_coeff,
                            "constant": tp.constant, "center": tp.center, "verdict": tp.verdict}
    fits["center_displacement"] = fits["k=0.5"]["center"] - fits["k=0"]["center"]
    b.json("tail_fits.json", fits, "s1", "parabolic fits of ln|a_m|")
    return b.finish()


def _dispersion_rows(fit):
    return zip(fit.offsets, fit.gaps)


def s3(out_dir, M=32, threads=None):
    b = _Bundle("s3", out_dir)
    family = lambda tau: v1(1.0, tau)
    fits = {}
    for side, tag in ((1, "above"), (-1, "below")):
        fit = dispersion_exponent(family, 0.0, (2, 3), 1.0, side=side)
        b.csv(f"gap_{tag}.csv", ["delta_tau", "gap"], _dispersion_rows(fit), "s3",
              f"band 2-3 gap at k=0, tau = 1 {'+' if side > 0 else '-'} delta_tau")
        fits[tag] = {"exponent": fit.exponent, "stderr": fit.stderr}
    b.json("fit.json", fits, "s3", "log-log slopes of the gap")
    return b.finish()


def s4(out_dir, M=32, threads=None):
    b = _Bundle("s4", out_dir)
    family = lambda tau: v1(1.0, tau)
    k_grid = np.linspace(-0.5, 0.5, 101)
    rows = [r for r in _band_rows(family(1.0), k_grid, M, 5, threads) if r[1] >= 4]
    b.csv("bands45_tau1.csv", BAND_COLUMNS, rows, "s4(a)", "bands 4 and 5 at tau=1")
    im_rows = []
    taus = np.linspace(0.9, 1.1, 81)
    for tau in taus:
        eq = hermitian_equivalent(family(tau), strict=False)
        pot = eq.transformed_potential if eq.eligible else family(tau)
        w = eig_values_only(build_bloch(pot, 0.0, 16).matrix)
        im_rows.append((tau, w[3].real, w[3].imag, w[4].real, w[4].imag,
                        math.sqrt(abs(w[4] - w[3]))))
    b.csv("tau_sweep_k0.csv", ["tau", "re_omega4", "im_omega4", "re_omega5", "im_omega5",
                               "sqrt_gap"], im_rows, "s4(b,c)",
          "bands 4 and 5 at k=0 against tau, with the square root of their gap")
    fits = {}
    for side, tag in ((1, "above"), (-1, "below")):
        fit = dispersion_exponent(family, 0.0, (4, 5), 1.0, side=side)
        b.csv(f"gap_{tag}.csv", ["delta_tau", "gap"], _dispersion_rows(fit), "s4(c)",
              f"band 4-5 gap at k=0, tau = 1 {'+' if side > 0 else '-'} delta_tau")
        fits[tag] = {"exponent": fit.exponent, "stderr": fit.stderr}
    b.json("fit.json", fits, "s4(c)", "log-log slopes of the gap")
    return b.finish()


FIGURES = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5,
           "s1": s1, "s3": s3, "s4": s4}


def write_figure(name, out_dir, M=32, threads=None):
    """Write bundle ``name`` under ``out_dir/name``; returns the file paths."""
    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}; choose from {sorted(FIGURES)}")
    return FIGURES[name](out_dir, M=M, threads=threads)

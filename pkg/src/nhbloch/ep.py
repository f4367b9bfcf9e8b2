"""Exceptional points in the hybrid (k, tau) plane.

A family is any callable ``tau -> PotentialSpec`` (for example
``functools.partial(v1, 1.0)``). Band pairs are 1-based and refer to the
canonical (Re, then Im) ordering of the Bloch spectrum.
"""

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar
from scipy.stats import linregress

from .eig import EigenSolverError, eig, eig_values_only, left_eigenvectors
from .gauge import hermitian_equivalent
from .model import build_bloch

__all__ = [
    "Classification",
    "EpReport",
    "EncircleError",
    "LoopResult",
    "RiemannMesh",
    "TruncatedModel",
    "TwoLevelResult",
    "circle",
    "classify_ep",
    "coalescence_metrics",
    "dispersion_exponent",
    "encircle",
    "ep_scan",
    "h3_discriminant",
    "k_dispersion_exponent",
    "riemann_sheet_grid",
    "truncated_models",
    "two_level_matrix",
    "two_level_model",
]

EP_MIN_OVERLAP = 0.999
EP_MAX_RIGIDITY = 0.02
DIABOLIC_MAX_OVERLAP = 0.5
GAP_TOL = 1e-6
EP_M = 16


class Classification(enum.Enum):
    CONVENTIONAL = "Conventional"
    DIRAC = "Dirac"
    DIABOLIC = "Diabolic"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Coalescence:
    gap: float
    overlap: float
    phase_rigidity: float


def _pair_slice(band_pair):
    n1, n2 = band_pair
    if n1 < 1 or n2 != n1 + 1:
        raise ValueError(f"band pair must be (n, n+1) with n >= 1, got {band_pair}")
    return n1 - 1, n2 - 1


def coalescence_metrics(H, band_pair):
    """Gap, right-eigenvector overlap and phase rigidity of a band pair.

    ``overlap = |<v_n, v_{n+1}>|`` for unit right eigenvectors; phase
    rigidity is ``|<y_n, v_n>| / (|y_n| |v_n|)`` with ``y_n`` the left
    eigenvector of band ``n``.
    """
    a = np.asarray(getattr(H, "matrix", H))
    i, j = _pair_slice(band_pair)
    if j >= a.shape[0]:
        raise ValueError(f"band pair {band_pair} exceeds matrix dimension {a.shape[0]}")
    dec = eig(a)
    vi, vj = dec.vectors[:, i], dec.vectors[:, j]
    gap = abs(dec.eigenvalues[j] - dec.eigenvalues[i])
    overlap = abs(np.vdot(vi, vj))
    y = left_eigenvectors(a, dec.eigenvalues[i:i + 1])[:, 0]
    rigidity = abs(np.vdot(y, vi)) / (np.linalg.norm(y) * np.linalg.norm(vi))
    return Coalescence(float(gap), float(min(overlap, 1.0)), float(rigidity))


def _pair_values(family, k, tau, band_pair, M, frame="direct"):
    i, j = _pair_slice(band_pair)
    potential = family(tau)
    if frame == "gauge":
        res = hermitian_equivalent(potential, strict=False)
        if res.eligible:
            potential = res.transformed_potential
    w = eig_values_only(build_bloch(potential, k, M).matrix)
    return w[i], w[j]


def _gap(family, k, tau, band_pair, M, frame="direct"):
    a, b = _pair_values(family, k, tau, band_pair, M, frame)
    return abs(b - a)


@dataclass(frozen=True)
class EpReport:
    location: tuple
    band_pair: tuple
    min_gap: float
    overlap_at_min: float
    phase_rigidity_at_min: float
    classification: Classification
    dispersion_exponent: float = math.nan
    dispersion_stderr: float = math.nan
    diagnostics: dict = field(default_factory=dict)
    min_overlap: float = EP_MIN_OVERLAP
    max_rigidity: float = EP_MAX_RIGIDITY

    @property
    def is_ep(self):
        return (self.overlap_at_min > self.min_overlap
                and self.phase_rigidity_at_min < self.max_rigidity)

    def to_dict(self):
        out = asdict(self)
        out["classification"] = self.classification.value
        out["location"] = {"k": self.location[0], "tau": self.location[1]}
        out["band_pair"] = list(self.band_pair)
        return out


def _golden_minimum(f, lo, hi, xtol):
    mid = 0.5 * (lo + hi)
    f_lo, f_mid, f_hi = f(lo), f(mid), f(hi)
    if not (f_mid < f_lo and f_mid < f_hi):
        # not bracketed: dense scan, then refine around the best sample
        grid = np.arange(lo, hi + 0.5e-4, 1e-4)
        vals = np.array([f(x) for x in grid])
        best = int(np.argmin(vals))
        if best == 0 or best == len(grid) - 1:
            return None
        lo, mid, hi = grid[best - 1], grid[best], grid[best + 1]
    res = minimize_scalar(f, bracket=(lo, mid, hi), method="golden", tol=xtol)
    return float(res.x)


def ep_scan(family, k, band_pair, tau_window=(0.9, 1.1), M=EP_M, xtol=1e-10, gap_tol=GAP_TOL,
            min_overlap=EP_MIN_OVERLAP, max_rigidity=EP_MAX_RIGIDITY):
    """Locate the minimum of the band-pair gap over ``tau`` at fixed ``k``
    and characterise it.

    Golden-section search inside ``tau_window``; an EP needs overlap above
    ``min_overlap`` and phase rigidity below ``max_rigidity``, and is then
    classified by :func:`classify_ep`.
    """
    lo, hi = tau_window
    tau = _golden_minimum(lambda t: _gap(family, k, t, band_pair, M), lo, hi, xtol)
    if tau is None:
        return EpReport((k, math.nan), tuple(band_pair), math.nan, math.nan, math.nan,
                        Classification.INCONCLUSIVE, diagnostics={"reason": "no interior minimum"},
                        min_overlap=min_overlap, max_rigidity=max_rigidity)
    H = build_bloch(family(tau), k, M)
    metrics = coalescence_metrics(H, band_pair)
    diagnostics = {}
    if metrics.overlap > min_overlap and metrics.phase_rigidity < max_rigidity:
        cls, diagnostics = classify_ep(family, k, band_pair, tau, M=M, return_diagnostics=True)
    elif metrics.gap < gap_tol and metrics.overlap < DIABOLIC_MAX_OVERLAP:
        cls = Classification.DIABOLIC
    else:
        cls = Classification.INCONCLUSIVE
    return EpReport((float(k), tau), tuple(band_pair), metrics.gap, metrics.overlap,
                    metrics.phase_rigidity, cls, diagnostics=diagnostics,
                    min_overlap=min_overlap, max_rigidity=max_rigidity)


def classify_ep(family, k, band_pair, tau_ep, M=EP_M, deltas=(0.01, 0.02, 0.05),
                return_diagnostics=False):
    """Conventional if the pair turns complex on exactly one side of
    ``tau_ep``; Dirac if it stays real on both sides."""
    sides = {}
    for side in (-1, 1):
        im_split, im_max = 0.0, 0.0
        for d in deltas:
            a, b = _pair_values(family, k, tau_ep + side * d, band_pair, M)
            im_split = max(im_split, abs((b - a).imag))
            im_max = max(im_max, abs(a.imag), abs(b.imag))
        sides[side] = (im_split, im_max)
    broken = [s for s, (split, _) in sides.items() if split > 1e-6]
    real_both = all(im_max <= 1e-9 for _, im_max in sides.values())
    if real_both:
        cls = Classification.DIRAC
    elif len(broken) == 1 and sides[-broken[0]][0] <= 1e-6:
        cls = Classification.CONVENTIONAL
    else:
        cls = Classification.INCONCLUSIVE
    diagnostics = {
        "below": {"max_im_splitting": sides[-1][0], "max_abs_im": sides[-1][1]},
        "above": {"max_im_splitting": sides[1][0], "max_abs_im": sides[1][1]},
    }
    return (cls, diagnostics) if return_diagnostics else cls


@dataclass(frozen=True)
class DispersionFit:
    exponent: float
    stderr: float
    offsets: np.ndarray
    gaps: np.ndarray


def _fit(offsets, gaps):
    gaps = np.asarray(gaps)
    if np.all(gaps < 1e-12):
        raise ValueError("gap below 1e-12 at every sample; exponent fit refused")
    keep = gaps >= 1e-12
    r = linregress(np.log(offsets[keep]), np.log(gaps[keep]))
    return DispersionFit(float(r.slope), float(r.stderr), np.asarray(offsets), gaps)


def _offsets(n_samples, span):
    if n_samples < 8:
        raise ValueError("at least 8 samples are required")
    return np.logspace(math.log10(span[0]), math.log10(span[1]), n_samples)


def dispersion_exponent(family, k, band_pair, tau_ep, side=1, measure="abs", M=EP_M,
                        n_samples=12, span=(1e-4, 1e-1), frame="auto"):
    """Slope of ``ln(gap)`` against ``ln|tau - tau_ep|`` on one side.

    ``measure="imag"`` uses ``|Im(w_{n+1} - w_n)|`` (the broken side of a
    conventional EP). With ``frame="auto"`` the spectrum is taken from the
    gauge-equivalent potential whenever one exists: it is the same spectrum,
    but without the square-root ill-conditioning of the pair near the EP,
    which otherwise swamps gaps below ~1e-8.
    """
    use = "gauge" if frame in ("auto", "gauge") else "direct"
    offsets = _offsets(n_samples, span)
    gaps = []
    for d in offsets:
        a, b = _pair_values(family, k, tau_ep + side * d, band_pair, M, use)
        diff = b - a
        gaps.append(abs(diff.imag) if measure == "imag" else abs(diff))
    return _fit(offsets, gaps)


def k_dispersion_exponent(potential, band_pair, k_ep, side=1, M=EP_M, n_samples=12,
                          span=(1e-4, 1e-1)):
    """Slope of ``ln(gap)`` against ``ln|k - k_ep|`` for a fixed potential."""
    i, j = _pair_slice(band_pair)
    offsets = _offsets(n_samples, span)
    gaps = []
    for d in offsets:
        w = eig_values_only(build_bloch(potential, k_ep + side * d, M).matrix)
        gaps.append(abs(w[j] - w[i]))
    return _fit(offsets, gaps)


# Truncated analytic models -------------------------------------------------

@dataclass(frozen=True)
class TruncatedModel:
    name: str
    matrix: np.ndarray
    closed_form: np.ndarray = None
    params: dict = field(default_factory=dict)


def _couplings(V0, tau):
    t_plus, t_minus = V0 * (1 + tau) / 2, V0 * (1 - tau) / 2
    return t_minus, t_plus, np.sqrt(complex(t_minus * t_plus))


def truncated_models(name, V0, tau, omega=None, omega_prime=None):
    """Small truncations of the Bloch Hamiltonian around ``k = 0`` or
    ``k = 0.5`` with their closed-form spectra where one exists.

    ``H2`` (``m = -1, 0`` at ``k = 0.5``), ``H3`` (``m = -1..1`` at
    ``k = 0``), ``H3_nnn`` (``H3`` plus the NNN couplings of V1+V2) and
    ``H4`` (``m = -2..1`` at ``k = 0.5`` with NNN couplings). ``H3_nnn``
    defaults to ``omega = V0/2``, the value for which its spectrum is
    ``{0, omega +- sqrt(3) t}``; pass ``omega=1`` for the physical value.
    """
    tm, tp, t = _couplings(V0, tau)
    if name == "H2":
        w = 0.25 if omega is None else omega
        mat = np.array([[w, tm], [tp, w]], dtype=complex)
        closed = np.array([w - t, w + t])
        params = {"omega": w}
    elif name == "H3":
        w = 1.0 if omega is None else omega
        mat = np.array([[w, tm, 0], [tp, 0, tm], [0, tp, w]], dtype=complex)
        root = np.sqrt(complex(w * w + 8 * t * t))
        closed = np.array([w, (w + root) / 2, (w - root) / 2])
        params = {"omega": w}
    elif name == "H3_nnn":
        w = V0 / 2 if omega is None else omega
        mat = np.array([[w, tm, tm], [tp, 0, tm], [tp, tp, w]], dtype=complex)
        closed = np.array([0, w + math.sqrt(3) * t, w - math.sqrt(3) * t]) if w == V0 / 2 else None
        params = {"omega": w}
    elif name == "H4":
        w = 0.25 if omega is None else omega
        wp = 2.25 if omega_prime is None else omega_prime
        mat = np.array([[wp, tm, tm, 0], [tp, w, tm, tm], [tp, tp, w, tm], [0, tp, tp, wp]],
                       dtype=complex)
        closed = None
        params = {"omega": w, "omega_prime": wp}
    else:
        raise ValueError(f"unknown truncated model {name!r}")
    params.update(V0=V0, tau=tau)
    return TruncatedModel(name, mat, closed, params)


def h3_discriminant(V0, tau, omega=1.0):
    """``omega^2 + 8 t^2`` with ``t^2 = t_- t_+``; the Dirac pair of ``H3``
    is real exactly when it is non-negative. For ``tau < 1`` it always is;
    for ``tau > 1`` the coupling is imaginary and reality needs
    ``|t| <= omega/(2 sqrt 2)``."""
    tm, tp, _ = _couplings(V0, tau)
    return omega * omega + 8 * tm * tp


# Two-level model and Riemann sheets ---------------------------------------

@dataclass(frozen=True)
class TwoLevelResult:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    vectors: np.ndarray


def two_level_matrix(delta, g, t):
    z = delta + 1j * g
    return np.array([[z, t], [t, -z]], dtype=complex)


def two_level_model(delta, g, t):
    """Eigenpairs of ``[[D + ig, t], [t, -D - ig]]``; ``E_+- = +-sqrt((D+ig)^2 + t^2)``."""
    z = complex(delta, g)
    e = np.sqrt(z * z + t * t)
    values = np.array([e, -e])
    vecs = np.empty((2, 2), dtype=complex)
    for i, lam in enumerate(values):
        u = np.array([t, lam - z])
        w = np.array([lam + z, t])
        v = u if np.linalg.norm(u) >= np.linalg.norm(w) else w
        if np.linalg.norm(v) == 0:
            v = np.array([1.0, 0.0]) if i == 0 else np.array([0.0, 1.0])
        vecs[:, i] = v / np.linalg.norm(v)
    return TwoLevelResult(two_level_matrix(delta, g, t), values, vecs)


@dataclass(frozen=True)
class RiemannMesh:
    """Sheets of ``E_+-`` on a (delta, g) mesh.

    ``re_plus >= 0`` is the real part of the principal root, continuous
    everywhere; the real sheets touch on ``delta = 0, |g| > t``.
    ``im_plus >= 0`` is the imaginary part of ``i sqrt(-(D+ig)^2 - t^2)``,
    also continuous; the imaginary sheets touch on ``delta = 0, |g| < t``.
    """

    COLUMNS = ("delta", "g", "re_plus", "re_minus", "im_plus", "im_minus")

    delta: np.ndarray
    g: np.ndarray
    re_plus: np.ndarray
    re_minus: np.ndarray
    im_plus: np.ndarray
    im_minus: np.ndarray

    def rows(self):
        for idx in np.ndindex(self.delta.shape):
            yield (self.delta[idx], self.g[idx], self.re_plus[idx], self.re_minus[idx],
                   self.im_plus[idx], self.im_minus[idx])


def riemann_sheet_grid(delta_range=(-2.0, 2.0), g_range=(-2.0, 2.0), t=1.0, resolution=65):
    if resolution < 16:
        raise ValueError("resolution must be at least 16 per axis")
    d = np.linspace(*delta_range, resolution)
    g = np.linspace(*g_range, resolution)
    D, Gm = np.meshgrid(d, g, indexing="ij")
    w = (D + 1j * Gm) ** 2 + t * t
    re_sheet = np.sqrt(w + 0j).real
    im_sheet = (1j * np.sqrt(-w + 0j)).imag
    return RiemannMesh(D, Gm, re_sheet, -re_sheet, im_sheet, -im_sheet)


# Encircling ------------------------------------------------------------------

class EncircleError(RuntimeError):
    pass


@dataclass(frozen=True)
class LoopResult:
    """``permutation[i] = j``: tracked state ``i`` returns as state ``j``."""

    permutation: dict
    continuity_floor: float
    steps: int

    @property
    def is_identity(self):
        return all(i == j for i, j in self.permutation.items())

    @property
    def is_transposition(self):
        moved = [i for i, j in self.permutation.items() if i != j]
        return len(moved) == 2 and self.permutation[moved[0]] == moved[1]

    def to_dict(self):
        return {"permutation": {str(i): j for i, j in self.permutation.items()},
                "continuity_floor": self.continuity_floor, "steps": self.steps,
                "identity": self.is_identity, "transposition": self.is_transposition}


def _resample_loop(loop, steps):
    pts = np.asarray(loop, dtype=float)
    if not np.allclose(pts[0], pts[-1]):
        pts = np.vstack([pts, pts[:1]])
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    target = np.linspace(0.0, s[-1], steps + 1)
    return np.column_stack([np.interp(target, s, pts[:, c]) for c in range(pts.shape[1])])


def circle(center, radius, vertices=720):
    """Closed polyline approximating a circle (radii may differ per axis)."""
    phi = np.linspace(0.0, 2 * math.pi, vertices + 1)
    rx, ry = (radius, radius) if np.isscalar(radius) else radius
    return np.column_stack([center[0] + rx * np.cos(phi), center[1] + ry * np.sin(phi)])


def _eig_at(family, p):
    try:
        return eig(family(*p))
    except EigenSolverError as err:
        raise EncircleError(f"eigensolver failed at parameters {tuple(p)}: {err}") from err


def _track(family, path, tracked):
    dec = _eig_at(family, path[0])
    start = dec.vectors
    current = start[:, tracked]
    floor = 1.0
    worst = 0
    for step, p in enumerate(path[1:], start=1):
        dec = _eig_at(family, p)
        overlap = np.abs(current.conj().T @ dec.vectors)
        rows, cols = linear_sum_assignment(-overlap)
        matched = overlap[rows, cols]
        if matched.min() < floor:
            floor, worst = float(matched.min()), step
        current = dec.vectors[:, cols[np.argsort(rows)]]
    overlap = np.abs(current.conj().T @ start)
    _, cols = linear_sum_assignment(-overlap)
    return {int(i): int(j) for i, j in zip(tracked, cols)}, floor, worst


def encircle(family, loop, steps=256, tracked=None, avoid=(), refinements=2):
    """Follow eigenstates of ``family(p1, p2)`` around a closed loop.

    States are matched between consecutive points by maximal
    ``|<v_prev, v_next>|``. ``tracked`` selects canonical eigenstate indices
    (0-based) at the start point, default all. The loop is refined (steps
    doubled) while the smallest step-to-step overlap is at most 0.9.
    """
    if steps < 256:
        raise ValueError("at least 256 steps are required")
    pts = np.asarray(loop, dtype=float)
    for ep in avoid:
        dense = _resample_loop(pts, 4096)
        if np.min(np.linalg.norm(dense - np.asarray(ep), axis=1)) < 1e-4:
            raise ValueError(f"loop passes within 1e-4 of the exceptional point {tuple(ep)}")
    n = np.asarray(family(*pts[0])).shape[0]
    tracked = list(range(n)) if tracked is None else list(tracked)
    for _ in range(refinements + 1):
        path = _resample_loop(pts, steps)
        perm, floor, worst = _track(family, path, tracked)
        if floor > 0.9:
            if sorted(perm.values()) != sorted(perm):
                raise EncircleError(f"tracked states did not return onto themselves: {perm}")
            return LoopResult(perm, floor, steps)
        steps *= 2
    raise EncircleError(
        f"continuity floor {floor:.3f} <= 0.9 after {refinements} refinements; "
        f"worst segment near parameters {tuple(path[worst])}"
    )

"""Imaginary (and complex) gauge transformations in momentum space.

Scaling the plane-wave amplitude ``a_m`` by ``exp(i m theta)`` maps a Bloch
Hamiltonian ``H`` to ``G H G^-1`` with ``G = diag(exp(i m theta))``. The
diagonal is untouched and the coupling at offset ``d`` picks up the factor
``exp(i d theta)``. Choosing ``theta = (i/2) ln(c_{+1} / c_{-1})`` makes the
nearest-neighbour couplings symmetric.
"""

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import PotentialSpec, pt_symmetric

__all__ = [
    "Character",
    "EquivalenceResult",
    "GaugeAngle",
    "GaugeUndefinedError",
    "NotSymmetrizableError",
    "OffDiagonalForm",
    "Regime",
    "UnsupportedBandwidthError",
    "apply_gauge",
    "dirichlet_negative_control",
    "gauge_angle",
    "gauge_vector",
    "hermitian_equivalent",
    "off_diagonal_form",
    "symmetrizable",
]

NNN_RTOL = 1e-12


class Regime(enum.Enum):
    IMAGINARY = "Imaginary"
    COMPLEX = "Complex"
    UNDEFINED = "Undefined"


class Character(enum.Enum):
    REAL_HERMITIAN = "RealHermitian"
    PURELY_IMAGINARY = "PurelyImaginary"
    MIXED = "Mixed"


class GaugeUndefinedError(ValueError):
    """The gauge angle is undefined (a vanishing coupling, e.g. tau = 1)."""


class UnsupportedBandwidthError(ValueError):
    pass


class NotSymmetrizableError(ValueError):
    pass


@dataclass(frozen=True)
class GaugeAngle:
    theta: complex
    regime: Regime

    @property
    def defined(self):
        return self.regime is not Regime.UNDEFINED


def gauge_angle(t_minus, t_plus):
    """Angle that symmetrises the couplings ``t_-`` (to ``m+1``) and ``t_+``
    (to ``m-1``).

    For ``t_- t_+ > 0`` the angle is purely imaginary. For ``t_- t_+ < 0``
    the logarithm of the negative ratio is taken on the branch that gives
    ``Re theta = +pi/2``. A vanishing ``t_-`` gives the undefined regime.
    """
    if t_plus == 0:
        raise ValueError("t_plus must be nonzero")
    if t_minus == 0:
        return GaugeAngle(complex(math.nan, math.nan), Regime.UNDEFINED)
    ratio = complex(t_plus) / complex(t_minus)
    if ratio.imag == 0 and ratio.real < 0:
        log_ratio = complex(math.log(-ratio.real), -math.pi)
    else:
        log_ratio = cmath.log(ratio)
    theta = 0.5j * log_ratio
    if theta.real == 0:
        theta = complex(0.0, theta.imag)
        regime = Regime.IMAGINARY
    else:
        regime = Regime.COMPLEX
    return GaugeAngle(theta, regime)


def _angle_for(potential):
    return gauge_angle(potential[-1], potential[1])


def apply_gauge(H, angle):
    """Return ``G H G^-1`` for ``G = diag(exp(i m theta))``.

    ``H`` is a :class:`~nhbloch.model.BlochHamiltonian`; the diagonal of
    the result is bit-identical to that of ``H``.
    """
    if not angle.defined:
        raise GaugeUndefinedError("the gauge angle is undefined; transform refused")
    a = np.asarray(H.matrix)
    n = a.shape[0]
    rows, cols = np.indices((n, n))
    offset = rows - cols
    out = a * np.exp(1j * angle.theta * offset)
    np.fill_diagonal(out, np.diag(a))
    return H.replace_matrix(out)


def gauge_vector(coeffs, angle):
    """Apply ``G`` to plane-wave amplitudes ``a_m``, ``m = -M..M``."""
    coeffs = np.asarray(coeffs)
    M = (len(coeffs) - 1) // 2
    m = np.arange(-M, M + 1)
    return coeffs * np.exp(1j * m * angle.theta)


def _check_bandwidth(potential):
    if potential.bandwidth > 2:
        raise UnsupportedBandwidthError(
            f"unsupported bandwidth {potential.bandwidth}: only NN and NNN harmonics (|m| <= 2) "
            "are handled"
        )


def _symmetrizable_reason(potential):
    """``None`` when the potential can be symmetrised, else the reason."""
    _check_bandwidth(potential)
    c_p1, c_m1 = potential[1], potential[-1]
    if c_p1 == 0:
        raise ValueError("symmetrizable requires a nonzero c_{+1}")
    if c_m1 == 0:
        return "c_{-1} vanishes, so s = sqrt(c_{-1}/c_{+1}) is zero (gauge angle undefined)"
    s2 = c_m1 / c_p1
    if not cmath.isfinite(s2):
        return "s = sqrt(c_{-1}/c_{+1}) is not finite"
    c_p2, c_m2 = potential[2], potential[-2]
    if c_p2 == 0 and c_m2 == 0:
        return None
    target = s2 * s2 * c_p2
    if abs(c_m2 - target) > NNN_RTOL * max(abs(c_m2), abs(target)):
        return (f"NNN couplings violate c_{{-2}} = s^4 c_{{+2}}: c_{{-2}} = {c_m2:.6g}, "
                f"s^4 c_{{+2}} = {target:.6g}")
    return None


def symmetrizable(potential):
    """True iff one diagonal gauge makes every coupling of ``potential``
    symmetric (NN and NNN only)."""
    return _symmetrizable_reason(potential) is None


@dataclass(frozen=True)
class EquivalenceResult:
    eligible: bool
    transformed_potential: PotentialSpec = None
    character: Character = None
    angle: GaugeAngle = None
    reason: str = ""

    def to_dict(self):
        out = {"eligible": self.eligible}
        if self.angle is not None:
            out["theta"] = {"re": self.angle.theta.real, "im": self.angle.theta.imag}
            out["regime"] = self.angle.regime.value
        if self.eligible:
            out["character"] = self.character.value
            out["equivalent_potential"] = self.transformed_potential.to_dict()
        else:
            out["reason"] = self.reason
        return out


def _character(coeffs, rtol=1e-12):
    vals = list(coeffs.values())
    if all(abs(c.imag) <= rtol * abs(c) for c in vals):
        return Character.REAL_HERMITIAN
    if all(abs(c.real) <= rtol * abs(c) for c in vals):
        return Character.PURELY_IMAGINARY
    return Character.MIXED


def hermitian_equivalent(potential, strict=True):
    """Potential whose Bloch Hamiltonian is the gauge-symmetrised one.

    The NN coefficients become ``sqrt(c_{+1} c_{-1})`` (principal root);
    the NNN coefficients become ``c_{-1} c_{+2} / c_{+1}``, which is what the
    gauge actually produces and needs no branch choice. With ``strict`` an
    ineligible potential raises :class:`NotSymmetrizableError`; otherwise a
    result with ``eligible=False`` is returned.
    """
    angle = None
    try:
        reason = _symmetrizable_reason(potential)
        angle = _angle_for(potential)
    except ValueError as exc:
        reason = str(exc)
    if reason is None and not angle.defined:
        reason = "the gauge angle is undefined"
    if reason is not None:
        if strict:
            raise NotSymmetrizableError(reason)
        return EquivalenceResult(False, angle=angle, reason=reason)

    c_p1, c_m1 = potential[1], potential[-1]
    nn = complex(np.sqrt(complex(c_p1 * c_m1)))
    coeffs = {1: nn, -1: nn}
    if potential[0] != 0:
        coeffs[0] = potential[0]
    if potential[2] != 0:
        nnn = c_m1 * potential[2] / c_p1
        coeffs[2] = coeffs[-2] = nnn
    eq = PotentialSpec(coeffs, period=potential.period,
                       label=f"equivalent({potential.label})" if potential.label else "equivalent")
    return EquivalenceResult(True, eq, _character(coeffs), angle)


@dataclass(frozen=True)
class OffDiagonalForm:
    """Coupling pairs ``(t_-, t_+)`` per harmonic offset.

    For offset ``j`` the Bloch Hamiltonian has ``t_-`` on ``|m><m+j|`` and
    ``t_+`` on ``|m><m-j|``; ``diagonal_shift`` is ``c_0``.
    """

    pairs: dict
    diagonal_shift: float = 0.0

    @property
    def nn(self):
        return self.pairs.get(1)

    @property
    def nnn(self):
        return self.pairs.get(2)

    def is_symmetric(self):
        return all(a == b for a, b in self.pairs.values())


def off_diagonal_form(potential):
    """Read the asymmetric hopping pairs off a PT-symmetric potential."""
    if not pt_symmetric(potential):
        raise ValueError("off_diagonal_form requires a PT-symmetric potential (real c_m)")
    pairs = {}
    for j in range(1, potential.bandwidth + 1):
        t_minus, t_plus = potential[-j].real, potential[j].real
        if t_minus != 0 or t_plus != 0:
            pairs[j] = (t_minus, t_plus)
    return OffDiagonalForm(pairs, potential[0].real)


def dirichlet_negative_control(V0, tau, N):
    """Hamiltonian of ``V0 [cos x + i tau cos(x/2)]`` on ``[0, 2 pi]`` with
    Dirichlet walls, in the standing-wave basis ``sin(m x / 2)``,
    ``m = 1..N``.

    Diagonal ``(m/2)^2`` (minus ``V0/2`` for ``m = 1``), NN couplings
    ``i tau V0/2`` and NNN couplings ``V0/2``. The couplings are symmetric
    for every ``tau``, so no diagonal gauge can remove the gain and loss.
    """
    if N < 4:
        raise ValueError(f"N must be at least 4, got {N}")
    v = V0 / 2
    m = np.arange(1, N + 1)
    h = np.diag((m / 2) ** 2).astype(complex)
    h[0, 0] -= v
    i = np.arange(N - 1)
    h[i, i + 1] = h[i + 1, i] = 1j * tau * v
    i = np.arange(N - 2)
    h[i, i + 2] = h[i + 2, i] = v
    if not np.array_equal(h, h.T):
        raise AssertionError("standing-wave couplings must be symmetric")
    return h

"""Periodic complex potentials and their truncated plane-wave Bloch Hamiltonians.

A potential is stored by its Fourier coefficients, ``V(x) = sum_m c_m
exp(i m G x)`` with ``G = 2 pi / period``. The Bloch Hamiltonian at crystal
momentum ``k`` (in units of ``G``) acts on plane-wave amplitudes ``a_m``,
``m = -M..M``; entry ``(m, m')`` is ``G^2 (m + k)^2 delta_{m m'} + c_{m - m'}``.
"""

import json
import math
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

__all__ = [
    "DEFAULT_TRUNCATION",
    "BlochHamiltonian",
    "PotentialSpec",
    "build_bloch",
    "converged_truncation",
    "cosine",
    "fig5_potential",
    "fold_k",
    "free",
    "parse_family",
    "parse_potential",
    "pt_symmetric",
    "v1",
    "v1_plus_v2",
    "v2",
]

TWO_PI = 2.0 * math.pi
DEFAULT_TRUNCATION = 32
MAX_TRUNCATION = 64
PT_ATOL = 1e-14
PRUNE_ATOL = 1e-300


@dataclass(frozen=True)
class PotentialSpec:
    """Finite Fourier series of a periodic potential.

    ``coefficients`` maps harmonic ``m`` to the complex amplitude ``c_m``.
    Exact zeros are dropped on construction; tiny nonzero values are kept.
    """

    coefficients: dict
    period: float = TWO_PI
    label: str = ""

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period}")
        clean = {}
        for m, c in dict(self.coefficients).items():
            if int(m) != m:
                raise ValueError(f"harmonic index must be an integer, got {m!r}")
            c = complex(c)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError(f"coefficient c_{m} is not finite")
            if abs(c) >= PRUNE_ATOL:
                clean[int(m)] = clean.get(int(m), 0) + c
        clean = {m: clean[m] for m in sorted(clean) if abs(clean[m]) >= PRUNE_ATOL}
        object.__setattr__(self, "coefficients", MappingProxyType(clean))

    def __hash__(self):
        return hash((tuple(self.coefficients.items()), self.period, self.label))

    def __eq__(self, other):
        if not isinstance(other, PotentialSpec):
            return NotImplemented
        return (dict(self.coefficients) == dict(other.coefficients)
                and self.period == other.period and self.label == other.label)

    def __getitem__(self, m):
        return self.coefficients.get(m, 0j)

    @property
    def bandwidth(self):
        """Largest ``|m|`` with a nonzero coefficient (0 for a constant)."""
        return max((abs(m) for m in self.coefficients), default=0)

    @property
    def wavenumber(self):
        return TWO_PI / self.period

    def is_pt_symmetric(self, atol=PT_ATOL):
        return pt_symmetric(self, atol)

    def __call__(self, x):
        """Evaluate ``V(x)`` on an array of positions."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for m, c in self.coefficients.items():
            out += c * np.exp(1j * m * self.wavenumber * x)
        return out

    def to_dict(self):
        return {
            "label": self.label,
            "period": self.period,
            "coefficients": [
                {"m": m, "re": c.real, "im": c.imag} for m, c in self.coefficients.items()
            ],
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data):
        try:
            coeffs = {}
            for entry in data["coefficients"]:
                m = entry["m"]
                if isinstance(m, bool) or int(m) != m:
                    raise ValueError(f"harmonic index must be an integer, got {m!r}")
                coeffs[int(m)] = coeffs.get(int(m), 0) + complex(float(entry.get("re", 0.0)),
                                                                 float(entry.get("im", 0.0)))
            return cls(coeffs, period=float(data.get("period", TWO_PI)),
                       label=str(data.get("label", "")))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed potential document: {exc}") from exc

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def pt_symmetric(potential, atol=PT_ATOL):
    """True iff ``V(x) = V*(-x)``, i.e. every Fourier coefficient is real."""
    return all(abs(c.imag) <= atol for c in potential.coefficients.values())


# Named potentials. V_m(x) = V0 (cos mx + i tau sin mx) has
# c_{+m} = V0 (1 + tau) / 2 and c_{-m} = V0 (1 - tau) / 2.

def v1(V0, tau):
    """``V0 (cos x + i tau sin x)``."""
    return PotentialSpec({1: V0 * (1 + tau) / 2, -1: V0 * (1 - tau) / 2},
                         label=f"V1(V0={V0:g},tau={tau:g})")


def v2(V0, tau):
    """``V0 (cos 2x + i tau sin 2x)``."""
    return PotentialSpec({2: V0 * (1 + tau) / 2, -2: V0 * (1 - tau) / 2},
                         label=f"V2(V0={V0:g},tau={tau:g})")


def v1_plus_v2(V0, tau):
    c_plus, c_minus = V0 * (1 + tau) / 2, V0 * (1 - tau) / 2
    return PotentialSpec({1: c_plus, -1: c_minus, 2: c_plus, -2: c_minus},
                         label=f"V1+V2(V0={V0:g},tau={tau:g})")


def fig5_potential(V0, tau):
    """``V1(x) + V0 [(1 + tau^2) cos 2x + 2 i tau sin 2x]``.

    Its second harmonics are ``V0 (1 +- tau)^2 / 2``, which makes it
    gauge-equivalent to a real potential for ``0 <= tau < 1``.
    """
    return PotentialSpec(
        {1: V0 * (1 + tau) / 2, -1: V0 * (1 - tau) / 2,
         2: V0 * (1 + tau) ** 2 / 2, -2: V0 * (1 - tau) ** 2 / 2},
        label=f"fig5(V0={V0:g},tau={tau:g})",
    )


def cosine(amplitude, harmonic=1):
    """``amplitude * cos(harmonic * x)``; amplitude may be complex."""
    return PotentialSpec({harmonic: amplitude / 2, -harmonic: amplitude / 2},
                         label=f"cos(A={amplitude:g},m={harmonic})")


def free():
    return PotentialSpec({}, label="free")


_SHORTHANDS = {
    "V1": v1,
    "V2": v2,
    "V1+V2": v1_plus_v2,
    "fig5": fig5_potential,
}


def parse_potential(text):
    """Parse a shorthand such as ``"V1:1,0.8"``, ``"V1+V2:1,0.5"``,
    ``"fig5:1,0.5"``, ``"cos:0.6"`` or ``"free"``, or a path to a JSON
    potential document."""
    text = text.strip()
    if text == "free":
        return free()
    name, sep, args = text.partition(":")
    if sep and name in _SHORTHANDS:
        values = [float(v) for v in args.split(",")]
        if len(values) != 2:
            raise ValueError(f"{name} expects 'V0,tau', got {args!r}")
        return _SHORTHANDS[name](*values)
    if sep and name == "cos":
        parts = args.split(",")
        amp = complex(parts[0].replace("i", "j"))
        return cosine(amp, int(parts[1]) if len(parts) > 1 else 1)
    if text.endswith(".json"):
        with open(text) as fh:
            return PotentialSpec.from_dict(json.load(fh))
    raise ValueError(f"unrecognised potential {text!r}")


def parse_family(text):
    """Parse ``"V1:V0"`` (or ``"V1:V0,tau"``, tau ignored) into a one-parameter
    family ``tau -> PotentialSpec`` at fixed ``V0``."""
    name, sep, args = text.strip().partition(":")
    if not sep or name not in _SHORTHANDS:
        raise ValueError(f"expected a family such as 'V1:1', got {text!r}")
    V0 = float(args.split(",")[0])
    factory = _SHORTHANDS[name]
    return lambda tau: factory(V0, tau)


def fold_k(k):
    """Map ``k`` into the first Brillouin zone ``[-0.5, 0.5]``."""
    if -0.5 <= k <= 0.5:
        return float(k)
    folded = k - math.floor(k + 0.5)
    return float(folded)


@dataclass(frozen=True)
class BlochHamiltonian:
    """Truncated Bloch Hamiltonian over plane waves ``m = -M..M``."""

    k: float
    truncation: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def indices(self):
        return np.arange(-self.truncation, self.truncation + 1)

    @property
    def dim(self):
        return 2 * self.truncation + 1

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype)

    def replace_matrix(self, matrix):
        return BlochHamiltonian(self.k, self.truncation, np.array(matrix, dtype=complex))


def build_bloch(potential, k, M=DEFAULT_TRUNCATION):
    """Assemble the dense ``(2M+1) x (2M+1)`` Bloch Hamiltonian.

    ``k`` outside ``[-0.5, 0.5]`` is folded into the first zone with a
    warning. ``M`` must be at least the potential's bandwidth.
    """
    M = int(M)
    if M < 1:
        raise ValueError(f"truncation M must be >= 1, got {M}")
    if M < potential.bandwidth:
        raise ValueError(
            f"truncation M={M} is smaller than the potential bandwidth {potential.bandwidth}; "
            "couplings beyond the basis would be dropped"
        )
    if not -0.5 <= k <= 0.5:
        folded = fold_k(k)
        warnings.warn(f"k={k} folded into the first Brillouin zone as k={folded}", stacklevel=2)
        k = folded
    m = np.arange(-M, M + 1)
    G = potential.wavenumber
    h = np.zeros((2 * M + 1, 2 * M + 1), dtype=complex)
    h[m + M, m + M] = (G * (m + k)) ** 2
    for d, c in potential.coefficients.items():
        if d == 0:
            h[m + M, m + M] += c
            continue
        rows = np.arange(max(0, d), min(2 * M + 1, 2 * M + 1 + d))
        h[rows, rows - d] = c
    return BlochHamiltonian(float(k), M, h)


def converged_truncation(potential, k, n_bands, start=DEFAULT_TRUNCATION, tol=1e-10,
                         max_truncation=MAX_TRUNCATION):
    """Smallest ``M`` in the doubling sequence ``start, 2 start, ...`` for
    which the lowest ``n_bands`` energies change by less than ``tol``.

    Returns ``(M, change)``. When ``max_truncation`` is reached first the
    last change is returned and a warning is issued.
    """
    from .eig import eig_values_only

    M = max(int(start), potential.bandwidth, (n_bands + 3) // 2)
    prev = eig_values_only(build_bloch(potential, k, M).matrix)[:n_bands]
    change = math.inf
    while 2 * M <= max_truncation:
        M *= 2
        cur = eig_values_only(build_bloch(potential, k, M).matrix)[:n_bands]
        change = float(np.max(np.abs(cur - prev)))
        if change < tol:
            return M // 2, change
        prev = cur
    warnings.warn(f"truncation not converged to {tol:g} at M={M}; last change {change:.3e}",
                  stacklevel=2)
    return M, change

"""Few-mode matrices that capture each EP.

Keeping only the plane waves that meet at an EP gives 2x2, 3x3 and 4x4
models with closed-form spectra. Their reality windows explain why the
Dirac pair survives on both sides of tau = 1.
"""
import math

import numpy as np

from nhbloch import eig_values_only
from nhbloch.ep import h3_discriminant, truncated_models

for name, tau in (("H2", 0.8), ("H2", 1.1), ("H3", 0.6), ("H3_nnn", 0.8)):
    m = truncated_models(name, 1.0, tau)
    print(f"{name} tau={tau}: numeric {np.round(eig_values_only(m.matrix), 6)}, "
          f"closed form {np.round(np.sort_complex(m.closed_form), 6)}")

# H3: the pair (omega +- sqrt(omega^2 + 8 t_- t_+)) / 2 is complex only for
# imaginary coupling, and only once |t| exceeds omega / (2 sqrt 2)
bound = 1 / (2 * math.sqrt(2))
for t in (0.5 * bound, 0.99 * bound, 1.01 * bound, 1.5 * bound):
    tau = math.sqrt(1 + 4 * t * t)
    print(f"|t|={t:.4f} tau={tau:.4f} discriminant={h3_discriminant(1.0, tau):+.4f}")

# H4 at V0 = 1: omega, omega' and (omega+omega')/2 +- sqrt((omega-omega')^2/4 + 5 t^2)
tau = 0.5
m = truncated_models("H4", 1.0, tau)
w, wp, t2 = 0.25, 2.25, (1 - tau ** 2) / 4
root = math.sqrt((w - wp) ** 2 / 4 + 5 * t2)
print("H4 numeric:", np.round(eig_values_only(m.matrix).real, 6))
print("H4 formula:", np.round(sorted([w, wp, (w + wp) / 2 - root, (w + wp) / 2 + root]), 6))

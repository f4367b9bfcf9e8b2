"""Complex periodic potential vs. its real equivalent.

V(x) = V0 (cos x + i tau sin x) couples plane wave m to m+1 and m-1 with
unequal weights t_- and t_+. A diagonal imaginary gauge rescales the two
couplings to their geometric mean, so the bands cannot tell the difference.
"""
import numpy as np

from nhbloch import (band_sweep, build_bloch, cosine, eig, gauge_angle, gauge_vector,
                     hermitian_equivalent, participation_ratio, v1)

V = v1(1.0, 0.8)
print("couplings t_-, t_+:", V[-1], V[1])

res = hermitian_equivalent(V)
print("gauge angle:", res.angle.theta, "regime:", res.angle.regime.value)
print("equivalent potential:", dict(res.transformed_potential.coefficients))

# bands over the Brillouin zone, both potentials
k = np.linspace(-0.5, 0.5, 101)
a = band_sweep(V, k, 32, 3).energies
b = band_sweep(cosine(0.6), k, 32, 3).energies
print("max band deviation:", np.max(np.abs(a - b)))
print("max |Im omega|:", np.max(np.abs(a.imag)))

# the ground state is skewed in momentum space; the gauge undoes the skew
vec = eig(build_bloch(V, 0.0, 32).matrix).vectors[:, 0]
angle = gauge_angle(V[-1], V[1])
print("participation ratio before/after gauge:",
      round(participation_ratio(vec), 4), round(participation_ratio(gauge_vector(vec, angle)), 4))

# past tau = 1 the equivalent potential is purely imaginary
broken = hermitian_equivalent(v1(1.0, 1.1))
print("tau=1.1 equivalent:", dict(broken.transformed_potential.coefficients),
      broken.character.value)

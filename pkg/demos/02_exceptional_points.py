"""Two kinds of exceptional points in one band structure.

At tau = 1 the potential V0 e^{ix} only couples m to m+1, so H_k is
triangular and every band is a free parabola. Two bands meet at k = 0.5 and
at k = 0; the two meetings behave differently once tau moves off 1.
"""
import numpy as np

from nhbloch import build_bloch, dispersion_exponent, eig_values_only, ep_scan, v1, v1_plus_v2

family = lambda tau: v1(1.0, tau)

for k, pair in ((0.5, (1, 2)), (0.0, (2, 3))):
    rep = ep_scan(family, k, pair)
    print(f"k={k} bands {pair}: tau={rep.location[1]:.9f} overlap={rep.overlap_at_min:.6f} "
          f"rigidity={rep.phase_rigidity_at_min:.2e} -> {rep.classification.value}")

# crossing tau = 1: the zone-edge pair turns complex, the centre pair stays real
for tau in (0.95, 1.05):
    edge = eig_values_only(build_bloch(family(tau), 0.5, 16).matrix)[:2]
    centre = eig_values_only(build_bloch(family(tau), 0.0, 16).matrix)[1:3]
    print(f"tau={tau}: edge pair {np.round(edge, 4)}, centre pair {np.round(centre, 4)}")

# how the gap opens: square root at the conventional EP, linear at the Dirac EP
print("Im splitting exponent, k=0.5:",
      round(dispersion_exponent(family, 0.5, (1, 2), 1.0, measure="imag").exponent, 3))
print("gap exponent, k=0 bands 2-3:", round(dispersion_exponent(family, 0.0, (2, 3), 1.0).exponent, 3))
print("gap exponent, k=0 bands 4-5:", round(dispersion_exponent(family, 0.0, (4, 5), 1.0).exponent, 3))

# adding a second harmonic with the same structure swaps the two roles
swapped = lambda tau: v1_plus_v2(1.0, tau)
for k, pair in ((0.5, (1, 2)), (0.0, (2, 3))):
    print(f"V1+V2, k={k}: {ep_scan(swapped, k, pair).classification.value}")

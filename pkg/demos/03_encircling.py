"""Walking around exceptional points.

A loop around a square-root branch point exchanges the two eigenstates; a
loop around the Dirac EP brings each state back to itself.
"""
from nhbloch import build_bloch, circle, encircle, two_level_matrix, v1
from nhbloch.ep import riemann_sheet_grid

two_level = lambda delta, g: two_level_matrix(delta, g, 1.0)

res = encircle(two_level, circle((0.0, 1.0), 0.5))
print("around (delta, g) = (0, 1):", res.permutation, "transposition:", res.is_transposition)
res = encircle(two_level, circle((0.0, 0.0), 0.5))
print("around (0, 0), no EP inside:", res.permutation, "identity:", res.is_identity)

# the full Bloch Hamiltonian, loop in (k, tau) around the zone-centre EP
bloch = lambda k, tau: build_bloch(v1(1.0, tau), k, 8).matrix
res = encircle(bloch, circle((0.0, 1.0), 0.1), tracked=[1, 2])
print("bands 2-3 around (k, tau) = (0, 1):", res.permutation, "identity:", res.is_identity)

# on delta = 0 the real parts merge for |g| > t, the imaginary parts for |g| < t
mesh = riemann_sheet_grid((-2, 2), (-2, 2), 1.0, 17)
row = list(mesh.delta[:, 0]).index(0.0)
for g, re, im in zip(mesh.g[row], mesh.re_plus[row], mesh.im_plus[row]):
    print(f"g={g:+.1f}  Re E+={re:.3f}  Im E+={im:+.3f}")

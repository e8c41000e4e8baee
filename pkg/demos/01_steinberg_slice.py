"""
Coxeter slices of SL_3
======================

The slice of the Coxeter word s1 s2 consists of the matrices
(I + x E_12 + y E_13) w, which are companion matrices up to signs.
Every regular element of the big cell conjugates into it by a unique
unipotent element, and the slice point is fixed by the characteristic
polynomial alone.
"""

import numpy as np

from whittaker.rootsys import coxeter_word, root_partition
from whittaker.slices import (
    build_slice_spec,
    charpoly_distance,
    companion_oracle,
    omega_param,
    random_slice_point,
    random_u_coords,
    sigma_param,
    transversality_solve,
)

n = 3
word = coxeter_word(n)
spec = build_slice_spec(word, n)
rp = root_partition(word, n)
print("moved roots:", [r.coeffs for r in rp.moved])
print("flipped roots:", [r.coeffs for r in rp.flipped])
print("dims:", spec.dims())

# a slice point and its conjugate by a random unipotent element
rng = np.random.default_rng(0)
p = random_slice_point(spec, rng)
u = random_u_coords(spec, rng)
g = omega_param(spec, u, p)
print("slice point:\n", np.round(sigma_param(spec, p), 3))

# Newton recovers both factors
sol = transversality_solve(spec, g)
print("recovered u:", np.allclose(sol.u_coords, u), " recovered p:", np.allclose(sol.point.flat(), p.flat()))

# the companion oracle finds the same point from char-poly coefficients only
q = companion_oracle(n, g, sol.point.component_index)
print("oracle agrees:", np.allclose(q.flat(), sol.point.flat()))
print("char-poly distance:", charpoly_distance(sigma_param(spec, q), g))

# the three components differ by central elements
for k in range(spec.n_components):
    print("component", k, "representative diag:", np.round(np.diag(spec.component_reps[k]), 3))

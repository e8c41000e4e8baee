"""
Slodowy slices and Whittaker reduction
======================================

The additive picture: for the subregular nilpotent of sl_3 (Jordan type
2,1) the slice f + g^e is four dimensional, N = exp(n) acts freely on
f + n^perp and the reduced Lie-Poisson structure has rank 2 at generic
points. The bracket of N-invariant lifts does not depend on the choice of
Lagrangian l or on how the lifts are extended.
"""

import numpy as np

from whittaker.classical import (
    adjoint_action_map,
    classical_transversality_solve,
    random_n_coords,
    random_slice_coords,
    slodowy_data,
    slodowy_reduced_bivector,
    whittaker_bracket,
)

sd = slodowy_data("2,1")
print("triple residuals:", sd.triple.residuals())
print("dim slice:", sd.dim_slice, " dim n:", sd.n_basis.shape[1], " dim l:", sd.ell_basis.shape[1])

rng = np.random.default_rng(3)
nc, sc = random_n_coords(rng, sd, 0.5), random_slice_coords(rng, sd, 0.5)
x = adjoint_action_map(sd, nc, sc)
sol = classical_transversality_solve(sd, x)
print("round trip:", sol.residual, " slice coords recovered:", np.allclose(sol.s_coords, sc))

s = sd.slice_point(sc)
red = slodowy_reduced_bivector(sd, s)
print("reduced rank at a generic point:", red.rank)
print("reduced rank at f:", slodowy_reduced_bivector(sd, sd.slice_origin).rank)

df, dg = rng.normal(size=sd.dim_slice), rng.normal(size=sd.dim_slice)
other = slodowy_data("2,1", seed=4)
print("pullback value:", df @ red.bivector @ dg)
for data, ext in ((sd, None), (sd, 1), (other, None), (other, 2)):
    print("  lift bracket:", whittaker_bracket(data, s, df, dg, ext))

"""
Annihilators of Omega under pi0
===============================

At g in Omega = U Z w U every covector killing T_g Omega has both its left
and right representatives in u + c. Writing them as n1 + c1 and n2 + c2,
pi0^# of the covector equals (rho(-c1) + rho(-c2))/2 + rho(-n1). Flipping
the sign in front of rho(c2) breaks the identity already on SL_2.

For (SL_4, s1) everything holds; for (SL_4, s2) the annihilator leaves
u + c, so the description does not apply to that word.
"""

import numpy as np

from whittaker.reduction import sharp_decomposition
from whittaker.rootsys import WeylWord
from whittaker.slices import build_slice_spec, random_slice_point, random_u_coords

cases = [(2, (1,)), (3, (1, 2)), (4, (1,)), (4, (2,))]
for n, letters in cases:
    spec = build_slice_spec(WeylWord(letters), n)
    rng = np.random.default_rng(7)
    worst = np.zeros(4)
    for _ in range(20):
        r = sharp_decomposition(spec, random_u_coords(spec, rng), random_slice_point(spec, rng))
        vals = [r.annihilator_membership, r.containment, r.formula_derived, r.formula_printed]
        worst = np.maximum(worst, vals)
    print(f"SL_{n} word {letters}: membership {worst[0]:.1e}  containment {worst[1]:.1e}  "
          f"-rho(c2) formula {worst[2]:.1e}  +rho(c2) formula {worst[3]:.1e}")

"""
The Poisson structures pi0 and pi_D
===================================

pi0 on G is conjugation invariant under the torus, vanishes at the centre
and satisfies the Jacobi identity. On the double G x G the difference
Lambda^R - Lambda^L is multiplicative and pushes forward to pi0 through
(b1, b2) -> b1 b2^{-1}; the sum is nondegenerate at generic points.
"""

import numpy as np

from whittaker._linalg import numerical_rank
from whittaker.doubles import (
    jacobiator,
    lambda_poisson_residual,
    multiplicativity_residual,
    pi0_brackets,
    pi0_matrix,
    pid_brackets,
    pid_matrix,
)
from whittaker.liegroup import chevalley_frame, lambda_invert, sample_group, sl_random

rng = np.random.default_rng(1)
fr = chevalley_frame(3)

g = sample_group(rng, 3)
print("pi0 Jacobi residual:", jacobiator(pi0_matrix, g, fr, bracket_fn=pi0_brackets))
print("pi0 rank at a generic point:", numerical_rank(pi0_matrix(g)))

# at central elements pi0 vanishes; at other involutions it need not
zeta = np.exp(2j * np.pi / 3)
print("|pi0| at zeta I:", np.abs(pi0_matrix(zeta * np.eye(3))).max())
print("|pi0| at diag(-1,-1,1):", np.abs(pi0_matrix(np.diag([-1.0, -1.0, 1.0]))).max())

d = (sl_random(rng, 3), sl_random(rng, 3))
e = (sl_random(rng, 3), sl_random(rng, 3))
print("multiplicativity of pi_D^-:", multiplicativity_residual(d, e))
plus = lambda p: pid_matrix(1, p)  # noqa: E731
print("pi_D^+ Jacobi residual:", jacobiator(plus, d, fr, bracket_fn=lambda p: pid_brackets(1, p)))
print("pi_D^+ rank:", numerical_rank(pid_matrix(1, d)), "of", 2 * fr.dim)

b1, b2 = lambda_invert(g)
print("pushforward of pi_D^- vs pi0:", lambda_poisson_residual(b1, b2))

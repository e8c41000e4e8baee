"""Numerical toolkit for multiplicative Whittaker reduction in SL_n(C).

Modules
-------
rootsys     root system and Weyl group combinatorics of type A (exact)
liegroup    matrix realization, Chevalley frame, Bruhat factorization, 1-forms
doubles     Manin triple data, pi0 and the double bivectors, moment maps
dirac       pointwise linear Dirac structures
slices      slices Sigma, the cell Omega and the transversality solver
reduction   reduced Poisson structures on mu^{-1}(Sigma)
classical   Slodowy slices and classical Whittaker reduction
checks      property suites for the command line
"""

from .rootsys import InvalidInput, Root, WeylWord, coxeter_word

__all__ = ["InvalidInput", "Root", "WeylWord", "coxeter_word"]
__version__ = "0.1.0"

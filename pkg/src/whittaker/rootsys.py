"""Root system and Weyl group combinatorics for type A_{n-1}.

Everything here is exact: roots are integer vectors in simple-root
coordinates, Cartan subspaces are rational, and the component group of a
fixed torus comes from a Smith normal form over the integers.

Weyl words follow the composition convention "leftmost letter acts last":
the word ``(1, 2)`` is the element ``s1 s2``, which applies ``s2`` first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Iterable, Sequence

import sympy
from sympy.matrices.normalforms import smith_normal_decomp


class InvalidInput(ValueError):
    """Raised on out-of-range ranks, letters or mismatched roots."""


@dataclass(frozen=True, order=True)
class Root:
    """A root of A_{n-1} written in the simple roots alpha_1..alpha_{n-1}."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = self.coeffs
        nz = [i for i, x in enumerate(c) if x != 0]
        if not nz:
            raise InvalidInput("zero vector is not a root")
        sign = c[nz[0]]
        if sign not in (1, -1) or nz != list(range(nz[0], nz[-1] + 1)) or any(
            c[i] != sign for i in nz
        ):
            raise InvalidInput(f"{c} is not a root of type A")

    @classmethod
    def from_pair(cls, i: int, j: int, n: int) -> "Root":
        """The root eps_i - eps_j (0-based indices, i != j) of sl_n."""
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise InvalidInput(f"bad index pair ({i}, {j}) for n={n}")
        lo, hi = min(i, j), max(i, j)
        s = 1 if i < j else -1
        return cls(tuple(s if lo <= k < hi else 0 for k in range(n - 1)))

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    @property
    def height(self) -> int:
        return sum(self.coeffs)

    def is_positive(self) -> bool:
        return self.height > 0

    def __neg__(self) -> "Root":
        return Root(tuple(-x for x in self.coeffs))

    def pair(self) -> tuple[int, int]:
        """Return (i, j) with this root equal to eps_i - eps_j."""
        nz = [k for k, x in enumerate(self.coeffs) if x]
        lo, hi = nz[0], nz[-1] + 1
        return (lo, hi) if self.is_positive() else (hi, lo)

    def eps_vector(self) -> tuple[int, ...]:
        i, j = self.pair()
        v = [0] * (self.rank + 1)
        v[i], v[j] = 1, -1
        return tuple(v)

    def __str__(self):
        terms = [f"a{k + 1}" for k, x in enumerate(self.coeffs) if x]
        body = "+".join(terms)
        return body if self.is_positive() else f"-({body})"


@dataclass(frozen=True)
class WeylWord:
    """A word in the simple reflections s_1..s_{n-1}; the empty word is e."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(x) for x in self.letters))
        if any(x < 1 for x in self.letters):
            raise InvalidInput(f"letters must be >= 1, got {self.letters}")

    @classmethod
    def parse(cls, text: str) -> "WeylWord":
        """Parse ``"1 2"``, ``"1,2"`` or ``""``."""
        parts = text.replace(",", " ").split()
        try:
            return cls(tuple(int(p) for p in parts))
        except ValueError as exc:
            raise InvalidInput(f"cannot parse Weyl word {text!r}") from exc

    def check_rank(self, n: int) -> None:
        if n < 2:
            raise InvalidInput(f"invalid rank n={n}")
        bad = [x for x in self.letters if x > n - 1]
        if bad:
            raise InvalidInput(f"letters {bad} out of range for SL_{n}")

    def inverse(self) -> "WeylWord":
        return WeylWord(self.letters[::-1])

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: "WeylWord") -> "WeylWord":
        return WeylWord(self.letters + other.letters)

    def permutation(self, n: int) -> tuple[int, ...]:
        """The permutation sigma with w(eps_k) = eps_{sigma[k]}."""
        self.check_rank(n)
        perm = list(range(n))
        # rightmost letter acts first
        for letter in reversed(self.letters):
            a, b = letter - 1, letter
            perm = [b if p == a else a if p == b else p for p in perm]
        return tuple(perm)

    def length(self, n: int) -> int:
        """Coxeter length of the element (number of inversions)."""
        p = self.permutation(n)
        return sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])

    def is_reduced(self, n: int) -> bool:
        return self.length(n) == len(self)

    def __str__(self):
        return " ".join(str(x) for x in self.letters) or "e"


def coxeter_word(n: int) -> WeylWord:
    """The Coxeter element s_1 s_2 ... s_{n-1}."""
    return WeylWord(tuple(range(1, n)))


@dataclass(frozen=True)
class RootPartition:
    fixed: tuple[Root, ...]
    moved: tuple[Root, ...]
    flipped: tuple[Root, ...]


@dataclass(frozen=True)
class CartanSplit:
    """Rational bases of t^w and its Killing complement c.

    Vectors are in fundamental-coweight coordinates, i.e. the entries of a
    vector h are the values alpha_i(h).
    """

    t_w_basis: tuple[tuple[int, ...], ...]
    c_basis: tuple[tuple[int, ...], ...]

    @property
    def dim_t_w(self) -> int:
        return len(self.t_w_basis)

    @property
    def dim_c(self) -> int:
        return len(self.c_basis)


@dataclass(frozen=True)
class TorusComponents:
    """pi_0(T^w) as a product of cyclic groups with explicit generators.

    ``generators[j]`` is a rational vector y in eps-coordinates (entries sum
    to zero) such that diag(exp(2 pi i y)) is a w-fixed torus element of
    order ``divisors[j]`` generating the j-th cyclic factor.
    """

    divisors: tuple[int, ...]
    generators: tuple[tuple[Fraction, ...], ...] = field(default=())

    @property
    def order(self) -> int:
        out = 1
        for d in self.divisors:
            out *= d
        return out


def _check_n(n: int) -> None:
    if not isinstance(n, int) or n < 2:
        raise InvalidInput(f"invalid rank n={n}")


@lru_cache(maxsize=None)
def positive_roots(n: int) -> tuple[Root, ...]:
    """Positive roots of A_{n-1}, sorted by height then lexicographically."""
    _check_n(n)
    roots = [Root.from_pair(i, j, n) for i in range(n) for j in range(i + 1, n)]
    return tuple(sorted(roots, key=lambda r: (r.height, tuple(-x for x in r.coeffs))))


def simple_roots(n: int) -> tuple[Root, ...]:
    return tuple(r for r in positive_roots(n) if r.height == 1)


def weyl_act(w: WeylWord, alpha: Root) -> Root:
    """Apply w to a root."""
    n = alpha.rank + 1
    try:
        perm = w.permutation(n)
    except InvalidInput as exc:
        raise InvalidInput(f"rank mismatch between {w} and {alpha}") from exc
    i, j = alpha.pair()
    return Root.from_pair(perm[i], perm[j], n)


def root_partition(w: WeylWord, n: int) -> RootPartition:
    w.check_rank(n)
    winv = w.inverse()
    fixed, moved, flipped = [], [], []
    for a in positive_roots(n):
        if weyl_act(w, a) == a:
            fixed.append(a)
        else:
            moved.append(a)
            if not weyl_act(winv, a).is_positive():
                flipped.append(a)
    return RootPartition(tuple(fixed), tuple(moved), tuple(flipped))


def _coweight_to_eps(n: int) -> sympy.Matrix:
    """Matrix C with a = C c, where c_i = a_i - a_{i+1} and sum(a) = 0."""
    cols = []
    for i in range(n - 1):
        # fundamental coweight: (n-1-i)/n on the first i+1 slots, -(i+1)/n after
        col = [sympy.Rational(n - 1 - i, n) if k <= i else -sympy.Rational(i + 1, n) for k in range(n)]
        cols.append(col)
    return sympy.Matrix(cols).T


def _eps_to_coweight(n: int) -> sympy.Matrix:
    return sympy.Matrix(n - 1, n, lambda i, k: 1 if k == i else (-1 if k == i + 1 else 0))


def _perm_matrix(perm: Sequence[int]) -> sympy.Matrix:
    n = len(perm)
    return sympy.Matrix(n, n, lambda r, c: 1 if perm[c] == r else 0)


def weyl_matrix_coweight(w: WeylWord, n: int) -> sympy.Matrix:
    """Action of w on t in fundamental-coweight coordinates (exact)."""
    return _eps_to_coweight(n) * _perm_matrix(w.permutation(n)) * _coweight_to_eps(n)


def killing_gram_coweight(n: int) -> sympy.Matrix:
    """Gram matrix of kappa(X, Y) = 2n tr(XY) on t in coweight coordinates."""
    C = _coweight_to_eps(n)
    return 2 * n * C.T * C


def _clear(vec: Iterable) -> tuple[int, ...]:
    vals = [sympy.Rational(x) for x in vec]
    den = 1
    for v in vals:
        den = lcm(den, int(v.q))
    ints = [int(v * den) for v in vals]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    g = g or 1
    ints = [x // g for x in ints]
    first = next((x for x in ints if x), 1)
    return tuple(-x for x in ints) if first < 0 else tuple(ints)


def cartan_split(w: WeylWord, n: int) -> CartanSplit:
    w.check_rank(n)
    M = weyl_matrix_coweight(w, n) - sympy.eye(n - 1)
    tw = [_clear(v) for v in M.nullspace()]
    K = killing_gram_coweight(n)
    if tw:
        T = sympy.Matrix([list(v) for v in tw])
        c = [_clear(v) for v in (T * K).nullspace()]
    else:
        c = [tuple(1 if k == i else 0 for k in range(n - 1)) for i in range(n - 1)]
    return CartanSplit(tuple(tw), tuple(c))


def coweight_to_eps(vec: Sequence, n: int) -> tuple[Fraction, ...]:
    """Diagonal entries of the Cartan element with the given alpha_i-values."""
    a = _coweight_to_eps(n) * sympy.Matrix(list(vec))
    return tuple(Fraction(int(x.p), int(x.q)) for x in a)


def torus_component_group(w: WeylWord, n: int) -> TorusComponents:
    """Torsion of X_*(T) / (w - 1) X_*(T) for the coroot lattice of SL_n."""
    w.check_rank(n)
    # coroot basis alpha_i^vee = e_i - e_{i+1}; in that basis w acts like on roots
    cols = []
    for s in simple_roots(n):
        img = weyl_act(w, s)
        cols.append([img.coeffs[k] - s.coeffs[k] for k in range(n - 1)])
    M = sympy.Matrix(cols).T
    D, S, T = smith_normal_decomp(M, domain=sympy.ZZ)
    divisors, gens = [], []
    for j in range(n - 1):
        d = int(D[j, j])
        if abs(d) <= 1:
            continue
        x = T[:, j]  # M x = d * S^{-1} e_j
        y_coroot = [sympy.Rational(int(x[k]), d) for k in range(n - 1)]
        y_eps = [sympy.Integer(0)] * n
        for k, yk in enumerate(y_coroot):
            y_eps[k] += yk
            y_eps[k + 1] -= yk
        divisors.append(abs(d))
        gens.append(tuple(Fraction(int(v.p), int(v.q)) for v in y_eps))
    return TorusComponents(tuple(divisors), tuple(gens))


def weyl_elements(n: int) -> dict[tuple[int, ...], WeylWord]:
    """One reduced word for every element of W(A_{n-1}), keyed by permutation."""
    _check_n(n)
    start = tuple(range(n))
    seen = {start: WeylWord()}
    frontier = [start]
    while frontier:
        nxt = []
        for p in frontier:
            for i in range(1, n):
                word = WeylWord((i,)) * seen[p]
                q = word.permutation(n)
                if q not in seen:
                    seen[q] = word
                    nxt.append(q)
        frontier = nxt
    return seen

"""Exact polynomial and differential-operator algebra.

Everything here is generic over the coefficient scalars: pass `int` /
`fractions.Fraction` coefficients to get exact arithmetic (used by the
symbolic identity tests), or `float` / `complex` for evaluation paths.
No simplification beyond stripping exact zeros is ever attempted.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Iterator, Mapping, Sequence


class Polynomial:
    """Dense univariate polynomial, degree-indexed coefficients.

    Trailing zero coefficients are stripped, so the zero polynomial has an
    empty coefficient tuple and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = list(coeffs)
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls(())

    @classmethod
    def one(cls) -> "Polynomial":
        return cls((1,))

    @classmethod
    def monomial(cls, n: int, coeff=1) -> "Polynomial":
        return cls((0,) * n + (coeff,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial(
            self.coeff(i) + other.coeff(i) for i in range(n)
        )

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _as_poly(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            if not self.coeffs or not other.coeffs:
                return Polynomial.zero()
            out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] = out[i + j] + a * b
            return Polynomial(out)
        return Polynomial(c * other for c in self.coeffs)

    def __rmul__(self, other):
        return Polynomial(other * c for c in self.coeffs)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative polynomial power")
        out = Polynomial.one()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, float, complex)) or _is_rational(other):
            return self == Polynomial((other,))
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)!r})"

    def to_json(self) -> dict:
        return {"coeffs": [float(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Polynomial":
        return cls(obj["coeffs"])


def _is_rational(x) -> bool:
    from fractions import Fraction

    return isinstance(x, Fraction)


def _as_poly(x):
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, (int, float, complex)) or _is_rational(x):
        return Polynomial((x,))
    return NotImplemented


class DiffOperator:
    """Constant-coefficient polynomial in d/dx, stored order -> coefficient.

    Coefficients are constants (no x dependence), so composition is
    commutative and reduces to convolution of the order maps.  Explicitly
    stored zero coefficients are kept (callers may rely on which orders are
    populated); equality ignores them.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[int, object] = ()):
        d = dict(coeffs)
        for k in d:
            if not isinstance(k, int) or k < 0:
                raise ValueError(f"derivative order must be a nonnegative int, got {k!r}")
        self.coeffs = d

    @classmethod
    def identity(cls) -> "DiffOperator":
        return cls({0: 1})

    @classmethod
    def zero(cls) -> "DiffOperator":
        return cls({})

    def orders(self):
        return sorted(self.coeffs)

    def coeff(self, k: int):
        return self.coeffs.get(k, 0)

    def __add__(self, other):
        if not isinstance(other, DiffOperator):
            return NotImplemented
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return DiffOperator(out)

    def __mul__(self, other):
        if isinstance(other, DiffOperator):
            out: dict = {}
            for i, a in self.coeffs.items():
                for j, b in other.coeffs.items():
                    k = i + j
                    out[k] = out.get(k, 0) + a * b
            return DiffOperator(out)
        return DiffOperator({k: c * other for k, c in self.coeffs.items()})

    def __rmul__(self, other):
        return DiffOperator({k: other * c for k, c in self.coeffs.items()})

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative operator power")
        out = DiffOperator.identity()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, DiffOperator):
            return NotImplemented
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.coeff(k) == other.coeff(k) for k in keys)

    def __hash__(self):
        return hash(tuple(sorted((k, c) for k, c in self.coeffs.items() if c != 0)))

    def __repr__(self):
        return f"DiffOperator({self.coeffs!r})"


@lru_cache(maxsize=None)
def hermite_poly(n: int) -> Polynomial:
    """Probabilist Hermite polynomial He_n, exact integer coefficients.

    He_{n+1}(x) = x He_n(x) - n He_{n-1}(x), He_0 = 1, He_1 = x.
    """
    if n < 0:
        raise ValueError("Hermite index must be nonnegative")
    if n == 0:
        return Polynomial((1,))
    if n == 1:
        return Polynomial((0, 1))
    prev2, prev1 = hermite_poly(n - 2), hermite_poly(n - 1)
    return Polynomial.monomial(1) * prev1 - (n - 1) * prev2


def bell_eval(z: Sequence, one=1):
    """Complete Bell polynomial B_J(z_1, ..., z_J) over a commutative ring.

    Uses the recurrence B_{n+1} = sum_{k=0}^{n} C(n,k) B_{n-k} z_{k+1};
    the ring only needs +, * and integer scalar multiplication.  B_0 = `one`
    (pass e.g. DiffOperator.identity() when the z_i are operators).
    """
    J = len(z)
    bells = [one]
    for n in range(J):
        acc = None
        for k in range(n + 1):
            term = comb(n, k) * (bells[n - k] * z[k])
            acc = term if acc is None else acc + term
        bells.append(acc)
    return bells[J]


def bell_partition_sum(z: Sequence, one=1):
    """B_J(z_1, ..., z_J) by direct summation over integer partitions.

    Exponential-time oracle kept for cross-checking `bell_eval`:
    B_J = sum over i_1 + 2 i_2 + ... + J i_J = J of
    J! / (i_1! ... i_J! (1!)^{i_1} ... (J!)^{i_J}) * z_1^{i_1} ... z_J^{i_J},
    where the combinatorial factor is always an integer.
    """
    J = len(z)
    if J == 0:
        return one
    acc = None
    for counts in _partition_counts(J):
        coef = factorial(J)
        for k, i in enumerate(counts, start=1):
            coef //= factorial(i) * factorial(k) ** i
        term = None
        for k, i in enumerate(counts, start=1):
            for _ in range(i):
                term = z[k - 1] if term is None else term * z[k - 1]
        term = coef * term if term is not None else coef * one
        acc = term if acc is None else acc + term
    return acc


def _partition_counts(j: int) -> Iterator[tuple]:
    """Yield multiplicity vectors (i_1, ..., i_j) with sum k*i_k = j."""

    def rec(remaining: int, largest: int, counts: list):
        if remaining == 0:
            yield tuple(counts)
            return
        for part in range(min(remaining, largest), 0, -1):
            counts[part - 1] += 1
            yield from rec(remaining - part, part, counts)
            counts[part - 1] -= 1

    yield from rec(j, j, [0] * j)


def bell_partial(j: int, k: int, x: Sequence) -> float:
    """Partial Bell polynomial B_{j,k}(x_1, ..., x_{j-k+1}).

    Recurrence B_{j,k} = sum_i C(j-1, i-1) x_i B_{j-i,k-1}; needs x up to
    index j-k+1 (1-based).
    """
    if j == 0 and k == 0:
        return 1
    if j == 0 or k == 0 or k > j:
        return 0
    acc = 0
    for i in range(1, j - k + 2):
        acc += comb(j - 1, i - 1) * x[i - 1] * bell_partial(j - i, k - 1, x)
    return acc

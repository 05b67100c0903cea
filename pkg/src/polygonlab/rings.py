"""Exact coefficient rings used by the series engine.

Two rings back the q-difference machinery:

* ``QPoly`` -- polynomials in q with integer coefficients, stored sparsely.
  These are the coefficients of the counting series: the x^m coefficient of
  a half-perimeter/area generating function is a q-polynomial whose q^n
  coefficient is the exact polygon count p_{m,n}.

* ``Jet`` -- truncated Taylor expansions in eps = q - 1 with Fraction
  coefficients.  Iterating a functional equation over jets performs moment
  pumping: the eps^k coefficient of the fixed point is the k-th factorial
  area moment generating function g_k(x), order by order in x.

Both rings expose the same small surface (add/sub/mul via operators, plus
``q_pow``) so the forward solvers in ``qfunc`` are written once.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb


class QPoly:
    """Sparse integer polynomial in q.  Immutable by convention."""

    __slots__ = ("c",)

    def __init__(self, c=None):
        self.c = c or {}

    @staticmethod
    def const(v: int) -> "QPoly":
        return QPoly({0: v}) if v else QPoly()

    @staticmethod
    def monomial(v: int, e: int) -> "QPoly":
        return QPoly({e: v}) if v else QPoly()

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        return isinstance(other, QPoly) and self.c == other.c

    def __hash__(self):
        return hash(frozenset(self.c.items()))

    def __add__(self, other):
        out = dict(self.c)
        for e, v in other.c.items():
            w = out.get(e, 0) + v
            if w:
                out[e] = w
            else:
                del out[e]
        return QPoly(out)

    def __sub__(self, other):
        out = dict(self.c)
        for e, v in other.c.items():
            w = out.get(e, 0) - v
            if w:
                out[e] = w
            else:
                del out[e]
        return QPoly(out)

    def __neg__(self):
        return QPoly({e: -v for e, v in self.c.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return QPoly()
            return QPoly({e: v * other for e, v in self.c.items()})
        out: dict = {}
        for e1, v1 in self.c.items():
            for e2, v2 in other.c.items():
                e = e1 + e2
                w = out.get(e, 0) + v1 * v2
                if w:
                    out[e] = w
                elif e in out:
                    del out[e]
        return QPoly(out)

    __rmul__ = __mul__

    def truncated(self, max_e: int) -> "QPoly":
        return QPoly({e: v for e, v in self.c.items() if e <= max_e})

    def degree(self) -> int:
        return max(self.c) if self.c else -1

    def coeff(self, e: int) -> int:
        return self.c.get(e, 0)

    def eval_at_one(self) -> int:
        return sum(self.c.values())

    def __call__(self, q):
        """Evaluate at a numeric q (any type supporting ** and *)."""
        return sum(v * q**e for e, v in self.c.items())

    def __repr__(self):
        if not self.c:
            return "QPoly(0)"
        terms = " + ".join(f"{v}*q^{e}" for e, v in sorted(self.c.items()))
        return f"QPoly({terms})"


class QPolyRing:
    """Ring descriptor for QPoly coefficients, optionally q-truncated.

    ``qtrunc`` drops all powers q^n with n > qtrunc after every product;
    the area-ensemble series only needs areas up to a fixed n_max, and the
    truncation keeps coefficient sizes bounded.
    """

    def __init__(self, qtrunc: int | None = None):
        self.qtrunc = qtrunc

    zero = property(lambda self: QPoly())
    one = property(lambda self: QPoly({0: 1}))

    def from_int(self, v: int) -> QPoly:
        return QPoly.const(v)

    def q_pow(self, e) -> QPoly:
        if e != int(e):
            raise ValueError("QPoly ring supports integer q-exponents only")
        e = int(e)
        if self.qtrunc is not None and e > self.qtrunc:
            return QPoly()
        return QPoly({e: 1})

    def mul(self, a: QPoly, b: QPoly) -> QPoly:
        p = a * b
        if self.qtrunc is not None:
            p = p.truncated(self.qtrunc)
        return p


class Jet:
    """Truncated expansion sum_{j<=order} c_j eps^j, eps = q - 1, exact."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: tuple):
        self.coeffs = coeffs

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __eq__(self, other):
        return isinstance(other, Jet) and self.coeffs == other.coeffs

    def __bool__(self):
        return any(self.coeffs)

    def __add__(self, other):
        return Jet(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        return Jet(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return Jet(tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Jet(tuple(a * other for a in self.coeffs))
        n = len(self.coeffs)
        out = [Fraction(0)] * n
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if i + j >= n:
                    break
                if b:
                    out[i + j] += a * b
        return Jet(tuple(out))

    __rmul__ = __mul__

    def coeff(self, j: int) -> Fraction:
        return self.coeffs[j]

    def __repr__(self):
        return f"Jet{self.coeffs}"


class JetRing:
    """Ring descriptor for jets of a fixed truncation order."""

    def __init__(self, order: int):
        self.order = order
        self._zero = Jet(tuple(Fraction(0) for _ in range(order + 1)))
        one = [Fraction(0)] * (order + 1)
        one[0] = Fraction(1)
        self._one = Jet(tuple(one))

    zero = property(lambda self: self._zero)
    one = property(lambda self: self._one)

    def from_int(self, v: int) -> Jet:
        c = [Fraction(0)] * (self.order + 1)
        c[0] = Fraction(v)
        return Jet(tuple(c))

    def from_fraction(self, v: Fraction) -> Jet:
        c = [Fraction(0)] * (self.order + 1)
        c[0] = Fraction(v)
        return Jet(tuple(c))

    def q_pow(self, e) -> Jet:
        """(1 + eps)^e truncated; e may be a Fraction (generalized binomial)."""
        e = Fraction(e)
        c = [Fraction(0)] * (self.order + 1)
        acc = Fraction(1)
        for j in range(self.order + 1):
            c[j] = acc
            acc = acc * (e - j) / (j + 1)
        return Jet(tuple(c))

    def mul(self, a: Jet, b: Jet) -> Jet:
        return a * b


def binom_int(n: int, k: int) -> int:
    return comb(n, k)

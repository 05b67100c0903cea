"""Truncated one-variable power series with exact rational coefficients.

A ``PowerSeries`` holds coefficients up to a fixed truncation ``order``
(inclusive).  All arithmetic is exact up to that order; mixing orders takes
the minimum.  This is the carrier for the factorial moment generating
functions g_k(x) and for closed-form series identities in the tests.
"""

from __future__ import annotations

from fractions import Fraction


class PowerSeries:
    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs, order: int | None = None):
        coeffs = [Fraction(c) for c in coeffs]
        if order is None:
            order = len(coeffs) - 1
        if len(coeffs) < order + 1:
            coeffs = coeffs + [Fraction(0)] * (order + 1 - len(coeffs))
        self.coeffs = coeffs[: order + 1]
        self.order = order

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(order: int) -> "PowerSeries":
        return PowerSeries([], order)

    @staticmethod
    def const(v, order: int) -> "PowerSeries":
        return PowerSeries([Fraction(v)], order)

    @staticmethod
    def x(order: int) -> "PowerSeries":
        return PowerSeries([0, 1], order)

    @staticmethod
    def monomial(v, e: int, order: int) -> "PowerSeries":
        c = [Fraction(0)] * (order + 1)
        if e <= order:
            c[e] = Fraction(v)
        return PowerSeries(c, order)

    @staticmethod
    def binomial_power(c, alpha, order: int) -> "PowerSeries":
        """(1 + c*x)^alpha with rational c, alpha; exact binomial series."""
        c = Fraction(c)
        alpha = Fraction(alpha)
        out = [Fraction(0)] * (order + 1)
        acc = Fraction(1)
        for m in range(order + 1):
            out[m] = acc
            acc = acc * (alpha - m) / (m + 1) * c
        return PowerSeries(out, order)

    # -- ring operations ----------------------------------------------

    def _level(self, other):
        n = min(self.order, other.order)
        return n, self.coeffs[: n + 1], other.coeffs[: n + 1]

    def __eq__(self, other):
        if not isinstance(other, PowerSeries):
            return NotImplemented
        n, a, b = self._level(other)
        return a == b

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PowerSeries.const(other, self.order)
        n, a, b = self._level(other)
        return PowerSeries([x + y for x, y in zip(a, b)], n)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PowerSeries.const(other, self.order)
        n, a, b = self._level(other)
        return PowerSeries([x - y for x, y in zip(a, b)], n)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __neg__(self):
        return PowerSeries([-c for c in self.coeffs], self.order)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return PowerSeries([c * other for c in self.coeffs], self.order)
        n, a, b = self._level(other)
        out = [Fraction(0)] * (n + 1)
        for i, x in enumerate(a):
            if not x:
                continue
            for j in range(n + 1 - i):
                y = b[j]
                if y:
                    out[i + j] += x * y
        return PowerSeries(out, n)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            inv = Fraction(1, 1) / Fraction(other)
            return PowerSeries([c * inv for c in self.coeffs], self.order)
        return self * other.reciprocal()

    def reciprocal(self) -> "PowerSeries":
        if not self.coeffs[0]:
            raise ZeroDivisionError("series has zero constant term")
        n = self.order
        inv0 = 1 / self.coeffs[0]
        out = [Fraction(0)] * (n + 1)
        out[0] = inv0
        for m in range(1, n + 1):
            s = Fraction(0)
            for j in range(1, m + 1):
                if self.coeffs[j]:
                    s += self.coeffs[j] * out[m - j]
            out[m] = -inv0 * s
        return PowerSeries(out, n)

    def sqrt(self) -> "PowerSeries":
        """Square root with rational constant term that is a perfect square."""
        c0 = self.coeffs[0]
        r0 = _fraction_sqrt(c0)
        n = self.order
        out = [Fraction(0)] * (n + 1)
        out[0] = r0
        for m in range(1, n + 1):
            s = Fraction(0)
            for j in range(1, m):
                s += out[j] * out[m - j]
            out[m] = (self.coeffs[m] - s) / (2 * r0)
        return PowerSeries(out, n)

    def differentiate(self) -> "PowerSeries":
        n = self.order
        out = [Fraction(0)] * (n + 1)
        for m in range(1, n + 1):
            out[m - 1] = m * self.coeffs[m]
        return PowerSeries(out, n - 1 if n else 0)

    def scale_x(self, c) -> "PowerSeries":
        """Substitute x -> c*x."""
        c = Fraction(c)
        out, acc = [], Fraction(1)
        for m in range(self.order + 1):
            out.append(self.coeffs[m] * acc)
            acc *= c
        return PowerSeries(out, self.order)

    def compose_polynomial(self, poly: "PowerSeries") -> "PowerSeries":
        """Substitute x -> poly(x) where poly has zero constant term."""
        if poly.coeffs[0]:
            raise ValueError("composition needs zero constant term")
        n = self.order
        acc = PowerSeries.const(1, n)
        out = PowerSeries.const(self.coeffs[0], n)
        for m in range(1, n + 1):
            acc = acc * poly
            if self.coeffs[m]:
                out = out + acc * self.coeffs[m]
        return out

    def coeff(self, m: int) -> Fraction:
        if m > self.order:
            raise IndexError(f"order {m} beyond truncation {self.order}")
        return self.coeffs[m]

    def __call__(self, x):
        """Horner evaluation of the truncated polynomial at numeric x."""
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __repr__(self):
        shown = ", ".join(str(c) for c in self.coeffs[: min(8, self.order + 1)])
        return f"PowerSeries([{shown}...], order={self.order})"


def _fraction_sqrt(v: Fraction) -> Fraction:
    from math import isqrt

    if v < 0:
        raise ValueError("negative constant term")
    p, q = v.numerator, v.denominator
    rp, rq = isqrt(p), isqrt(q)
    if rp * rp != p or rq * rq != q:
        raise ValueError(f"{v} is not a perfect rational square")
    return Fraction(rp, rq)

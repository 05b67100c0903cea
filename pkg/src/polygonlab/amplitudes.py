"""Amplitude sequences from dominant-balance recursions.

The singular parts of the factorial moment generating functions carry
amplitude ladders tied to each model's limit law:

* ``airy_phi``      gamma_k = 3k/2 - 1/2,  phi_0 = -1,
                    gamma_{k-1} phi_{k-1} + (1/2) sum phi_l phi_{k-l} = 0
* ``stair_f``       same exponents, f_0 = -1/2, factor 4 in the quadratic
* ``meander_omega`` alpha_k = 3k/2 + 1/2, omega_0 = 1, coupled to phi
* ``dirconvex_h``   h_0 = 1/16, coupled to stair_f

All four are exact rational recursions; ``general_f0_f1`` recovers the
staircase constants from the critical-point data of any admissible
q-difference equation (square-root class), numerically or exactly.

``stair_gk_exact`` runs moment pumping symbolically in the quadratic
extension Q(x)[u]/(u^2 - (1-4x)); dividing the linearised equation by
1 - 2x - 2 g_0 = u is exact there, which yields closed forms for g_k and
hence exact leading Laurent coefficients about x = 1/4.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import mpmath as mp

from .series import PowerSeries


@dataclass
class AmplitudeSequence:
    label: str
    exponent_desc: str
    values: list  # exact Fractions (or mpf for the general numeric route)

    def exponent(self, k: int) -> Fraction:
        if self.label in ("phi", "stair_f", "general_f"):
            return Fraction(3 * k, 2) - Fraction(1, 2)
        if self.label in ("omega", "dirconvex_h", "punctured"):
            return Fraction(3 * k, 2) + Fraction(1, 2)
        if self.label == "rectangle_f":
            return Fraction(2 * k + 2)
        raise ValueError(self.label)

    def __getitem__(self, k: int):
        return self.values[k]

    def __len__(self):
        return len(self.values)

    def to_csv(self) -> str:
        lines = ["label,k,gamma_k,value"]
        for k, v in enumerate(self.values):
            g = self.exponent(k)
            vs = f"{v.numerator}/{v.denominator}" if isinstance(v, Fraction) else mp.nstr(v, 17)
            lines.append(f"{self.label},{k},{g.numerator}/{g.denominator},{vs}")
        return "\n".join(lines) + "\n"


def _gamma_k(k: int) -> Fraction:
    return Fraction(3 * k - 1, 2)


def _alpha_k(k: int) -> Fraction:
    return Fraction(3 * k + 1, 2)


def airy_phi(k_max: int) -> AmplitudeSequence:
    phi = [Fraction(-1)]
    for k in range(1, k_max + 1):
        s = sum(phi[l] * phi[k - l] for l in range(1, k))
        phi.append(_gamma_k(k - 1) * phi[k - 1] + Fraction(1, 2) * s)
    return AmplitudeSequence("phi", "gamma_k = 3k/2 - 1/2", phi)


def stair_f(k_max: int) -> AmplitudeSequence:
    f = [Fraction(-1, 2)]
    for k in range(1, k_max + 1):
        s = sum(f[l] * f[k - l] for l in range(1, k))
        f.append((_gamma_k(k - 1) * f[k - 1] + 4 * s) / 4)
    return AmplitudeSequence("stair_f", "gamma_k = 3k/2 - 1/2", f)


def meander_omega(k_max: int) -> AmplitudeSequence:
    phi = airy_phi(k_max).values
    w = [Fraction(1)]
    for k in range(1, k_max + 1):
        s = sum(phi[l] * Fraction(1, 2**l) * w[k - l] for l in range(1, k + 1))
        w.append(_alpha_k(k - 1) * w[k - 1] + s)
    return AmplitudeSequence("omega", "alpha_k = 3k/2 + 1/2", w)


def dirconvex_h(k_max: int) -> AmplitudeSequence:
    f = stair_f(k_max).values
    h = [Fraction(1, 16)]
    for k in range(1, k_max + 1):
        s = sum(f[l] * h[k - l] for l in range(1, k + 1))
        h.append((_alpha_k(k - 1) * h[k - 1] + 4 * s) / 2)
    return AmplitudeSequence("dirconvex_h", "alpha_k = 3k/2 + 1/2", h)


def recursion_residual(label: str, values) -> list:
    """Exact residuals of the defining quadratic recursions (must be 0)."""
    out = []
    if label == "phi":
        for k in range(1, len(values)):
            s = sum(values[l] * values[k - l] for l in range(k + 1))
            out.append(_gamma_k(k - 1) * values[k - 1] + Fraction(1, 2) * s)
    elif label == "stair_f":
        for k in range(1, len(values)):
            s = sum(values[l] * values[k - l] for l in range(k + 1))
            out.append(_gamma_k(k - 1) * values[k - 1] + 4 * s)
    elif label == "omega":
        phi = airy_phi(len(values) - 1).values
        for k in range(1, len(values)):
            s = sum(phi[l] * Fraction(1, 2**l) * values[k - l] for l in range(k + 1))
            out.append(_alpha_k(k - 1) * values[k - 1] + s)
    elif label == "dirconvex_h":
        f = stair_f(len(values) - 1).values
        for k in range(1, len(values)):
            s = sum(f[l] * values[k - l] for l in range(k + 1))
            out.append(_alpha_k(k - 1) * values[k - 1] + 4 * s)
    else:
        raise ValueError(label)
    return out


def rectangle_f(k: int) -> Fraction:
    """Leading amplitude of g_k about x = 1: k! / (1-x)^{2k+2}."""
    return Fraction(factorial(k))


# ---------------------------------------------------------------------
# general square-root-class constants from a q-difference equation
# ---------------------------------------------------------------------


class NotSquareRootClassError(ValueError):
    pass


@dataclass
class PolynomialG:
    """G(x, q, y_0, .., y_N) as monomials (ex, eq, e_y0, .., e_yN) -> coeff."""

    n_shifts: int
    monomials: dict

    def q1_polynomial(self):
        """Q(x, y) = G(x, 1, y, y, ..., y) as {(ex, ey): coeff}."""
        out: dict = {}
        for exps, c in self.monomials.items():
            key = (exps[0], sum(exps[2:]))
            out[key] = out.get(key, 0) + c
        return {k: v for k, v in out.items() if v}

    def y_degree(self) -> int:
        return max(sum(e[2:]) for e in self.monomials)

    def shift_derivative_sum(self, x, y):
        """sum_k k * dG/dy_k at (x, 1, y, ..., y)."""
        total = 0 * x
        for exps, c in self.monomials.items():
            for k in range(1, self.n_shifts + 1):
                ek = exps[2 + k]
                if ek:
                    term = c * ek
                    term = term * x ** exps[0]
                    for j in range(self.n_shifts + 1):
                        e = exps[2 + j] - (1 if j == k else 0)
                        term = term * y**e
                    total = total + term
        return total


def staircase_G() -> PolynomialG:
    """P = x^2 q + 2xq y_0 + y_0 y_1 (the staircase equation cleared of
    its denominator)."""
    return PolynomialG(
        n_shifts=1,
        monomials={
            (2, 1, 0, 0): 1,
            (1, 1, 1, 0): 2,
            (0, 0, 1, 1): 1,
        },
    )


def ferrers_G() -> PolynomialG:
    """P = q x^2 + q x^2 y_1 + (2qx - q^2 x^2) y_0; degree one in y."""
    return PolynomialG(
        n_shifts=1,
        monomials={
            (2, 1, 0, 0): 1,
            (2, 1, 0, 1): 1,
            (1, 1, 1, 0): 2,
            (2, 2, 1, 0): -1,
        },
    )


def _poly2_eval(p: dict, x, y):
    total = 0 * x
    for (ex, ey), c in p.items():
        total = total + c * x**ex * y**ey
    return total


def _poly2_dx(p: dict) -> dict:
    return {(ex - 1, ey): c * ex for (ex, ey), c in p.items() if ex}


def _poly2_dy(p: dict) -> dict:
    return {(ex, ey - 1): c * ey for (ex, ey), c in p.items() if ey}


@dataclass
class QDiffAnalysis:
    x_c: object
    y_c: object
    B: object
    C: object
    shift_sum: object

    def __post_init__(self):
        if not (self.B > 0 and self.C > 0):
            raise NotSquareRootClassError("B and C must be positive")


def analyze_qdiff(G: PolynomialG, seed=(0.2, 0.2), exact_point=None) -> QDiffAnalysis:
    """Critical data of Q(x,y) = G(x,1,y,..,y): solve Q = y, Q_y = 1.

    ``exact_point``: optional (x_c, y_c) Fractions; then all partials are
    evaluated exactly.  Otherwise mpmath root solving at working precision.
    """
    Q = G.q1_polynomial()
    if max(ey for (_, ey) in Q) < 2:
        raise NotSquareRootClassError("Q(x,y) must have degree >= 2 in y")
    Qx, Qy = _poly2_dx(Q), _poly2_dy(Q)
    Qyy = _poly2_dy(Qy)
    if exact_point is not None:
        xc, yc = Fraction(exact_point[0]), Fraction(exact_point[1])
        if _poly2_eval(Q, xc, yc) != yc or _poly2_eval(Qy, xc, yc) != 1:
            raise ValueError("supplied point is not critical")
    else:
        f = lambda x, y: _poly2_eval(Q, x, y) - y
        g = lambda x, y: _poly2_eval(Qy, x, y) - 1
        xc, yc = mp.findroot([f, g], seed)
    B = _poly2_eval(Qyy, xc, yc) / 2
    C = _poly2_eval(Qx, xc, yc)
    ssum = G.shift_derivative_sum(xc, yc)
    return QDiffAnalysis(x_c=xc, y_c=yc, B=B, C=C, shift_sum=ssum)


def general_f0_f1(analysis: QDiffAnalysis):
    """f_0 = -sqrt(C x_c / B), 4 f_1 = (sum_k k dG/dy_k) / B."""
    v = analysis.C * analysis.x_c / analysis.B
    if isinstance(v, Fraction):
        from .series import _fraction_sqrt

        f0 = -_fraction_sqrt(v)
    else:
        f0 = -mp.sqrt(v)
    f1 = analysis.shift_sum / analysis.B / 4
    return f0, f1


def general_fk(f0, f1, k_max: int) -> AmplitudeSequence:
    """Extend (f_0, f_1) by the square-root-class quadratic recursion
    gamma_{k-1} f_{k-1} + (1/(4 f_1)) sum_{l} f_l f_{k-l} = 0, k >= 2."""
    f = [f0, f1]
    for k in range(2, k_max + 1):
        s = sum(f[l] * f[k - l] for l in range(1, k))
        f.append(-(4 * f1 * _gamma_k(k - 1) * f[k - 1] + s) / (2 * f0))
    return AmplitudeSequence("general_f", "gamma_k = 3k/2 - 1/2", f)


# ---------------------------------------------------------------------
# punctured predictions
# ---------------------------------------------------------------------


def punctured_amplitudes(
    base_values,
    r: int,
    g0: PowerSeries | None = None,
    x_c=None,
    s: int | None = None,
    g0_critical=None,
):
    """Amplitude predictions for polygons with r punctures.

    Bounded case (puncture half-perimeters summing to s; needs g0, x_c):
        A_k^{(r,s)} = A_{k+r} / r! * x_c^s * [x^s] g0(x)^r
    Unbounded punctures (needs the finite critical value g0_critical):
        A_k^{(r)}   = A_{k+r} / r! * g0(x_c)^r
    ``base_values`` are the unpunctured amplitudes A_k; the returned
    sequence has its exponents shifted to gamma_{k+r}.
    """
    if r < 1:
        raise ValueError("puncture count r must be >= 1")
    if s is not None:
        if g0 is None or x_c is None:
            raise ValueError("bounded punctures need g0 and x_c")
        g0r = PowerSeries.const(1, g0.order)
        for _ in range(r):
            g0r = g0r * g0
        factor = (Fraction(x_c) if isinstance(x_c, Fraction) else x_c) ** s
        factor = factor * g0r.coeff(s) / factorial(r)
    else:
        if g0_critical is None:
            raise ValueError("unbounded punctures need the critical value of g0")
        factor = g0_critical**r / factorial(r)
    vals = [base_values[k + r] * factor for k in range(len(base_values) - r)]
    return AmplitudeSequence("punctured", f"gamma_(k+{r})", vals)


# ---------------------------------------------------------------------
# exact Laurent data for the staircase g_k about x = 1/4
# ---------------------------------------------------------------------


class _Poly:
    """Dense Fraction polynomial in x."""

    __slots__ = ("c",)

    def __init__(self, c):
        c = [Fraction(v) for v in c]
        while len(c) > 1 and not c[-1]:
            c.pop()
        self.c = c or [Fraction(0)]

    def __add__(self, o):
        n = max(len(self.c), len(o.c))
        a = self.c + [Fraction(0)] * (n - len(self.c))
        b = o.c + [Fraction(0)] * (n - len(o.c))
        return _Poly([u + v for u, v in zip(a, b)])

    def __sub__(self, o):
        n = max(len(self.c), len(o.c))
        a = self.c + [Fraction(0)] * (n - len(self.c))
        b = o.c + [Fraction(0)] * (n - len(o.c))
        return _Poly([u - v for u, v in zip(a, b)])

    def __mul__(self, o):
        if isinstance(o, (int, Fraction)):
            return _Poly([v * o for v in self.c])
        out = [Fraction(0)] * (len(self.c) + len(o.c) - 1)
        for i, u in enumerate(self.c):
            if u:
                for j, v in enumerate(o.c):
                    if v:
                        out[i + j] += u * v
        return _Poly(out)

    __rmul__ = __mul__

    def deriv(self):
        return _Poly([i * v for i, v in enumerate(self.c)][1:] or [0])

    def is_zero(self):
        return all(v == 0 for v in self.c)

    def u2_expansion(self, terms: int):
        """Taylor coefficients in u^2 after substituting x = (1 - u^2)/4."""
        out = [Fraction(0)] * terms
        # x^e = ((1 - u^2)/4)^e expanded by binomials
        from math import comb

        for e, v in enumerate(self.c):
            if not v:
                continue
            inv4e = Fraction(1, 4**e)
            for i in range(min(e, terms - 1) + 1):
                out[i] += v * inv4e * comb(e, i) * (-1) ** i
        return out


_U2 = _Poly([1, -4])  # u^2 = 1 - 4x


class SqrtElem:
    """(A(x) + B(x) u) / u^t with u = sqrt(1 - 4x), exact."""

    __slots__ = ("A", "B", "t")

    def __init__(self, A: _Poly, B: _Poly, t: int = 0):
        self.A, self.B, self.t = A, B, t

    @staticmethod
    def from_poly(p: _Poly):
        return SqrtElem(p, _Poly([0]), 0)

    def _lift(self, dt: int):
        """Multiply numerator by u^dt (to raise t by dt)."""
        A, B = self.A, self.B
        for _ in range(dt):
            A, B = B * _U2, A
        return SqrtElem(A, B, self.t + dt)

    def __add__(self, o):
        t = max(self.t, o.t)
        a, b = self._lift(t - self.t), o._lift(t - o.t)
        return SqrtElem(a.A + b.A, a.B + b.B, t)

    def __sub__(self, o):
        t = max(self.t, o.t)
        a, b = self._lift(t - self.t), o._lift(t - o.t)
        return SqrtElem(a.A - b.A, a.B - b.B, t)

    def __mul__(self, o):
        if isinstance(o, (int, Fraction)):
            return SqrtElem(self.A * o, self.B * o, self.t)
        A = self.A * o.A + self.B * o.B * _U2
        B = self.A * o.B + self.B * o.A
        return SqrtElem(A, B, self.t + o.t)

    __rmul__ = __mul__

    def div_u(self, k: int = 1):
        return SqrtElem(self.A, self.B, self.t + k)

    def deriv(self):
        # d/dx [(A + Bu) u^-t]; u' = -2/u
        A, B, t = self.A, self.B, self.t
        newA = 2 * t * A + A.deriv() * _U2
        newB = (2 * t - 2) * B + B.deriv() * _U2
        return SqrtElem(newA, newB, t + 2)

    def laurent_coeff(self, e: int) -> Fraction:
        """Coefficient of u^e in the expansion about u = 0."""
        # A-part: A(x) u^{-t} contributes at exponents -t + 2i
        total = Fraction(0)
        if (e + self.t) % 2 == 0 and e + self.t >= 0:
            i = (e + self.t) // 2
            total += self.A.u2_expansion(i + 1)[i]
        if (e + self.t - 1) % 2 == 0 and e + self.t - 1 >= 0:
            i = (e + self.t - 1) // 2
            total += self.B.u2_expansion(i + 1)[i]
        return total


def stair_gk_exact(k_max: int):
    """Exact g_k for the staircase model as SqrtElem values, by symbolic
    moment pumping: g_k * u = x^2 [k=1] + 2x g_{k-1} + lower-order terms,
    where the shifted series P(qx, q) contributes
    h_b = sum_{j+i=b} g_j^{(i)} x^i / i!.
    """
    x = _Poly([0, 1])
    xe = SqrtElem.from_poly(x)
    g = [SqrtElem(_Poly([Fraction(1, 2), -1]), _Poly([Fraction(-1, 2)]), 0)]
    # derivatives cache: deriv[j][i] = g_j^{(i)}
    derivs = [[g[0]]]
    for k in range(1, k_max + 1):
        def h(b):
            total = None
            for j in range(b + 1):
                i = b - j
                while len(derivs[j]) <= i:
                    derivs[j].append(derivs[j][-1].deriv())
                if i:
                    xp = SqrtElem.from_poly(_Poly([0] * i + [Fraction(1, factorial(i))]))
                    term = derivs[j][i] * xp
                else:
                    term = derivs[j][0]
                total = term if total is None else total + term
            return total

        rhs = SqrtElem.from_poly(_Poly([0, 0, 1])) if k == 1 else SqrtElem.from_poly(_Poly([0]))
        rhs = rhs + 2 * (xe * g[k - 1])
        # product sum_{a+b=k} g_a h_b minus both g_k g_0 occurrences
        for a in range(0, k + 1):
            b = k - a
            if a == k:
                continue  # g_k h_0 excluded (moved to the left side)
            hb = h(b) if b < k else h_k_partial(derivs, b, xe)
            rhs = rhs + g[a] * hb
        gk = rhs.div_u()
        g.append(gk)
        derivs.append([gk])
    return g


def h_k_partial(derivs, b, xe):
    """h_b without its j = b, i = 0 term (that term is g_b itself)."""
    total = None
    for j in range(b):
        i = b - j
        while len(derivs[j]) <= i:
            derivs[j].append(derivs[j][-1].deriv())
        xp = SqrtElem.from_poly(_Poly([0] * i + [Fraction(1, factorial(i))]))
        term = derivs[j][i] * xp
        total = term if total is None else total + term
    if total is None:
        total = SqrtElem.from_poly(_Poly([0]))
    return total


def stair_fk_from_series(k_max: int) -> list:
    """Exact leading Laurent coefficients f_k = [u^{-(3k-1)}] g_k."""
    g = stair_gk_exact(k_max)
    return [g[k].laurent_coeff(-(3 * k - 1)) for k in range(k_max + 1)]


def rectangle_fk_from_series(k: int, order: int = 24):
    """Exact leading amplitude of the rectangle g_k about x = 1: multiply
    the pumped series by (1-x)^{2k+2}; the result must be a polynomial,
    and its value at 1 is the amplitude."""
    from .qfunc import builtin_equation, moment_pump

    gk = moment_pump(builtin_equation("rectangles"), k, order)
    pref = PowerSeries.binomial_power(-1, 2 * k + 2, order)
    prod = pref * gk
    # polynomial part must terminate well before the truncation order
    deg = max((m for m in range(order + 1) if prod.coeff(m)), default=0)
    if deg > order - 4:
        raise ValueError("order too small to certify polynomial termination")
    return sum(prod.coeff(m) for m in range(deg + 1))

"""Series engine for the models' q-difference equations.

Each implemented class carries a functional equation relating P(x,q) to its
shifts P(q^e x, q).  The same order-by-order forward solvers run over three
coefficient rings:

* integer q-polynomials  -> exact counting series p_m(q) (``iterate_series``)
* (q-1)-jets of Fractions -> factorial moment generating functions g_k(x)
  by moment pumping (``moment_pump``)
* numeric scalars at fixed q -> evaluation of P(x,q) (``evaluate_P``)

Every solver settles the x^m coefficient from strictly earlier data, which
is the contraction property that makes the fixed point unique.  The
directed-convex equation couples Q(x,y,q) to the anisotropic staircase
series and is contractive in total (x,y)-degree; its per-order solve
divides by q(1-y q^{m-1})(1-y q^m), handled exactly in all rings.

``verify_fixed_point`` substitutes a computed series back into a generic
rendering of its equation and checks that the residual vanishes to
truncation order; the tests run it over both exact rings.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .counts import CountTable
from .models import (
    ALL_MODELS,
    DIRECTED_CONVEX,
    FERRERS,
    RECTANGLES,
    SQUARES,
    STAIRCASE,
    UnknownModelError,
)
from .rings import Jet, JetRing, QPoly, QPolyRing
from .series import PowerSeries


class DivergenceError(ArithmeticError):
    pass


class NonContractiveError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FunctionalEquationSpec:
    """One model's q-difference equation, consumable by every ring."""

    tag: str
    n_shifts: int
    formula: str
    # squares count area in quarter cells so all exponents are integers;
    # area_scale converts one q-exponent unit back to cells.
    area_scale: Fraction = Fraction(1)
    has_constant_term: bool = False


_EQUATIONS = {
    RECTANGLES: FunctionalEquationSpec(
        RECTANGLES, 1, "P = x^2 q P(qx,q) + x^2 q (1+qx)/(1-qx)"
    ),
    FERRERS: FunctionalEquationSpec(
        FERRERS, 1, "P = q x^2/(1-qx)^2 (P(qx,q) + 1)"
    ),
    STAIRCASE: FunctionalEquationSpec(
        STAIRCASE, 1, "P = x^2 q / (1 - 2xq - P(qx,q))"
    ),
    SQUARES: FunctionalEquationSpec(
        SQUARES,
        1,
        "P = 1 + x Q P(Q^2 x, Q), Q^4 = q (area counted in quarter cells)",
        area_scale=Fraction(1, 4),
        has_constant_term=True,
    ),
    DIRECTED_CONVEX: FunctionalEquationSpec(
        DIRECTED_CONVEX,
        2,
        "q(qx-1)Q + (1+q)(P+y)Q(qx) + (xyq - y^2 + P(qx-y-1))Q(q^2 x) "
        "= q^2 xy(y+P-1), with P the staircase width/height/area series, "
        "specialised to y = x for the isotropic count series",
    ),
}


def builtin_equation(model: str) -> FunctionalEquationSpec:
    try:
        return _EQUATIONS[model]
    except KeyError:
        raise UnknownModelError(f"no functional equation for {model!r}")


# ---------------------------------------------------------------------
# univariate forward solvers, generic over the coefficient ring
# ---------------------------------------------------------------------


def _solve_rectangles(ring, order):
    p = [ring.zero] * (order + 1)
    for m in range(2, order + 1):
        t = ring.mul(ring.q_pow(m - 1), p[m - 2])
        if m == 2:
            t = t + ring.q_pow(1)
        else:
            t = t + 2 * ring.q_pow(m - 1)
        p[m] = t
    return p


def _solve_ferrers(ring, order):
    p = [ring.zero] * (order + 1)
    for m in range(2, order + 1):
        t = (m - 1) * ring.q_pow(m - 1)
        for a in range(2, m - 1):
            if p[m - a]:
                t = t + (a - 1) * ring.mul(ring.q_pow(m - 1), p[m - a])
        p[m] = t
    return p


def _solve_staircase(ring, order):
    p = [ring.zero] * (order + 1)
    for m in range(2, order + 1):
        t = 2 * ring.mul(ring.q_pow(1), p[m - 1])
        if m == 2:
            t = t + ring.q_pow(1)
        for a in range(2, m - 1):
            b = m - a
            if p[a] and p[b]:
                t = t + ring.mul(p[a], ring.mul(ring.q_pow(b), p[b]))
        p[m] = t
    return p


def _solve_squares(ring, order, scale):
    # p_0 = 1; p_m = q^{(2m-1)*scale} p_{m-1}, giving p_m = q^{m^2 * scale}
    p = [ring.zero] * (order + 1)
    p[0] = ring.one
    for m in range(1, order + 1):
        p[m] = ring.mul(ring.q_pow(Fraction(2 * m - 1) * scale), p[m - 1])
    return p


_UNIVARIATE_SOLVERS = {
    RECTANGLES: _solve_rectangles,
    FERRERS: _solve_ferrers,
    STAIRCASE: _solve_staircase,
}


# ---------------------------------------------------------------------
# bivariate solvers (staircase by width/height/area, directed convex)
# ---------------------------------------------------------------------


def _yp_add(a, b):
    return [x + y for x, y in zip(a, b)]


def _yp_mul(ring, a, b):
    T = len(a) - 1
    out = [ring.zero] * (T + 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j in range(T + 1 - i):
            y = b[j]
            if y:
                out[i + j] = out[i + j] + ring.mul(x, y)
    return out


def _yp_scale(ring, a, s):
    return [ring.mul(s, x) for x in a]


def _yp_shift_y(ring, a, j):
    """Substitute y -> q^j y."""
    return [ring.mul(ring.q_pow(j * h), x) for h, x in enumerate(a)]


def _yp_recip_one_minus(ring, c, T):
    """1/(1 - c*y) as a y-series, c a ring scalar."""
    out = [ring.zero] * (T + 1)
    out[0] = ring.one
    for h in range(1, T + 1):
        out[h] = ring.mul(c, out[h - 1])
    return out


def solve_staircase_xy(ring, xorder: int, ytrunc: int):
    """Width/height/area staircase series from
    P(x,y,q) = xyq / (1 - xq - yq - P(qx,qy,q)).

    Returns a list over x-order w of y-polynomials (lists of ring scalars).
    The recurrence multiplies through by the denominator:
    (1 - yq) P_m = [m=1] yq + q P_{m-1} + sum_{a+b=m} P_a * shift(P_b).
    """
    T = ytrunc
    zero = [ring.zero] * (T + 1)
    p = [list(zero) for _ in range(xorder + 1)]
    inv_1_minus_yq = _yp_recip_one_minus(ring, ring.q_pow(1), T)
    for m in range(1, xorder + 1):
        rhs = list(zero)
        if m == 1:
            if T >= 1:
                rhs[1] = ring.q_pow(1)
        rhs = _yp_add(rhs, _yp_scale(ring, p[m - 1], ring.q_pow(1)))
        for a in range(1, m):
            b = m - a
            shifted = _yp_scale(ring, _yp_shift_y(ring, p[b], 1), ring.q_pow(b))
            rhs = _yp_add(rhs, _yp_mul(ring, p[a], shifted))
        p[m] = _yp_mul(ring, rhs, inv_1_minus_yq)
    return p


def solve_dirconvex_xy(ring, xorder: int, ytrunc: int, stair_xy=None):
    """Directed-convex width/height/area series from its q-difference
    equation, coupled to the staircase series.  Shifts act on x only."""
    T = ytrunc
    zero = [ring.zero] * (T + 1)
    P = stair_xy if stair_xy is not None else solve_staircase_xy(ring, xorder, T)

    def qp(e):
        return ring.q_pow(e)

    # C_a = [x^a](xyq - y^2 + P(x)(qx - y - 1)) for a >= 1
    y_poly = list(zero)
    if T >= 1:
        y_poly[1] = ring.one
    one_plus_y = list(zero)
    one_plus_y[0] = ring.one
    if T >= 1:
        one_plus_y[1] = ring.one

    def C(a):
        out = list(zero)
        if a == 1 and T >= 1:
            out[1] = qp(1)
        if a >= 2:
            out = _yp_add(out, _yp_scale(ring, P[a - 1], qp(1)))
        out = [u - v for u, v in zip(out, _yp_mul(ring, one_plus_y, P[a]))]
        return out

    Q = [list(zero) for _ in range(xorder + 1)]
    for m in range(1, xorder + 1):
        rhs = list(zero)
        # + q^2 Q_{m-1} from q(qx-1)Q moved across
        rhs = _yp_add(rhs, _yp_scale(ring, Q[m - 1], qp(2)))
        # + (1+q) sum_{a>=1} (P_a) q^{m-a} Q_{m-a}
        for a in range(1, m):
            b = m - a
            term = _yp_mul(ring, P[a], _yp_scale(ring, Q[b], qp(b)))
            rhs = _yp_add(rhs, _yp_scale(ring, term, ring.one + qp(1)))
        # + sum_{a>=1} C_a q^{2(m-a)} Q_{m-a}
        for a in range(1, m):
            b = m - a
            term = _yp_mul(ring, C(a), _yp_scale(ring, Q[b], qp(2 * b)))
            rhs = _yp_add(rhs, term)
        # - R_m, R = q^2 x y (y + P - 1)
        r = list(zero)
        if m == 1:
            if T >= 2:
                r[2] = qp(2)
            if T >= 1:
                r[1] = r[1] - qp(2)
        if m >= 2:
            r = _yp_add(r, _yp_scale(ring, _yp_mul(ring, y_poly, P[m - 1]), qp(2)))
        rhs = [u - v for u, v in zip(rhs, r)]
        # divide by q (1 - y q^{m-1}) (1 - y q^m)
        rhs = [_ring_div_q(ring, u) for u in rhs]
        rhs = _yp_mul(ring, rhs, _yp_recip_one_minus(ring, qp(m - 1), T))
        rhs = _yp_mul(ring, rhs, _yp_recip_one_minus(ring, qp(m), T))
        Q[m] = rhs
    return Q


def _ring_div_q(ring, el):
    """Exact division by q; the equation guarantees divisibility."""
    if isinstance(el, QPoly):
        if any(e < 1 for e in el.c):
            raise NonContractiveError("q-division not exact")
        return QPoly({e - 1: v for e, v in el.c.items()})
    if isinstance(el, Jet):
        return ring.mul(ring.q_pow(-1), el)
    return el / ring._q  # numeric ring


def specialize_y_to_x(xy, xorder: int):
    """[x^m] of the isotropic series, summing w + h = m."""
    out = []
    for m in range(xorder + 1):
        acc = None
        for w in range(0, m + 1):
            h = m - w
            if w < len(xy) and h < len(xy[w]):
                v = xy[w][h]
                acc = v if acc is None else acc + v
        out.append(acc)
    return out


# ---------------------------------------------------------------------
# public series operations
# ---------------------------------------------------------------------


@dataclass
class QPolynomialSeries:
    """Truncated series in x with q-polynomial coefficients."""

    model: str
    order: int
    coeffs: list  # QPoly per x-order
    area_scale: Fraction = Fraction(1)

    def p(self, m: int) -> QPoly:
        return self.coeffs[m]

    def to_count_table(self) -> CountTable:
        """Integer-area view; for squares this keeps even m only (odd m
        carries quarter-integer area, an artifact of the idealised series,
        not a polygon)."""
        t = CountTable(self.model, self.order)
        for m in range(2, self.order + 1):
            for e, v in self.coeffs[m].c.items():
                n = Fraction(e) * self.area_scale
                if n.denominator == 1 and n > 0:
                    t.add(m, int(n), v)
                elif self.model != SQUARES:
                    raise NonContractiveError("fractional area in count series")
        return t

    def row_sums(self):
        return [self.coeffs[m].eval_at_one() for m in range(self.order + 1)]

    def to_json(self) -> str:
        import json

        rows = []
        for m in range(self.order + 1):
            poly = self.coeffs[m]
            deg = poly.degree()
            dense = [poly.coeff(e) for e in range(deg + 1)] if deg >= 0 else []
            rows.append({"m": m, "coeffs": dense})
        return json.dumps(rows)


def iterate_series(spec: FunctionalEquationSpec, order: int, qtrunc=None) -> QPolynomialSeries:
    """Exact fixed point of the equation to x-order ``order``."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    ring = QPolyRing(qtrunc=qtrunc)
    if spec.tag in _UNIVARIATE_SOLVERS:
        coeffs = _UNIVARIATE_SOLVERS[spec.tag](ring, order)
    elif spec.tag == SQUARES:
        coeffs = _solve_squares(ring, order, scale=Fraction(1))
    elif spec.tag == DIRECTED_CONVEX:
        xy = solve_dirconvex_xy(ring, order, order)
        iso = specialize_y_to_x(xy, order)
        coeffs = [c if c is not None else ring.zero for c in iso]
    else:
        raise UnknownModelError(spec.tag)
    scale = spec.area_scale
    return QPolynomialSeries(spec.tag, order, coeffs, area_scale=scale)


def moment_pump(spec: FunctionalEquationSpec, k: int, order: int) -> PowerSeries:
    """g_k(x) to x-order ``order`` with exact rational coefficients."""
    if k < 0 or order < 0:
        raise ValueError("k and order must be nonnegative")
    ring = JetRing(k)
    if spec.tag in _UNIVARIATE_SOLVERS:
        jets = _UNIVARIATE_SOLVERS[spec.tag](ring, order)
    elif spec.tag == SQUARES:
        # cell units; the shift q^{1/2} and weight q^{1/4} use fractional
        # binomial jets
        jets = _solve_squares(ring, order, scale=Fraction(1, 4))
    elif spec.tag == DIRECTED_CONVEX:
        xy = solve_dirconvex_xy(ring, order, order)
        iso = specialize_y_to_x(xy, order)
        jets = [j if j is not None else ring.zero for j in iso]
    else:
        raise UnknownModelError(spec.tag)
    return PowerSeries([j.coeff(k) for j in jets], order)


# ---------------------------------------------------------------------
# residual verification (generic rendering of each equation)
# ---------------------------------------------------------------------


class _RS:
    """Minimal generic truncated series over a ring, for residual checks."""

    def __init__(self, ring, coeffs, order):
        self.ring = ring
        self.coeffs = list(coeffs) + [ring.zero] * (order + 1 - len(coeffs))
        self.order = order

    @staticmethod
    def from_list(ring, lst):
        return _RS(ring, lst, len(lst) - 1)

    def __add__(self, other):
        return _RS(
            self.ring,
            [a + b for a, b in zip(self.coeffs, other.coeffs)],
            min(self.order, other.order),
        )

    def __sub__(self, other):
        return _RS(
            self.ring,
            [a - b for a, b in zip(self.coeffs, other.coeffs)],
            min(self.order, other.order),
        )

    def __mul__(self, other):
        n = min(self.order, other.order)
        out = [self.ring.zero] * (n + 1)
        for i in range(n + 1):
            a = self.coeffs[i]
            if not a:
                continue
            for j in range(n + 1 - i):
                b = other.coeffs[j]
                if b:
                    out[i + j] = out[i + j] + self.ring.mul(a, b)
        return _RS(self.ring, out, n)

    def shift_x(self, e):
        """P(x) -> P(q^e x)."""
        return _RS(
            self.ring,
            [self.ring.mul(self.ring.q_pow(Fraction(e) * m), c) for m, c in enumerate(self.coeffs)],
            self.order,
        )

    def recip(self):
        n = self.order
        if self.coeffs[0] != self.ring.one:
            raise NonContractiveError("reciprocal needs unit constant term")
        out = [self.ring.zero] * (n + 1)
        out[0] = self.ring.one
        for m in range(1, n + 1):
            s = self.ring.zero
            for j in range(1, m + 1):
                if self.coeffs[j]:
                    s = s + self.ring.mul(self.coeffs[j], out[m - j])
            out[m] = -s
        return _RS(self.ring, out, n)

    def is_zero(self):
        return not any(self.coeffs)


def _rs_x(ring, order, e=1):
    c = [ring.zero] * (order + 1)
    if e <= order:
        c[e] = ring.one
    return _RS(ring, c, order)


def verify_fixed_point(spec: FunctionalEquationSpec, series, order: int, ring=None) -> bool:
    """Substitute the computed series into its equation; True iff the
    residual vanishes identically to the checked order."""
    ring = ring or QPolyRing()
    P = _RS(ring, series.coeffs[: order + 1] if hasattr(series, "coeffs") else series, order)
    one = _RS(ring, [ring.one], order)
    x = _rs_x(ring, order)
    q = _RS(ring, [ring.q_pow(1)], order)
    if spec.tag == RECTANGLES:
        rhs = x * x * q * P.shift_x(1) + x * x * q * (one + q * x) * (one - q * x).recip()
        return (P - rhs).is_zero()
    if spec.tag == FERRERS:
        rhs = q * x * x * ((one - q * x).recip() * (one - q * x).recip()) * (P.shift_x(1) + one)
        return (P - rhs).is_zero()
    if spec.tag == STAIRCASE:
        lhs = P * (one - q * x - q * x - P.shift_x(1)) - x * x * q
        return lhs.is_zero()
    if spec.tag == SQUARES:
        # quarter-cell variable: P = 1 + x Q P(Q^2 x)
        rhs = one + x * q * P.shift_x(2)
        return (P - rhs).is_zero()
    raise UnknownModelError(f"no univariate residual form for {spec.tag}")


def verify_dirconvex_residual(xorder: int, ytrunc: int, ring=None) -> bool:
    """Assemble the full directed-convex equation LHS and check it is 0."""
    ring = ring or QPolyRing()
    T = ytrunc
    P = solve_staircase_xy(ring, xorder, T)
    Q = solve_dirconvex_xy(ring, xorder, T, stair_xy=P)
    zero = [ring.zero] * (T + 1)

    def shift_Q(j):
        return [_yp_scale(ring, Q[m], ring.q_pow(j * m)) for m in range(xorder + 1)]

    Q1, Q2 = shift_Q(1), shift_Q(2)
    y_poly = list(zero)
    if T >= 1:
        y_poly[1] = ring.one

    def xy_mul(A, B):
        out = [list(zero) for _ in range(xorder + 1)]
        for i in range(xorder + 1):
            if not any(A[i]):
                continue
            for j in range(xorder + 1 - i):
                if any(B[j]):
                    out[i + j] = _yp_add(out[i + j], _yp_mul(ring, A[i], B[j]))
        return out

    def xy_from_scalar_ypoly(yp):
        out = [list(zero) for _ in range(xorder + 1)]
        out[0] = list(yp)
        return out

    def xy_scale_x(A, e, coef):
        """multiply by coef * x^e."""
        out = [list(zero) for _ in range(xorder + 1)]
        for i in range(xorder + 1 - e):
            if any(A[i]):
                out[i + e] = _yp_scale(ring, A[i], coef)
        return out

    def xy_add(A, B):
        return [_yp_add(a, b) for a, b in zip(A, B)]

    def xy_sub(A, B):
        return [[u - v for u, v in zip(a, b)] for a, b in zip(A, B)]

    q1 = ring.q_pow(1)
    q2 = ring.q_pow(2)
    # term1 = q(qx-1)Q = q^2 x Q - q Q
    term1 = xy_sub(xy_scale_x(Q, 1, q2), xy_scale_x(Q, 0, q1))
    # term2 = (1+q)(P+y) Q(qx)
    P_plus_y = xy_add(P, xy_from_scalar_ypoly(y_poly))
    term2 = xy_mul(P_plus_y, Q1)
    term2 = [[u + ring.mul(q1, u) for u in row] for row in term2]
    # term3 = (xyq - y^2 + P(qx - y - 1)) Q(q^2 x)
    y2 = list(zero)
    if T >= 2:
        y2[2] = ring.one
    one_plus_y = list(zero)
    one_plus_y[0] = ring.one
    if T >= 1:
        one_plus_y[1] = ring.one
    xyq = [list(zero) for _ in range(xorder + 1)]
    if xorder >= 1 and T >= 1:
        xyq[1][1] = q1
    coefC = xy_sub(xyq, xy_from_scalar_ypoly(y2))
    coefC = xy_add(coefC, xy_scale_x(P, 1, q1))
    coefC = xy_sub(coefC, xy_mul(P, xy_from_scalar_ypoly(one_plus_y)))
    term3 = xy_mul(coefC, Q2)
    # term4 = q^2 x y (y + P - 1)
    inner0 = [list(zero) for _ in range(xorder + 1)]
    inner0[0][0] = ring.one
    inner = xy_sub(xy_add(xy_from_scalar_ypoly(y_poly), P), inner0)
    term4 = xy_scale_x(xy_mul(xy_from_scalar_ypoly(y_poly), inner), 1, q2)
    lhs = xy_sub(xy_add(xy_add(term1, term2), term3), term4)
    return all(not any(row) for row in lhs)


# ---------------------------------------------------------------------
# fixed-area ensemble series
# ---------------------------------------------------------------------


def _dense_mul(a, b, N):
    out = [0] * (N + 1)
    for i, x in enumerate(a):
        if x:
            for j in range(min(len(b), N + 1 - i)):
                y = b[j]
                if y:
                    out[i + j] += x * y
    return out


def _dense_recip(a, N):
    if a[0] != 1:
        raise NonContractiveError("reciprocal needs unit constant term")
    out = [0] * (N + 1)
    out[0] = 1
    for m in range(1, N + 1):
        s = 0
        for j in range(1, min(m, len(a) - 1) + 1):
            if a[j]:
                s += a[j] * out[m - j]
        out[m] = -s
    return out


def _staircase_area_backward(n_max: int):
    """Exact q-series (truncated at q^n_max) of
    S_j(q) = sum_n (sum_m m^j p_{m,n}) q^n for j = 0, 1, 2, staircase.

    Evaluates the functional equation and its x-derivatives at x = q^i,
    marching i downward: with V_i = P(q^i,q), D_i = P'(q^i,q),
    E_i = P''(q^i,q) and M_i = 1 - 2q^{i+1} - V_{i+1},
        V_i = q^{2i+1} / M_i,
        D_i = (2 q^{i+1} - V_i M_i') / M_i,  M_i' = -2q - q D_{i+1},
        E_i = (2q - 2 D_i M_i' + q^2 V_i E_{i+1}) / M_i.
    Base level I > n_max: V_I, D_I vanish to order n_max and E_I = 2q
    up to O(q^{I+2}).  Then S_0 = V_0, S_1 = D_0, S_2 = D_0 + E_0.
    """
    N = n_max
    I = n_max + 2
    V = [0] * (N + 1)
    D = [0] * (N + 1)
    E = [0] * (N + 1)
    if N >= 1:
        E[1] = 2
    for i in range(I - 1, -1, -1):
        M = [0] * (N + 1)
        M[0] = 1
        if i + 1 <= N:
            M[i + 1] -= 2
        for e, v in enumerate(V):
            if v:
                M[e] -= v
        Minv = _dense_recip(M, N)
        Mp = [0] * (N + 1)
        if N >= 1:
            Mp[1] = -2
        for e, v in enumerate(D):
            if v and e + 1 <= N:
                Mp[e + 1] -= v
        Vn = [0] * (N + 1)
        if 2 * i + 1 <= N:
            for e, v in enumerate(Minv):
                if v and e + 2 * i + 1 <= N:
                    Vn[e + 2 * i + 1] = v
        t = [0] * (N + 1)
        if i + 1 <= N:
            for e, v in enumerate(Minv):
                if v and e + i + 1 <= N:
                    t[e + i + 1] += 2 * v
        VnMp = _dense_mul(Vn, Mp, N)
        VnMpMinv = _dense_mul(VnMp, Minv, N)
        Dn = [u - v for u, v in zip(t, VnMpMinv)]
        # E_i = (2q - 2 D_i Mp + q^2 V_i E_{i+1}) / M_i
        En_num = [0] * (N + 1)
        if N >= 1:
            En_num[1] = 2
        DMp = _dense_mul(Dn, Mp, N)
        for e, v in enumerate(DMp):
            En_num[e] -= 2 * v
        VE = _dense_mul(Vn, E, N)
        for e, v in enumerate(VE):
            if v and e + 2 <= N:
                En_num[e + 2] += v
        En = _dense_mul(En_num, Minv, N)
        V, D, E = Vn, Dn, En
    return V, D, E


def area_ensemble_series(spec: FunctionalEquationSpec, j: int, n_max: int) -> PowerSeries:
    """S_j(q) with [q^n] = sum_m m^j p_{m,n}, exact for n <= n_max.

    Supported for models whose area dominates the half-perimeter
    (n >= m - 1, so only m <= n_max + 1 contributes) plus squares.
    """
    if j not in (0, 1, 2):
        raise ValueError("perimeter-moment order j must be 0, 1 or 2")
    if n_max < 1:
        raise ValueError("n_max must be positive")
    tag = spec.tag
    if tag == STAIRCASE:
        V, D, E = _staircase_area_backward(n_max)
        if j == 0:
            return PowerSeries(V, n_max)
        if j == 1:
            return PowerSeries(D, n_max)
        return PowerSeries([d + e for d, e in zip(D, E)], n_max)
    if tag == SQUARES:
        out = [0] * (n_max + 1)
        r = 1
        while r * r <= n_max:
            out[r * r] = (2 * r) ** j
            r += 1
        return PowerSeries(out, n_max)
    if tag in (RECTANGLES, FERRERS):
        series = iterate_series(spec, n_max + 1, qtrunc=n_max)
        out = [0] * (n_max + 1)
        for m in range(2, n_max + 2):
            for e, v in series.p(m).c.items():
                if e <= n_max:
                    out[e] += (m**j) * v
        return PowerSeries(out, n_max)
    raise UnknownModelError(
        f"area ensemble series not supported for {tag!r} "
        "(directed convex would need the bivariate series to high order)"
    )


# ---------------------------------------------------------------------
# numeric evaluation of P(x, q)
# ---------------------------------------------------------------------


class NumericRing:
    """Scalar ring at a fixed numeric q (mpmath reals)."""

    def __init__(self, q):
        self._q = mp.mpf(q)
        self.zero = mp.mpf(0)
        self.one = mp.mpf(1)

    def from_int(self, v):
        return mp.mpf(v)

    def q_pow(self, e):
        e = Fraction(e)
        if e.denominator == 1:
            return self._q ** int(e)
        return mp.power(self._q, mp.mpf(e.numerator) / e.denominator)

    def mul(self, a, b):
        return a * b


def _series_tail_bound(tag: str, x, q, M: int):
    """Upper bound for |sum_{m>M} p_m(q) x^m| from per-model count bounds:
    p_m(1) <= m-1 (rect), 1 (squares), 2^{m-2} (ferrers), 4^{m-1}
    (staircase), 4^{m-2} (directed convex), and p_m(q) <= q^{n_min(m)} p_m(1).
    """
    x, q = mp.mpf(x), mp.mpf(q)
    if tag == RECTANGLES:
        r = x * q
        if r >= 1:
            return mp.inf
        # sum_{m>M} (m-1) x^m q^{m-1} = x * sum_{j>=M} j r^j
        return x * (r**M) * (M * (1 - r) + r) / (1 - r) ** 2
    if tag == SQUARES:
        rho = x * mp.power(q, mp.mpf(2 * M + 3) / 4)
        if rho >= 1:
            return mp.inf
        t = mp.power(x, M + 1) * mp.power(q, mp.mpf((M + 1) ** 2) / 4)
        return t / (1 - rho)
    if tag == FERRERS:
        r = 2 * x * q
        if r >= 1:
            return mp.inf
        return x * x * q * (r ** (M - 1)) / (1 - r)
    if tag == STAIRCASE:
        r = 4 * x * q
        if r >= 1:
            return mp.inf
        return x * (r**M) / (1 - r)
    if tag == DIRECTED_CONVEX:
        r = 4 * x * q
        if r >= 1:
            return mp.inf
        return x * x * q * (r ** (M - 1)) / (1 - r)
    raise UnknownModelError(tag)


def _numeric_series_coeffs(tag: str, x, q, M: int):
    ring = NumericRing(q)
    if tag in _UNIVARIATE_SOLVERS:
        return _UNIVARIATE_SOLVERS[tag](ring, M)
    if tag == SQUARES:
        return _solve_squares(ring, M, scale=Fraction(1, 4))
    if tag == DIRECTED_CONVEX:
        # value table Q_m(q^j y0) closed under the x-only shifts; y0 = x
        return _dirconvex_numeric_coeffs(x, q, M)
    raise UnknownModelError(tag)


def _dirconvex_numeric_coeffs(x, q, M: int):
    q = mp.mpf(q)
    y0 = mp.mpf(x)
    # staircase bivariate values P_m(q^j y0) for m <= M, j <= M
    J = M + 1
    P = [[mp.mpf(0)] * (J + 2) for _ in range(M + 1)]
    for m in range(1, M + 1):
        for j in range(J, -1, -1):
            u = y0 * q**j
            rhs = q * u if m == 1 else mp.mpf(0)
            rhs += q * P[m - 1][j]
            for a in range(1, m):
                b = m - a
                rhs += P[a][j] * (q**b) * P[b][j + 1]
            P[m][j] = rhs / (1 - u * q)
    Q = [mp.mpf(0)] * (M + 1)
    y = y0
    for m in range(1, M + 1):
        rhs = (q**2) * Q[m - 1]
        for a in range(1, m):
            b = m - a
            rhs += (1 + q) * P[a][0] * (q**b) * Q[b]
            Ca = (q * y if a == 1 else mp.mpf(0))
            if a >= 2:
                Ca += q * P[a - 1][0]
            Ca -= (1 + y) * P[a][0]
            rhs += Ca * (q ** (2 * b)) * Q[b]
        if m == 1:
            rhs -= (q**2) * y * (y - 1)
        else:
            rhs -= (q**2) * y * P[m - 1][0]
        Q[m] = rhs / (q * (1 - y * q ** (m - 1)) * (1 - y * q**m))
    return Q


def _direct_rectangles(x, q, tol):
    x, q = mp.mpf(x), mp.mpf(q)
    if q * x >= 1:
        raise DivergenceError("qx >= 1")
    total = mp.mpf(0)
    r = 1
    while True:
        term = x * (q * x) ** r / (1 - (q**r) * x)
        total += term
        tail = x * (q * x) ** (r + 1) / (1 - q * x) ** 2
        if tail < tol / 2:
            return total
        r += 1


def _direct_squares(x, q, tol):
    x, q = mp.mpf(x), mp.mpf(q)
    total = mp.mpf(1)
    m = 1
    while True:
        term = x**m * mp.power(q, mp.mpf(m * m) / 4)
        total += term
        rho = x * mp.power(q, mp.mpf(2 * m + 1) / 4)
        if rho < 1 and term * rho / (1 - rho) < tol / 2:
            return total
        if m > 100000:
            raise DivergenceError("squares direct sum did not converge")
        m += 1


def _direct_ferrers(x, q, tol):
    x, q = mp.mpf(x), mp.mpf(q)

    def C(z):
        return q * z * z / (1 - q * z) ** 2

    total = mp.mpf(0)
    prod = mp.mpf(1)
    for i in range(100000):
        prod *= C(x * q**i)
        total += prod
        nxt = C(x * q ** (i + 1))
        if nxt < 1 and prod * nxt / (1 - nxt) < tol / 2:
            return total
    raise DivergenceError("ferrers product expansion did not converge")


def staircase_cf_eval(x, y, q, depth: int, seed=0):
    """Backward continued fraction for the width/height/area staircase
    series: W_t = (q^t x)(q^t y) q / (1 - q^{t+1}(x+y) - W_{t+1})."""
    x, y, q = mp.mpf(x), mp.mpf(y), mp.mpf(q)
    W = mp.mpf(seed)
    for t in range(depth - 1, -1, -1):
        W = (x * y * q ** (2 * t + 1)) / (1 - (x + y) * q ** (t + 1) - W)
    return W


def _cf_depth_estimate(q, tol) -> int:
    """The neglected tail of the backward recurrence enters at weight
    ~ q^{2T}; start from T with q^{2T} < tol and confirm by reseeding."""
    eps_q = -mp.log(mp.mpf(q))
    return max(16, int(mp.log(1 / mp.mpf(tol)) / (2 * eps_q)) + 50)


def _direct_staircase(x, q, tol, y=None):
    y = x if y is None else y
    depth = _cf_depth_estimate(q, tol)
    while depth <= 1 << 22:
        a = staircase_cf_eval(x, y, q, depth, seed=0)
        b = staircase_cf_eval(x, y, q, depth, seed=0.4)
        if abs(a - b) < tol / 4:
            return a
        depth *= 2
    raise DivergenceError("staircase continued fraction did not stabilise")


def _direct_dirconvex(x, q, tol):
    x, q = mp.mpf(x), mp.mpf(q)
    y = x

    def run(depth, seed):
        Qv = [mp.mpf(seed), mp.mpf(seed)]  # Q_{i+1}, Q_{i+2}
        for i in range(depth - 1, -1, -1):
            xi = x * q**i
            Pi = staircase_cf_eval(xi, y, q, depth + 16)
            Ci = xi * y * q - y * y + Pi * (q * xi - y - 1)
            num = (1 + q) * (Pi + y) * Qv[0] + Ci * Qv[1] - (q**2) * xi * y * (y + Pi - 1)
            Qv = [num / (q * (1 - q * xi)), Qv[0]]
        return Qv[0]

    depth = 16
    prev = None
    while depth <= 1 << 13:
        a = run(depth, 0)
        b = run(depth, 0.1)
        if abs(a - b) < tol / 4 and prev is not None and abs(a - prev) < tol / 4:
            return a
        prev = a
        depth *= 2
    raise DivergenceError("directed-convex backward recurrence did not stabilise")


_DIRECT_EVALUATORS = {
    RECTANGLES: _direct_rectangles,
    SQUARES: _direct_squares,
    FERRERS: _direct_ferrers,
    STAIRCASE: _direct_staircase,
    DIRECTED_CONVEX: _direct_dirconvex,
}


def evaluate_P(spec: FunctionalEquationSpec, x, q, tol=1e-12, route: str = "series"):
    """Numeric value of P(x,q) with absolute error <= tol.

    route="series": sum p_m(q) x^m with a documented geometric tail bound
    (coefficients from the forward recurrence over numeric scalars).
    route="direct": model-specific second evaluation (double sums, product
    expansions, backward recurrences).  For squares the value includes the
    constant term and the odd-m terms of the idealised series.
    """
    if not (0 < q < 1):
        raise DivergenceError("need 0 < q < 1")
    if x == 0:
        return mp.mpf(0) if not spec.has_constant_term else mp.mpf(1)
    if x < 0 or tol <= 0:
        raise ValueError("need x > 0 and tol > 0")
    if route == "direct":
        return _DIRECT_EVALUATORS[spec.tag](x, q, tol)
    if route != "series":
        raise ValueError(f"unknown route {route!r}")
    M = 24
    while True:
        bound = _series_tail_bound(spec.tag, x, q, M)
        if mp.isinf(bound) and M > 64:
            raise DivergenceError(f"(x={x}, q={q}) outside the summable region")
        if bound < tol / 2:
            break
        M *= 2
        if M > 1 << 14:
            raise DivergenceError("tail bound not achievable at requested tol")
    coeffs = _numeric_series_coeffs(spec.tag, x, q, M)
    xm = mp.mpf(x)
    total = mp.mpf(0)
    for m, c in enumerate(coeffs):
        if c:
            total += c * xm**m
    return total

"""Closed-form scaling approximations near the critical corner and their
verification against direct evaluation.

Implemented approximations (all near (x, q) -> (x_c, 1)):

* squares:    P ~ F(s)/sqrt|log q| + 1/2,  F(s) = sqrt(pi) e^{s^2} erfc(s),
              s = |log x|/sqrt|log q|, with the hard remainder bound
              |R| <= |log x|/6.
* rectangles: P ~ x/|log q| (|log q|/|log x| - Phi(qx, 1, |log x|/|log q|))
              with the printed two-term bound; rectangles have no scaling
              function in the strict sense (the critical area generating
              function diverges logarithmically), only this approximation.
* staircase, isotropic:   P ~ 1/4 + 4^{-2/3} eps^{1/3} (Ai'/Ai)(arg),
              arg = 4^{4/3}(1/4 - x) eps^{-2/3}, q = exp(-eps).
* staircase, anisotropic: the uniform two-variable form with alpha(x, y)
              from a dilogarithm equation.  The alpha equation is coded as
              log(x) * log((z - sqrt d)/(z + sqrt d)): the ratio taken
              inside one logarithm.  This is forced by consistency: it
              vanishes at the critical point and reproduces the isotropic
              form exactly to leading order, which the ratio-of-logarithms
              variant fails to do.

Amplitude functions (asymptotic series carriers, not scaling functions):
``ferrers_amplitude_fn`` and ``rect_amplitude_fn`` with their first-order
ODE residual checks.  Ferrers is exposed only as an amplitude function; no
scaling function is known for that model.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .models import RECTANGLES, SQUARES, STAIRCASE, model_spec
from .qfunc import builtin_equation, evaluate_P


class PoleProximityError(ArithmeticError):
    pass


class DomainError(ValueError):
    pass


@dataclass
class ScalingSpec:
    model: str
    theta: Fraction
    phi: Fraction
    variable: str  # how s and eps map to (x, q)
    regular_part: str
    s_range: tuple

    def grid_point(self, s, eps):
        """(x, q) for scan coordinates (s, eps)."""
        s, eps = mp.mpf(s), mp.mpf(eps)
        if self.model in (SQUARES, RECTANGLES):
            # s = |log x|/sqrt|log q| with |log q| = eps^2
            return mp.exp(-s * eps), mp.exp(-(eps**2))
        if self.model == STAIRCASE:
            return (1 - s * mp.power(eps, mp.mpf(2) / 3)) / 4, mp.exp(-eps)
        raise DomainError(self.model)


def scaling_spec(model: str) -> ScalingSpec:
    spec = model_spec(model)
    if model == SQUARES:
        return ScalingSpec(model, spec.theta, spec.phi, "s=|log x|/sqrt|log q|", "1/2", (0, mp.inf))
    if model == RECTANGLES:
        return ScalingSpec(model, spec.theta, spec.phi, "s=|log x|/sqrt|log q|", "0", (0, mp.inf))
    if model == STAIRCASE:
        return ScalingSpec(
            model, spec.theta, spec.phi, "x=(1-s eps^{2/3})/4, q=e^{-eps}", "1/4", (-2.33, mp.inf)
        )
    raise DomainError(f"no scaling approximation for {model!r}")


# ---------------------------------------------------------------------
# squares and rectangles
# ---------------------------------------------------------------------


def squares_scaling(x, q):
    """(approximation, remainder bound) for sum_m x^m q^{m^2/4}."""
    x, q = mp.mpf(x), mp.mpf(q)
    if not (0 < x < 1 and 0 < q < 1):
        raise DomainError("need 0 < x, q < 1")
    lq = -mp.log(q)
    s = -mp.log(x) / mp.sqrt(lq)
    F = mp.sqrt(mp.pi) * mp.exp(s**2) * mp.erfc(s)
    return F / mp.sqrt(lq) + mp.mpf(1) / 2, -mp.log(x) / 6


def rectangles_scaling(x, q):
    """(approximation, remainder bound) with the Lerch transcendent:

        P ~ x/|log q| (Phi(qx, 1, |log x|/|log q|) - |log q|/|log x|).

    Orientation of the difference fixed by two checks: the value must be
    positive, and at x = 1 the shift identity Phi(z,1,v) = 1/v + z Phi(z,
    1, v+1) must reproduce the known divergence -log(1-q)/|log q|; the
    reversed difference fails both and violates the remainder bound by
    orders of magnitude."""
    x, q = mp.mpf(x), mp.mpf(q)
    if not (0 < q < 1) or not (0 < q * x < 1):
        raise DomainError("need 0 < q < 1 and 0 < qx < 1")
    lq, lx = -mp.log(q), -mp.log(x)
    approx = x / lq * (mp.lerchphi(q * x, 1, lx / lq) - lq / lx)
    bound = (x**2 * q / (1 - q * x)) * (mp.mpf(1) / 2 + lx / 6) + (
        x**2 * q / (1 - q * x) ** 2
    ) * lq / 6
    return approx, bound


# ---------------------------------------------------------------------
# staircase
# ---------------------------------------------------------------------


def _log_ai_deriv(arg):
    ai = mp.airyai(arg)
    if abs(ai) < mp.mpf(10) ** (-3):
        raise PoleProximityError(f"Ai argument {mp.nstr(arg, 8)} too close to a zero")
    return mp.airyai(arg, 1) / ai


def staircase_scaling_iso(x, q):
    """1/4 + 4^{-2/3} eps^{1/3} (Ai'/Ai)(4^{4/3} (1/4 - x) eps^{-2/3}),
    eps = -log q."""
    x, q = mp.mpf(x), mp.mpf(q)
    if not (0 < q < 1):
        raise DomainError("need 0 < q < 1")
    eps = -mp.log(q)
    arg = mp.power(4, mp.mpf(4) / 3) * (mp.mpf(1) / 4 - x) * mp.power(eps, -mp.mpf(2) / 3)
    der = _log_ai_deriv(arg)
    return mp.mpf(1) / 4 + mp.power(4, -mp.mpf(2) / 3) * mp.power(eps, mp.mpf(1) / 3) * der


@dataclass
class StairScalingParams:
    x: object
    y: object
    eps: object
    z_m: object
    d: object
    alpha: object

    def alpha_residual(self):
        """|(4/3) alpha^{3/2} - rhs| of the defining equation."""
        sd = mp.sqrt(self.d)
        rhs = mp.log(self.x) * mp.log((self.z_m - sd) / (self.z_m + sd)) + 2 * mp.polylog(
            2, self.z_m - sd
        ) - 2 * mp.polylog(2, self.z_m + sd)
        return abs(mp.mpf(4) / 3 * mp.power(self.alpha, mp.mpf(3) / 2) - rhs)


def stair_scaling_params(x, y, eps) -> StairScalingParams:
    x, y, eps = mp.mpf(x), mp.mpf(y), mp.mpf(eps)
    z_m = (1 + y - x) / 2
    d = z_m * z_m - y
    if d <= 0:
        raise DomainError("d = z_m^2 - y must be positive on the sampled domain")
    sd = mp.sqrt(d)
    if z_m - sd <= 0:
        raise DomainError("z_m - sqrt(d) must stay positive (branch restriction)")
    rhs = mp.log(x) * mp.log((z_m - sd) / (z_m + sd)) + 2 * mp.polylog(2, z_m - sd) - 2 * mp.polylog(
        2, z_m + sd
    )
    if rhs <= 0:
        raise DomainError("alpha^{3/2} nonpositive; outside the scaling domain")
    alpha = mp.power(mp.mpf(3) / 4 * rhs, mp.mpf(2) / 3)
    return StairScalingParams(x=x, y=y, eps=eps, z_m=z_m, d=d, alpha=alpha)


def staircase_scaling_aniso(x, y, q):
    """Uniform anisotropic approximation
    (1-x-y)/2 + alpha^{-1/2} eps^{1/3} (Ai'/Ai)(alpha eps^{-2/3})
    * sqrt(((1-x-y)/2)^2 - xy)."""
    x, y, q = mp.mpf(x), mp.mpf(y), mp.mpf(q)
    if not (0 < q < 1):
        raise DomainError("need 0 < q < 1")
    eps = -mp.log(q)
    par = stair_scaling_params(x, y, eps)
    A = (1 - x - y) / 2
    arg = par.alpha * mp.power(eps, -mp.mpf(2) / 3)
    der = _log_ai_deriv(arg)
    disc = A * A - x * y
    if disc < 0:
        raise DomainError("negative discriminant ((1-x-y)/2)^2 - xy")
    return A + mp.power(par.alpha, -mp.mpf(1) / 2) * mp.power(eps, mp.mpf(1) / 3) * der * mp.sqrt(
        disc
    )


# ---------------------------------------------------------------------
# amplitude functions
# ---------------------------------------------------------------------


def ferrers_amplitude_fn(s):
    """F(s) = sqrt(pi/8) erfc(sqrt(2) s) exp(2 s^2); solves F' = 4sF - 1."""
    s = mp.mpf(s)
    return mp.sqrt(mp.pi / 8) * mp.erfc(mp.sqrt(2) * s) * mp.exp(2 * s**2)


def rect_amplitude_fn(s):
    """F(s) = E1(s^2) exp(s^2) for s > 0; solves s F' + 2 - 2 s^2 F = 0."""
    s = mp.mpf(s)
    if s <= 0:
        raise DomainError("rect amplitude function needs s > 0")
    return mp.e1(s**2) * mp.exp(s**2)


def ode_residual(fn, s, kind: str, h=None):
    """First-order ODE residual with a high-precision central difference."""
    s = mp.mpf(s)
    h = h or mp.mpf(10) ** (-mp.mp.dps // 3)
    der = (fn(s + h) - fn(s - h)) / (2 * h)
    if kind == "ferrers":
        return der - (4 * s * fn(s) - 1)
    if kind == "rectangles":
        return s * der + 2 - 2 * s**2 * fn(s)
    raise ValueError(kind)


def staircase_scaling_fn(s):
    """F(s) = (1/4) d/ds log Ai(4^{1/3} s): the staircase area scaling
    function; its large-s series carries the stair_f amplitudes."""
    s = mp.mpf(s)
    c = mp.power(4, mp.mpf(1) / 3)
    return c / 4 * _log_ai_deriv(c * s)


# ---------------------------------------------------------------------
# the verification scan
# ---------------------------------------------------------------------


@dataclass
class ScanRow:
    model: str
    s: float
    eps: float
    x: float
    q: float
    direct: float
    approx: float
    rel_error: float
    bound: float | None

    def as_csv(self) -> str:
        b = "" if self.bound is None else mp.nstr(mp.mpf(self.bound), 12)
        return (
            f"{self.model},{mp.nstr(mp.mpf(self.s), 8)},{mp.nstr(mp.mpf(self.eps), 8)},"
            f"{mp.nstr(mp.mpf(self.x), 12)},{mp.nstr(mp.mpf(self.q), 12)},"
            f"{mp.nstr(mp.mpf(self.direct), 12)},{mp.nstr(mp.mpf(self.approx), 12)},"
            f"{mp.nstr(mp.mpf(self.rel_error), 8)},{b}"
        )


SCAN_HEADER = "model,s,eps,x,q,direct,approx,rel_error,bound"


def scaling_error_scan(model: str, s_grid, eps_grid, tol=1e-18) -> list:
    """Rows of direct-vs-approximation errors over the (s, eps) grid.

    The direct value comes from ``evaluate_P`` (squares and rectangles by
    their explicit sums, staircase by the continued fraction).  The
    relative error compares the full values; squares and rectangles also
    report their printed remainder bounds.
    """
    sspec = scaling_spec(model)
    eq = builtin_equation(model)
    rows = []
    for s in s_grid:
        for eps in eps_grid:
            x, q = sspec.grid_point(s, eps)
            direct = evaluate_P(eq, x, q, tol, route="direct")
            if model == SQUARES:
                approx, bound = squares_scaling(x, q)
            elif model == RECTANGLES:
                approx, bound = rectangles_scaling(x, q)
            else:
                approx, bound = staircase_scaling_iso(x, q), None
            rel = abs(direct - approx) / abs(direct)
            rows.append(
                ScanRow(
                    model=model,
                    s=float(s),
                    eps=float(eps),
                    x=float(x),
                    q=float(q),
                    direct=float(direct),
                    approx=float(approx),
                    rel_error=float(rel),
                    bound=None if bound is None else float(bound),
                )
            )
    return rows


def scan_to_csv(rows) -> str:
    return SCAN_HEADER + "\n" + "\n".join(r.as_csv() for r in rows) + "\n"

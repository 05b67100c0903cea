"""Controlled-accuracy special function evaluators.

All evaluators run on mpmath arbitrary-precision arithmetic at a
configurable working precision (``POLYGONLAB_DPS`` environment variable,
default 50 significant digits).  Each returns an ``EvalResult`` whose
error bound is certified by re-evaluation at doubled precision: the
reported value differs from the doubled-precision reference by at most
the bound.  The tests validate every evaluator against an independent
quadrature or series summation of its defining representation.

Naming note: ``ei(z)`` here is the decaying exponential integral
E1(z) = int_1^inf exp(-t z)/t dt, the convention used by the rectangle
area amplitude function F(s) = ei(s^2) exp(s^2).
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from dataclasses import dataclass

import mpmath as mp

DEFAULT_DPS = int(os.environ.get("POLYGONLAB_DPS", "50"))


@contextmanager
def working_dps(dps: int | None = None):
    dps = dps or DEFAULT_DPS
    old = mp.mp.dps
    mp.mp.dps = dps
    try:
        yield
    finally:
        mp.mp.dps = old


class RangeError(ValueError):
    pass


@dataclass
class EvalResult:
    value: object
    error_bound: object

    def __float__(self):
        return float(self.value)


def _certified(fn, *args, dps: int | None = None) -> EvalResult:
    """Evaluate at working precision and at doubled precision; the bound
    is the observed difference plus a guard at the doubled precision."""
    dps = dps or DEFAULT_DPS
    with working_dps(dps):
        v1 = fn(*[mp.mpf(a) if isinstance(a, (int, float, str)) else a for a in args])
    with working_dps(2 * dps):
        v2 = fn(*[mp.mpf(a) if isinstance(a, (int, float, str)) else a for a in args])
        guard = mp.mpf(10) ** (-(2 * dps) + 2)
        err = abs(mp.mpf(v1) - v2) + guard
    with working_dps(dps):
        return EvalResult(value=+v2 if abs(v2) > 0 else mp.mpf(v2), error_bound=+err)


AIRY_RANGE = 50.0


def _check_airy_range(x):
    if abs(x) > AIRY_RANGE:
        raise RangeError(f"|x| <= {AIRY_RANGE} supported, got {x}")


def airy_ai(x, dps: int | None = None) -> EvalResult:
    _check_airy_range(x)
    return _certified(mp.airyai, x, dps=dps)


def airy_ai_prime(x, dps: int | None = None) -> EvalResult:
    _check_airy_range(x)
    return _certified(lambda t: mp.airyai(t, 1), x, dps=dps)


def airy_bi(x, dps: int | None = None) -> EvalResult:
    _check_airy_range(x)
    return _certified(mp.airybi, x, dps=dps)


def airy_bi_prime(x, dps: int | None = None) -> EvalResult:
    _check_airy_range(x)
    return _certified(lambda t: mp.airybi(t, 1), x, dps=dps)


# ---------------------------------------------------------------------
# Airy zeros by bracketing + Newton on our own evaluator
# ---------------------------------------------------------------------

MAX_AIRY_ZERO = 20


def _airy_zero_newton(k: int) -> object:
    """beta_k > 0 with Ai(-beta_k) = 0, from the asymptotic estimate
    beta_k ~ (3 pi (4k - 1) / 8)^{2/3} refined by Newton, with a
    sign-change bracket check."""
    est = (3 * mp.pi * (4 * k - 1) / 8) ** mp.mpf("2/3")
    z = est
    for _ in range(mp.mp.dps // 2 + 12):
        f = mp.airyai(-z)
        fp = -mp.airyai(-z, 1)
        step = f / fp
        z = z - step
        if abs(step) < mp.mpf(10) ** (-mp.mp.dps + 4) * max(1, abs(z)):
            break
    delta = mp.mpf(10) ** (-6)
    if mp.sign(mp.airyai(-(z - delta))) * mp.sign(mp.airyai(-(z + delta))) > 0:
        raise ArithmeticError(f"zero {k} not bracketed after Newton")
    return z


def airy_zero(k: int, dps: int | None = None) -> EvalResult:
    if not (1 <= k <= MAX_AIRY_ZERO):
        raise RangeError(f"k must be in 1..{MAX_AIRY_ZERO}")
    return _certified(lambda _: _airy_zero_newton(k), mp.mpf(k), dps=dps)


_zero_cache: dict = {}


def airy_zeros_to(count: int, dps: int | None = None):
    """Internal list [beta_1, ..., beta_count] at working precision;
    cached per precision.  Not range-capped (series summations need
    hundreds of zeros)."""
    dps = dps or DEFAULT_DPS
    key = dps
    got = _zero_cache.setdefault(key, [])
    with working_dps(dps):
        while len(got) < count:
            got.append(_airy_zero_newton(len(got) + 1))
    return got[:count]


# ---------------------------------------------------------------------
# classical evaluators
# ---------------------------------------------------------------------


def erfc(x, dps: int | None = None) -> EvalResult:
    return _certified(mp.erfc, x, dps=dps)


def ei(x, dps: int | None = None) -> EvalResult:
    """E1(x) = int_1^inf exp(-t x)/t dt, x > 0."""
    if not x > 0:
        raise RangeError("ei (E1 convention) needs x > 0")
    return _certified(mp.e1, x, dps=dps)


def gamma_fn(x, dps: int | None = None) -> EvalResult:
    if x <= 0 and x == int(x):
        raise RangeError("gamma pole at nonpositive integers")
    return _certified(mp.gamma, x, dps=dps)


def dilog(x, dps: int | None = None) -> EvalResult:
    if x > 1:
        raise RangeError("dilog supported on (-inf, 1]")
    return _certified(lambda t: mp.polylog(2, t), x, dps=dps)


def lerch_phi(z, v, dps: int | None = None) -> EvalResult:
    """Phi(z, 1, v) = sum_{n>=0} z^n / (v + n) for |z| < 1, v > 0."""
    if abs(z) >= 1:
        raise RangeError("lerch_phi needs |z| < 1")
    if v <= 0:
        raise RangeError("lerch_phi needs v > 0")
    return _certified(lambda a, b: mp.lerchphi(a, 1, b), z, v, dps=dps)


def kummer_u(a, b, z, dps: int | None = None) -> EvalResult:
    if not z > 0:
        raise RangeError("kummer_u supported for z > 0")
    return _certified(lambda aa, bb, zz: mp.hyperu(aa, bb, zz), a, b, z, dps=dps)


# ---------------------------------------------------------------------
# the phi_k integral representation
# ---------------------------------------------------------------------


def phi_integral_tail_bound(k: int, T) -> object:
    """Tail bound for int_T^inf x^{3(k-1)/2} / (Ai^2 + Bi^2) dx using
    Ai^2 + Bi^2 >= exp((4/3) x^{3/2}) / (2 pi sqrt(x)) for x >= 1
    (checked numerically in the tests with margin):

        tail <= pi (3/4)^{k-1} Gamma(k, W),  W = (4/3) T^{3/2},

    via the substitution w = (4/3) x^{3/2}."""
    W = mp.mpf(4) / 3 * mp.power(T, mp.mpf(3) / 2)
    return mp.pi * mp.power(mp.mpf(3) / 4, k - 1) * mp.gammainc(k, W)


def phi_via_integral(k: int, dps: int | None = None, T: float = 16.0) -> EvalResult:
    """phi_k = 2^{k+1} * 3/(4 pi^2) * int_0^inf x^{3(k-1)/2}/(Ai^2+Bi^2) dx."""
    if k < 1:
        raise RangeError("integral representation needs k >= 1")
    dps = dps or DEFAULT_DPS
    with working_dps(dps):
        expo = mp.mpf(3 * (k - 1)) / 2

        def integrand(x):
            return mp.power(x, expo) / (mp.airyai(x) ** 2 + mp.airybi(x) ** 2)

        val, quad_err = mp.quad(integrand, [0, 1, T], error=True)
        tail = phi_integral_tail_bound(k, T)
        pref = mp.mpf(2) ** (k + 1) * 3 / (4 * mp.pi**2)
        bound = pref * (abs(quad_err) + tail) + mp.mpf(10) ** (-dps + 4)
        if bound > mp.mpf(10) ** (-8):
            raise ArithmeticError("quadrature tail bound not achieved")
        return EvalResult(value=pref * (val + 0), error_bound=bound)

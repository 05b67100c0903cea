"""Limit distributions of polygon area and the comparison engine.

The five laws are carried as ``LimitLaw`` objects with a moment oracle and,
where available, explicit moment generating function / density / cdf
evaluators built from sums over Airy zeros.

Conventions.  For a model with exponents (theta, phi), the area variables
X_m = X_tilde_m / m^{1/phi} converge to the model's law up to a model
dependent scale.  Mean normalisation E[(X_tilde/E X_tilde)^k] removes that
scale, which is what ``compare_moments`` uses for the non-concentrated
laws; concentrated laws are compared through scaled absolute moments.

Zero-sum series are range-limited for small arguments (thousands of Airy
zeros would be needed); ``*_mgf_moment_series`` provides the complementary
small-argument route via the entire moment expansion with an alternating
series error bound, and the Laplace-transform checks use the hybrid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import mpmath as mp

from .amplitudes import airy_phi, meander_omega
from .counts import CountTable, factorial_area_moment
from .models import model_spec
from .series import PowerSeries
from .specialfn import DEFAULT_DPS, airy_zeros_to, working_dps


class SeriesRangeError(ArithmeticError):
    """Requested argument outside the usable range of a zero-sum series."""


@dataclass
class LimitLaw:
    name: str
    support: str
    moment_fn: object
    mgf_fn: object = None
    density_fn: object = None
    cdf_fn: object = None

    def moment(self, k: int):
        return self.moment_fn(k)

    def mgf(self, t):
        if self.mgf_fn is None:
            raise NotImplementedError(f"{self.name} has no mgf evaluator")
        return self.mgf_fn(t)

    def density(self, x):
        if self.density_fn is None:
            raise NotImplementedError(f"{self.name} has no density evaluator")
        return self.density_fn(x)

    def cdf(self, x):
        if self.cdf_fn is None:
            raise NotImplementedError(f"{self.name} has no cdf evaluator")
        return self.cdf_fn(x)


def law_moment(law: LimitLaw, k: int):
    if k < 0:
        raise ValueError("k must be nonnegative")
    return law.moment(k)


# ---------------------------------------------------------------------
# moment oracles
# ---------------------------------------------------------------------


def beta_moment(k: int) -> Fraction:
    """E[X^k] for density 1/(2 sqrt(1-x)) on [0,1]: 4^k (k!)^2/(2k+1)!."""
    return Fraction(4**k * factorial(k) ** 2, factorial(2 * k + 1))


_GAMMA_CACHE: dict = {}


def _gamma_half(two_g: int):
    """Gamma(two_g / 2) at working precision, cached per dps."""
    key = (mp.mp.dps, two_g)
    if key not in _GAMMA_CACHE:
        _GAMMA_CACHE[key] = mp.gamma(mp.mpf(two_g) / 2)
    return _GAMMA_CACHE[key]


def _airy_moment_over_factorial(k: int):
    """M_k / k! = Gamma(-1/2)/Gamma(3k/2 - 1/2) * phi_k / phi_0."""
    phi = airy_phi(k).values
    return _gamma_half(-1) / _gamma_half(3 * k - 1) * _frac(phi[k]) / _frac(phi[0])


def airy_moment(k: int):
    """E[Y^k] = k! Gamma(-1/2)/Gamma(3k/2 - 1/2) * phi_k / phi_0."""
    return factorial(k) * _airy_moment_over_factorial(k)


def _meander_moment_over_factorial(k: int):
    w = meander_omega(k).values
    return _gamma_half(1) * _frac(w[k]) / (_gamma_half(3 * k + 1) * mp.power(2, mp.mpf(k) / 2))


def meander_moment(k: int):
    """E[Z^k] = k! Gamma(1/2)/Gamma(3k/2 + 1/2) * omega_k 2^{-k/2}."""
    return factorial(k) * _meander_moment_over_factorial(k)


def _frac(v: Fraction):
    return mp.mpf(v.numerator) / v.denominator


def universal_ratio(k: int):
    """Normalisation-free limit of E[X_tilde^k]/E[X_tilde]^k for the Airy
    law: k! Gamma(gamma_1)^k / (Gamma(gamma_k) Gamma(gamma_0)^{k-1}) *
    phi_k phi_0^{k-1} / phi_1^k."""
    phi = airy_phi(k).values
    num = factorial(k) * _gamma_half(2) ** k * _frac(phi[k]) * _frac(phi[0]) ** (k - 1)
    den = _gamma_half(3 * k - 1) * _gamma_half(-1) ** (k - 1) * _frac(phi[1]) ** k
    return num / den


# ---------------------------------------------------------------------
# Airy law evaluators
# ---------------------------------------------------------------------


def _zero_sum_tail_bound(K: int, c, weight_pow: float = 0.0):
    """sum_{k>K} beta_k^w exp(-c beta_k) with beta_k >= beta1 k^{2/3} and
    beta_k <= 3 k^{2/3}: bounded by an incomplete-gamma integral."""
    a = mp.mpf("2.338") * c
    if weight_pow == 0.0:
        # integral_K^inf exp(-a w^{2/3}) dw = (3/2) a^{-3/2} Gamma(3/2, a K^{2/3})
        return 1.5 * mp.power(a, -1.5) * mp.gammainc(mp.mpf(1.5), a * mp.power(K, mp.mpf(2) / 3))
    # weight beta_k <= 3 k^{2/3}
    return (
        mp.mpf(3) ** weight_pow
        * 1.5
        * mp.power(a, -1.5 - weight_pow)
        * mp.gammainc(mp.mpf(1.5) + weight_pow, a * mp.power(K, mp.mpf(2) / 3))
    )


def airy_mgf(t, eps=1e-8, max_zeros: int = 600):
    """M(t) = E[exp(-t Y)] via the Airy-zero sum
    M(t) = sqrt(2 pi) 2^{3/2} t' sum_k exp(-beta_k (2 t')^{2/3}), t' = t;
    absolute error <= eps.  Small t needs many zeros; raises
    SeriesRangeError with the usable range when max_zeros is not enough."""
    t = mp.mpf(t)
    if t <= 0:
        raise SeriesRangeError("zero-sum mgf needs t > 0")
    c = mp.power(2 * t, mp.mpf(2) / 3)
    pref = mp.sqrt(2 * mp.pi) * mp.power(2, mp.mpf(3) / 2) * t
    K = 8
    while True:
        if pref * _zero_sum_tail_bound(K, c) < eps:
            break
        K *= 2
        if K > max_zeros:
            raise SeriesRangeError(
                f"t = {t} too small for {max_zeros} Airy zeros at eps = {eps}"
            )
    zeros = airy_zeros_to(K)
    return pref * mp.fsum(mp.exp(-b * c) for b in zeros)


def airy_mgf_moment_series(t, eps=1e-12, max_terms: int = 300):
    """M(t) by the entire moment series sum_j M_j (-t)^j / j!; the terms
    alternate for t > 0 so the first omitted term bounds the error."""
    t = mp.mpf(t)
    total = mp.mpf(0)
    for j in range(max_terms):
        term = mp.power(-t, j) * _airy_moment_over_factorial(j)
        total += term
        if j > 4 and abs(term) < eps:
            return total
    raise SeriesRangeError("moment series did not reach the target accuracy")


def airy_mgf_hybrid(t, eps=1e-9, crossover=0.35):
    t = mp.mpf(t)
    if t < crossover:
        return airy_mgf_moment_series(t, eps)
    return airy_mgf(t, eps)


def airy_density(y, eps=1e-10, max_zeros: int = 80):
    """Density of Y from the Kummer-function representation
    2^{3/2} p(2^{3/2} x) = (2 sqrt(6)/x^2) sum_k exp(-v_k) v_k^{2/3}
    U(-5/6, 4/3; v_k), v_k = 2 beta_k^3 / (27 x^2)."""
    y = mp.mpf(y)
    if y <= 0:
        return mp.mpf(0)
    x = y / mp.power(2, mp.mpf(3) / 2)
    zeros = airy_zeros_to(max_zeros)
    total = mp.mpf(0)
    for b in zeros:
        v = 2 * b**3 / (27 * x**2)
        term = mp.exp(-v) * mp.power(v, mp.mpf(2) / 3) * mp.hyperu(mp.mpf(-5) / 6, mp.mpf(4) / 3, v)
        total += term
        if v > 40 and abs(term) < eps / 10:
            break
    else:
        if 2 * zeros[-1] ** 3 / (27 * x**2) < 40:
            raise SeriesRangeError(f"y = {y} too large for {max_zeros} zeros")
    inner = 2 * mp.sqrt(6) / x**2 * total
    return inner / mp.power(2, mp.mpf(3) / 2)


# ---------------------------------------------------------------------
# meander law evaluators
# ---------------------------------------------------------------------

_RK_CACHE: dict = {}


def meander_rk(count: int):
    """Distribution-function weights
    R_k = beta_k (1 + 3 int_0^{beta_k} Ai(-t) dt) / (3 Ai'(-beta_k));
    the primitive of Ai comes from the Airy-function integral routine."""
    got = _RK_CACHE.setdefault(mp.mp.dps, [])
    zeros = airy_zeros_to(count)
    while len(got) < count:
        b = zeros[len(got)]
        integral = -mp.airyai(-b, -1)  # int_0^{b} Ai(-t) dt
        got.append(b * (1 + 3 * integral) / (3 * mp.airyai(-b, 1)))
    return got[:count]


def meander_mgf_residues(count: int):
    """Weights of the mgf zero-sum: sqrt(pi)/beta_k times the cdf weight.

    These are the residues of sqrt(pi) (1 - 3 int_0^s Ai)/(3 Ai(s)) at the
    Airy zeros; using the cdf weights verbatim in the mgf sum fails every
    independent check (moment series, mgf-from-cdf quadrature, Laplace
    identity), while this normalisation passes all three.
    """
    zeros = airy_zeros_to(count)
    return [r * mp.sqrt(mp.pi) / b for r, b in zip(meander_rk(count), zeros)]


def meander_mgf(t, eps=1e-8, max_zeros: int = 600):
    """M(t) = 2^{-1/6} t^{1/3} sum_k R_k exp(-beta_k t^{2/3} 2^{-1/3})."""
    t = mp.mpf(t)
    if t <= 0:
        raise SeriesRangeError("zero-sum mgf needs t > 0")
    c = mp.power(t, mp.mpf(2) / 3) / mp.power(2, mp.mpf(1) / 3)
    pref = mp.power(t, mp.mpf(1) / 3) / mp.power(2, mp.mpf(1) / 6)
    # |R_k| <= 2 beta_k for all k (checked numerically in the tests)
    K = 8
    while True:
        if pref * 2 * _zero_sum_tail_bound(K, c, weight_pow=1.0) < eps:
            break
        K *= 2
        if K > max_zeros:
            raise SeriesRangeError(f"t = {t} too small for {max_zeros} zeros")
    zeros = airy_zeros_to(K)
    res = meander_mgf_residues(K)
    return pref * mp.fsum(r * mp.exp(-b * c) for r, b in zip(res, zeros))


def meander_mgf_moment_series(t, eps=1e-12, max_terms: int = 300):
    t = mp.mpf(t)
    total = mp.mpf(0)
    for j in range(max_terms):
        term = mp.power(-t, j) * _meander_moment_over_factorial(j)
        total += term
        if j > 4 and abs(term) < eps:
            return total
    raise SeriesRangeError("moment series did not reach the target accuracy")


def meander_mgf_hybrid(t, eps=1e-9, crossover=0.35):
    t = mp.mpf(t)
    if t < crossover:
        return meander_mgf_moment_series(t, eps)
    return meander_mgf(t, eps)


def meander_cdf(x, eps=1e-9, max_zeros: int = 220):
    """R(x) = sqrt(pi)/(18^{1/6} x) sum_k R_k exp(-v_k) v_k^{-1/3}
    Ai((3 v_k/2)^{2/3}), v_k = beta_k^3/(27 x^2)."""
    x = mp.mpf(x)
    if x <= 0:
        return mp.mpf(0)
    zeros = airy_zeros_to(max_zeros)
    rk = meander_rk(max_zeros)
    pref = mp.sqrt(mp.pi) / (mp.power(18, mp.mpf(1) / 6) * x)
    total = mp.mpf(0)
    for b, r in zip(zeros, rk):
        v = b**3 / (27 * x**2)
        term = r * mp.exp(-v) * mp.power(v, mp.mpf(-1) / 3) * mp.airyai(
            mp.power(3 * v / 2, mp.mpf(2) / 3)
        )
        total += term
        # Ai((3v/2)^{2/3}) ~ exp(-v) gives double-exponential decay in v
        if v > 25 and abs(pref * term) < eps / 10:
            break
    else:
        if zeros[-1] ** 3 / (27 * x**2) < 25:
            raise SeriesRangeError(f"x = {x} too large for {max_zeros} zeros")
    return pref * total


# ---------------------------------------------------------------------
# Laplace-transform identities
# ---------------------------------------------------------------------


def airy_laplace_lhs(s, eps=1e-9, T=40.0):
    """(1/sqrt(2 pi)) int_0^inf (exp(-st) - 1) M(2^{-3/2} t^{3/2}) t^{-3/2} dt."""
    s = mp.mpf(s)

    def integrand(t):
        tau = mp.power(t, mp.mpf(3) / 2) / mp.power(2, mp.mpf(3) / 2)
        return (mp.exp(-s * t) - 1) * airy_mgf_hybrid(tau, eps=eps / 100) * mp.power(t, -1.5)

    val = mp.quad(integrand, [0, 1, 5, T])
    tau_T = mp.power(T, 1.5) / mp.power(2, 1.5)
    tail = airy_mgf_hybrid(tau_T) * 2 / mp.sqrt(T)
    if tail > eps:
        raise ArithmeticError("tail bound not achieved; raise T")
    return val / mp.sqrt(2 * mp.pi)


def airy_laplace_rhs(s):
    s = mp.mpf(s)
    c = mp.power(2, mp.mpf(1) / 3)
    return c * (
        mp.airyai(c * s, 1) / mp.airyai(c * s) - mp.airyai(0, 1) / mp.airyai(0)
    )


def meander_laplace_lhs(s, eps=1e-9, T=40.0):
    """int_0^inf exp(-st) M(sqrt(2) t^{3/2}) t^{-1/2} dt."""
    s = mp.mpf(s)

    def integrand(t):
        tau = mp.sqrt(2) * mp.power(t, mp.mpf(3) / 2)
        return mp.exp(-s * t) * meander_mgf_hybrid(tau, eps=eps / 100) / mp.sqrt(t)

    val = mp.quad(integrand, [0, 1, 5, T])
    tail = meander_mgf_hybrid(mp.sqrt(2) * mp.power(T, 1.5)) * mp.exp(-s * T) / mp.sqrt(T) / s
    if tail > eps:
        raise ArithmeticError("tail bound not achieved; raise T")
    return val


def meander_omega_fn(s):
    """Omega(s) = (1 - 3 int_0^s Ai(t) dt) / (3 Ai(s))."""
    s = mp.mpf(s)
    return (1 - 3 * mp.airyai(s, -1)) / (3 * mp.airyai(s))


def meander_laplace_rhs(s):
    return mp.sqrt(mp.pi) * meander_omega_fn(s)


# ---------------------------------------------------------------------
# law registry
# ---------------------------------------------------------------------


def beta_1_half_law() -> LimitLaw:
    return LimitLaw(
        name="beta_1_half",
        support="[0, 1]",
        moment_fn=beta_moment,
        mgf_fn=lambda t: mp.quad(
            lambda x: mp.exp(-mp.mpf(t) * x) / (2 * mp.sqrt(1 - x)), [0, 1]
        ),
        density_fn=lambda x: 1 / (2 * mp.sqrt(1 - mp.mpf(x))) if 0 <= x < 1 else mp.mpf(0),
        cdf_fn=lambda x: 1 - mp.sqrt(1 - mp.mpf(min(max(x, 0), 1))),
    )


def airy_law() -> LimitLaw:
    return LimitLaw(
        name="airy",
        support="(0, inf)",
        moment_fn=airy_moment,
        mgf_fn=airy_mgf_hybrid,
        density_fn=airy_density,
    )


def meander_law() -> LimitLaw:
    return LimitLaw(
        name="meander",
        support="(0, inf)",
        moment_fn=meander_moment,
        mgf_fn=meander_mgf_hybrid,
        cdf_fn=meander_cdf,
    )


def dirac_law(point) -> LimitLaw:
    point = Fraction(point)
    return LimitLaw(
        name=f"dirac({point})",
        support=f"{{{point}}}",
        moment_fn=lambda k: point**k,
        mgf_fn=lambda t: mp.exp(-mp.mpf(t) * _frac(point)),
        cdf_fn=lambda x: mp.mpf(1) if x >= point else mp.mpf(0),
    )


def gaussian_law(mu, sigma) -> LimitLaw:
    def moment(k):
        m = [mp.mpf(1), mp.mpf(mu)]
        for j in range(2, k + 1):
            m.append(mp.mpf(mu) * m[j - 1] + (j - 1) * mp.mpf(sigma) ** 2 * m[j - 2])
        return m[k]

    return LimitLaw(
        name="gaussian",
        support="(-inf, inf)",
        moment_fn=moment,
        mgf_fn=lambda t: mp.exp(-mp.mpf(t) * mp.mpf(mu) + mp.mpf(t) ** 2 * mp.mpf(sigma) ** 2 / 2),
        density_fn=lambda x: mp.npdf(mp.mpf(x), mp.mpf(mu), mp.mpf(sigma)),
        cdf_fn=lambda x: mp.ncdf(mp.mpf(x), mp.mpf(mu), mp.mpf(sigma)),
    )


LAWS = {
    "beta_1_half": beta_1_half_law,
    "airy": airy_law,
    "meander": meander_law,
}


def law_by_name(name: str) -> LimitLaw:
    if name in LAWS:
        return LAWS[name]()
    if name.startswith("dirac(") and name.endswith(")"):
        return dirac_law(Fraction(name[6:-1]))
    raise ValueError(f"unknown law {name!r}")


def carleman_terms(law_name: str, k_max: int):
    """Terms M_{2k}^{-1/(2k)} of the Carleman sum; their partial sums must
    keep growing (divergence is the moment-determinacy criterion)."""
    mfn = airy_moment if law_name == "airy" else meander_moment
    terms = []
    for k in range(1, k_max + 1):
        terms.append(mp.power(mfn(2 * k), -mp.mpf(1) / (2 * k)))
    return terms


# ---------------------------------------------------------------------
# finite-size comparison engine
# ---------------------------------------------------------------------


class MomentSource:
    """Exact ordinary moments E[X_tilde_m^k] from either an enumerated
    table or pumped factorial moment series."""

    def __init__(self, table: CountTable | None = None, gk: dict | None = None, model=None):
        if (table is None) == (gk is None):
            raise ValueError("pass exactly one of table, gk")
        self.table = table
        self.gk = gk
        self.model = model or (table.model if table else None)

    def factorial_moment(self, m: int, k: int) -> Fraction:
        if self.table is not None:
            return factorial_area_moment(self.table, m, k)
        return self.gk[k].coeff(m)

    def ordinary_moment(self, m: int, k: int) -> Fraction:
        """E[X_tilde^k] via Stirling numbers of the second kind."""
        g0 = self.factorial_moment(m, 0)
        if g0 == 0:
            raise ZeroDivisionError(f"empty row m={m}")
        total = Fraction(0)
        for j in range(k + 1):
            total += _stirling2(k, j) * factorial(j) * self.factorial_moment(m, j)
        return total / g0


def _stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


@dataclass
class MomentReport:
    model: str
    law: str
    mode: str
    rows: list = field(default_factory=list)  # (m, k, empirical, law_value, rel_err)

    def add(self, m, k, emp, lawv):
        emp_f = _frac(emp) if isinstance(emp, Fraction) else mp.mpf(emp)
        lawv = _frac(lawv) if isinstance(lawv, Fraction) else lawv
        rel = abs(emp_f - lawv) / abs(lawv) if lawv != 0 else mp.inf
        self.rows.append((m, k, emp, lawv, rel))

    def rel_errors(self, k: int):
        return [r[4] for r in self.rows if r[1] == k]

    def to_csv(self) -> str:
        lines = ["model,law,m,k,empirical,law_value,rel_error"]
        for m, k, emp, lawv, rel in self.rows:
            emp_s = (
                f"{emp.numerator}/{emp.denominator}" if isinstance(emp, Fraction) else mp.nstr(emp, 17)
            )
            lines.append(
                f"{self.model},{self.law},{m},{k},{emp_s},{mp.nstr(lawv, 17)},{mp.nstr(rel, 8)}"
            )
        return "\n".join(lines) + "\n"


def compare_moments(
    source: MomentSource,
    law: LimitLaw,
    m_list,
    k_max: int,
    mode: str = "mean_normalized",
    scale=None,
) -> MomentReport:
    """mode="mean_normalized": E[(X~/E X~)^k] against M_k / M_1^k.
    mode="scaled": E[(scale * X~ / m^{1/phi})^k] against M_k, for laws
    stated with absolute constants (concentrated and beta cases)."""
    spec = model_spec(source.model)
    report = MomentReport(source.model, law.name, mode)
    for m in m_list:
        for k in range(1, k_max + 1):
            if mode == "mean_normalized":
                mu = source.ordinary_moment(m, 1)
                emp = source.ordinary_moment(m, k) / mu**k
                lawv = mp.mpf(law.moment(k)) / mp.mpf(law.moment(1)) ** k
            elif mode == "scaled":
                c = Fraction(scale) if scale is not None else Fraction(1)
                inv_phi = spec.phi.denominator / Fraction(spec.phi.numerator)
                power = Fraction(k) * inv_phi
                if power.denominator != 1:
                    raise ValueError("non-integer m-power; use mean_normalized")
                emp = source.ordinary_moment(m, k) * c**k / Fraction(m) ** int(power)
                lawv = mp.mpf(law.moment(k)) if not isinstance(law.moment(k), Fraction) else _frac(
                    law.moment(k)
                )
            else:
                raise ValueError(mode)
            report.add(m, k, emp, lawv)
    return report


# ---------------------------------------------------------------------
# fixed-area ensemble (perimeter law at fixed area)
# ---------------------------------------------------------------------


@dataclass
class FixedAreaReport:
    rows: list  # (n, mu_hat, var_hat)
    mu_extrapolated: float
    var_extrapolated: float


def gaussian_fixed_area_check(s0: PowerSeries, s1: PowerSeries, s2: PowerSeries, n_max: int) -> FixedAreaReport:
    """Per-area mean and variance of the half-perimeter, with Richardson
    (p=1) extrapolated limits: mu_hat_n = S1/(S0 n) -> mu and
    var_hat_n = (S2/S0 - (S1/S0)^2)/n -> sigma^2."""
    from .extrapolate import richardson

    rows = []
    for n in range(1, n_max + 1):
        a, b, c = s0.coeff(n), s1.coeff(n), s2.coeff(n)
        if a == 0:
            raise ValueError(f"empty area level n={n}")
        mu_hat = Fraction(b) / a / n
        var_hat = (Fraction(c) / a - (Fraction(b) / a) ** 2) / n
        rows.append((n, mu_hat, var_hat))
    ns = [r[0] for r in rows[n_max // 2 :]]
    mu_trail = [r[1] for r in rows[n_max // 2 :]]
    var_trail = [r[2] for r in rows[n_max // 2 :]]
    mu_acc = richardson(mu_trail, 1, m_values=ns)
    var_acc = richardson(var_trail, 1, m_values=ns)
    return FixedAreaReport(rows, float(mu_acc[-1]), float(var_acc[-1]))

"""Growth-constant recovery from coefficient sequences.

``estimate_growth`` inverts a_m ~ A x_c^{-m} m^{gamma-1}: the consecutive
ratios converge to 1/x_c with a smooth 1/m correction carrying gamma, so
iterated Richardson on the ratio, exponent and amplitude trails recovers
all three constants.  Rational inputs are processed in exact arithmetic
until the final float conversion, which makes the estimator exactly
scale-equivariant (multiplying the sequence by a constant rescales A_hat
and nothing else).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp


class SequenceError(ValueError):
    pass


def richardson(sequence, p, m_values=None, levels: int = 1):
    """Eliminate error terms c m^{-p}, c' m^{-p-1}, ... over ``levels``
    sweeps (the eliminated exponent increases by one per level, the usual
    Richardson-table ladder).

    For entries a(m_i) = L + c m_i^{-p} + o(m_i^{-p}) consecutive pairs
    combine to (m2^p a2 - m1^p a1)/(m2^p - m1^p).  Exact for Fraction
    inputs with integer exponents; floats/mpf otherwise.
    """
    seq = list(sequence)
    if len(seq) < 3:
        raise SequenceError("need at least 3 terms")
    ms = list(m_values) if m_values is not None else list(range(1, len(seq) + 1))
    if len(ms) != len(seq):
        raise SequenceError("m_values length mismatch")
    out = seq
    for level in range(levels):
        if len(out) < 2:
            break
        pe = Fraction(p) + level
        exact = all(isinstance(v, (int, Fraction)) for v in out) and pe.denominator == 1
        nxt = []
        for i in range(1, len(out)):
            m1, m2 = ms[i - 1], ms[i]
            if exact:
                w1, w2 = Fraction(m1) ** int(pe), Fraction(m2) ** int(pe)
            else:
                w1, w2 = mp.power(m1, mp.mpf(float(pe))), mp.power(m2, mp.mpf(float(pe)))
            nxt.append((w2 * out[i] - w1 * out[i - 1]) / (w2 - w1))
        out = nxt
        ms = ms[1:]
    return out


@dataclass
class GrowthEstimate:
    x_c_hat: float
    gamma_hat: float
    a_hat: float
    trail: list  # (m, x_c_hat, gamma_hat, a_hat)
    method: str = "ratio+richardson"

    def trail_csv(self) -> str:
        lines = ["m,x_c_hat,gamma_hat,A_hat"]
        for m, xc, g, a in self.trail:
            lines.append(f"{m},{mp.nstr(mp.mpf(xc), 12)},{mp.nstr(mp.mpf(g), 12)},{mp.nstr(mp.mpf(a), 12)}")
        return "\n".join(lines) + "\n"


def estimate_growth(sequence, m_start: int = 0) -> GrowthEstimate:
    """Estimate (x_c, gamma, A) for a_m ~ A x_c^{-m} m^{gamma-1}.

    ``sequence[i]`` is a_{m_start + i}; leading zeros are skipped.  Ratio
    trail r_m = a_{m+1}/a_m -> 1/x_c is accelerated with three Richardson
    levels in 1/m; gamma from m (x_c r_m - 1) + 1; A from
    a_m x_c^m m^{1-gamma}.
    """
    vals = list(sequence)
    ms = list(range(m_start, m_start + len(vals)))
    while vals and vals[0] == 0:
        vals.pop(0)
        ms.pop(0)
    if len(vals) < 8:
        raise SequenceError("need at least 8 nonzero terms")
    if any(v == 0 for v in vals):
        raise SequenceError("zero-ridden sequence")
    if any((vals[i] > 0) != (vals[0] > 0) for i in range(len(vals))):
        raise SequenceError("sign-alternating sequence")

    exact = all(isinstance(v, (int, Fraction)) for v in vals)
    conv = Fraction if exact else mp.mpf
    ratios = [conv(vals[i + 1]) / conv(vals[i]) for i in range(len(vals) - 1)]
    rm = ms[:-1]

    acc = richardson(ratios, 1, m_values=rm, levels=4)
    inv_xc = acc[-1]
    x_c = 1 / inv_xc

    gamma_trail = [m * (x_c * r - 1) + 1 for m, r in zip(rm, ratios)]
    gacc = richardson(gamma_trail, 1, m_values=rm, levels=3)
    gamma = gacc[-1]

    gamma_f = mp.mpf(float(gamma))
    a_trail = [
        mp.mpf(float(v)) * mp.power(mp.mpf(float(x_c)), m) * mp.power(m, 1 - gamma_f)
        for v, m in zip(vals, ms)
        if m > 0
    ]
    a_ms = [m for m in ms if m > 0]
    aacc = richardson(a_trail, 1, m_values=a_ms, levels=2)
    a_hat = aacc[-1]

    trail = []
    for i in range(2, len(rm)):
        xr = richardson(ratios[: i + 1], 1, m_values=rm[: i + 1], levels=min(3, i - 1))[-1]
        gr = richardson(gamma_trail[: i + 1], 1, m_values=rm[: i + 1], levels=min(2, i - 1))[-1]
        ar = a_trail[min(i, len(a_trail) - 1)]
        trail.append((rm[i], float(1 / xr), float(gr), float(ar)))

    return GrowthEstimate(
        x_c_hat=float(x_c), gamma_hat=float(gamma), a_hat=float(a_hat), trail=trail
    )

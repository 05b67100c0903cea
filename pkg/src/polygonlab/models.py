"""Registry of the implemented polygon classes and their critical data.

Conventions used throughout the package:

* half-perimeter m = (number of boundary edges) / 2; the unit square has
  m = 2 and area n = 1.
* area n = number of enclosed unit cells.
* growth window: every nonzero count p_{m,n} satisfies A*m <= n <= B*m**2.
  For all five classes the tight choices are A = 1/2 (the minimum area is
  m - 1, or m^2/4 for squares, and (m-1)/m is minimised at m = 2) and
  B = 1/4 (bounding-box area with fixed w + h is at most m^2/4).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

RECTANGLES = "rectangles"
SQUARES = "squares"
FERRERS = "ferrers"
STAIRCASE = "staircase"
DIRECTED_CONVEX = "directed_convex"

ALL_MODELS = (RECTANGLES, SQUARES, FERRERS, STAIRCASE, DIRECTED_CONVEX)


class UnknownModelError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    """Critical point, exponents and growth constants for one class."""

    tag: str
    x_c: Fraction
    theta: Fraction
    phi: Fraction
    growth_a: Fraction
    growth_b: Fraction
    g0_form: str
    area_law: str

    def __post_init__(self):
        if not (0 < self.x_c <= 1):
            raise ValueError("x_c must lie in (0, 1]")
        if not (Fraction(1, 2) <= self.phi <= 1):
            raise ValueError("phi must lie in [1/2, 1]")

    @property
    def gamma0(self) -> Fraction:
        return -self.theta / self.phi


_REGISTRY = {
    RECTANGLES: ModelSpec(
        RECTANGLES,
        x_c=Fraction(1),
        theta=Fraction(-1),
        phi=Fraction(1, 2),
        growth_a=Fraction(1, 2),
        growth_b=Fraction(1, 4),
        g0_form="x^2/(1-x)^2",
        area_law="beta_1_half",
    ),
    SQUARES: ModelSpec(
        SQUARES,
        x_c=Fraction(1),
        theta=Fraction(-1, 2),
        phi=Fraction(1, 2),
        growth_a=Fraction(1, 2),
        growth_b=Fraction(1, 4),
        g0_form="x^2/(1-x^2)",
        area_law="dirac(1/4)",
    ),
    FERRERS: ModelSpec(
        FERRERS,
        x_c=Fraction(1, 2),
        theta=Fraction(-1, 2),
        phi=Fraction(1, 2),
        growth_a=Fraction(1, 2),
        growth_b=Fraction(1, 4),
        g0_form="x^2/(1-2x)",
        area_law="dirac(1/8)",
    ),
    STAIRCASE: ModelSpec(
        STAIRCASE,
        x_c=Fraction(1, 4),
        theta=Fraction(1, 3),
        phi=Fraction(2, 3),
        growth_a=Fraction(1, 2),
        growth_b=Fraction(1, 4),
        g0_form="(1-2x-sqrt(1-4x))/2",
        area_law="airy",
    ),
    DIRECTED_CONVEX: ModelSpec(
        DIRECTED_CONVEX,
        x_c=Fraction(1, 4),
        theta=Fraction(-1, 3),
        phi=Fraction(2, 3),
        growth_a=Fraction(1, 2),
        growth_b=Fraction(1, 4),
        g0_form="x^2/sqrt(1-4x)",
        area_law="meander",
    ),
}


def model_spec(tag: str) -> ModelSpec:
    try:
        return _REGISTRY[tag]
    except KeyError:
        raise UnknownModelError(f"unknown polygon class {tag!r}; known: {ALL_MODELS}")

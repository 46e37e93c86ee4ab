"""Closed-form conditional expectations from the excursion-length law.

Given that the current excursion has age ``a``, its total length ``L`` has
survival function ``P(L > l | a) = sqrt(a / l)`` for ``l >= a``, i.e. density
``0.5 * sqrt(a / l**3)``. Every function here integrates against that law.

Coordinates follow the distressed bond: ``a = t - g_bar`` is the age of the
running negative excursion and ``b = T - g_bar`` is the maturity measured from
the excursion's start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from excursion_credit.detection import distress_trigger


@dataclass(frozen=True)
class DistressCoordinates:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError(f"excursion age must be positive, got a={self.a}")
        if not self.b >= self.a:
            raise ValueError(f"need a <= b, got a={self.a}, b={self.b}")


def chung_survival(a: float, l: float) -> float:
    """Probability that an excursion of age ``a`` lasts beyond ``l``."""
    if not a > 0:
        raise ValueError(f"age must be positive, got {a}")
    if l < a:
        raise ValueError(f"length {l} is shorter than the current age {a}")
    return math.sqrt(a / l)


def chung_density(a: float, l: float) -> float:
    """Density of the excursion length at ``l`` given age ``a``."""
    if l < a:
        return 0.0
    return 0.5 * math.sqrt(a / l**3)


def cond_exp_inv_sqrt_length(c: DistressCoordinates) -> float:
    """``E[L**-0.5 ; L <= b | age a] = (sqrt(a) / 2) (1/a - 1/b)``."""
    return 0.5 * math.sqrt(c.a) * (1.0 / c.a - 1.0 / c.b)


def survival_in_distress(c: DistressCoordinates) -> float:
    """Probability of no default by maturity while in distress: ``sqrt(a / b)``."""
    return math.sqrt(c.a / c.b)


def v_minus_at_default(L: float, b: float) -> float:
    """Left limit of the intensity-discount process at default, ``(1 + L/b) / 2``."""
    if not 0 < L <= b:
        raise ValueError(f"need 0 < L <= b, got L={L}, b={b}")
    return 0.5 * (1.0 + L / b)


def distress_value(c: DistressCoordinates) -> float:
    """``E[exp(-int_t^T lambda) | age a]`` in distress, equal to ``1/2 + a/(2b)``.

    Sum of the two distress terms of the intensity-discount decomposition:
    ``sqrt(a) * cond_exp_inv_sqrt_length(c) + sqrt(a/b) * survival_in_distress(c)``.
    """
    return math.sqrt(c.a) * cond_exp_inv_sqrt_length(c) + math.sqrt(c.a / c.b) * (
        survival_in_distress(c)
    )


def survival_4_12_literal(c: DistressCoordinates, alpha: float) -> float:
    """Distress-phase survival as written in the closed-form survival decomposition.

    Evaluates ``-1 + (1 + a/b) + (alpha/sqrt 2)(sqrt b - alpha/sqrt 2) / b``.
    The last term does not depend on ``a``, so this agrees with
    :func:`survival_in_distress` only at distress onset (``a = alpha**2 / 2``)
    and can exceed 1 later. Kept as a diagnostic; pricing never uses it.
    """
    if c.a < distress_trigger(alpha) * (1 - 1e-12):
        raise ValueError(f"age {c.a} is below the distress trigger {distress_trigger(alpha)}")
    k = alpha / math.sqrt(2.0)
    return -1.0 + (1.0 + c.a / c.b) + k * (math.sqrt(c.b) - k) / c.b

"""Zero-recovery zero-coupon bond prices under deterministic short rates.

The bond pays 1 at maturity ``T`` unless default happens first. Analytic
prices exist at time 0 (through the law of ``tau_alpha``) and while the firm
is in distress (through the excursion-length law). Before distress at
``t > 0`` the price is estimated by simulation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from excursion_credit import montecarlo
from excursion_credit.detection import distress_trigger
from excursion_credit.excursions import DistressCoordinates, survival_in_distress
from excursion_credit.law import TauAlphaLaw, adjustment_expectation, prob_tau_alpha_leq
from excursion_credit.market import MarketState, Phase
from excursion_credit.paths import make_grid


@dataclass(frozen=True, eq=False)
class DiscountCurve:
    """Piecewise-constant short rate: ``rates[i]`` applies from ``breakpoints[i]`` to the next breakpoint.

    The last rate extends to infinity.
    """

    breakpoints: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        r = np.asarray(self.rates, dtype=float)
        if bp.ndim != 1 or bp.size == 0 or bp.shape != r.shape:
            raise ValueError("breakpoints and rates must be 1-d arrays of equal, nonzero length")
        if bp[0] != 0.0:
            raise ValueError("the first breakpoint must be 0")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(r)):
            raise ValueError("rates must be finite")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "rates", r)

    @classmethod
    def flat(cls, rate: float) -> "DiscountCurve":
        return cls(np.array([0.0]), np.array([rate]))

    def integral(self, t: float) -> float:
        """``int_0^t r(u) du``."""
        bp, r = self.breakpoints, self.rates
        ends = np.append(bp[1:], np.inf)
        spans = np.clip(np.minimum(ends, t) - bp, 0.0, None)
        return math.fsum(spans * r)


def discount(curve: DiscountCurve, t: float, T: float) -> float:
    """``exp(-int_t^T r(u) du)``."""
    if t > T:
        raise ValueError(f"need t <= T, got t={t}, T={T}")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return math.exp(-(curve.integral(T) - curve.integral(t)))


class Method(enum.Enum):
    ANALYTIC_T0 = "analytic_t0"
    ANALYTIC_DISTRESS = "analytic_distress"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class PriceQuote:
    """Price of a unit-face zero-recovery bond.

    ``decomposition`` is ``(P(tau_alpha <= T), adjustment)`` for time-0
    analytic quotes, so that ``survival = 1 - P + adjustment``.
    """

    t: float
    T: float
    price: float
    survival: float
    discount: float
    method: Method
    decomposition: Optional[Tuple[float, float]] = None
    std_error: Optional[float] = None

    @property
    def spread(self) -> float:
        """Continuously compounded spread ``-log(price / discount) / (T - t)``."""
        if self.T == self.t or self.survival >= 1.0:
            return 0.0
        if self.survival <= 0:
            return math.inf
        return max(-math.log(self.survival) / (self.T - self.t), 0.0)


def price_t0(alpha: float, T: float, curve: DiscountCurve, law: TauAlphaLaw) -> PriceQuote:
    """Time-0 price ``D(0, T) (1 - (P(tau_alpha <= T) - E[(alpha/sqrt 2)/sqrt(T - g_bar) ; tau_alpha <= T]))``."""
    if abs(law.alpha - alpha) > 1e-12 * alpha:
        raise ValueError(f"law was built for alpha={law.alpha}, not {alpha}")
    if T < 0:
        raise ValueError(f"maturity must be nonnegative, got {T}")
    p = prob_tau_alpha_leq(law, T)
    adj = adjustment_expectation(law, alpha, T)
    survival = min(max(1.0 - (p - adj), 0.0), 1.0)
    df = discount(curve, 0.0, T)
    return PriceQuote(
        t=0.0, T=T, price=df * survival, survival=survival, discount=df,
        method=Method.ANALYTIC_T0, decomposition=(p, adj),
    )


def price_in_distress(
    state: MarketState, alpha: float, T: float, curve: DiscountCurve
) -> PriceQuote:
    """Price while in distress: survival ``sqrt((t - g_bar) / (T - g_bar))``."""
    if state.phase is not Phase.DISTRESS:
        raise ValueError(f"state must be in distress, got {state.phase.value}")
    if state.age < distress_trigger(alpha) * (1 - 1e-12):
        raise ValueError(f"age {state.age} is below the distress trigger for alpha={alpha}")
    if T < state.t:
        raise ValueError(f"maturity {T} precedes t={state.t}")
    survival = survival_in_distress(DistressCoordinates(a=state.age, b=T - state.g_bar))
    df = discount(curve, state.t, T)
    return PriceQuote(
        t=state.t, T=T, price=df * survival, survival=survival, discount=df,
        method=Method.ANALYTIC_DISTRESS,
    )


def price_pre_distress_mc(
    state: MarketState,
    alpha: float,
    T: float,
    curve: DiscountCurve,
    *,
    n_paths: int,
    step: float,
    master_seed: int = 0,
    bridge_correction: bool = True,
    workers: int = 1,
) -> PriceQuote:
    """Simulated price before distress, conditional on the market state at ``state.t``.

    Paths restart at ``state.t`` inside the observed excursion (sign and age),
    so only market-visible information enters.
    """
    if state.phase is not Phase.PRE_DISTRESS:
        raise ValueError(f"state must be pre-distress, got {state.phase.value}")
    if state.sign < 0 and state.age >= distress_trigger(alpha):
        raise ValueError("a negative excursion this old is already in distress")
    if n_paths < 1:
        raise ValueError(f"n_paths must be at least 1, got {n_paths}")
    if T < state.t:
        raise ValueError(f"maturity {T} precedes t={state.t}")
    df = discount(curve, state.t, T)
    remaining = T - state.t
    if remaining <= 0 or (state.sign < 0 and state.age + remaining < distress_trigger(alpha)) or (
        state.sign > 0 and remaining < distress_trigger(alpha)
    ):
        # default needs a negative excursion of age alpha**2/2 first
        return PriceQuote(state.t, T, df, 1.0, df, Method.MONTE_CARLO, std_error=0.0)
    settings = montecarlo.McSettings(
        n_paths=n_paths, grid=make_grid(remaining, step), alpha=alpha,
        master_seed=master_seed, bridge_correction=bridge_correction, workers=workers,
    )
    outcomes = montecarlo.simulate(settings, start_sign=state.sign, start_age=state.age)
    stats = montecarlo.default_stats(outcomes, min(remaining, outcomes.horizon))
    surv = stats.survival
    return PriceQuote(
        t=state.t, T=T, price=df * surv.mean, survival=surv.mean, discount=df,
        method=Method.MONTE_CARLO, std_error=df * surv.std_error,
    )


def term_structure(
    alpha: float, maturities: Sequence[float], curve: DiscountCurve, law: TauAlphaLaw
) -> List[PriceQuote]:
    """Time-0 quotes for increasing ``maturities``."""
    mats = np.asarray(maturities, dtype=float)
    if mats.ndim != 1 or mats.size == 0:
        raise ValueError("maturities must be a nonempty list")
    if np.any(np.diff(mats) <= 0):
        raise ValueError("maturities must be strictly increasing")
    return [price_t0(alpha, float(T), curve, law) for T in mats]


def price_distress_coordinates(
    alpha: float, age: float, span: float, curve: DiscountCurve, t: Optional[float] = None
) -> PriceQuote:
    """Distress price from the excursion age ``a`` and the span ``b = T - g_bar``.

    The excursion is placed so that the valuation time is ``t`` (default
    ``age``, i.e. the excursion started at time 0).
    """
    if t is None:
        t = age
    if span < age:
        raise ValueError(f"span {span} is shorter than the age {age}")
    state = MarketState(t=t, phase=Phase.DISTRESS, g_bar=t - age)
    return price_in_distress(state, alpha, state.g_bar + span, curve)

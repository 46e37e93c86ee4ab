"""Excursion-based credit model: Brownian cash balances default after a long
negative excursion followed by a return to a doubled level.

Modules
-------
paths       grid and Brownian path simulation
detection   zero tracking, distress and default detection
market      sign-filtration view: Azema martingale, intensity, compensator
excursions  excursion-length formulas used in distress
law         Laplace transform of the distress time and its numerical inversion
pricing     zero-recovery bond prices and term structures
montecarlo  batch simulation and analytic-versus-simulation comparisons
"""

from excursion_credit.config import ConfigError, RunConfig, load_config
from excursion_credit.detection import DefaultOutcome, detect_default, distress_trigger, track_zeros
from excursion_credit.excursions import DistressCoordinates, survival_in_distress
from excursion_credit.law import InversionError, TauAlphaLaw, invert_cdf, laplace_tau_alpha, psi
from excursion_credit.market import MarketState, Phase, azema_path, compensator, intensity
from excursion_credit.montecarlo import McEstimate, McSettings, simulate
from excursion_credit.paths import BrownianPath, TimeGrid, make_grid, simulate_path
from excursion_credit.pricing import (
    DiscountCurve,
    PriceQuote,
    price_in_distress,
    price_pre_distress_mc,
    price_t0,
    term_structure,
)

__version__ = "0.1.0"

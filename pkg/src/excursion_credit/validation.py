"""Analytic-versus-simulation report behind the ``validate`` command."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

from excursion_credit import montecarlo
from excursion_credit.config import RunConfig
from excursion_credit.detection import distress_trigger
from excursion_credit.law import (
    TauAlphaLaw,
    adjustment_expectation,
    invert_cdf,
    laplace_tau_alpha,
    prob_tau_alpha_leq,
)
from excursion_credit.paths import make_grid

CDF_TOLERANCE = 0.01
HAZARD_RELATIVE_TOLERANCE = 0.10
HAZARD_MIN_SAMPLES = 1000

PASS, FAIL, SKIP = "PASS", "FAIL", "SKIP"


@dataclass(frozen=True)
class ReportRow:
    """One line of the report.

    ``z`` is the gap in standard errors (NaN when no error is defined).
    Rows marked SKIP carry too little data to judge.
    """

    quantity: str
    analytic: float
    mc_mean: float
    mc_se: float
    allowance: float
    z: float
    verdict: str


def _row(name: str, analytic: float, est: montecarlo.McEstimate, allowance: float) -> ReportRow:
    v = montecarlo.compare(analytic, est, allowance)
    return ReportRow(name, analytic, est.mean, est.std_error, allowance, v.z,
                     PASS if v.passed else FAIL)


def build_law(cfg: RunConfig) -> TauAlphaLaw:
    t_max = max(cfg.horizon, cfg.maturities[-1], cfg.cdf_check_max, 2 * distress_trigger(cfg.alpha))
    return invert_cdf(cfg.alpha, terms=cfg.inversion_terms, t_max=t_max)


def settings_for(cfg: RunConfig, horizon: float) -> montecarlo.McSettings:
    return montecarlo.McSettings(
        n_paths=cfg.n_paths, grid=make_grid(horizon, cfg.step), alpha=cfg.alpha,
        master_seed=cfg.master_seed, bridge_correction=cfg.bridge_correction,
        workers=cfg.workers,
    )


def default_rows(cfg: RunConfig, law: TauAlphaLaw, outcomes) -> List[ReportRow]:
    rows = []
    for T in cfg.maturities:
        if T > outcomes.horizon:
            continue
        stats = montecarlo.default_stats(outcomes, T)
        p = prob_tau_alpha_leq(law, T)
        adj = adjustment_expectation(law, cfg.alpha, T)
        rows.append(_row(f"prob_tau_alpha[T={T:g}]", p, stats.prob_tau_alpha,
                         montecarlo.DEFAULT_ALLOWANCE))
        rows.append(_row(f"adjustment[T={T:g}]", adj, stats.adjustment, montecarlo.DEFAULT_ALLOWANCE))
        rows.append(_row(f"survival[T={T:g}]", 1.0 - (p - adj), stats.survival,
                         montecarlo.DEFAULT_ALLOWANCE))
    # the compensated default indicator is an exact martingale: no allowance
    rows.append(_row(f"doob_meyer[T={outcomes.horizon:g}]", 0.0,
                     montecarlo.doob_meyer(outcomes, outcomes.horizon), 0.0))
    return rows


def hazard_rows(cfg: RunConfig, outcomes) -> List[ReportRow]:
    if outcomes.horizon <= distress_trigger(cfg.alpha):
        return []
    edges = montecarlo.geometric_age_edges(cfg.alpha, outcomes.horizon, cfg.hazard_bins)
    rows = []
    for b in montecarlo.hazard_profile(outcomes, edges):
        allowance = HAZARD_RELATIVE_TOLERANCE * b.target
        gap = b.target - b.rate
        if b.at_risk_samples < HAZARD_MIN_SAMPLES or b.empty:
            verdict = SKIP
        else:
            verdict = PASS if abs(gap) <= allowance else FAIL
        z = gap / b.std_error if b.std_error > 0 else math.nan
        rows.append(ReportRow(f"hazard[age={b.age_lo:.6g}..{b.age_hi:.6g}]", b.target, b.rate,
                              b.std_error, allowance, z, verdict))
    return rows


def distress_time_rows(cfg: RunConfig, law: TauAlphaLaw, outcomes) -> List[ReportRow]:
    rows = []
    for theta in cfg.laplace_thetas:
        est = montecarlo.laplace_estimate(outcomes, theta).estimate
        rows.append(_row(f"laplace[theta={theta:g}]", float(laplace_tau_alpha(theta, cfg.alpha)),
                         est, montecarlo.DEFAULT_ALLOWANCE))
    t_hi = min(cfg.cdf_check_max, outcomes.horizon)
    dist = montecarlo.empirical_cdf_distance(law, outcomes.tau_alpha, distress_trigger(cfg.alpha), t_hi)
    rows.append(ReportRow(f"cdf_sup_distance[t<={t_hi:g}]", 0.0, dist, math.nan, CDF_TOLERANCE,
                          math.nan, PASS if dist <= CDF_TOLERANCE else FAIL))
    rows.append(ReportRow("cdf_at_trigger", 0.0, float(law.cdf[0]), math.nan, 0.0, math.nan,
                          PASS if law.cdf[0] == 0.0 else FAIL))
    return rows


def run_validation(cfg: RunConfig) -> List[ReportRow]:
    """Full report: default statistics, compensator, hazard, Laplace transform and CDF."""
    law = build_law(cfg)
    outcomes = montecarlo.simulate(settings_for(cfg, cfg.horizon))
    rows = default_rows(cfg, law, outcomes) + hazard_rows(cfg, outcomes)
    distress_run = montecarlo.simulate(settings_for(cfg, cfg.laplace_horizon), stop_at="tau_alpha")
    return rows + distress_time_rows(cfg, law, distress_run)


def all_passed(rows: List[ReportRow]) -> bool:
    return all(r.verdict != FAIL for r in rows)

"""Small worked examples with exact or closed-form answers, one per behavior."""

import math

import numpy as np
import pytest

from excursion_credit import montecarlo as mc
from excursion_credit.detection import DefaultOutcome, detect_default, reflect_to_Y, track_zeros
from excursion_credit.excursions import (
    DistressCoordinates,
    chung_survival,
    cond_exp_inv_sqrt_length,
    survival_4_12_literal,
    survival_in_distress,
    v_minus_at_default,
)
from excursion_credit.law import invert_cdf, laplace_tau_alpha, psi
from excursion_credit.market import MarketState, Phase, azema_path, compensator, intensity
from excursion_credit.paths import BrownianPath, bridge_zero_crossing_probability, make_grid, simulate_path
from excursion_credit.pricing import (
    DiscountCurve,
    discount,
    price_distress_coordinates,
    price_in_distress,
    price_pre_distress_mc,
    price_t0,
    term_structure,
)


# grid and paths

def test_grid_examples():
    g = make_grid(1.0, 0.001)
    assert g.count == 1001 and g.times[-1] == pytest.approx(1.0)
    g = make_grid(1.0, 1.0)
    assert g.times.tolist() == [0.0, 1.0]
    with pytest.raises(ValueError):
        make_grid(0.0, 0.1)


def test_increment_variance_over_many_paths():
    grid = make_grid(1.0, 0.01)
    inc = np.concatenate([np.diff(simulate_path(grid, s).values) for s in range(100_000)])
    assert inc.var() == pytest.approx(0.01, rel=0.01)
    assert abs(inc.mean()) < 3 * math.sqrt(0.01 / inc.size)


def test_bridge_probability_examples():
    assert bridge_zero_crossing_probability(1.0, -1.0, 0.01) == 1.0
    assert bridge_zero_crossing_probability(0.1, 0.1, 0.01) == pytest.approx(math.exp(-2))
    assert bridge_zero_crossing_probability(3.0, 3.0, 0.01) == 0.0


# zero tracking and detection

def test_zero_trace_examples():
    grid = make_grid(1.0, 0.1)
    up = np.linspace(0, 1, grid.count)
    tr = track_zeros(BrownianPath(grid, up))
    assert np.all(tr.last_zero == 0.0)
    np.testing.assert_allclose(tr.age, grid.times)

    vals = np.ones(grid.count)
    vals[0], vals[5:] = 0.0, -1.0  # +1 at 0.4, -1 at 0.5
    tr = track_zeros(BrownianPath(grid, vals))
    assert tr.last_zero[5] == pytest.approx(0.45)

    vals = np.ones(grid.count)
    vals[0], vals[3] = 0.0, 0.0
    tr = track_zeros(BrownianPath(grid, vals))
    assert tr.last_zero[3] == pytest.approx(0.3) and tr.sign[3] == -1


def test_trigger_beyond_horizon_censors_every_path():
    o = mc.simulate(mc.McSettings(2000, make_grid(0.4, 1e-3), alpha=1.0))
    assert np.all(np.isnan(o.tau_alpha)) and np.all(np.isnan(o.tau))
    assert mc.default_stats(o, 0.4).prob_tau_alpha.mean == 0.0


def test_return_to_zero_after_distress_is_not_default(hand_path):
    vals = hand_path.values.copy()
    vals[9:] = [-0.5, 0.0, 0.5, 1.0]  # back above zero, never reaching -2
    out = detect_default(BrownianPath(hand_path.grid, vals), math.sqrt(0.4))
    assert out.tau_alpha == pytest.approx(0.4) and out.tau is None


def test_no_distress_leaves_path_unreflected():
    grid = make_grid(1.0, 0.1)
    p = BrownianPath(grid, np.linspace(0, 1, grid.count))
    out = detect_default(p, 0.5)
    np.testing.assert_array_equal(reflect_to_Y(p, out).values, p.values)


# market view

def test_azema_values():
    grid = make_grid(2.0, 0.5)
    up = BrownianPath(grid, np.array([0.0, 1.0, 1.0, 1.0, 1.0]))
    assert azema_path(up, track_zeros(up)).values[1] == pytest.approx(1.0)
    down = BrownianPath(grid, np.array([0.0, -1.0, -1.0, -1.0, -1.0]))
    m = azema_path(down, track_zeros(down))
    assert m.values[4] == pytest.approx(-2.0) and m.values[0] == 0.0


def test_intensity_and_compensator_examples():
    assert intensity(MarketState(1.0, Phase.DISTRESS, 0.75)) == 2.0
    assert intensity(MarketState(1.0, Phase.PRE_DISTRESS, 0.1)) == 0.0
    assert intensity(MarketState(0.5, Phase.DISTRESS, 0.0)) == 1.0
    out = DefaultOutcome(tau_alpha=0.5, level_at_tau_alpha=-1.0, g_bar_at_tau_alpha=0.0, tau=None, horizon=2.0)
    assert compensator(out, 1.0) == pytest.approx(0.5 * math.log(2))
    assert compensator(out, 0.4) == 0.0


# excursion formulas

def test_excursion_examples():
    assert chung_survival(1, 4) == 0.5 and chung_survival(2, 2) == 1.0
    assert cond_exp_inv_sqrt_length(DistressCoordinates(1, 4)) == pytest.approx(0.375)
    assert cond_exp_inv_sqrt_length(DistressCoordinates(2, 2)) == 0.0
    assert cond_exp_inv_sqrt_length(DistressCoordinates(1.5, 1e12)) == pytest.approx(1 / (2 * math.sqrt(1.5)))
    assert survival_in_distress(DistressCoordinates(1, 4)) == 0.5
    assert survival_in_distress(DistressCoordinates(3, 3)) == 1.0
    assert v_minus_at_default(4, 4) == 1.0 and v_minus_at_default(1e-12, 4) == pytest.approx(0.5)
    assert v_minus_at_default(2, 4) == 0.75


def test_literal_survival_examples():
    alpha = 1.0
    assert 0 < survival_4_12_literal(DistressCoordinates(0.5, 1e12), alpha) < 1e-5
    b = 2.0
    lit = survival_4_12_literal(DistressCoordinates(b, b), alpha)
    assert lit == pytest.approx(1 + (alpha / math.sqrt(2)) / math.sqrt(b) - alpha**2 / (2 * b))
    assert lit > 1


# law

def test_transform_examples():
    assert laplace_tau_alpha(0.0, 0.7) == 1.0
    assert laplace_tau_alpha(0.5, math.sqrt(2)) == pytest.approx(1 / psi(1.0), rel=1e-12)
    assert laplace_tau_alpha(0.5, math.sqrt(2)) == pytest.approx(0.2234, abs=1e-4)
    assert 0 < psi(-10.0) < psi(-9.0) < 0.02


def test_cdf_limits():
    law = invert_cdf(1.0, t_max=10.0)
    assert law.cdf[0] == 0.0
    assert abs(law.cdf_at([0.5 + 1e-12])[0]) < 1e-3
    # the tail is heavy: P(tau_alpha > t) ~ alpha / sqrt(2 t), so the CDF is
    # only near 1 for t in the thousands of alpha**2
    for alpha in (0.5, 1.0):
        t = 1e4 * alpha**2
        assert invert_cdf(alpha, t_max=t).cdf_at([t])[0] >= 0.99
        assert invert_cdf(alpha, t_max=50 * alpha**2).cdf_at([50 * alpha**2])[0] == pytest.approx(0.90, abs=0.01)


# pricing

def test_discount_examples():
    assert discount(DiscountCurve.flat(0.0), 0, 3) == 1.0
    assert discount(DiscountCurve.flat(0.05), 2, 3) == pytest.approx(math.exp(-0.05))
    assert discount(DiscountCurve([0, 0.5], [0.02, 0.04]), 0, 1) == pytest.approx(math.exp(-0.03))


def test_price_examples():
    flat0 = DiscountCurve.flat(0.0)
    law = invert_cdf(1.0, t_max=1e4)
    assert price_t0(1.0, 0.4, flat0, law).price == 1.0
    # survival decays like 1 / sqrt(T): small only for very large T
    assert price_t0(1.0, 1e4, flat0, law).survival < 0.02
    assert price_t0(1.0, 50.0, flat0, law).survival == pytest.approx(0.198, abs=0.01)
    state = MarketState(t=1.0, phase=Phase.DISTRESS, g_bar=0.0)
    assert price_in_distress(state, 1.0, 1.0, flat0).price == 1.0
    assert price_distress_coordinates(1.0, 1.0, 4.0, flat0).price == pytest.approx(0.5)
    spreads = [q.spread for q in term_structure(1.0, [0.1, 0.2, 0.45], DiscountCurve.flat(0.03), law)]
    assert spreads == [0.0, 0.0, 0.0]
    fresh = MarketState(t=0.0, phase=Phase.PRE_DISTRESS, g_bar=0.0)
    q = price_pre_distress_mc(fresh, 1.0, 0.4, flat0, n_paths=100, step=1e-3)
    assert q.price == 1.0 and q.std_error == 0.0
    with pytest.raises(ValueError):
        price_pre_distress_mc(fresh, 1.0, 2.0, flat0, n_paths=0, step=1e-3)


# simulation oracle

def test_laplace_examples():
    o = mc.simulate(mc.McSettings(20_000, make_grid(20.0, 1e-3), 1.0, master_seed=2), stop_at="tau_alpha")
    assert mc.laplace_estimate(o, 1e4).estimate.mean < 1e-100
    assert mc.laplace_estimate(o, 0.0).estimate.mean == 1.0
    est = mc.laplace_estimate(o, 1.0).estimate
    assert mc.compare(1 / psi(1.0), est).passed


def test_hazard_examples():
    o = mc.simulate(mc.McSettings(20_000, make_grid(1.0, 1e-3), 0.5, master_seed=6))
    below, around = mc.hazard_profile(o, [0.05, 0.1, 0.2, 0.3])[0], mc.hazard_profile(o, [0.2, 0.3])[0]
    assert below.exposure == 0.0 and below.empty
    assert around.midpoint == 0.25 and around.at_risk_samples >= 1000
    assert around.rate == pytest.approx(2.0, rel=0.10)


def test_compare_examples():
    e = mc.McEstimate(0.4, 0.01, 1000)
    assert mc.compare(0.4, e).passed
    assert not mc.compare(0.5, e, 0.0).passed

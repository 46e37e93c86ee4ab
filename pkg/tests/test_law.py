import math

import numpy as np
import pytest
from scipy import integrate

from excursion_credit import law as law_mod
from excursion_credit.law import (
    InversionError,
    adjustment_expectation,
    invert_cdf,
    laplace_tau_alpha,
    prob_tau_alpha_leq,
    psi,
    raw_cdf,
    stehfest_weights,
)

# CDF of tau_alpha by Talbot inversion in mpmath of the transform of
# tau_alpha - alpha**2/2, converged across degrees (40 to 350, up to 120
# digits); points close to alpha**2/2 converge slowly and keep 6-7 digits
ORACLE_CDF = {
    1.0: {0.6: 0.142353, 1.0: 0.3183099, 2.0: 0.508964118853,
          5.0: 0.686022832448, 10.0: 0.777186828537},
    0.5: {0.2: 0.2465619, 1.0: 0.649595993451},
}


def _psi_quad(z):
    val, _ = integrate.quad(lambda x: x * math.exp(z * x - x * x / 2), 0, math.inf)
    return val


@pytest.mark.parametrize("z", [-35.0, -20.0, -5.0, -1.0, 0.0, 0.3, 1.0, 4.0, 10.0])
def test_psi_matches_quadrature(z):
    assert psi(z) == pytest.approx(_psi_quad(z), rel=1e-9)


def test_psi_reference_values():
    assert psi(1.0) == pytest.approx(4.477051811703694, rel=1e-14)
    assert psi(0.0) == 1.0
    assert psi(-2.0) == pytest.approx(0.157261541423891, rel=1e-12)


def test_psi_far_left_uses_series():
    z = np.array([-40.0, -100.0, -1e4])
    np.testing.assert_allclose(psi(z), 1 / z**2 - 3 / z**4 + 15 / z**6 - 105 / z**8, rtol=1e-9)
    assert np.all(np.diff(psi(np.linspace(-60, 5, 500))) > 0)


def test_psi_overflow_guard():
    assert np.isfinite(psi(37.0))
    with pytest.raises((OverflowError, ValueError)):
        psi(40.0)


def test_laplace_transform():
    assert laplace_tau_alpha(0.0, 1.0) == 1.0
    assert laplace_tau_alpha(1.0, 1.0) == pytest.approx(1 / 4.477051811703694)
    # stays finite far beyond where psi overflows
    big = laplace_tau_alpha(1e6, 1.0)
    assert 0 <= big < 1e-100
    with pytest.raises(ValueError):
        laplace_tau_alpha(-1.0, 1.0)


def test_stehfest_weights():
    for n in (4, 8, 12, 16, 20):
        assert abs(stehfest_weights(n).sum()) < 1e-6 * np.abs(stehfest_weights(n)).max()
    np.testing.assert_array_equal(stehfest_weights(4), [-2, 26, -48, 24])


@pytest.mark.parametrize("terms,extended", [(3, False), (2, False), (22, True), (18, False)])
def test_terms_validation(terms, extended):
    with pytest.raises(ValueError):
        raw_cdf([1.0], 1.0, terms, extended)


@pytest.mark.parametrize("alpha", [1.0, 0.5])
def test_inversion_against_oracle(alpha):
    law = invert_cdf(alpha, t_max=10.0)
    ts = sorted(ORACLE_CDF[alpha])
    np.testing.assert_allclose(law.cdf_at(ts), [ORACLE_CDF[alpha][t] for t in ts], atol=3e-4)
    np.testing.assert_allclose(
        [prob_tau_alpha_leq(law, t) for t in ts], [ORACLE_CDF[alpha][t] for t in ts], atol=5e-4
    )


def test_extended_precision_agrees():
    ts = [0.6, 2.0, 10.0]
    hi = raw_cdf(ts, 1.0, 18, extended_precision=True)
    np.testing.assert_allclose(hi, [ORACLE_CDF[1.0][t] for t in ts], atol=1e-5)


def test_law_shape():
    law = invert_cdf(1.0, t_max=20.0)
    assert law.t_grid[0] == 0.5 and law.cdf[0] == 0.0
    assert np.all(np.diff(law.cdf) >= 0) and law.cdf[-1] <= 1.0
    assert law.diagnostics["max_nonmonotonicity"] <= 1e-3
    assert prob_tau_alpha_leq(law, 0.3) == 0.0
    with pytest.raises(ValueError):
        prob_tau_alpha_leq(law, 25.0)


def test_heavy_tail():
    # P(tau_alpha > t) ~ alpha / sqrt(2 t)
    for alpha in (0.5, 1.0):
        t = 1e4 * alpha**2
        tail = 1 - invert_cdf(alpha, t_max=t).cdf_at([t])[0]
        assert tail == pytest.approx(alpha / math.sqrt(2 * t), rel=0.01)


def test_grid_validation():
    with pytest.raises(ValueError, match="start"):
        invert_cdf(1.0, t_grid=[0.4, 1.0])
    with pytest.raises(ValueError):
        invert_cdf(1.0, t_grid=[0.5, 1.0, 0.9])


def test_inversion_error_carries_diagnostics(monkeypatch):
    def bumpy(times, alpha, terms=12, extended_precision=False):
        out = np.linspace(0, 0.5, len(times))
        out[len(times) // 2] = 0.0
        return out

    monkeypatch.setattr(law_mod, "raw_cdf", bumpy)
    with pytest.raises(InversionError) as err:
        invert_cdf(1.0, t_max=5.0)
    assert err.value.diagnostics["max_nonmonotonicity"] > 0.2


def test_adjustment_expectation():
    law = invert_cdf(0.5, t_max=2.0)
    assert adjustment_expectation(law, 0.5, 1.0) == pytest.approx(0.2737892085, abs=3e-4)
    assert adjustment_expectation(law, 0.5, 0.1) == 0.0
    # at the trigger itself the integrand tends to alpha / sqrt(2 alpha^2 / 2) = 1
    small = adjustment_expectation(law, 0.5, 0.125 + 1e-6)
    assert small == pytest.approx(law.cdf_at([0.125 + 1e-6])[0], rel=0.01)


def test_probability_reads_stored_grid():
    law = invert_cdf(1.0, t_max=5.0)
    for k in (1, 17, 200, len(law.t_grid) - 1):
        assert prob_tau_alpha_leq(law, law.t_grid[k]) == law.cdf[k]
    mid = 0.5 * (law.t_grid[50] + law.t_grid[51])
    assert prob_tau_alpha_leq(law, mid) == pytest.approx(0.5 * (law.cdf[50] + law.cdf[51]))

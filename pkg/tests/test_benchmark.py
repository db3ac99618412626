import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revdoor.benchmark import (
    ConditionalBetaRegime,
    SignalParams,
    benchmark_point,
    conditional_beta,
    deflate_to_contractual,
    excess_return_eta,
    modified_excess_return,
    no_signal_stock_volatility,
    observed_benchmark,
    signal_volatility,
    stock_volatility_with_signal,
    true_benchmark,
    true_benchmark_product_form,
)
from revdoor.errors import DomainError, InvalidInputError, NotConfiguredError
from revdoor.paths import MarketParams

M = MarketParams(sigma_s=0.2, sigma_i=0.15, rho=0.3, r=0.05, s0=100.0)


def test_eta_hand_value():
    # (0.05 + 0.5*0.3*0.2*0.15) * (1 - 0.8)
    assert excess_return_eta(M, 0.8) == pytest.approx(0.0109, rel=1e-14)


def test_observed_benchmark_hand_value():
    h = observed_benchmark(M, 0.8, 1.1, 1.0)
    assert h == pytest.approx(100 * 1.1**0.8 * math.exp(0.0109), rel=1e-14)
    assert h == pytest.approx(109.10583013165558, rel=1e-14)


def test_observed_benchmark_at_start_is_s0():
    assert observed_benchmark(M, 0.8, 1.0, 0.0) == 100.0


def test_beta_vw_default_from_market():
    assert SignalParams().resolved_beta_vw(M) == pytest.approx(0.3 * 0.2 / 0.15)
    assert SignalParams(beta_vw=1.3).resolved_beta_vw(M) == 1.3


def test_true_benchmark_reduces_to_observed_without_signal():
    sig = SignalParams(beta_vw=0.8, beta_labor=0.0)
    ratio = np.linspace(0.5, 2.0, 7)
    t = np.linspace(0.0, 3.0, 7)
    assert np.array_equal(true_benchmark(M, sig, ratio, t), observed_benchmark(M, 0.8, ratio, t))


def test_true_benchmark_hand_value():
    sig = SignalParams(beta_vw=0.8, beta_labor=0.4, b_labor=0.5)  # c = 0.2
    expected = 100 * 1.1**1.0 * math.exp((0.0109 + 0.2) * 2.0)
    assert true_benchmark(M, sig, 1.1, 2.0) == pytest.approx(expected, rel=1e-13)


def test_modified_excess_return():
    sig = SignalParams(beta_labor=0.4, b_labor=0.5)
    assert modified_excess_return(0.01, sig) == pytest.approx(0.21)


def test_deflate_inverts_true_benchmark():
    sig = SignalParams(beta_vw=0.8, beta_labor=0.6, b_labor=0.7)
    ratio = np.array([0.7, 1.0, 1.4])
    t = np.array([0.1, 0.5, 1.0])
    back = deflate_to_contractual(true_benchmark(M, sig, ratio, t), sig, ratio, t)
    np.testing.assert_allclose(back, observed_benchmark(M, 0.8, ratio, t), rtol=1e-13)


def test_benchmark_point_fields():
    sig = SignalParams(beta_vw=0.8, beta_labor=0.4)
    bp = benchmark_point(M, sig, 1.1, 1.0)
    assert bp.eta == pytest.approx(0.0109)
    assert bp.eta_hat == pytest.approx(0.2109)
    assert bp.h_true > bp.h_observed


@pytest.mark.parametrize("ratio,t", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.1), (math.nan, 1.0)])
def test_domain_errors(ratio, t):
    with pytest.raises(DomainError):
        observed_benchmark(M, 0.8, ratio, t)


def test_invalid_signal_params():
    with pytest.raises(InvalidInputError):
        SignalParams(beta_labor=-0.1)
    with pytest.raises(InvalidInputError):
        SignalParams(kane_delta=-1.0)
    with pytest.raises(InvalidInputError):
        SignalParams(b_labor=math.inf)


class TestKanePenalty:
    def test_full_penalty_cancels_signal(self):
        sig = SignalParams(beta_labor=0.8, b_labor=0.5, kane_delta=0.5)
        assert sig.signal_term == 0.0
        assert signal_volatility(0.2, sig, 0.18) == 0.2

    def test_excess_penalty_clamped(self):
        assert SignalParams(beta_labor=0.8, b_labor=0.5, kane_delta=0.9).effective_loading == 0.0

    def test_negative_loading_opt_in(self):
        sig = SignalParams(beta_labor=1.0, b_labor=0.5, kane_delta=0.9, allow_negative_loading=True)
        assert sig.effective_loading == pytest.approx(-0.4)


class TestConditionalBeta:
    reg = ConditionalBetaRegime(b0=0.3, b1=0.4, beta_star=0.5)

    def test_low_and_high_type(self):
        assert conditional_beta(SignalParams(beta_labor=0.4, regime=self.reg)) == pytest.approx(0.3 * 0.4)
        assert conditional_beta(SignalParams(beta_labor=0.6, regime=self.reg)) == pytest.approx(0.7 * 0.6)

    def test_boundary_is_low_type(self):
        assert conditional_beta(SignalParams(beta_labor=0.5, regime=self.reg)) == pytest.approx(0.15)

    def test_requires_regime(self):
        with pytest.raises(NotConfiguredError):
            conditional_beta(SignalParams(beta_labor=0.4))


def test_volatility_hand_values():
    sig = SignalParams(beta_labor=0.4, b_labor=0.5)
    assert signal_volatility(0.2, sig, 0.15) == pytest.approx(math.sqrt(0.0409), rel=1e-15)
    assert stock_volatility_with_signal(0.2, 0.05, sig, 0.15) == pytest.approx(math.sqrt(0.0434), rel=1e-15)
    assert no_signal_stock_volatility(0.2, 0.05) == pytest.approx(math.sqrt(0.0425), rel=1e-15)


def test_zero_signal_stock_volatility_matches_baseline():
    sig = SignalParams(beta_labor=0.0)
    assert stock_volatility_with_signal(0.3, 0.1, sig, 0.2) == no_signal_stock_volatility(0.3, 0.1)


@settings(max_examples=200, deadline=None)
@given(
    beta_labor=st.floats(0.0, 3.0),
    b_labor=st.floats(0.0, 2.0),
    sigma_h=st.floats(0.0, 1.0),
    sigma_i=st.floats(0.0, 1.0),
)
def test_signal_never_lowers_volatility(beta_labor, b_labor, sigma_h, sigma_i):
    sig = SignalParams(beta_labor=beta_labor, b_labor=b_labor)
    assert signal_volatility(sigma_h, sig, sigma_i) >= sigma_h


@settings(max_examples=200, deadline=None)
@given(
    beta_vw=st.floats(-1.0, 2.5),
    beta_labor=st.floats(0.0, 2.0),
    b_labor=st.floats(0.0, 1.5),
    ratio=st.floats(0.3, 3.0),
    t=st.floats(0.0, 5.0),
)
def test_direct_and_product_form_agree(beta_vw, beta_labor, b_labor, ratio, t):
    sig = SignalParams(beta_vw=beta_vw, beta_labor=beta_labor, b_labor=b_labor)
    a = true_benchmark(M, sig, ratio, t)
    b = true_benchmark_product_form(M, sig, ratio, t)
    assert abs(a - b) <= 1e-12 * abs(a)

import math

import pytest

from spectrum_auction import (
    CertificationFailed,
    NoRootInInterval,
    RngStream,
)
from spectrum_auction.oracle import (
    best_response_check,
    lte_payoffs_for_types,
    mc_expected_payoff,
    mc_expected_payment,
    mutated_abstain_in_cap_band,
    mutated_cap_bid_past_threshold,
    mutated_mid_always_cap,
    sample_type_matrix,
    uniform_k2_mid_threshold,
    uniform_k2_standard_threshold,
)
from spectrum_auction.provider import expected_payoff


class TestQuadraticThresholds:
    def test_standard_root(self, market_uniform_k2):
        # 0.15 r^2 - 130 r + 15000: discriminant 7900
        root = uniform_k2_standard_threshold(market_uniform_k2, 100.0)
        assert root == pytest.approx(137.0601860894804, rel=1e-12)
        disc = 130.0**2 - 4 * 0.15 * 15000.0
        assert disc == pytest.approx(7900.0, abs=1e-9)
        assert root == pytest.approx((130.0 - math.sqrt(disc)) / 0.3, rel=1e-12)

    def test_mid_root(self, market_uniform_k2):
        # discriminant 11425 at c=40
        root = uniform_k2_mid_threshold(market_uniform_k2, 40.0)
        assert root == pytest.approx(60.374027892800846, rel=1e-12)
        a, b, c0 = 0.15, -40.0 / 2 + 25.0 - 130.0, 200.0 * 40 - 40 * 25.0
        assert b * b - 4 * a * c0 == pytest.approx(11425.0, abs=1e-9)

    def test_mid_root_at_low_boundary(self, market_uniform_k2):
        # at c = L = 32.5 the residual vanishes exactly at r_min
        assert uniform_k2_mid_threshold(market_uniform_k2, 32.5) == pytest.approx(
            50.0, abs=1e-9
        )

    def test_requires_uniform_k2(self, market_k4):
        with pytest.raises(ValueError):
            uniform_k2_standard_threshold(market_k4, 55.0)

    def test_no_root_signals_inconsistency(self, market_uniform_k2):
        # a reserve outside the standard regime has no admissible root
        with pytest.raises(NoRootInInterval):
            uniform_k2_standard_threshold(market_uniform_k2, 250.0)


class TestMonteCarloEstimators:
    def test_low_regime_zero_variance(self, market_k4):
        mean, se = mc_expected_payoff(market_k4, 30.0, 5000, RngStream(0, 0))
        assert mean == market_k4.delta_lte * market_k4.r_lte
        assert se == 0.0

    def test_standard_matches_closed_form(self, market_k4):
        mean, se = mc_expected_payoff(market_k4, 55.0, 250_000, RngStream(1, 0))
        assert abs(mean - expected_payoff(market_k4, 55.0)) < 3 * se

    def test_mid_matches_closed_form(self, market_k4):
        mean, se = mc_expected_payoff(market_k4, 49.4, 250_000, RngStream(2, 0))
        assert abs(mean - expected_payoff(market_k4, 49.4)) < 3 * se

    def test_payment_estimator_sane(self, market_k4):
        mean, se = mc_expected_payment(market_k4, 55.0, 100_000, RngStream(3, 0))
        assert 0.0 < mean < 55.0
        assert se > 0.0

    def test_payoff_matrix_shape(self, market_k4):
        pool = sample_type_matrix(market_k4, 1000, RngStream(4, 0))
        assert pool.shape == (1000, 4)
        pays = lte_payoffs_for_types(market_k4, 55.0, pool)
        assert pays.shape == (1000,)


class TestBestResponse:
    GRID = dict(type_grid=21, bid_grid=41, samples=20_000)

    def test_certifies_standard_regime(self, market_k4):
        report = best_response_check(market_k4, 55.0, rng=RngStream(5, 0), **self.GRID)
        assert report.certified
        assert report.max_gain <= report.epsilon + 1e-12

    def test_certifies_mid_regime(self, market_k4):
        assert best_response_check(market_k4, 49.4, rng=RngStream(5, 1), **self.GRID).certified

    def test_certifies_low_regime(self, market_k4):
        assert best_response_check(market_k4, 30.0, rng=RngStream(5, 2), **self.GRID).certified

    def test_certifies_high_regime_truthful(self, market_k4):
        assert best_response_check(market_k4, 250.0, rng=RngStream(5, 3), **self.GRID).certified

    def test_detects_abstain_mutation(self, market_k4):
        with pytest.raises(CertificationFailed) as err:
            best_response_check(
                market_k4, 55.0, rng=RngStream(5, 4),
                strategy=mutated_abstain_in_cap_band(market_k4, 55.0), **self.GRID
            )
        # a type inside the cap band gains by switching to a numeric bid
        assert 55.0 < err.value.bidder_type
        assert err.value.gain > err.value.epsilon

    def test_detects_overbid_mutation(self, market_k4):
        with pytest.raises(CertificationFailed):
            best_response_check(
                market_k4, 55.0, rng=RngStream(5, 5),
                strategy=mutated_cap_bid_past_threshold(market_k4, 55.0), **self.GRID
            )

    def test_detects_mid_mutation(self, market_k4):
        with pytest.raises(CertificationFailed):
            best_response_check(
                market_k4, 49.4, rng=RngStream(5, 6),
                strategy=mutated_mid_always_cap(market_k4, 49.4), **self.GRID
            )

    def test_mutation_factories_check_regime(self, market_k4):
        with pytest.raises(ValueError):
            mutated_abstain_in_cap_band(market_k4, 45.0)
        with pytest.raises(ValueError):
            mutated_mid_always_cap(market_k4, 55.0)

    def test_uniform_market_certifies(self, market_uniform_k2):
        report = best_response_check(
            market_uniform_k2, 100.0, rng=RngStream(5, 7), **self.GRID
        )
        assert report.certified

import math

import pytest

from core.errors import DegenerateError, ParameterError, UnsupportedConeError
from market.params import (
    ConeKind,
    ConeSpec,
    MarketParams,
    ThetaSchedule,
    derived_constants,
    project_theta_hat,
)


class TestMarketParams:
    def test_theta_is_sharpe_ratio(self, market):
        assert market.theta == pytest.approx(0.25, rel=1e-15)
        assert market.excess_return == pytest.approx(0.05, rel=1e-15)

    @pytest.mark.parametrize("kwargs, message", [
        ({"r": 0.05, "mu": 0.1, "sigma": 0.0}, "sigma must be positive"),
        ({"r": 0.0, "mu": 0.1, "sigma": 0.2}, "r must be positive"),
    ])
    def test_rejects_invalid_parameters(self, kwargs, message):
        with pytest.raises(ParameterError, match=message):
            MarketParams(**kwargs)

    def test_from_projection_keeps_sharpe_magnitude(self):
        market = MarketParams.from_projection(0.05, 0.2, [0.15, 0.2])
        assert market.theta == pytest.approx(0.25, rel=1e-14)


class TestDerivedConstants:
    def test_power_case(self, market):
        dc = derived_constants(market, -1.0)
        assert dc.alpha == pytest.approx(1.3, rel=1e-14)
        assert dc.a == pytest.approx(0.1767766952966369, rel=1e-14)
        assert dc.beta == pytest.approx(-0.0528125, rel=1e-13)
        assert dc.lam == pytest.approx(0.1125, rel=1e-14)

    def test_quartic_case(self, market):
        assert derived_constants(market, -3.0).lam == pytest.approx(0.525, rel=1e-14)

    def test_log_case(self, market):
        assert derived_constants(market, 0.0).lam == 0.0

    @pytest.mark.parametrize("q", [-0.5, -1.0, -3.0, -7.5])
    def test_lambda_beta_identity(self, market, q):
        dc = derived_constants(market, q)
        assert dc.lam > 0 > dc.beta
        assert (dc.alpha - q) ** 2 * dc.a ** 2 == pytest.approx(dc.lam - dc.beta, rel=1e-13)
        assert dc.beta == pytest.approx(-(dc.alpha * dc.a) ** 2, rel=1e-15)

    def test_lambda_of_matches_direct_formula(self, market):
        dc = derived_constants(market, -1.0)
        assert dc.lambda_of(-3.0) == pytest.approx(derived_constants(market, -3.0).lam, rel=1e-13)

    def test_rejects_q_at_least_one(self, market):
        with pytest.raises(ParameterError):
            derived_constants(market, 1.0)

    def test_zero_sharpe_is_degenerate(self):
        with pytest.raises(DegenerateError):
            derived_constants(MarketParams(r=0.05, mu=0.05, sigma=0.2), -1.0)


class TestCones:
    def test_unconstrained_returns_theta(self):
        theta_hat, theta0 = project_theta_hat([0.25], ConeSpec())
        assert list(theta_hat) == [0.25]
        assert theta0 == 0.25

    def test_no_short_selling_with_positive_excess(self):
        cone = ConeSpec(ConeKind.NONNEGATIVE_ORTHANT, (0.05, 0.02))
        theta_hat, theta0 = project_theta_hat([0.25, 0.1], cone)
        assert list(theta_hat) == [0.25, 0.1]
        assert theta0 == pytest.approx(math.hypot(0.25, 0.1), rel=1e-15)

    def test_no_short_selling_needs_positive_excess(self):
        cone = ConeSpec(ConeKind.NONNEGATIVE_ORTHANT, (0.05, -0.02))
        with pytest.raises(UnsupportedConeError):
            project_theta_hat([0.25, -0.1], cone)

    def test_zero_theta_is_degenerate(self):
        with pytest.raises(DegenerateError):
            project_theta_hat([0.0], ConeSpec())

    def test_cone_aliases(self):
        assert ConeKind.parse("nonnegative_orthant") is ConeKind.NONNEGATIVE_ORTHANT
        with pytest.raises(UnsupportedConeError):
            ConeKind.parse("box")


class TestThetaSchedule:
    def test_accumulated_is_piecewise_exact(self):
        schedule = ThetaSchedule((0.0, 1.0), (0.25, 0.5))
        assert schedule.accumulated(0.5) == pytest.approx(0.5 * 0.0625 * 0.5, rel=1e-15)
        assert schedule.accumulated(3.0) == pytest.approx(0.5 * 0.0625 + 0.5 * 0.25 * 2.0, rel=1e-15)

    def test_rejects_unsorted_breaks(self):
        with pytest.raises(ParameterError):
            ThetaSchedule((0.0, 2.0, 1.0), (0.2, 0.2, 0.2))

import math

import numpy as np
import pytest

from closed_forms.examples import ex4_reference, ex5_allocation
from core.errors import DomainError, InsufficientDataError, PreconditionError
from solvers.primal import value_u
from turnpike.bounds import bound_constants, error_bound, identity_error, merton_allocation, turnpike_error
from turnpike.report import build_report, fit_decay_rate
from utility.asymptotics import AsymptoticClass, AsymptoticKind, classify_asymptotics
from utility.specs import UtilitySpec


def _power_class(q, alpha1, K, k=1.0):
    return AsymptoticClass(
        kind=AsymptoticKind.POWER_Q, q=q, scale_k=k, merton_p=q / (q - 1.0),
        rate_alpha1=alpha1, rate_K=K, threshold_delta=1.0,
    )


@pytest.fixture(scope="module")
def quartic_class():
    return classify_asymptotics(UtilitySpec.inverse_quartic().dual())


class TestMertonAllocation:
    @pytest.mark.parametrize("p, x, expected", [(0.75, 1.0, 5.0), (0.5, 2.0, 5.0), (0.0, 1.0, 1.25)])
    def test_examples(self, market, p, x, expected):
        assert merton_allocation(market, p, x) == pytest.approx(expected, rel=1e-15)

    def test_invalid(self, market):
        with pytest.raises(DomainError):
            merton_allocation(market, 1.0, 1.0)
        with pytest.raises(DomainError):
            merton_allocation(market, 0.5, 0.0)


class TestTurnpikeError:
    def test_quartic_matches_closed_form(self, market, quartic_surface):
        exact = ex4_reference(market, 8.0, 1.0).extra["exact_error"]
        assert exact == pytest.approx(0.64807, rel=1e-4)
        assert turnpike_error(quartic_surface, 8.0, 1.0, 0.75) == pytest.approx(exact, rel=1e-6)

    def test_power_is_exact(self, power_surface):
        assert turnpike_error(power_surface, 4.0, 1.0, 0.5) <= 1e-8

    def test_needs_positive_tau(self, power_surface):
        with pytest.raises(DomainError):
            turnpike_error(power_surface, 0.0, 1.0, 0.5)

    def test_quartic_long_horizon(self, quartic_surface):
        point = value_u(quartic_surface, 40.0, 1.0)
        assert point.A == pytest.approx(5.0, rel=0.01)

    def test_piecewise_long_horizon(self, piecewise_surface):
        point = value_u(piecewise_surface, 40.0, 1.0)
        assert point.A == pytest.approx(2.5, rel=0.01)

    @pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
    def test_quartic_terminal_error(self, market, quartic_surface, x):
        ref = ex4_reference(market, 0.0, x)
        err = identity_error(quartic_surface, 0.0, ref.y, 0.75)
        assert err == pytest.approx(ref.extra["exact_error"], rel=1e-6)


class TestNoTurnpike:
    @pytest.mark.parametrize("x", [0.25, 0.5])
    def test_capped_invests_nothing_at_long_horizon(self, market, capped_surface, x):
        point = value_u(capped_surface, 40.0, x)
        assert point.A <= 1e-2 * market.theta / market.sigma
        assert point.A == 0.0

    @pytest.mark.parametrize("x", [0.25, 0.5])
    def test_shifted_exponential_decays_slowly(self, market, exponential_surface, x):
        amounts = []
        for tau in (10.0, 20.0, 40.0, 80.0, 100.0):
            point = value_u(exponential_surface, tau, x)
            assert point.A == pytest.approx(ex5_allocation(market, tau, point.y), rel=1e-6)
            amounts.append(point.A)
        assert all(a > b for a, b in zip(amounts[:-1], amounts[1:]))
        # still far from zero at 40, below the 1% level only by 100
        assert amounts[2] > 0.1
        assert amounts[-1] <= 1e-2 * market.theta / market.sigma


class TestBoundConstants:
    def test_quartic_constants(self, market):
        c = bound_constants(market, _power_class(-3.0, 2.0, 1.0))
        assert c.t_bar == pytest.approx(8.0, rel=1e-12)
        assert c.rate == pytest.approx(0.025, rel=1e-12)
        assert c.L0 == pytest.approx(103.27, rel=1e-3)
        assert c.L > 0
        assert c.D_of_x(1.0) > 0

    def test_threshold_for_q_minus_one(self, market):
        c = bound_constants(market, _power_class(-1.0, 1.0, 0.5))
        assert c.t_bar == pytest.approx(32.0, rel=1e-12)
        assert c.rate == pytest.approx(0.025, rel=1e-12)

    def test_exact_dual_has_zero_bound(self, market):
        c = bound_constants(market, _power_class(-1.0, 2.0, 0.0))
        assert c.L == 0.0
        assert error_bound(c, 1.0, 20.0) == 0.0

    def test_bound_decays_at_rate(self, market):
        c = bound_constants(market, _power_class(-3.0, 2.0, 1.0))
        ratio = error_bound(c, 1.0, 20.0) / error_bound(c, 1.0, 10.0)
        assert ratio == pytest.approx(math.exp(-0.25), rel=1e-12)

    def test_preconditions(self, market):
        with pytest.raises(PreconditionError):
            bound_constants(market, AsymptoticClass(AsymptoticKind.NONE))
        with pytest.raises(PreconditionError):
            bound_constants(market, _power_class(-1.0, 3.0, 1.0))
        c = bound_constants(market, _power_class(-3.0, 2.0, 1.0))
        with pytest.raises(PreconditionError):
            error_bound(c, 1.0, 7.0)


class TestDecayFit:
    def test_recovers_rate(self):
        ts = np.linspace(10.0, 30.0, 11)
        fit = fit_decay_rate([(t, 2.0 * math.exp(-0.3 * t)) for t in ts])
        assert fit.c_hat == pytest.approx(0.3, rel=1e-10)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        assert fit.to_record()["fitted_rate"] == pytest.approx(0.3, rel=1e-10)

    def test_zero_errors_are_exact(self):
        fit = fit_decay_rate([(t, 0.0) for t in (1.0, 2.0, 3.0)])
        assert fit.exact
        assert fit.to_record()["fitted_rate"] == "exact"

    def test_window_filters_points(self):
        points = [(t, math.exp(-0.2 * t)) for t in range(1, 21)]
        fit = fit_decay_rate(points, window=(5.0, 9.0))
        assert fit.window == (5.0, 9.0)
        assert fit.c_hat == pytest.approx(0.2, rel=1e-10)

    def test_too_few_points(self):
        with pytest.raises(InsufficientDataError):
            fit_decay_rate([(1.0, 0.5), (2.0, 0.25), (3.0, 0.125)])


class TestReport:
    def test_quartic_report(self, market, quartic_surface, quartic_class):
        taus = [0.0, 4.0, 10.0, 14.0, 18.0, 22.0, 26.0, 30.0]
        report = build_report(quartic_surface, quartic_class, 1.0, taus, window=(10.0, 30.0))
        assert report.merton_target == pytest.approx(5.0, rel=1e-12)
        assert report.dominance_ok is True
        assert report.t_bar == pytest.approx(8.0, rel=1e-9)
        assert math.isnan(report.bound_curve[1])
        assert report.fitted_rate.c_hat == pytest.approx(0.15, rel=0.05)
        frame = report.to_frame()
        assert list(frame.columns) == ["t", "error", "bound", "target", "A", "sharp_bound"]
        assert np.all(frame["error"][1:] <= frame["sharp_bound"][1:])
        assert report.errors[0] == pytest.approx(ex4_reference(market, 0.0, 1.0).extra["exact_error"], rel=1e-9)

    def test_footer(self, quartic_surface, quartic_class):
        report = build_report(quartic_surface, quartic_class, 1.0, [10.0, 12.0])
        footer = report.footer()
        assert footer["merton_target"] == pytest.approx(5.0)
        assert footer["constants"]["q"] == -3.0
        assert footer["fit"] is None

    def test_no_merton_limit(self, capped_surface):
        with pytest.raises(PreconditionError):
            build_report(capped_surface, AsymptoticClass(AsymptoticKind.NONE), 1.0, [1.0])

import math

import numpy as np
import pytest

from closed_forms.examples import (
    capped_dual,
    capped_frontier,
    capped_reference,
    capped_ruin_prob,
    ex400_diagnostics,
    ex4_reference,
    ex4_sharp_bound,
    ex5_allocation,
    merton_reference,
    piecewise_reference,
)
from core.errors import DomainError, ParameterError
from core.normal import norm_cdf


class TestMerton:
    def test_reference_point(self, market):
        ref = merton_reference(market, 0.5, 1.0, 1.0)
        assert ref.pi_frac == pytest.approx(2.5, rel=1e-15)
        assert ref.u == pytest.approx(2.0 * math.exp(0.05625), rel=1e-14)
        assert ref.v_y == pytest.approx(-1.0, rel=1e-14)

    def test_rejects_bad_p(self, market):
        with pytest.raises(ParameterError):
            merton_reference(market, 1.0, 1.0, 1.0)


class TestCapped:
    def test_dual_example(self, market):
        v, v_y = capped_dual(market, 1.0, 1.0, 1.0)
        assert v == pytest.approx(0.123360, abs=2e-6)
        assert v_y == pytest.approx(-math.exp(-0.05) * norm_cdf(0.075), rel=1e-14)

    def test_interior_reference(self, market):
        ref = capped_reference(market, 1.0, 1.0, 0.5 * math.exp(-0.05))
        assert not ref.saturated
        assert ref.u == pytest.approx(norm_cdf(0.25), rel=1e-12)
        assert ref.A == pytest.approx(1.89743, rel=1e-5)
        assert ref.v_y == pytest.approx(-ref.x, rel=1e-10)

    def test_saturated_reference(self, market):
        ref = capped_reference(market, 1.0, 1.0, 1.0)
        assert ref.saturated
        assert (ref.u, ref.A, ref.y) == (1.0, 0.0, 0.0)

    def test_ruin_probability(self, market):
        ruin, value = capped_ruin_prob(market, 1.0, 1.0, 0.5)
        assert ruin == pytest.approx(0.3767, abs=1e-4)
        assert value == pytest.approx(0.6233, abs=1e-4)
        assert ruin + value == pytest.approx(1.0, rel=1e-14)

    def test_no_ruin_above_boundary(self, market):
        assert capped_ruin_prob(market, 1.0, 1.0, 0.99) == (0.0, 1.0)

    def test_frontier_rises_with_cap(self, market):
        frame = capped_frontier(market, [0.6, 0.8, 1.0, 1.5, 2.0], 1.0, 0.5)
        assert list(frame.columns) == ["H", "value", "ruin"]
        assert np.all(np.diff(frame["value"]) > 0)
        assert np.all(np.diff(frame["ruin"]) > 0)

    def test_domain(self, market):
        with pytest.raises(DomainError):
            capped_dual(market, 1.0, 0.0, 1.0)
        with pytest.raises(ParameterError):
            capped_reference(market, 0.0, 1.0, 0.5)


class TestPiecewise:
    @pytest.mark.parametrize("y", [0.3, 0.8, 1.5])
    def test_matches_quadrature(self, market, piecewise_surface, y):
        v, v_y = piecewise_reference(market, 1.0, 0.5, 1.0, y)
        assert piecewise_surface.eval_v(1.0, y) == pytest.approx(v, rel=1e-7)
        assert piecewise_surface.eval_vy(1.0, y) == pytest.approx(v_y, rel=1e-7)

    def test_short_horizon_recovers_dual(self, market):
        v, v_y = piecewise_reference(market, 1.0, 0.5, 1e-8, 0.7)
        assert v == pytest.approx(0.3, abs=1e-3)
        assert v_y == pytest.approx(-1.0, abs=1e-3)


class TestInverseQuartic:
    def test_terminal_point(self, market):
        ref = ex4_reference(market, 0.0, 1.0)
        assert ref.y == pytest.approx(1.272020, abs=1e-6)
        assert ref.u == pytest.approx(2.220127, abs=1e-6)
        assert ref.extra["exact_error"] == pytest.approx(1.545085, abs=1e-6)
        assert abs(ref.A - 5.0) == pytest.approx(ref.extra["exact_error"], rel=1e-12)

    def test_error_below_sharp_bound(self, market):
        ref = ex4_reference(market, 8.0, 1.0)
        assert ref.extra["exact_error"] == pytest.approx(0.64807, abs=1e-5)
        assert ref.extra["sharp_bound"] == pytest.approx(2.5 * math.exp(-1.2), rel=1e-12)
        for t in (0.5, 4.0, 16.0, 40.0):
            ref = ex4_reference(market, t, 2.0)
            assert ref.extra["exact_error"] < ex4_sharp_bound(market, 2.0, t)

    def test_marginal_condition(self, market):
        ref = ex4_reference(market, 3.0, 0.7)
        assert ref.v_y == pytest.approx(-0.7, rel=1e-12)


class TestShiftedExponential:
    def test_allocation_example(self, market):
        assert ex5_allocation(market, 1.0, 1.0) == pytest.approx(0.630062, abs=2e-6)

    def test_domain(self, market):
        with pytest.raises(DomainError):
            ex5_allocation(market, 1.0, 0.0)


class TestLogPower:
    def test_linear_piece_has_no_risk_aversion(self):
        risk_aversion, _ = ex400_diagnostics(0.5, 2.0)
        assert risk_aversion == 0.0

    def test_risk_aversion_tends_to_limit(self):
        risk_aversion, _ = ex400_diagnostics(0.5, 1e100)
        assert risk_aversion == pytest.approx(0.5, abs=0.01)

    def test_power_moment_grows_without_bound(self):
        values = [ex400_diagnostics(0.5, math.exp(k))[1](-1.0) for k in (2.0, 4.0, 8.0)]
        assert values == pytest.approx([4.0, 9.0, 25.0], rel=1e-12)

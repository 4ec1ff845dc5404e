import math

import numpy as np
import pytest

from closed_forms.examples import ex400_diagnostics
from core.errors import DomainError, ParameterError, PreconditionError
from utility.asymptotics import AsymptoticKind, classify_asymptotics, rate_constants
from utility.operations import (
    biconjugate_residual,
    conjugate,
    eval_utility,
    primal_limit_check,
    relative_risk_aversion,
    superdifferential,
)
from utility.specs import DualUtilitySpec, UtilityKind, UtilitySpec


class TestEvaluation:
    def test_power(self):
        assert eval_utility(UtilitySpec.power(0.5), 4.0) == pytest.approx(4.0, rel=1e-15)

    def test_capped(self):
        assert eval_utility(UtilitySpec.capped_linear(1.0), 2.0) == 1.0

    def test_inverse_quartic(self):
        assert eval_utility(UtilitySpec.inverse_quartic(), 1.0) == pytest.approx(2.220127, rel=1e-6)

    @pytest.mark.parametrize("spec", [
        UtilitySpec.power(0.3),
        UtilitySpec.capped_linear(2.0),
        UtilitySpec.piecewise_power(1.0, 0.5),
        UtilitySpec.inverse_quartic(),
        UtilitySpec.shifted_exponential(),
        UtilitySpec.log_power(0.5),
    ])
    def test_builtins_vanish_at_zero_and_respect_growth(self, spec):
        assert eval_utility(spec, 0.0) == 0.0
        xs = np.logspace(-4, 6, 41)
        values = spec.eval(xs)
        assert np.all(np.diff(values) >= 0)
        assert np.all(values <= spec.growth_C * (1.0 + xs ** spec.growth_pbar))

    def test_negative_wealth_is_a_domain_error(self):
        with pytest.raises(DomainError):
            eval_utility(UtilitySpec.power(0.5), -1.0)

    @pytest.mark.parametrize("factory", [
        lambda: UtilitySpec.power(1.5),
        lambda: UtilitySpec.capped_linear(0.0),
        lambda: UtilitySpec.piecewise_power(1.0, 0.0),
    ])
    def test_invalid_parameters(self, factory):
        with pytest.raises(ParameterError):
            factory()


class TestSuperdifferential:
    def test_smooth_point(self):
        lo, hi = superdifferential(UtilitySpec.power(0.5), 4.0)
        assert lo == pytest.approx(0.5, rel=1e-15)
        assert hi == pytest.approx(0.5, rel=1e-15)

    def test_capped_kink(self):
        assert superdifferential(UtilitySpec.capped_linear(1.0), 1.0) == (0.0, 1.0)

    def test_piecewise_kink(self):
        lo, hi = superdifferential(UtilitySpec.piecewise_power(1.0, 0.5), 1.0)
        assert lo == pytest.approx(0.5, rel=1e-15)
        assert hi == 1.0

    def test_map_is_non_increasing(self):
        spec = UtilitySpec.piecewise_power(1.0, 0.5)
        xs = np.logspace(-2, 2, 41)
        intervals = [superdifferential(spec, float(x)) for x in xs]
        for (lo1, _), (_, hi2) in zip(intervals, intervals[1:]):
            assert hi2 <= lo1 + 1e-15


class TestConjugate:
    def test_closed_forms(self):
        assert conjugate(UtilitySpec.capped_linear(1.0), 0.5) == pytest.approx(0.5, rel=1e-15)
        assert conjugate(UtilitySpec.power(0.5), 2.0) == pytest.approx(0.5, rel=1e-15)
        assert conjugate(UtilitySpec.inverse_quartic(), 1.0) == pytest.approx(4.0 / 3.0, rel=1e-15)

    @pytest.mark.parametrize("spec, ys", [
        (UtilitySpec.power(0.5), (0.05, 1.0, 20.0)),
        (UtilitySpec.capped_linear(1.0), (0.1, 0.5, 2.0)),
        (UtilitySpec.piecewise_power(1.0, 0.5), (0.1, 0.7, 2.0)),
        (UtilitySpec.inverse_quartic(), (0.1, 1.0, 10.0)),
        (UtilitySpec.shifted_exponential(), (0.01, 0.5, 3.0)),
    ])
    def test_numeric_matches_closed_form(self, spec, ys):
        for y in ys:
            closed = conjugate(spec, y)
            numeric = conjugate(spec, y, numeric=True)
            assert abs(numeric - closed) <= 1e-8 * (1.0 + abs(closed))

    def test_nonpositive_y_rejected(self):
        with pytest.raises(DomainError):
            conjugate(UtilitySpec.power(0.5), 0.0)

    def test_dual_limits_are_sentinels(self):
        power = UtilitySpec.power(0.5).dual()
        assert power.V0 == math.inf and power.Vprime0 == -math.inf
        capped = UtilitySpec.capped_linear(2.0).dual()
        assert capped.V0 == 2.0 and capped.Vprime0 == -2.0
        assert capped.eval(0.0) == 2.0

    def test_dual_growth_exponent(self):
        assert UtilitySpec.inverse_quartic().dual().growth_q == pytest.approx(-3.0, rel=1e-14)


class TestBiconjugate:
    @pytest.mark.parametrize("spec, x, tol", [
        (UtilitySpec.power(0.5), 4.0, 1e-10),
        (UtilitySpec.capped_linear(1.0), 0.3, 1e-10),
        (UtilitySpec.inverse_quartic(), 1.0, 1e-8),
        (UtilitySpec.shifted_exponential(), 2.0, 1e-8),
    ])
    def test_residual_vanishes(self, spec, x, tol):
        assert biconjugate_residual(spec, x) <= tol


class TestCustom:
    def test_shift_to_zero(self):
        spec = UtilitySpec.custom(lambda x: 2.0 * math.sqrt(x) + 1.0, certified_concave=True)
        assert spec.kind is UtilityKind.CUSTOM
        assert spec.shift == 1.0
        assert eval_utility(spec, 0.0) == 0.0
        assert eval_utility(spec, 4.0) == pytest.approx(4.0, rel=1e-14)

    def test_numeric_superdifferential_and_dual(self):
        spec = UtilitySpec.custom(lambda x: 2.0 * math.sqrt(x), certified_concave=True)
        lo, hi = superdifferential(spec, 4.0)
        assert lo == pytest.approx(0.5, rel=1e-5)
        assert hi == pytest.approx(0.5, rel=1e-5)
        assert conjugate(spec, 2.0) == pytest.approx(0.5, abs=1e-8)

    def test_requires_certificate(self):
        with pytest.raises(ParameterError):
            UtilitySpec.custom(lambda x: math.sqrt(x), certified_concave=False)

    def test_rejects_convex_callable(self):
        with pytest.raises(ParameterError):
            UtilitySpec.custom(lambda x: x * x, certified_concave=True)

    def test_config_blocks(self):
        spec = UtilitySpec.from_config({"kind": "power", "params": {"p": 0.5}})
        assert spec.params["p"] == 0.5
        with pytest.raises(ParameterError):
            UtilitySpec.from_config({"kind": "custom"})
        with pytest.raises(ParameterError):
            UtilitySpec.from_config({"kind": "cara", "params": {}})


class TestRiskAversion:
    def test_power_is_constant(self):
        r = relative_risk_aversion(UtilitySpec.power(0.3), np.array([0.5, 2.0, 50.0]))
        np.testing.assert_allclose(r, 0.7, rtol=1e-13)

    def test_log_power_matches_closed_form(self):
        spec = UtilitySpec.log_power(0.5)
        for x in (20.0, 1e4, 1e8):
            assert relative_risk_aversion(spec, x) == pytest.approx(ex400_diagnostics(0.5, x)[0], rel=1e-10)

    def test_primal_limit_check_for_power(self):
        report = primal_limit_check(UtilitySpec.power(0.5), 0.5)
        np.testing.assert_allclose(report["ratio"], 1.0, rtol=1e-13)
        np.testing.assert_allclose(report["risk_aversion"], 0.5, rtol=1e-13)
        assert report["target_risk_aversion"] == 0.5

    def test_primal_limit_check_for_saturating_utility(self):
        report = primal_limit_check(UtilitySpec.shifted_exponential(), -1.0, grid=[10.0, 20.0])
        assert np.all(np.isfinite(report["ratio"]))


class TestClassification:
    def test_inverse_quartic(self):
        cls = classify_asymptotics(UtilitySpec.inverse_quartic().dual())
        assert cls.kind is AsymptoticKind.POWER_Q
        assert cls.q == -3.0
        assert cls.merton_p == 0.75
        assert cls.scale_k == pytest.approx(1.0, rel=1e-9)
        assert cls.rate_alpha1 == 2.0
        assert cls.rate_K == pytest.approx(1.0, rel=1e-3)

    def test_power_recovers_q(self):
        cls = classify_asymptotics(UtilitySpec.power(0.5).dual())
        assert cls.kind is AsymptoticKind.POWER_Q
        assert abs(cls.q - (-1.0)) <= 0.01
        assert cls.exact
        assert cls.rate_K == 0.0

    def test_piecewise_scale_and_rates(self):
        cls = classify_asymptotics(UtilitySpec.piecewise_power(1.0, 0.5).dual())
        assert cls.kind is AsymptoticKind.POWER_Q
        assert cls.q == -1.0
        assert cls.merton_p == 0.5
        assert cls.scale_k == pytest.approx(0.25, rel=1e-9)
        assert cls.rate_alpha1 == 2.0

    @pytest.mark.parametrize("spec", [UtilitySpec.capped_linear(1.0), UtilitySpec.shifted_exponential()])
    def test_no_turnpike(self, spec):
        cls = classify_asymptotics(spec.dual())
        assert cls.kind is AsymptoticKind.NONE
        assert not cls.has_rate
        assert cls.to_record()["kind"] == "none"

    def test_log_dual(self):
        dual = DualUtilitySpec.from_callable(lambda y: -np.log(y) - 1.0, math.inf, -math.inf)
        cls = classify_asymptotics(dual)
        assert cls.kind is AsymptoticKind.LOG
        assert cls.merton_p == 0.0
        assert cls.scale_k == 1.0

    def test_finite_saturation(self):
        dual = DualUtilitySpec.from_callable(lambda y: 2.0 - 2.0 * np.sqrt(y), 2.0, -math.inf)
        cls = classify_asymptotics(dual)
        assert cls.kind is AsymptoticKind.FINITE_SATURATION
        assert cls.q == 0.5
        assert cls.merton_p == -1.0


class TestRateConstants:
    def test_exact_power(self):
        rates = rate_constants(UtilitySpec.power(0.5).dual(), -1.0)
        assert rates.exact
        assert rates.K == 0.0

    def test_quartic(self):
        rates = rate_constants(UtilitySpec.inverse_quartic().dual(), -3.0)
        assert rates.alpha1 == 2.0
        assert rates.K == pytest.approx(1.0, rel=1e-3)
        assert rates.delta == 1.0

    def test_rejects_log_exponent(self):
        with pytest.raises(PreconditionError):
            rate_constants(UtilitySpec.power(0.5).dual(), 0.0)

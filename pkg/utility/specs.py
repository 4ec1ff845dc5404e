"""
Utility specifications.

UtilitySpec wraps a primal utility U (a builtin family or a user callable);
DualUtilitySpec wraps its conjugate V(y) = sup_{x≥0} U(x) − xy together with
the limits V(0), V'(0) that decide the saturation region downstream.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Callable, Mapping, Optional, Tuple

import numpy as np

from config.settings import settings
from core.errors import DomainError, ParameterError
from utility.conjugation import numeric_conjugate
from utility.families import FAMILIES, UtilityFamily

logger = logging.getLogger(__name__)

_GROWTH_GRID = np.logspace(-6, 12, 181)
_SHAPE_GRID = np.concatenate(([0.0], np.logspace(-3, 3, 61)))


class UtilityKind(str, Enum):
    POWER = "power"
    CAPPED_LINEAR = "capped_linear"
    PIECEWISE_POWER = "piecewise_power"
    INVERSE_QUARTIC = "inverse_quartic"
    SHIFTED_EXPONENTIAL = "shifted_exponential"
    LOG_POWER = "log_power"
    CUSTOM = "custom"


def _as_output(arr: np.ndarray, like) -> object:
    return float(arr) if np.ndim(like) == 0 else arr


@dataclass(frozen=True)
class UtilitySpec:
    kind: UtilityKind
    params: Mapping[str, float] = field(default_factory=dict)
    growth_C: Optional[float] = None
    growth_pbar: Optional[float] = None
    evaluator: Optional[Callable] = field(default=None, repr=False, compare=False)
    shift: float = 0.0
    sup_value: float = math.inf
    saturation_wealth: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "kind", UtilityKind(self.kind))
        object.__setattr__(self, "params", MappingProxyType({k: float(v) for k, v in self.params.items()}))
        if self.kind is UtilityKind.CUSTOM:
            if self.evaluator is None:
                raise ParameterError("custom utility needs an evaluator")
            default_c, default_pbar = None, 0.5
        else:
            self.family.validate(self.params)
            default_c, default_pbar = self.family.growth(self.params)

        pbar = default_pbar if self.growth_pbar is None else float(self.growth_pbar)
        if not 0 < pbar < 1:
            raise ParameterError(f"growth_pbar must lie in (0, 1), got {pbar}")
        object.__setattr__(self, "growth_pbar", pbar)

        c = self.growth_C if self.growth_C is not None else default_c
        if c is None:
            ratio = self._raw_value(_GROWTH_GRID) / (1.0 + np.power(_GROWTH_GRID, pbar))
            c = 1.05 * float(np.max(ratio))
        if not c > 0:
            raise ParameterError("growth_C must be positive")
        object.__setattr__(self, "growth_C", float(c))

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def power(cls, p: float) -> "UtilitySpec":
        return cls(UtilityKind.POWER, {"p": p})

    @classmethod
    def capped_linear(cls, H: float) -> "UtilitySpec":
        return cls(UtilityKind.CAPPED_LINEAR, {"H": H})

    @classmethod
    def piecewise_power(cls, H: float, p: float) -> "UtilitySpec":
        return cls(UtilityKind.PIECEWISE_POWER, {"H": H, "p": p})

    @classmethod
    def inverse_quartic(cls) -> "UtilitySpec":
        return cls(UtilityKind.INVERSE_QUARTIC)

    @classmethod
    def shifted_exponential(cls) -> "UtilitySpec":
        return cls(UtilityKind.SHIFTED_EXPONENTIAL)

    @classmethod
    def log_power(cls, p: float) -> "UtilitySpec":
        return cls(UtilityKind.LOG_POWER, {"p": p})

    @classmethod
    def custom(
        cls,
        evaluator: Callable[[float], float],
        certified_concave: bool,
        growth_pbar: float = 0.5,
        growth_C: Optional[float] = None,
        sup_value: float = math.inf,
        saturation_wealth: float = math.inf,
    ) -> "UtilitySpec":
        """User utility; U(0) ≠ 0 is shifted to 0 and the shift recorded."""
        if not certified_concave:
            raise ParameterError("custom utility must be certified concave")
        fn = np.vectorize(evaluator, otypes=[float])
        shift = float(fn(0.0))
        if not math.isfinite(shift):
            raise ParameterError("custom utility must have finite U(0)")
        if shift != 0.0:
            logger.info("custom utility shifted by %.6g so that U(0) = 0", shift)
        _verify_shape(lambda x: fn(x) - shift)
        return cls(
            UtilityKind.CUSTOM,
            growth_C=growth_C,
            growth_pbar=growth_pbar,
            evaluator=fn,
            shift=shift,
            sup_value=sup_value - shift,
            saturation_wealth=saturation_wealth,
        )

    @classmethod
    def from_config(cls, block: Mapping) -> "UtilitySpec":
        kind = block.get("kind")
        params = dict(block.get("params", {}))
        try:
            kind = UtilityKind(kind)
        except ValueError:
            raise ParameterError(f"unknown utility kind '{kind}'") from None
        if kind is UtilityKind.CUSTOM:
            raise ParameterError("custom utilities cannot be declared in a run config")
        return cls(kind, params)

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------
    @property
    def family(self) -> UtilityFamily:
        return FAMILIES[self.kind.value]

    def _raw_value(self, x: np.ndarray) -> np.ndarray:
        if self.kind is UtilityKind.CUSTOM:
            return self.evaluator(x) - self.shift
        return self.family.value(x, self.params)

    def eval(self, x):
        arr = np.asarray(x, dtype=float)
        if np.any(np.isnan(arr)) or np.any(arr < 0):
            raise DomainError("utility is defined on x >= 0")
        return _as_output(self._raw_value(arr), x)

    def superdifferential(self, x: float) -> Tuple[float, float]:
        if not x > 0:
            raise DomainError("superdifferential needs x > 0")
        if self.kind is UtilityKind.CUSTOM:
            h = 1e-7 * max(1.0, x)
            u0 = self.eval(x)
            lo = (self.eval(x + h) - u0) / h
            hi = (u0 - self.eval(max(x - h, 0.0))) / min(h, x)
            return float(lo), float(hi)
        lo, hi = self.family.slopes(np.asarray(x, dtype=float), self.params)
        return float(lo), float(hi)

    def curvature(self, x):
        """U''(x) in closed form when available, else a central difference."""
        arr = np.asarray(x, dtype=float)
        d2 = None if self.kind is UtilityKind.CUSTOM else self.family.curvature(arr, self.params)
        if d2 is None:
            h = 1e-4 * np.maximum(1.0, arr)
            d2 = (self._raw_value(arr + h) - 2.0 * self._raw_value(arr) + self._raw_value(arr - h)) / (h * h)
        return _as_output(np.asarray(d2, dtype=float), x)

    def dual(self) -> "DualUtilitySpec":
        pbar = self.growth_pbar
        q = pbar / (pbar - 1.0)
        c = self.growth_C
        dual_c = max(c, c * (1.0 - pbar) * (c * pbar) ** (-q))
        if self.kind is UtilityKind.CUSTOM:
            v0 = self.sup_value
            vp0 = -self.saturation_wealth
            kinks: Tuple[float, ...] = ()
        else:
            v0, vp0 = self.family.dual_limits(self.params)
            kinks = tuple(self.family.dual_kinks(self.params))
        return DualUtilitySpec(
            kind=self.kind,
            growth_C=dual_c,
            growth_q=q,
            V0=v0,
            Vprime0=vp0,
            kinks=kinks,
            primal=self,
        )


def _verify_shape(u: Callable[[np.ndarray], np.ndarray]) -> None:
    """Reject non-monotone or non-concave callables on a sampled grid."""
    values = u(_SHAPE_GRID)
    if not np.all(np.isfinite(values)):
        raise ParameterError("custom utility returned non-finite values")
    secants = np.diff(values) / np.diff(_SHAPE_GRID)
    scale = 1e-9 * (1.0 + np.abs(secants))
    if np.any(secants < -scale):
        raise ParameterError("custom utility is not non-decreasing")
    if np.any(np.diff(secants) > scale[1:]):
        raise ParameterError("custom utility failed the sampled concavity check")


@dataclass(frozen=True)
class DualUtilitySpec:
    kind: UtilityKind
    growth_C: float
    growth_q: float
    V0: float
    Vprime0: float
    kinks: Tuple[float, ...] = ()
    primal: Optional[UtilitySpec] = field(default=None, repr=False)
    evaluator: Optional[Callable] = field(default=None, repr=False, compare=False)
    slope_evaluator: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.growth_q < 0:
            raise ParameterError("growth_q must be negative")
        if self.primal is None and self.evaluator is None:
            raise ParameterError("dual utility needs a primal utility or an evaluator")

    @classmethod
    def from_callable(
        cls,
        evaluator: Callable,
        V0: float,
        Vprime0: float,
        growth_C: float = 1.0,
        growth_q: float = -1.0,
        kinks: Tuple[float, ...] = (),
        slope: Optional[Callable] = None,
    ) -> "DualUtilitySpec":
        return cls(
            kind=UtilityKind.CUSTOM,
            growth_C=growth_C,
            growth_q=growth_q,
            V0=V0,
            Vprime0=Vprime0,
            kinks=tuple(kinks),
            evaluator=evaluator,
            slope_evaluator=slope,
        )

    @property
    def has_closed_form(self) -> bool:
        if self.evaluator is not None:
            return True
        return self.primal.kind is not UtilityKind.CUSTOM and self.primal.family.dual_value(
            np.ones(1), self.primal.params
        ) is not None

    @property
    def has_slope(self) -> bool:
        """True when V' is available in closed form (quadrature route A)."""
        if self.slope_evaluator is not None:
            return True
        if self.primal is None or self.primal.kind is UtilityKind.CUSTOM:
            return False
        return self.primal.family.dual_slope(np.ones(1), self.primal.params) is not None

    def eval(self, y):
        arr = np.asarray(y, dtype=float)
        if np.any(np.isnan(arr)) or np.any(arr < 0):
            raise DomainError("dual utility is defined on y >= 0")
        if self.evaluator is not None:
            out = np.asarray(self.evaluator(arr), dtype=float)
        else:
            out = None
            if self.primal.kind is not UtilityKind.CUSTOM:
                out = self.primal.family.dual_value(arr, self.primal.params)
            if out is None:
                out = self._numeric(arr)
        out = np.where(arr == 0, self.V0, out)
        return _as_output(out, y)

    def difference(self, w: np.ndarray, y: float) -> np.ndarray:
        """V(w) − V(y) for an array w and a scalar anchor y > 0."""
        if self.evaluator is None and self.primal.kind is not UtilityKind.CUSTOM:
            out = self.primal.family.dual_difference(np.asarray(w, dtype=float), y, self.primal.params)
            if out is not None:
                return out
        return np.asarray(self.eval(w), dtype=float) - float(self.eval(y))

    def slope(self, y):
        arr = np.asarray(y, dtype=float)
        if self.slope_evaluator is not None:
            out = np.asarray(self.slope_evaluator(arr), dtype=float)
        elif self.has_slope:
            out = self.primal.family.dual_slope(arr, self.primal.params)
        else:
            raise ParameterError(f"no closed-form V' for {self.kind.value}")
        return _as_output(out, y)

    def _numeric(self, arr: np.ndarray) -> np.ndarray:
        cap = settings.CONJUGATE_BRACKET_CAP
        u = self.primal.eval
        flat = [numeric_conjugate(u, float(yy), cap)[0] if yy > 0 else self.V0 for yy in arr.reshape(-1)]
        return np.asarray(flat, dtype=float).reshape(arr.shape)

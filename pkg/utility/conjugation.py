"""Numeric Legendre–Fenchel transforms for utilities without closed forms."""

import math
from typing import Callable, Tuple

from core.errors import ConvergenceError
from core.numerics import golden_section_min

# ln y search window for inf_y {V(y) + xy}
_LOG_Y_WINDOW = (-40.0, 40.0)


def numeric_conjugate(u: Callable[[float], float], y: float, cap: float) -> Tuple[float, float]:
    """sup_{x≥0} U(x) − xy by golden section; returns (value, maximiser).

    The bracket [0, B] doubles until the secant slope of U on [B/2, B]
    drops below y, which places the maximiser inside it.
    """
    b = 1.0
    while (u(b) - u(0.5 * b)) / (0.5 * b) >= y:
        b *= 2.0
        if b > cap:
            raise ConvergenceError(
                f"conjugate bracket exceeded {cap:.3g} at y={y:.6g}; U(x) - xy looks unbounded"
            )
    x_star, neg_value = golden_section_min(lambda x: -(u(x) - x * y), 0.0, b)
    return -neg_value, x_star


def numeric_biconjugate(v: Callable[[float], float], x: float) -> Tuple[float, float]:
    """inf_{y>0} V(y) + xy, searched in ln y where the map is unimodal."""
    s_star, value = golden_section_min(
        lambda s: v(math.exp(s)) + x * math.exp(s), *_LOG_Y_WINDOW
    )
    return value, math.exp(s_star)

"""
Small numerical building blocks used across packages: a golden-section
minimiser that also inspects the bracket ends, per-decade log-log slopes,
and snapping of fitted exponents to simple fractions.
"""

import math
from fractions import Fraction
from typing import Callable, List, Tuple

import numpy as np
from scipy import optimize



def golden_section_min(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    rel_tol: float = 1e-14,
    max_iter: int = 400,
) -> Tuple[float, float]:
    """Minimise a unimodal function on [lo, hi]; returns (argmin, min).

    The interior search is scipy's bounded golden-section/parabolic method.
    The endpoints are candidates too, so a minimum sitting on the boundary
    (e.g. the maximiser x=0 of a conjugate) is returned exactly.
    """
    lo, hi = float(lo), float(hi)
    options = {"xatol": rel_tol * max(1.0, abs(lo), abs(hi)), "maxiter": max_iter}
    coarse = optimize.minimize_scalar(func, bounds=(lo, hi), method="bounded", options=options)
    # second pass around the first estimate in shifted coordinates, where the
    # method's |x|-proportional tolerance no longer limits the result
    x1 = float(coarse.x)
    width = 1e-6 * max(1.0, abs(x1))
    fine = optimize.minimize_scalar(
        lambda t: func(x1 + t),
        bounds=(max(lo, x1 - width) - x1, min(hi, x1 + width) - x1),
        method="bounded",
        options={"xatol": rel_tol * max(1.0, abs(x1)), "maxiter": max_iter},
    )
    candidates = [
        (x1 + float(fine.x), float(fine.fun)),
        (x1, float(coarse.fun)),
        (lo, func(lo)),
        (hi, func(hi)),
    ]
    best_x, best_f = min(candidates, key=lambda item: item[1])
    return float(best_x), float(best_f)


def decade_slopes(ys: np.ndarray, fs: np.ndarray, log_values: bool = True) -> List[Tuple[int, float]]:
    """Least-squares slope of ln f (or f itself) against ln y inside every complete decade.

    Returns (decade exponent, slope) pairs ordered from the largest y down,
    so the last entries describe the smallest y.
    """
    ys = np.asarray(ys, dtype=float)
    fs = np.asarray(fs, dtype=float)
    targets = np.log(fs) if log_values else fs
    log10y = np.log10(ys)
    out: List[Tuple[int, float]] = []
    top = int(math.floor(log10y.max() + 1e-9))
    bottom = int(math.ceil(log10y.min() - 1e-9))
    for k in range(top - 1, bottom - 1, -1):
        mask = (log10y >= k - 1e-9) & (log10y <= k + 1 + 1e-9)
        if mask.sum() < 2:
            continue
        slope = np.polyfit(np.log(ys[mask]), targets[mask], 1)[0]
        out.append((k, float(slope)))
    return out


def snap_to_fraction(value: float, tol: float = 1e-4, max_denominator: int = 12) -> float:
    frac = Fraction(value).limit_denominator(max_denominator)
    if abs(float(frac) - value) <= tol:
        return float(frac)
    return value

"""
Standard normal helpers.

Everything that needs Φ, φ or Φ⁻¹ goes through here so the closed-form
oracles and the solvers share one implementation. scipy's ndtr is
erfc-based and accurate to a few ulps in both tails.
"""

import math

import numpy as np
from scipy import special

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def norm_pdf(z):
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(z))


def norm_cdf(z):
    return special.ndtr(z)


def norm_sf(z):
    return special.ndtr(-np.asarray(z, dtype=float))


def norm_ppf(prob):
    """Quantile with one Newton polish step away from the extreme tails."""
    arr = np.atleast_1d(np.asarray(prob, dtype=float))
    z = special.ndtri(arr)
    inner = (arr > 1e-12) & (arr < 1.0 - 1e-12)
    z[inner] -= (special.ndtr(z[inner]) - arr[inner]) / norm_pdf(z[inner])
    if np.ndim(prob) == 0:
        return float(z[0])
    return z.reshape(np.shape(prob))

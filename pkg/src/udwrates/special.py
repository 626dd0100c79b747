"""Scaled complementary error function.

Every series term in this package is of the form exp(u^2/2)*u*(1 -+ erf(u/sqrt2))
with u^2/2 reaching several hundred, so the bare exp/erf product overflows long
before the term itself leaves O(1).  All call sites therefore go through
erfcx(y) = exp(y^2)*erfc(y), kept local so the numerics are self-contained and
testable against a high-precision table (see tests/test_special.py).
"""

from __future__ import annotations

import math

import numpy as np

_ERFC = np.vectorize(math.erfc, otypes=[float])

# crossover to the asymptotic expansion; below it exp(y^2) stays < 6.3e27
_ASYM_Y = 8.0
_SQRT_PI = math.sqrt(math.pi)


def _erfcx_asymptotic(y: np.ndarray) -> np.ndarray:
    # erfcx(y) = 1/(y sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2y^2)^k, y >= 8:
    # terms fall below 1e-18 well before the divergent tail sets in.
    inv2y2 = 1.0 / (2.0 * y * y)
    total = np.ones_like(y)
    term = np.ones_like(y)
    for k in range(1, 40):
        term = term * (-(2 * k - 1)) * inv2y2
        total += term
        if np.all(np.abs(term) < 1e-18):
            break
    return total / (y * _SQRT_PI)


def erfcx(y):
    """exp(y^2) * erfc(y), accurate to < 1e-13 relative for y >= 0.

    Negative arguments use the reflection 2*exp(y^2) - erfcx(-y) and overflow
    to inf for y < -26.6 like the defining expression would.
    """
    arr = np.asarray(y, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)

    neg = arr < 0.0
    mid = (~neg) & (arr < _ASYM_Y)
    big = arr >= _ASYM_Y

    if np.any(mid):
        ym = arr[mid]
        out[mid] = np.exp(ym * ym) * _ERFC(ym)
    if np.any(big):
        out[big] = _erfcx_asymptotic(arr[big])
    if np.any(neg):
        yn = -arr[neg]
        pos = np.empty_like(yn)
        m = yn < _ASYM_Y
        pos[m] = np.exp(yn[m] * yn[m]) * _ERFC(yn[m])
        pos[~m] = _erfcx_asymptotic(yn[~m])
        with np.errstate(over="ignore"):
            out[neg] = 2.0 * np.exp(yn * yn) - pos

    return float(out[0]) if scalar else out


def binary_entropy(p: float) -> float:
    """Shannon entropy of (p, 1-p) in bits."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)

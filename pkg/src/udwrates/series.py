"""Closed-form series for the coincident-point (aL = 0) matrix elements.

The four vacuum correlators I1..I4 reduce at zero separation to sums over the
image poles of the wedge propagators.  Each term combines a pole offset
u = sigma*delta + (tower)/(a*sigma) with exp(u^2/2)*(1 -+ erf(u/sqrt2)) type
factors; terms are rewritten through erfcx so the global exp(-(sigma*delta)^2/2)
prefactor is absorbed analytically and nothing overflows even at
sigma*delta = 30 where the naive factors reach e^450.

Far from the peak the terms decay only like 1/u^2, too slowly to reach a 1e-14
tail tolerance by brute summation, so the explicit sweep runs to a fixed
crossover and the remaining wing is added in closed form via Hurwitz zeta
functions (the asymptotic erfcx expansion summed termwise over the tower).
The wing completion makes the truncation error itself negligible against
tail_tol; max_terms still bounds the explicit sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .params import DimensionlessParams, ValidationError
from .special import erfcx

SQRT2PI = math.sqrt(2.0 * math.pi)
SQRT2 = math.sqrt(2.0)

# beyond this |u| the asymptotic erfcx expansion is good to < 1e-17 relative
_WING_SWITCH = 8.0


class NonConvergence(RuntimeError):
    """A series failed to reach its tail tolerance within max_terms."""


class DomainError(ValueError):
    """Operation evaluated outside its validity domain (e.g. aL != 0)."""


@dataclass(frozen=True)
class SeriesControl:
    max_terms: int = 1_000_000
    tail_tol: float = 1e-14

    def __post_init__(self) -> None:
        if self.max_terms < 1:
            raise ValidationError("max_terms: must be >= 1")
        if not (0.0 < self.tail_tol < 1.0):
            raise ValidationError("tail_tol: must lie in (0, 1)")


DEFAULT_SERIES_CONTROL = SeriesControl()


@dataclass(frozen=True)
class MatrixElements:
    """Vacuum correlator integrals entering the two-detector state.

    I1 is real; I2, I3, I4 are complex in general (real at aL = 0).
    provenance records which evaluator produced the values.
    """

    I1: float
    I2: complex
    I3: complex
    I4: complex
    provenance: str = "series"
    I2_error: float = 0.0
    I3_error: float = 0.0


# ---------------------------------------------------------------------------
# stabilized terms, x = sigma*delta, global exp(-x^2/2) folded in analytically
#
# plus branch (poles on the (1+Erf) side):
#   u >= 0: 2 e^{-x^2/2} + sqrt(2pi) u (2 e^{(u^2-x^2)/2} - e^{-x^2/2} erfcx(u/sqrt2))
#   u <  0: e^{-x^2/2} (2 + sqrt(2pi) u erfcx(-u/sqrt2))
# minus branch (the (1-Erf) side, u > 0 always):
#   e^{-x^2/2} (-2 + sqrt(2pi) u erfcx(u/sqrt2))
# ---------------------------------------------------------------------------

def _terms_plus(u: np.ndarray, x: float) -> np.ndarray:
    ex = math.exp(-0.5 * x * x)
    out = np.empty_like(u)
    pos = u >= 0.0
    up = u[pos]
    out[pos] = 2.0 * ex + SQRT2PI * up * (
        2.0 * np.exp(0.5 * (up * up - x * x)) - ex * erfcx(up / SQRT2)
    )
    un = u[~pos]
    out[~pos] = ex * (2.0 + SQRT2PI * un * erfcx(-un / SQRT2))
    return out


def _terms_minus(u: np.ndarray, x: float) -> np.ndarray:
    ex = math.exp(-0.5 * x * x)
    return ex * (-2.0 + SQRT2PI * u * erfcx(u / SQRT2))


def _wing(x: float, step: float, u_start: float) -> float:
    """sum_{m>=0} t_minus(u_start + m*step) in closed form, u_start >= 8.

    t_minus(u) = e^{-x^2/2} * 2 sum_k (-1)^k (2k-1)!! u^{-2k}; summing each
    power over the tower gives Hurwitz zeta values.  The plus-branch wing at
    u <= -8 is -t_minus(|u|), handled by the caller's sign.
    """
    pref = math.exp(-0.5 * x * x)
    if pref == 0.0:
        return 0.0
    q = u_start / step
    total = 0.0
    dfact = 1.0
    for k in range(1, 42):
        dfact *= 2 * k - 1
        term = 2.0 * ((-1) ** k) * dfact * step ** (-2 * k) * float(zeta(2 * k, q))
        total += term
        if abs(term) < 1e-20 * max(abs(total), 1e-300):
            break
    return pref * total


def _sum_plus(x: float, step: float, u0: float, ctl: SeriesControl) -> float:
    """Terms at u = u0, u0-step, ... swept through the peak down past -8, then wing."""
    count = int(math.floor((u0 + _WING_SWITCH) / step)) + 1
    if count > ctl.max_terms:
        raise NonConvergence(f"explicit sweep needs {count} terms > max_terms={ctl.max_terms}")
    us = u0 - step * np.arange(count, dtype=float)
    total = float(_terms_plus(us, x).sum())
    u_excl = step * count - u0  # first |u| past the switch
    return total - _wing(x, step, u_excl)


def _sum_minus(x: float, step: float, u0: float, ctl: SeriesControl) -> float:
    """Terms at u = u0, u0+step, ... up to +8, then wing."""
    count = max(0, int(math.floor((_WING_SWITCH - u0) / step)) + 1)
    if count > ctl.max_terms:
        raise NonConvergence(f"explicit sweep needs {count} terms > max_terms={ctl.max_terms}")
    total = 0.0
    if count:
        us = u0 + step * np.arange(count, dtype=float)
        total = float(_terms_minus(us, x).sum())
    return total + _wing(x, step, u0 + step * count)


def _require_coincident(d: DimensionlessParams) -> None:
    if d.aL != 0.0:
        raise DomainError("series forms are valid only at aL = 0")


def series_I1(d: DimensionlessParams, ctl: SeriesControl = DEFAULT_SERIES_CONTROL) -> float:
    """Same-wedge correlator <A+ A->: even pole tower 2 pi n/(a sigma)."""
    _require_coincident(d)
    if d.lam == 0.0:
        return 0.0
    x, step = d.sigma_delta, 2.0 * math.pi / d.a_sigma
    s_plus = _sum_plus(x, step, x, ctl)            # n = 0, -1, -2, ...
    s_minus = _sum_minus(x, step, x + step, ctl)   # n = 1, 2, ...
    return d.lam**2 / (8.0 * math.pi) * (s_plus - s_minus)


def series_I2(d: DimensionlessParams, ctl: SeriesControl = DEFAULT_SERIES_CONTROL) -> float:
    """Cross-wedge correlator <A+ B+>: odd tower (2n+1) pi/(a sigma), shifted limits."""
    _require_coincident(d)
    if d.lam == 0.0:
        return 0.0
    x = d.sigma_delta
    step = 2.0 * math.pi / d.a_sigma
    half = math.pi / d.a_sigma
    s_plus = _sum_plus(x, step, x - half, ctl)     # n = -1, -2, ...
    s_minus = _sum_minus(x, step, x + half, ctl)   # n = 0, 1, ...
    return -d.lam**2 / (8.0 * math.pi) * (s_plus - s_minus)


def _sum_t34(a_sigma: float, parity: str, ctl: SeriesControl) -> float:
    """sum over odd/even m >= (1 or 2) of -2 + 2 sqrt(pi) z erfcx(z), z = m pi/(sqrt2 a sigma)."""
    gamma = math.pi / (SQRT2 * a_sigma)
    m_switch = int(math.ceil(_WING_SWITCH / gamma))
    if parity == "odd":
        m_switch |= 1
        start = 1
    else:
        m_switch += m_switch % 2
        start = 2
    if (m_switch - start) // 2 + 1 > ctl.max_terms:
        raise NonConvergence(f"tower sweep would exceed max_terms={ctl.max_terms}")
    m = np.arange(start, m_switch, 2, dtype=float)
    z = gamma * m
    total = float((-2.0 + 2.0 * math.sqrt(math.pi) * z * erfcx(z)).sum())
    # wing over m = m_switch, m_switch+2, ...
    dfact = 1.0
    tail = 0.0
    for k in range(1, 42):
        dfact *= 2 * k - 1
        s_m = 4.0 ** (-k) * float(zeta(2 * k, m_switch / 2.0))
        term = 2.0 * ((-1) ** k) * dfact * (2.0 * gamma * gamma) ** (-k) * s_m
        tail += term
        if abs(term) < 1e-20 * max(abs(tail), 1e-300):
            break
    return total + tail


def series_I3(d: DimensionlessParams, ctl: SeriesControl = DEFAULT_SERIES_CONTROL) -> float:
    """Counter-rotating cross correlator; its two half-sums are equal, one is doubled."""
    _require_coincident(d)
    if d.lam == 0.0:
        return 0.0
    pref = d.lam**2 / (8.0 * math.pi) * math.exp(-0.5 * d.sigma_delta**2)
    if pref == 0.0:
        return 0.0
    return pref * 2.0 * _sum_t34(d.a_sigma, "odd", ctl)


def series_I3_both_halves(
    d: DimensionlessParams, ctl: SeriesControl = DEFAULT_SERIES_CONTROL
) -> tuple[float, float]:
    """Both halves of I3 from their separate printed forms (identity check hook).

    The minus half maps onto the plus half term-by-term under m -> -m, so both
    are evaluated through the same tower sum with independent bookkeeping.
    """
    _require_coincident(d)
    gamma = math.pi / (SQRT2 * d.a_sigma)
    m_switch = int(math.ceil(_WING_SWITCH / gamma)) | 1
    pref = d.lam**2 / (8.0 * math.pi) * math.exp(-0.5 * d.sigma_delta**2)
    # plus half: m = 2n+1, n >= 0
    m = np.arange(1, m_switch, 2, dtype=float)
    plus = float((-2.0 + 2.0 * math.sqrt(math.pi) * gamma * m * erfcx(gamma * m)).sum())
    # minus half: m' = 2n+1, n <= -1; term is -2 - 2 sqrt(pi) gamma m' erfcx(-gamma m') at m' < 0
    mneg = -np.arange(1, m_switch, 2, dtype=float)
    minus = float(
        (-2.0 - 2.0 * math.sqrt(math.pi) * gamma * mneg * erfcx(-gamma * mneg)).sum()
    )
    # shared wings
    dfact, tail = 1.0, 0.0
    for k in range(1, 42):
        dfact *= 2 * k - 1
        term = (
            2.0 * ((-1) ** k) * dfact * (2.0 * gamma * gamma) ** (-k)
            * 4.0 ** (-k) * float(zeta(2 * k, m_switch / 2.0))
        )
        tail += term
        if abs(term) < 1e-20 * max(abs(tail), 1e-300):
            break
    return pref * (plus + tail), pref * (minus + tail)


def series_I4_both_halves(
    d: DimensionlessParams, ctl: SeriesControl = DEFAULT_SERIES_CONTROL
) -> tuple[float, float]:
    """Both halves of I4; the minus half equals the plus half without its m = 0 term."""
    _require_coincident(d)
    pref = -d.lam**2 / (8.0 * math.pi) * math.exp(-0.5 * d.sigma_delta**2)
    body = _sum_t34(d.a_sigma, "even", ctl)
    return pref * (-2.0 + body), pref * body


def series_I4(d: DimensionlessParams, ctl: SeriesControl = DEFAULT_SERIES_CONTROL) -> float:
    """Same-wedge counter-rotating correlator, both halves."""
    _require_coincident(d)
    if d.lam == 0.0:
        return 0.0
    plus, minus = series_I4_both_halves(d, ctl)
    return plus + minus


def matrix_elements_series(
    d: DimensionlessParams, ctl: SeriesControl = DEFAULT_SERIES_CONTROL
) -> MatrixElements:
    """All four aL = 0 elements from their closed-form series."""
    return MatrixElements(
        I1=series_I1(d, ctl),
        I2=complex(series_I2(d, ctl)),
        I3=complex(series_I3(d, ctl)),
        I4=complex(series_I4(d, ctl)),
        provenance="series",
    )


def ratio_I3_over_I2(
    d: DimensionlessParams, ctl: SeriesControl = DEFAULT_SERIES_CONTROL
) -> float:
    """Entanglement necessary-condition diagnostic.

    Both correlators reduce to towers of the one-dimensional integral
    int_0^inf z exp(-z^2/2) exp(-k z) dz = 1 - k sqrt(pi/2) erfcx(k/sqrt2);
    the ratio is < 1 for delta > 0 and falls toward 0 as sigma*delta grows,
    which is what leaves the coherences asymmetric enough for entanglement.
    """
    if d.sigma_delta == 0.0:
        return 1.0

    def F(k: np.ndarray) -> np.ndarray:
        return 1.0 - k * math.sqrt(math.pi / 2.0) * erfcx(k / SQRT2)

    def F_wing(k_start: float, step: float) -> float:
        # F(k) = sum_{j>=1} (-1)^{j+1} (2j-1)!! k^{-2j} for k >= 8
        total, dfact = 0.0, 1.0
        for j in range(1, 42):
            dfact *= 2 * j - 1
            term = ((-1) ** (j + 1)) * dfact * step ** (-2 * j) * float(zeta(2 * j, k_start / step))
            total += term
            if abs(term) < 1e-20 * max(abs(total), 1e-300):
                break
        return total

    x = d.sigma_delta
    step = 2.0 * math.pi / d.a_sigma
    half = step / 2.0

    # numerator: k = |2n+1| pi/(a sigma); the two signs fold onto one tower
    m_sw = int(math.ceil(_WING_SWITCH / half)) | 1
    if m_sw // 2 + 1 > ctl.max_terms:
        raise NonConvergence(f"ratio tower would exceed max_terms={ctl.max_terms}")
    m = np.arange(1, m_sw, 2, dtype=float)
    num = 2.0 * float(F(m * half).sum()) + 2.0 * F_wing(m_sw * half, step)

    # denominator: k = |x - (2n+1) pi/(a sigma)| over all integer n; explicit
    # terms cover every offset within the switch of x, wings take the rest
    n_hi = int(math.ceil((x + _WING_SWITCH) / step)) + 1
    if 2 * n_hi > ctl.max_terms:
        raise NonConvergence(f"ratio tower would exceed max_terms={ctl.max_terms}")
    offs_pos = half + step * np.arange(0, n_hi, dtype=float)
    offs = np.concatenate([-offs_pos[::-1], offs_pos])
    den = float(F(np.abs(x - offs)).sum())
    first_excluded = half + step * n_hi
    den += F_wing(first_excluded - x, step) + F_wing(first_excluded + x, step)
    return num / den

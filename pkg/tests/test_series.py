import math

import numpy as np
import pytest

from udwrates import (
    NonConvergence,
    SeriesControl,
    params_from_dimensionless,
    ratio_I3_over_I2,
    series_I1,
    series_I2,
    series_I3,
    series_I4,
)
from udwrates.series import (
    DomainError,
    _terms_minus,
    _terms_plus,
    series_I3_both_halves,
    series_I4_both_halves,
)


@pytest.mark.parametrize("fn", [series_I1, series_I2, series_I3, series_I4])
def test_zero_coupling_gives_zero(fn, set_a):
    assert fn(set_a.with_lam(0.0)) == 0.0


@pytest.mark.parametrize("fn", [series_I1, series_I2, series_I3, series_I4])
def test_lambda_squared_scaling(fn, set_mild):
    base = fn(set_mild.with_lam(1.0))
    for lam in (0.1, 0.25, 0.5, 0.9):
        assert fn(set_mild.with_lam(lam)) == pytest.approx(lam**2 * base, rel=1e-12)


def test_values_finite_and_signed_at_set_a(set_a):
    i1, i2 = series_I1(set_a), series_I2(set_a)
    i3, i4 = series_I3(set_a), series_I4(set_a)
    assert i1 > 0.0 and i2 < 0.0 and i3 < 0.0 and i4 > 0.0
    assert all(math.isfinite(v) for v in (i1, i2, i3, i4))


def test_regression_set_a(set_a):
    # frozen after cross-validation against the independent quadrature oracle
    assert series_I1(set_a) == pytest.approx(0.5721686365928355, rel=1e-12)
    assert series_I2(set_a) == pytest.approx(-0.16276779651298004, rel=1e-12)
    assert series_I3(set_a) == pytest.approx(-2.892688183161347e-88, rel=1e-11)
    assert series_I4(set_a) == pytest.approx(2.898396246953221e-88, rel=1e-11)


def test_stability_at_sigma_delta_30(set_bprime):
    # naive evaluation would need exp(450); the stabilized sums stay finite
    with np.errstate(over="raise"):
        i1 = series_I1(set_bprime)
        i2 = series_I2(set_bprime)
        i3 = series_I3(set_bprime)
        i4 = series_I4(set_bprime)
    assert i1 == pytest.approx(2.365896388639, rel=1e-11)
    assert i2 == pytest.approx(-0.904151699729, rel=1e-11)
    assert abs(i3) < 1e-190 and abs(i4) < 1e-190


def test_I3_halves_equal_from_separate_formulas(set_mild):
    plus, minus = series_I3_both_halves(set_mild)
    assert minus == pytest.approx(plus, rel=1e-12)
    assert plus + minus == pytest.approx(series_I3(set_mild), rel=1e-12)


def test_I4_minus_half_is_plus_half_without_first_term(set_mild):
    plus, minus = series_I4_both_halves(set_mild)
    pref = -set_mild.lam**2 / (8.0 * math.pi) * math.exp(-0.5 * set_mild.sigma_delta**2)
    # the leading term of the plus half is exactly -2 * prefactor
    assert plus - minus == pytest.approx(pref * (-2.0), rel=1e-12)
    assert plus + minus == pytest.approx(series_I4(set_mild), rel=1e-12)


def test_domain_error_outside_coincidence(set_a):
    with pytest.raises(DomainError):
        series_I1(set_a.with_aL(1.0))


def test_nonconvergence_when_budget_too_small(set_a):
    with pytest.raises(NonConvergence):
        series_I1(set_a, SeriesControl(max_terms=3, tail_tol=1e-14))


def test_summand_decay_beyond_crossover():
    # wing terms fall monotonically once past the asymptotic switch
    for x in (0.0, 1.0, 20.0):
        u = np.linspace(8.0, 60.0, 200)
        mags = np.abs(_terms_minus(u, x))
        assert np.all(np.diff(mags) < 0.0) or x > 5.0  # suppressed wings may underflow
        if x == 0.0:
            assert np.all(np.diff(mags) < 0.0)
    un = -np.linspace(8.0, 60.0, 200)
    mags = np.abs(_terms_plus(un, 0.0))
    assert np.all(np.diff(mags) < 0.0)


def test_ratio_is_one_at_zero_gap():
    assert ratio_I3_over_I2(params_from_dimensionless(50.0, 0.0, 0.0, 0.5)) == 1.0


def test_ratio_below_one_with_gap(set_a):
    r = ratio_I3_over_I2(set_a)
    assert 0.0 < r < 1.0


def test_ratio_bounded_and_smaller_at_wide_window():
    # the printed ratio stays in (0, 1) for delta > 0 but oscillates with the
    # pole-lattice phase, so only the coarse comparison is asserted
    rs = {
        sd: ratio_I3_over_I2(params_from_dimensionless(50.0, sd, 0.0, 0.5))
        for sd in (5.0, 10.0, 20.0, 30.0, 40.0)
    }
    assert all(0.0 < r < 1.0 for r in rs.values())
    assert rs[40.0] < rs[20.0]


def test_ratio_matches_direct_quadrature():
    # independent check: numerator/denominator as brute-force 1-D integrals
    from scipy.integrate import quad

    d = params_from_dimensionless(10.0, 1.5, 0.0, 0.5)
    step = 2.0 * math.pi / d.a_sigma

    def bare(k):
        return quad(lambda z: z * math.exp(-0.5 * z * z) * math.exp(-k * z),
                    0.0, 40.0, limit=200, epsabs=1e-13, epsrel=1e-12)[0]

    num = sum(bare(abs(2 * n + 1) * step / 2.0) for n in range(-300, 300))
    den = sum(bare(abs(d.sigma_delta - (2 * n + 1) * step / 2.0)) for n in range(-300, 300))
    # the truncated direct sums carry a ~1e-4 1/n tail themselves
    assert ratio_I3_over_I2(d) == pytest.approx(num / den, rel=5e-4)

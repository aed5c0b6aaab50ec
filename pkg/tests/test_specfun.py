import math

import numpy as np
import pytest

from fracpoisson import specfun
from fracpoisson.errors import InvalidParameter, NonConvergence
from fracpoisson.specfun import SeriesConfig

# reference values from 60-digit mpmath partial sums
ML_HALF_MINUS_ONE = 0.42758357615580700441
PRABHAKAR_REF = 1.80770035214787363150  # M^2_{0.5,1.5}(0.25)


@pytest.mark.parametrize("alpha,k,expected", [
    (0.5, 0, 1.0),
    (3.0, 5, 0.0),
    (0.5, 2, -0.125),
    (5.0, 2, 10.0),
    (-1.0, 3, -1.0),
])
def test_gen_binomial_values(alpha, k, expected):
    assert specfun.gen_binomial(alpha, k) == pytest.approx(expected, abs=1e-15)


def test_gen_binomial_matches_product_formula():
    for alpha in (0.3, 1.7, 2.4):
        for k in range(12):
            prod = math.prod(alpha - j for j in range(k)) / math.factorial(k)
            assert specfun.gen_binomial(alpha, k) == pytest.approx(prod, rel=1e-13, abs=1e-300)


@pytest.mark.parametrize("lam,k,expected", [(2.0, 3, 24.0), (7.3, 0, 1.0), (-0.5, 2, -0.25),
                                           (-2.0, 3, 0.0)])
def test_pochhammer_values(lam, k, expected):
    assert specfun.pochhammer(lam, k) == pytest.approx(expected, abs=1e-15)


def test_negative_k_rejected():
    with pytest.raises(InvalidParameter):
        specfun.gen_binomial(0.5, -1)
    with pytest.raises(InvalidParameter):
        specfun.pochhammer(0.5, -1)


def test_mittag_leffler_closed_forms():
    assert specfun.mittag_leffler(1, 1, 1.5) == pytest.approx(math.exp(1.5), rel=1e-14)
    assert specfun.mittag_leffler(2, 1, -4) == pytest.approx(math.cos(2), rel=1e-13)
    assert specfun.mittag_leffler(0.5, 1, -1) == pytest.approx(ML_HALF_MINUS_ONE, rel=1e-13)


def test_mittag_leffler_half_is_erfcx():
    from scipy.special import erfcx
    for x in np.linspace(0.0, 6.0, 13):
        assert specfun.mittag_leffler(0.5, 1, -x) == pytest.approx(erfcx(x), rel=1e-12)


def test_mittag_leffler_large_negative_argument_is_accurate():
    # E_1(-50) = exp(-50): the alternating series cancels over 20 digits
    assert specfun.mittag_leffler(1, 1, -50) == pytest.approx(math.exp(-50), rel=1e-12)


def test_prabhakar_values():
    assert specfun.prabhakar_ml(0.7, 1, 1, -0.3) == pytest.approx(
        specfun.mittag_leffler(0.7, 1, -0.3), rel=1e-14)
    assert specfun.prabhakar_ml(1, 2, 1, 0) == pytest.approx(1.0)
    assert specfun.prabhakar_ml(0.5, 1.5, 2, 0.25) == pytest.approx(PRABHAKAR_REF, rel=1e-13)


def test_invalid_order_rejected():
    with pytest.raises(InvalidParameter):
        specfun.mittag_leffler(0.0, 1, 1)
    with pytest.raises(InvalidParameter):
        specfun.prabhakar_ml(-1.0, 1, 1, 1)


def test_series_config_validation():
    with pytest.raises(InvalidParameter):
        SeriesConfig(rel_tol=0)
    with pytest.raises(InvalidParameter):
        SeriesConfig(max_terms=0)


def test_mittag_leffler_reports_hopeless_series():
    # the terms peak near exp(20^(1/0.05)); the series is not usable here
    with pytest.raises(NonConvergence):
        specfun.mittag_leffler(0.05, 1, -20)


def test_gen_binomial_near_integer_order():
    assert specfun.gen_binomial(2.2250738585072014e-308, 1) == 2.2250738585072014e-308
    assert specfun.gen_binomial(1e-300, 2) == pytest.approx(-5e-301, rel=1e-12)

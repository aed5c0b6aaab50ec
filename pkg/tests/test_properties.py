import math

import numpy as np
from hypothesis import given, settings, strategies as st

from fracpoisson import fracderiv, pmf, simulate, specfun, ztrans
from fracpoisson.pmf import ProcessParams
from fracpoisson.ztrans import PowerSeries

order = st.floats(0.2, 1.0)
positive = st.floats(0.1, 3.0)
FAST = settings(max_examples=25, deadline=None)


@FAST
@given(st.floats(-3, 3), st.integers(0, 15))
def test_pascal_rule(a, k):
    lhs = specfun.gen_binomial(a, k) + specfun.gen_binomial(a, k + 1)
    rhs = specfun.gen_binomial(a + 1, k + 1)
    assert math.isclose(lhs, rhs, rel_tol=1e-11, abs_tol=1e-12)


@FAST
@given(st.floats(0.1, 3), st.integers(0, 15))
def test_pochhammer_binomial_relation(a, k):
    lhs = specfun.pochhammer(-a, k)
    rhs = (-1) ** k * math.factorial(k) * specfun.gen_binomial(a, k)
    assert math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-300)


@FAST
@given(st.floats(0.3, 1.0), st.floats(-5, 0))
def test_mittag_leffler_completely_monotone_range(a, z):
    # E_a(-x) is decreasing from 1 and stays in (0, 1] for 0 < a <= 1
    v = specfun.mittag_leffler(a, 1, z)
    assert 0 < v <= 1
    assert specfun.mittag_leffler(a, 1, z - 0.5) <= v


@FAST
@given(order, order, positive, st.floats(0.05, 3.0))
def test_tsfpp_column_is_sub_probability(alpha, beta, lam, t):
    values, _, _ = pmf.column(ProcessParams(lam, alpha=alpha, beta=beta), 30, t)
    assert np.all(values >= -1e-15)
    assert values.sum() <= 1 + 1e-9


@FAST
@given(order, st.floats(0, 3), positive, st.floats(0.05, 3.0))
def test_tempered_column_is_sub_probability(alpha, mu, lam, t):
    values, _, _ = pmf.column(ProcessParams(lam, alpha=alpha, mu=mu), 30, t)
    assert np.all(values >= -1e-15)
    assert values.sum() <= 1 + 1e-9


@FAST
@given(st.floats(-2, 2), st.floats(-2, 2),
       st.lists(st.floats(-0.3, 0.3), min_size=1, max_size=4))
def test_series_pow_exponent_law(a, b, tail):
    s = PowerSeries.polynomial([1.0] + tail, 10, 40)
    left = ztrans.series_pow(s, a) * ztrans.series_pow(s, b)
    right = ztrans.series_pow(s, a + b)
    for x, y in zip(left.to_floats(), right.to_floats()):
        assert math.isclose(x, y, rel_tol=1e-12, abs_tol=1e-12)


@FAST
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=12), st.integers(0, 5))
def test_shift_rules_hold(seq, m):
    assert ztrans.shift_identity_check(seq, m)


@FAST
@given(order, st.floats(0, 2), positive,
       st.lists(st.floats(-1, 1), min_size=1, max_size=10), st.floats(-2, 2))
def test_fractional_shift_is_linear(alpha, mu, lam, col, c):
    col = np.array(col)
    other = np.arange(col.size, dtype=float)
    lhs = fracderiv.fractional_shift(col + c * other, alpha, mu, lam)
    rhs = (fracderiv.fractional_shift(col, alpha, mu, lam)
           + c * fracderiv.fractional_shift(other, alpha, mu, lam))
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


@FAST
@given(st.integers(0, 2 ** 32), st.integers(0, 100))
def test_rng_spec_reproducible(seed, stream):
    spec = simulate.RngSpec(seed, stream)
    np.testing.assert_array_equal(spec.generator().random(3), spec.generator().random(3))


@FAST
@given(st.lists(st.integers(0, 30), min_size=1, max_size=50), st.integers(0, 40))
def test_empirical_pmf_bounds(counts, k_max):
    p = simulate.empirical_pmf(np.array(counts), k_max)
    assert p.shape == (k_max + 1,)
    assert np.all(p >= 0) and p.sum() <= 1 + 1e-12

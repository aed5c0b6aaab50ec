import math

import numpy as np
import pytest

from fracpoisson import pmf, specfun
from fracpoisson.errors import InvalidParameter, NonConvergence
from fracpoisson.pmf import CompositeParams, GegenbauerParams, ProcessParams
from fracpoisson.specfun import SeriesConfig

# reference values from independent 60-digit mpmath evaluations (direct
# double sums, Taylor coefficients of the generating function, or Talbot
# inversion of the Laplace transform)
REF = {
    "tfpp": 0.15437156137190843934,         # lam=1 beta=0.5 k=2 t=1
    "sfpp": 0.064808094886369088988,        # lam=1 alpha=0.7 k=3 t=1
    "tsfpp": 0.13660600739194928254,        # lam=1 alpha=0.5 beta=0.5 k=1 t=1
    "tempered_sfpp": 0.12458683608897341761,  # lam=1 alpha=0.7 mu=0.5 k=2 t=1
    "tempered_tsfpp": 0.52066877826591150073,  # lam=1 a=0.6 b=0.5 mu=nu=0.5 k=0 t=0.5
    "gegenbauer": -0.04598493014643029020,  # lam=1 d=0.25 u=0.5 k=2 t=1
    "gegenbauer_ts": -0.03304115472423987333,  # same with beta=0.5
    "composite_a": 0.18393972058572116080,  # lam=0.5 a1=a2=0.5 k=1 t=1
    "composite_b": 0.11774169641585304195,  # lam=1 a1=0.3 a2=0.9 k=2 t=1
}
SFPP_07_COLUMN = [0.3678794411714423216, 0.25751560882000962512, 0.12875780441000481256,
                  0.064808094886369088988, 0.036513567367270531428, 0.023090995450208896402,
                  0.015950005355699434216, 0.011735027731459337233, 0.0090371718105183807982,
                  0.0072010023495910002161, 0.0058909641753275213368]


def test_poisson():
    assert pmf.poisson_pmf(1, 0, 0) == 1.0
    assert pmf.poisson_pmf(2, 1, 1) == pytest.approx(2 * math.exp(-2), rel=1e-15)
    assert pmf.poisson_pmf(1, 10, 1) == pytest.approx(1 / (math.e * math.factorial(10)),
                                                      rel=1e-14)


def test_tfpp():
    assert pmf.tfpp_pmf(1, 1, 3, 2) == pytest.approx(pmf.poisson_pmf(1, 3, 2), rel=1e-13)
    assert pmf.tfpp_pmf(1, 0.5, 0, 1) == pytest.approx(specfun.mittag_leffler(0.5, 1, -1),
                                                       rel=1e-13)
    assert pmf.tfpp_pmf(1, 0.5, 2, 1) == pytest.approx(REF["tfpp"], rel=1e-13)


def test_sfpp():
    assert pmf.sfpp_pmf(1, 0.5, 0, 2) == pytest.approx(math.exp(-2), rel=1e-14)
    assert pmf.sfpp_pmf(1, 1, 4, 1) == pytest.approx(pmf.poisson_pmf(1, 4, 1), rel=1e-13)
    assert pmf.sfpp_pmf(1, 0.7, 3, 1) == pytest.approx(REF["sfpp"], rel=1e-13)


def test_tsfpp():
    assert pmf.tsfpp_pmf(1, 0.6, 0.8, 0, 1) == pytest.approx(
        specfun.mittag_leffler(0.8, 1, -1), rel=1e-13)
    assert pmf.tsfpp_pmf(1, 0.6, 1, 2, 1) == pytest.approx(pmf.sfpp_pmf(1, 0.6, 2, 1),
                                                           rel=1e-13)
    assert pmf.tsfpp_pmf(1, 0.5, 0.5, 1, 1) == pytest.approx(REF["tsfpp"], rel=1e-13)


def test_tempered_sfpp():
    assert pmf.tempered_sfpp_pmf(1, 0.5, 0, 2, 1) == pytest.approx(pmf.sfpp_pmf(1, 0.5, 2, 1),
                                                                   rel=1e-13)
    assert pmf.tempered_sfpp_pmf(2, 0.6, 1, 0, 1) == pytest.approx(
        math.exp(-(3 ** 0.6 - 1)), rel=1e-13)
    assert pmf.tempered_sfpp_pmf(1, 0.7, 0.5, 2, 1) == pytest.approx(REF["tempered_sfpp"],
                                                                     rel=1e-13)
    literal = pmf.tempered_sfpp_pmf(1, 0.7, 0.5, 2, 1, method="literal")
    assert literal == pytest.approx(REF["tempered_sfpp"], rel=1e-12)


@pytest.mark.parametrize("method", ["nested", "collapsed"])
def test_tempered_tsfpp(method):
    f = pmf.tempered_tsfpp_pmf
    assert f(1, 0.6, 0.5, 0, 0, 1, 1, method=method) == pytest.approx(
        pmf.tsfpp_pmf(1, 0.6, 0.5, 1, 1), rel=1e-12)
    assert f(1, 1, 0.5, 0, 0, 0, 1, method=method) == pytest.approx(
        specfun.mittag_leffler(0.5, 1, -1), rel=1e-12)
    assert f(1, 0.6, 0.5, 0.5, 0.5, 0, 0.5, method=method) == pytest.approx(
        REF["tempered_tsfpp"], rel=1e-12)


def test_tempered_tsfpp_methods_agree_small_beta():
    params = ProcessParams(1.0, alpha=0.5, beta=0.4, mu=2.0, nu=0.5)
    nested, _, _ = pmf.column(params, 10, 0.5, method="nested")
    collapsed, _, _ = pmf.column(params, 10, 0.5, method="collapsed")
    np.testing.assert_allclose(nested, collapsed, rtol=0, atol=1e-12)


def test_gegenbauer():
    g = GegenbauerParams(1, 0.25, 0.5)
    assert pmf.gegenbauer_pmf(g, 0, 2) == pytest.approx(math.exp(-2), rel=1e-14)
    assert pmf.gegenbauer_pmf(GegenbauerParams(1, 0.3, 1), 2, 1) == pytest.approx(
        pmf.sfpp_pmf(1, 0.6, 2, 1), rel=1e-13)
    assert pmf.gegenbauer_pmf(g, 2, 1) == pytest.approx(REF["gegenbauer"], rel=1e-12)


def test_gegenbauer_ts():
    g = GegenbauerParams(1, 0.25, 0.5, 1.0)
    assert pmf.gegenbauer_ts_pmf(g, 2, 1) == pytest.approx(pmf.gegenbauer_pmf(g, 2, 1),
                                                           rel=1e-13)
    assert pmf.gegenbauer_ts_pmf(GegenbauerParams(1, 0.3, 1, 0.5), 1, 1) == pytest.approx(
        pmf.tsfpp_pmf(1, 0.6, 0.5, 1, 1), rel=1e-12)
    assert pmf.gegenbauer_ts_pmf(GegenbauerParams(1, 0.25, 0.5, 0.5), 2, 1) == pytest.approx(
        REF["gegenbauer_ts"], rel=1e-12)


def test_composite():
    assert pmf.composite_shift_pmf(1, 1, 1, 0, 1) == pytest.approx(math.exp(-2), rel=1e-14)
    assert pmf.composite_shift_pmf(0.5, 0.5, 0.5, 1, 1) == pytest.approx(REF["composite_a"],
                                                                         rel=1e-13)
    assert pmf.composite_shift_pmf(1, 0.3, 0.9, 2, 1) == pytest.approx(REF["composite_b"],
                                                                       rel=1e-13)


def test_table_shapes_and_initial_condition():
    table = pmf.pmf_table(ProcessParams(1.0), 2, [0.0])
    np.testing.assert_array_equal(table.values[:, 0], [1.0, 0.0, 0.0])
    table = pmf.pmf_table(ProcessParams(1.0, alpha=1.0), 5, [1.0], family="sfpp")
    np.testing.assert_allclose(table.values[:, 0],
                               [pmf.poisson_pmf(1, k, 1) for k in range(6)], rtol=1e-13)
    table = pmf.pmf_table(ProcessParams(1.0, alpha=0.7), 10, [1.0])
    np.testing.assert_allclose(table.values[:, 0], SFPP_07_COLUMN, rtol=1e-13)


def test_table_tsfpp_matrix_against_scalar():
    params = ProcessParams(1.0, alpha=0.7, beta=0.9)
    table = pmf.pmf_table(params, 10, [0.5, 1.0, 2.0])
    assert table.values.shape == (11, 3)
    for i, t in enumerate(table.t):
        for k in (0, 4, 10):
            assert table.values[k, i] == pytest.approx(pmf.tsfpp_pmf(1, 0.7, 0.9, k, t),
                                                       rel=1e-12, abs=1e-16)


def test_table_independent_of_workers():
    params = ProcessParams(1.0, alpha=0.6, mu=0.5)
    a = pmf.pmf_table(params, 8, [0.5, 1.0], workers=1)
    b = pmf.pmf_table(params, 8, [0.5, 1.0], workers=2)
    np.testing.assert_array_equal(a.values, b.values)


def test_composite_methods_agree():
    params = CompositeParams(1.0, 0.3, 0.9)
    a, _, _ = pmf.column(params, 12, 1.5, method="series")
    b, _, _ = pmf.column(params, 12, 1.5)
    np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-15)


@pytest.mark.parametrize("kwargs", [
    dict(lam=0), dict(lam=1, alpha=1.5), dict(lam=1, beta=0), dict(lam=1, mu=-1),
    dict(lam=1, nu=float("nan")),
])
def test_process_params_validation(kwargs):
    with pytest.raises(InvalidParameter):
        ProcessParams(**kwargs)


def test_other_params_validation():
    with pytest.raises(InvalidParameter):
        GegenbauerParams(1, 0.6, 0.5)
    with pytest.raises(InvalidParameter):
        GegenbauerParams(1, 0.25, 1.5)
    with pytest.raises(InvalidParameter):
        CompositeParams(1, 0.5, 0)


def test_table_grid_validation():
    with pytest.raises(InvalidParameter):
        pmf.pmf_table(ProcessParams(1.0), 3, [1.0, 0.5])
    with pytest.raises(InvalidParameter):
        pmf.pmf_table(ProcessParams(1.0), -1, [1.0])


def test_family_inference():
    assert ProcessParams(1).family == "poisson"
    assert ProcessParams(1, beta=0.5).family == "tfpp"
    assert ProcessParams(1, alpha=0.5).family == "sfpp"
    assert ProcessParams(1, alpha=0.5, beta=0.5).family == "tsfpp"
    assert ProcessParams(1, alpha=0.5, mu=1).family == "tempered-sfpp"
    assert ProcessParams(1, alpha=0.5, beta=0.5, nu=1).family == "tempered-tsfpp"


def test_term_cap_raises():
    with pytest.raises(NonConvergence):
        pmf.sfpp_pmf(1, 0.7, 3, 5, SeriesConfig(max_terms=3))

import math

import numpy as np
import pytest
from scipy import stats

from fracpoisson import simulate, specfun
from fracpoisson.errors import InvalidParameter, SamplingStall
from fracpoisson.pmf import ProcessParams
from fracpoisson.simulate import PathGrid, RngSpec, SampleSet

N = 20_000


def within(sample, target, n_se=4.0):
    sample = np.asarray(sample, dtype=float)
    se = sample.std(ddof=1) / math.sqrt(sample.size)
    return abs(sample.mean() - target) <= n_se * se


def test_rng_spec_validation_and_streams():
    with pytest.raises(InvalidParameter):
        RngSpec(-1)
    with pytest.raises(InvalidParameter):
        RngSpec(0, -2)
    a = RngSpec(5, 0).generator().random(4)
    b = RngSpec(5, 1).generator().random(4)
    assert not np.array_equal(a, b)
    np.testing.assert_array_equal(a, RngSpec(5, 0).generator().random(4))


def test_half_stable_is_levy():
    x = simulate.sample_stable(0.5, 1.0, RngSpec(1), N)
    # Laplace transform exp(-sqrt(s)) is the Levy law with scale 1/2
    assert stats.kstest(x, stats.levy(scale=0.5).cdf).pvalue > 1e-3
    assert within(x <= 1.0, math.erfc(0.5))


@pytest.mark.parametrize("alpha,t", [(0.3, 1.0), (0.7, 2.5)])
def test_stable_laplace_transform(alpha, t):
    x = simulate.sample_stable(alpha, t, RngSpec(2), N)
    for s in (0.5, 2.0):
        assert within(np.exp(-s * x), math.exp(-t * s ** alpha))


@pytest.mark.parametrize("alpha,mu,t", [(0.6, 1.5, 3.0), (0.3, 4.0, 0.5), (0.9, 0.2, 1.0)])
def test_tempered_laplace_transform(alpha, mu, t):
    x = simulate.sample_tempered_stable(alpha, mu, t, RngSpec(3), N)
    for s in (0.5, 2.0):
        assert within(np.exp(-s * x), math.exp(-t * ((s + mu) ** alpha - mu ** alpha)))


def test_scalar_draws():
    assert isinstance(simulate.sample_stable(0.5, 1.0, RngSpec(0)), float)
    assert isinstance(simulate.sample_inverse_subordinator(0.5, 0.0, 1.0, RngSpec(0)), float)
    with pytest.raises(InvalidParameter):
        simulate.sample_stable(0.5, 0.0, RngSpec(0))


def test_inverse_stable_mean():
    y = simulate.sample_inverse_subordinator(0.5, 0.0, 1.0, RngSpec(4), N)
    assert within(y, 1.0 / math.gamma(1.5))


def test_inverse_tempered_laplace_with_refinement():
    # Talbot inversion of phi(s) / (s (1 + phi(s))), phi(s) = (s+1)^0.7 - 1, at t = 1
    oracle = 0.23881237643741393
    y = simulate.sample_inverse_subordinator(0.7, 1.0, 1.0, RngSpec(5), 5000,
                                             grid_dt=0.02, refine_stages=2)
    assert within(np.exp(-y), oracle)


def test_first_passage_cap_raises(monkeypatch):
    monkeypatch.setattr(simulate, "INCREMENT_CAP", 10)
    with pytest.raises(SamplingStall):
        simulate.sample_inverse_subordinator(0.5, 1.0, 1.0, RngSpec(0), 5)


def test_ml_waiting_time_survival():
    w = simulate.sample_ml_waiting_times(1.0, 0.5, N, RngSpec(6))
    for x in (0.3, 1.0, 4.0):
        assert within(w > x, specfun.mittag_leffler(0.5, 1, -x ** 0.5))


def test_process_poisson_mean_and_zero_time():
    s = simulate.sample_process(ProcessParams(2.0), 1.0, N, RngSpec(7))
    assert within(s.counts, 2.0)
    z = simulate.sample_process(ProcessParams(2.0, alpha=0.5, beta=0.5), 0.0, 10, RngSpec(7))
    assert not z.counts.any()


def test_tempered_count_mean():
    lam, a, mu, t = 2.0, 0.6, 1.5, 3.0
    s = simulate.sample_process(ProcessParams(lam, alpha=a, mu=mu), t, N, RngSpec(8))
    assert within(s.counts, lam * a * mu ** (a - 1) * t)


def test_determinism_and_merge_order():
    params = ProcessParams(1.0, alpha=0.7, beta=0.6, mu=0.5, nu=0.5)
    a = simulate.sample_process(params, 1.0, 300, RngSpec(9, 2))
    b = simulate.sample_process(params, 1.0, 300, RngSpec(9, 2))
    np.testing.assert_array_equal(a.counts, b.counts)
    parts = [simulate.sample_process(params, 1.0, 100, RngSpec(9, s)) for s in range(3)]
    m1 = simulate.merge_sample_sets(parts)
    m2 = simulate.merge_sample_sets(parts[::-1])
    np.testing.assert_array_equal(m1.counts, m2.counts)
    assert m1.streams == (0, 1, 2)
    par = simulate.sample_process_parallel(params, 1.0, 300, 9, 3)
    np.testing.assert_array_equal(par.counts, m1.counts)


def test_merge_rejects_mixed_processes():
    a = simulate.sample_process(ProcessParams(1.0), 1.0, 5, RngSpec(0, 0))
    b = simulate.sample_process(ProcessParams(2.0), 1.0, 5, RngSpec(0, 1))
    with pytest.raises(InvalidParameter):
        simulate.merge_sample_sets([a, b])


def test_sample_set_and_path_validation():
    with pytest.raises(InvalidParameter):
        SampleSet(ProcessParams(1.0), 1.0, np.array([1, -1]))
    with pytest.raises(InvalidParameter):
        PathGrid(np.array([0.0, 1.0]), np.array([2.0, 1.0]))
    s = SampleSet(ProcessParams(1.0), 1.0, np.array([0, 1, 1, 5]))
    np.testing.assert_allclose(s.empirical_pmf(2), [0.25, 0.5, 0.0])
    assert s.mean() == 1.75


def test_paths_are_monotone():
    times = np.linspace(0.0, 3.0, 200)
    for mu in (0.0, 2.0):
        path = simulate.sample_subordinator_path(0.6, mu, times, RngSpec(10))
        assert path.values[0] == 0.0
        assert np.all(np.diff(path.values) >= 0)


def test_renewal_zero_counts():
    s = simulate.sample_tfpp_renewal(1.0, 0.5, 1.0, N, RngSpec(11))
    assert within(s.counts == 0, specfun.mittag_leffler(0.5, 1, -1))


def test_stable_density_series_integrates_tail():
    from scipy import integrate
    # P(S > 2) from the sampler against the integral of the series density
    tail, _ = integrate.quad(lambda x: float(simulate.stable_density_series(0.7, x)), 2, np.inf)
    x = simulate.sample_stable(0.7, 1.0, RngSpec(12), N)
    assert within(x > 2, tail)


def test_invalid_orders():
    with pytest.raises(InvalidParameter):
        simulate.sample_stable(1.0, 1.0, RngSpec(0))
    with pytest.raises(InvalidParameter):
        simulate.sample_tempered_stable(0.5, -1.0, 1.0, RngSpec(0))
    with pytest.raises(TypeError):
        simulate.sample_stable(0.5, 1.0, 123)

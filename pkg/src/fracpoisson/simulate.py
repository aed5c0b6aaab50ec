"""Monte Carlo sampling of subordinators and time-changed Poisson counts.

Every process in the family hierarchy is a Poisson process run on a random
clock:

* the stable subordinator ``S_a(t)`` with Laplace transform ``exp(-t s^a)``,
* its tempered version ``S_{a,mu}(t)`` with transform
  ``exp(-t((s+mu)^a - mu^a))``,
* the inverse ``Y_{b,nu}(t) = inf{y > 0 : S_{b,nu}(y) > t}``.

``sample_process`` composes these clocks according to the parameters and then
draws Poisson counts with mean ``lam * clock``.  All randomness comes from a
``numpy`` PCG64 generator keyed by ``(seed, stream)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidParameter, SamplingStall
from .pmf import ProcessParams

__all__ = [
    "RngSpec",
    "SampleSet",
    "PathGrid",
    "sample_stable",
    "sample_tempered_stable",
    "sample_subordinator_path",
    "sample_inverse_subordinator",
    "sample_process",
    "sample_process_parallel",
    "sample_tfpp_renewal",
    "sample_ml_waiting_times",
    "merge_sample_sets",
    "empirical_pmf",
    "stable_density_series",
    "REJECTION_CAP",
    "INCREMENT_CAP",
]

REJECTION_CAP = 1_000_000
INCREMENT_CAP = 100_000_000
_MAX_SEED = 2 ** 64


@dataclass(frozen=True)
class RngSpec:
    """Seed and substream index of a reproducible random stream."""

    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) < _MAX_SEED):
            raise InvalidParameter(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if int(self.stream) < 0:
            raise InvalidParameter(f"stream must be >= 0, got {self.stream}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(seq))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngSpec):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngSpec or a numpy Generator")


@dataclass(frozen=True)
class SampleSet:
    """Independent draws of ``N(t)`` together with the seed and streams that produced them."""

    params: ProcessParams
    t: float
    counts: np.ndarray
    rng: RngSpec | None = None
    streams: tuple[int, ...] = ()

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or not np.issubdtype(counts.dtype, np.integer):
            raise InvalidParameter("counts must be a 1-d integer array")
        if counts.size and counts.min() < 0:
            raise InvalidParameter("counts must be nonnegative")

    @property
    def n(self) -> int:
        return int(np.asarray(self.counts).size)

    def empirical_pmf(self, k_max: int) -> np.ndarray:
        return empirical_pmf(self.counts, k_max)

    def mean(self) -> float:
        return float(np.mean(self.counts))

    def var(self) -> float:
        return float(np.var(self.counts, ddof=1))


@dataclass(frozen=True)
class PathGrid:
    """A subordinator path sampled on an increasing time grid."""

    times: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.shape != values.shape or times.ndim != 1:
            raise InvalidParameter("times and values must be 1-d arrays of equal length")
        if np.any(np.diff(times) <= 0):
            raise InvalidParameter("times must be strictly increasing")
        if values.size and (values[0] < 0 or np.any(np.diff(values) < 0)):
            raise InvalidParameter("path values must be nonnegative and nondecreasing")


def empirical_pmf(counts, k_max: int) -> np.ndarray:
    """Relative frequencies of ``0..k_max`` (mass above k_max is dropped)."""
    counts = np.asarray(counts)
    hist = np.bincount(counts[counts <= k_max], minlength=k_max + 1)
    return hist / max(counts.size, 1)


def merge_sample_sets(sets: Sequence[SampleSet]) -> SampleSet:
    """Concatenate draws from several substreams, ordered by stream index.

    The result does not depend on the order in which ``sets`` is given.
    """
    if not sets:
        raise InvalidParameter("nothing to merge")
    first = sets[0]
    for s in sets:
        if s.params != first.params or s.t != first.t:
            raise InvalidParameter("can only merge samples of the same process and time")
    ordered = sorted(sets, key=lambda s: s.streams or ((s.rng.stream,) if s.rng else (0,)))
    streams = tuple(st for s in ordered for st in (s.streams or ((s.rng.stream,) if s.rng else ())))
    counts = np.concatenate([np.asarray(s.counts) for s in ordered])
    return SampleSet(first.params, first.t, counts, ordered[0].rng, streams)


# ---------------------------------------------------------------------------
# stable and tempered stable variables


def _check_order(name, value):
    if not 0 < value < 1:
        raise InvalidParameter(f"{name} must lie in (0, 1), got {value}")


def _kanter(alpha: float, gen: np.random.Generator, size) -> np.ndarray:
    """Standard one-sided stable draws with Laplace transform exp(-s^alpha)."""
    u = gen.uniform(0.0, math.pi, size)
    e = gen.standard_exponential(size)
    a = ((np.sin(alpha * u) / np.sin(u)) ** (1.0 / (1.0 - alpha))
         * np.sin((1.0 - alpha) * u) / np.sin(alpha * u))
    return (a / e) ** ((1.0 - alpha) / alpha)


def sample_stable(alpha: float, t, rng, size=None):
    """Draw ``S_alpha(t)``, using ``S_alpha(t) = t^(1/alpha) S_alpha(1)`` exactly.

    ``t`` may be an array, in which case one draw per entry is returned.
    """
    _check_order("alpha", alpha)
    gen = _as_generator(rng)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise InvalidParameter("t must be > 0")
    shape = size if size is not None else t_arr.shape
    draw = _kanter(alpha, gen, shape) * t_arr ** (1.0 / alpha)
    return float(draw) if np.ndim(draw) == 0 else draw


def _tempered_batch(alpha, mu, dt, gen, size) -> np.ndarray:
    """One tempered increment per entry of ``dt`` (array) by exponential rejection."""
    dt = np.broadcast_to(np.asarray(dt, dtype=float), size).copy()
    out = np.empty(size)
    todo = np.arange(out.size)
    scale = dt ** (1.0 / alpha)
    for _ in range(REJECTION_CAP):
        x = _kanter(alpha, gen, todo.size) * scale[todo]
        accept = gen.uniform(size=todo.size) < np.exp(-mu * x)
        out[todo[accept]] = x[accept]
        todo = todo[~accept]
        if todo.size == 0:
            return out
    raise SamplingStall(f"tempered stable rejection exceeded {REJECTION_CAP} rounds")


def _tempered_sum(alpha, mu, t_arr, gen) -> np.ndarray:
    """``S_{alpha,mu}(t)`` for every entry of ``t_arr`` (t may be 0)."""
    t_arr = np.asarray(t_arr, dtype=float)
    # chunks of length at most ln2 / mu^alpha keep acceptance >= 1/2
    chunks = np.maximum(1, np.ceil(t_arr * mu ** alpha / math.log(2.0))).astype(np.int64)
    total = np.zeros(t_arr.shape)
    positive = t_arr > 0
    for c in range(int(chunks.max(initial=1))):
        idx = np.nonzero(positive & (chunks > c))[0]
        if idx.size == 0:
            break
        total[idx] += _tempered_batch(alpha, mu, t_arr[idx] / chunks[idx], gen, idx.size)
    return total


def sample_tempered_stable(alpha: float, mu: float, t, rng, size=None):
    """Draw the tempered stable subordinator ``S_{alpha,mu}(t)`` exactly.

    Each of ``ceil(t mu^alpha / ln 2)`` independent increments is a stable
    draw accepted with probability ``exp(-mu x)``.  ``mu = 0`` is plain
    ``sample_stable``.
    """
    _check_order("alpha", alpha)
    if mu < 0:
        raise InvalidParameter(f"mu must be >= 0, got {mu}")
    if mu == 0:
        return sample_stable(alpha, t, rng, size)
    gen = _as_generator(rng)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise InvalidParameter("t must be > 0")
    if size is not None:
        t_arr = np.broadcast_to(t_arr, size)
    draw = _tempered_sum(alpha, mu, t_arr, gen)
    return float(draw) if np.ndim(draw) == 0 else draw


def sample_subordinator_path(alpha: float, mu: float, times, rng) -> PathGrid:
    """Path of ``S_{alpha,mu}`` on ``times`` from independent increments."""
    _check_order("alpha", alpha)
    gen = _as_generator(rng)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] < 0 or np.any(np.diff(times) <= 0):
        raise InvalidParameter("times must be a nonempty increasing grid starting at >= 0")
    steps = np.diff(np.concatenate([[0.0], times]))
    if mu == 0:
        incr = np.zeros_like(steps)
        pos = steps > 0
        incr[pos] = _kanter(alpha, gen, int(pos.sum())) * steps[pos] ** (1.0 / alpha)
    else:
        incr = _tempered_sum(alpha, mu, steps, gen)
    return PathGrid(times, np.cumsum(incr))


# ---------------------------------------------------------------------------
# inverse subordinators


def _increments(beta, nu, step, gen, size):
    if nu > 0:
        return _tempered_batch(beta, nu, step, gen, size)
    return _kanter(beta, gen, size) * step ** (1.0 / beta)


def _first_passage(beta, nu, t, gen, size, grid_dt, stages):
    """First passage of ``S_{beta,nu}`` above ``t`` by grid simulation.

    A forward pass with step ``grid_dt`` brackets the passage in a step
    ``[y, y + h]`` whose increment is known to exceed the remaining gap
    ``t - S(y)``.  Each refinement stage draws the two half-step increments
    jointly conditioned on that event (by rejection) and keeps the half that
    contains the crossing, so the bracket halves without distorting the law.
    The midpoint of the final bracket is returned, which is within
    ``grid_dt * 2**-(stages + 1)`` of the passage time.

    Simply re-simulating from the last grid point below ``t`` would ignore
    the information that the discarded step crossed and biases the passage
    upward.  The conditioning done here is exact but its acceptance rate
    roughly halves with every stage, so only a few stages are affordable.
    """
    level = np.zeros(size)
    gap = np.full(size, float(t))
    consumed = 0
    step = float(grid_dt)
    active = np.arange(size)
    while active.size:
        incr = _increments(beta, nu, step, gen, active.size)
        consumed += active.size
        if consumed > INCREMENT_CAP:
            raise SamplingStall(f"first passage used more than {INCREMENT_CAP} increments")
        below = incr <= gap[active]
        stay = active[below]
        level[stay] += step
        gap[stay] -= incr[below]
        active = stay
    for _ in range(stages):
        half = 0.5 * step
        pending = np.arange(size)
        for _ in range(REJECTION_CAP):
            first = _increments(beta, nu, half, gen, pending.size)
            second = _increments(beta, nu, half, gen, pending.size)
            g = gap[pending]
            hit = first + second > g
            late = hit & (first <= g)
            moved = pending[late]
            level[moved] += half
            gap[moved] -= first[late]
            pending = pending[~hit]
            if pending.size == 0:
                break
        else:
            raise SamplingStall(f"bracket refinement exceeded {REJECTION_CAP} rounds")
        step = half
    return level + 0.5 * step


def sample_inverse_subordinator(beta: float, nu: float, t: float, rng, size=None,
                                grid_dt: float | None = None, refine_stages: int = 0):
    """Draw ``Y_{beta,nu}(t)``, the first passage of ``S_{beta,nu}`` above ``t``.

    For ``nu = 0`` the self-similarity ``Y_beta(t) = (t / S_beta(1))^beta``
    gives exact draws.  For ``nu > 0`` the passage is bracketed on a grid of
    step ``grid_dt`` (default ``0.01 t``), optionally narrowed by
    ``refine_stages`` exact conditional halvings, and the bracket midpoint is
    returned.
    """
    _check_order("beta", beta)
    if nu < 0:
        raise InvalidParameter(f"nu must be >= 0, got {nu}")
    if t < 0:
        raise InvalidParameter(f"t must be >= 0, got {t}")
    gen = _as_generator(rng)
    n = 1 if size is None else int(size)
    if t == 0:
        out = np.zeros(n)
    elif nu == 0:
        out = (t / _kanter(beta, gen, n)) ** beta
    else:
        grid_dt = 0.01 * t if grid_dt is None else float(grid_dt)
        if not grid_dt > 0:
            raise InvalidParameter(f"grid_dt must be > 0, got {grid_dt}")
        if refine_stages < 0:
            raise InvalidParameter(f"refine_stages must be >= 0, got {refine_stages}")
        out = _first_passage(beta, nu, t, gen, n, grid_dt, int(refine_stages))
    return float(out[0]) if size is None else out


# ---------------------------------------------------------------------------
# counting processes


def _check_sample_size(n):
    if int(n) < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")


def sample_process(params: ProcessParams, t: float, n: int, rng,
                   grid_dt: float | None = None) -> SampleSet:
    """``n`` draws of ``N(S_{alpha,mu}(Y_{beta,nu}(t)))`` with Poisson rate ``lam``.

    ``beta = 1`` skips the inverse subordinator and ``alpha = 1`` skips the
    outer subordinator, whose transform is then ``exp(-t s)`` for any ``mu``.
    """
    if not isinstance(params, ProcessParams):
        raise InvalidParameter("sample_process needs ProcessParams")
    _check_sample_size(n)
    if t < 0:
        raise InvalidParameter(f"t must be >= 0, got {t}")
    spec = rng if isinstance(rng, RngSpec) else None
    gen = _as_generator(rng)
    n = int(n)
    p = params
    clock = np.full(n, float(t))
    if t > 0 and p.beta < 1:
        clock = sample_inverse_subordinator(p.beta, p.nu, t, gen, n, grid_dt)
    if t > 0 and p.alpha < 1:
        pos = clock > 0
        outer = np.zeros(n)
        if p.mu == 0:
            outer[pos] = _kanter(p.alpha, gen, int(pos.sum())) * clock[pos] ** (1.0 / p.alpha)
        else:
            outer[pos] = _tempered_sum(p.alpha, p.mu, clock[pos], gen)
        clock = outer
    counts = gen.poisson(p.lam * clock).astype(np.int64)
    return SampleSet(p, float(t), counts, spec, (spec.stream,) if spec else ())


def sample_process_parallel(params: ProcessParams, t: float, n: int, seed: int,
                            streams: int, grid_dt: float | None = None) -> SampleSet:
    """Split ``n`` draws over ``streams`` substreams of ``seed`` and merge them.

    Worker processes are used when ``FRACPOISSON_THREADS`` allows it.  The
    result depends only on ``(seed, streams, n)``.
    """
    from concurrent.futures import ProcessPoolExecutor

    from .pmf import _workers

    _check_sample_size(n)
    if streams < 1:
        raise InvalidParameter(f"streams must be >= 1, got {streams}")
    sizes = [n // streams + (1 if i < n % streams else 0) for i in range(streams)]
    tasks = [(params, t, size, RngSpec(seed, i), grid_dt)
             for i, size in enumerate(sizes) if size > 0]
    workers = min(_workers(), len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_sample_task, tasks))
    else:
        parts = [_sample_task(task) for task in tasks]
    return merge_sample_sets(parts)


def _sample_task(args):
    params, t, size, spec, grid_dt = args
    return sample_process(params, t, size, spec, grid_dt)


def sample_ml_waiting_times(lam: float, beta: float, size: int, rng) -> np.ndarray:
    """Mittag-Leffler distributed waiting times, ``P(T > x) = E_beta(-lam x^beta)``.

    Uses the mixture ``T = -lam^(-1/beta) ln U (sin(b pi)/tan(b pi V) - cos(b pi))^(1/beta)``
    with independent uniforms ``U, V``.  ``beta = 1`` gives exponential times.
    """
    if not lam > 0:
        raise InvalidParameter(f"lambda must be > 0, got {lam}")
    if not 0 < beta <= 1:
        raise InvalidParameter(f"beta must lie in (0, 1], got {beta}")
    gen = _as_generator(rng)
    e = gen.standard_exponential(size)
    if beta == 1:
        return e / lam
    v = gen.uniform(size=size)
    bp = beta * math.pi
    mix = (math.sin(bp) / np.tan(bp * v) - math.cos(bp)) ** (1.0 / beta)
    return lam ** (-1.0 / beta) * e * mix


def sample_tfpp_renewal(lam: float, beta: float, t: float, n: int, rng) -> SampleSet:
    """Counts of a renewal process with Mittag-Leffler waiting times."""
    _check_sample_size(n)
    if t < 0:
        raise InvalidParameter(f"t must be >= 0, got {t}")
    params = ProcessParams(lam, beta=beta)
    spec = rng if isinstance(rng, RngSpec) else None
    gen = _as_generator(rng)
    n = int(n)
    clock = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    active = np.arange(n)
    while active.size:
        clock[active] += sample_ml_waiting_times(lam, beta, active.size, gen)
        arrived = clock[active] <= t
        counts[active[arrived]] += 1
        active = active[arrived]
    return SampleSet(params, float(t), counts, spec, (spec.stream,) if spec else ())


def stable_density_series(alpha: float, x, terms: int = 60):
    """Density of ``S_alpha(1)`` from its convergent series in ``x^-alpha``.

    ``f(x) = (1/pi) sum_{k>=1} (-1)^(k+1) Gamma(alpha k + 1) / k! x^(-alpha k - 1) sin(pi alpha k)``.
    Accurate for moderate to large ``x``; used to validate the sampler.
    """
    _check_order("alpha", alpha)
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    log_x = np.log(x)
    for k in range(1, terms + 1):
        log_mag = math.lgamma(alpha * k + 1.0) - math.lgamma(k + 1.0)
        sign = 1.0 if k % 2 else -1.0
        total += sign * math.sin(math.pi * alpha * k) * np.exp(log_mag - (alpha * k + 1.0) * log_x)
    return total / math.pi

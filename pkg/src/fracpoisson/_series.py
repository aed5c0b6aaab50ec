"""Adaptive extended-precision summation shared by the series evaluators.

Every public series in the package is summed in a multiprecision context whose
working precision is chosen so that the rounding error of the accumulated
sum stays below the truncation tolerance.  A first pass runs at a precision
predicted from a cheap float estimate of the largest term; if the observed
peak term turns out to be larger than the tolerance allows, the sum is
recomputed with more digits.

Series are supplied as iterators of ``(values, magnitude)`` pairs.  ``values``
is the list of contributions of one term to each entry of a column (for
example ``P(0..K, t)``) and ``magnitude`` is an upper bound on ``|values|``
that is used by the stopping rule.  Callers pass a smooth envelope there so
that exact zeros in individual terms cannot end a series prematurely.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from typing import Callable, Iterable, Iterator, Sequence

import gmpy2

from .errors import NonConvergence

MIN_DPS = 30
MAX_DPS = 4000
_LOG2_10 = math.log2(10.0)


class MPContext:
    """The handful of multiprecision operations the series code needs.

    Backed by gmpy2 (MPFR), whose active context is thread-local, so
    concurrent evaluations in different threads do not interfere.
    """

    mpf = staticmethod(gmpy2.mpfr)
    exp = staticmethod(gmpy2.exp)
    log10 = staticmethod(gmpy2.log10)
    fsum = staticmethod(gmpy2.fsum)

    @property
    def prec(self) -> int:
        return gmpy2.get_context().precision

    @prec.setter
    def prec(self, bits: int):
        gmpy2.get_context().precision = int(bits)

    @property
    def dps(self) -> int:
        return int((self.prec - 1) / _LOG2_10)

    @dps.setter
    def dps(self, digits: int):
        self.prec = int(math.ceil(digits * _LOG2_10)) + 4

    @property
    def zero(self):
        return gmpy2.mpfr(0)

    @property
    def one(self):
        return gmpy2.mpfr(1)

    @property
    def eps(self):
        return gmpy2.mul_2exp(gmpy2.mpfr(1), 1 - self.prec)

    @staticmethod
    def ldexp(x, n: int):
        return gmpy2.mul_2exp(x, n) if n >= 0 else gmpy2.div_2exp(x, -n)

    @staticmethod
    def rgamma(x):
        """1/Gamma(x) with the value 0 at the poles."""
        x = gmpy2.mpfr(x)
        if x <= 0 and gmpy2.is_integer(x):
            return gmpy2.mpfr(0)
        return 1 / gmpy2.gamma(x)

    @staticmethod
    def power(x, y):
        return gmpy2.mpfr(x) ** y


_CTX = MPContext()


@contextmanager
def workdps(dps: int):
    """Run with ``dps`` decimal digits of working precision (thread-local)."""
    context = gmpy2.get_context()
    saved = context.precision
    _CTX.dps = dps
    try:
        yield _CTX
    finally:
        context.precision = saved


def log10_peak(log_term: Callable[[int], float], limit: int = 100_000) -> float:
    """Largest value of ``log_term(n)`` (natural log) over n, in decimal digits.

    Scans until the log-magnitude has dropped 60 nats below the running
    maximum after the maximum was reached.  Terms that are exact zeros can be
    reported as ``-inf``.
    """
    best = -math.inf
    n = 0
    while n < limit:
        value = log_term(n)
        if value > best:
            best = value
        elif n > 8 and value < best - 60.0:
            break
        n += 1
    if best == -math.inf:
        return 0.0
    return best / math.log(10.0)


def initial_dps(peak_log10: float, guard: int = 20) -> int:
    """Starting precision for a series whose largest term has ``peak_log10`` digits.

    Raises :class:`NonConvergence` straight away when the cancellation alone
    would need more than ``MAX_DPS`` digits.
    """
    need = guard + math.ceil(max(0.0, peak_log10))
    if need > MAX_DPS:
        raise NonConvergence(f"series terms reach 10^{peak_log10:.0f}; cancellation needs "
                             f"more than the {MAX_DPS}-digit precision cap")
    return int(max(MIN_DPS, need))


def accumulate(terms: Iterable[tuple[Sequence, object]], size: int, config, ctx,
               *, min_terms: int = 0, level: str = "series"):
    """Sum a vector series at the current precision of ``ctx``.

    Stops once ``stagnation_window`` consecutive magnitudes fall below
    ``rel_tol * min_k |partial_k| + abs_tol``.  Returns the partial sums, the
    per-entry peak ``|term|`` and the number of terms consumed.
    """
    partial = [ctx.zero] * size
    peak = [ctx.zero] * size
    rel = ctx.mpf(config.rel_tol)
    floor = ctx.mpf(config.abs_tol)
    window = config.stagnation_window
    run = 0
    n = 0
    for values, magnitude in terms:
        n += 1
        for i, v in enumerate(values):
            if v:
                partial[i] += v
                a = abs(v)
                if a > peak[i]:
                    peak[i] = a
        if n > min_terms:
            # min_k |partial_k| <= |partial_0|: skip the full scan while far away
            small = magnitude < rel * abs(partial[0]) + floor
            if small:
                small = magnitude < rel * min(abs(p) for p in partial) + floor
            if small:
                run += 1
                if run >= window:
                    return partial, peak, n
            else:
                run = 0
        if n >= config.max_terms:
            raise NonConvergence(
                f"{level}: no stagnation within max_terms={config.max_terms}", level=level)
    return partial, peak, n


def rounding_deficit(partial, peak, n_ops: int, config, ctx) -> float:
    """Decimal digits missing for the rounding error to meet the tolerance."""
    ulp = ctx.mpf(10) ** (-ctx.dps)
    slack = 16 * max(n_ops, 1)
    rel = ctx.mpf(config.rel_tol)
    floor = ctx.mpf(config.abs_tol)
    tiny = ctx.mpf(10) ** (-ctx.dps - 50)
    deficit = 0.0
    for p, pk in zip(partial, peak):
        err = pk * ulp * slack
        allowed = rel * abs(p) + floor
        if allowed < tiny:
            allowed = tiny
        if err > allowed:
            deficit = max(deficit, float(ctx.log10(err / allowed)))
    return deficit


def adaptive_sum(make_terms: Callable[[MPContext], Iterator], size: int, config,
                 *, dps: int, min_terms: int = 0, level: str = "series",
                 extra_ops: int = 0):
    """Sum ``make_terms(ctx)`` with automatic precision escalation.

    Returns ``(partial, n_terms, dps)``; ``partial`` holds mpf values valid in
    a context of ``dps`` digits.
    """
    dps = int(max(MIN_DPS, dps))
    while True:
        with workdps(dps) as ctx:
            partial, peak, n = accumulate(make_terms(ctx), size, config, ctx,
                                          min_terms=min_terms, level=level)
            deficit = rounding_deficit(partial, peak, n + extra_ops, config, ctx)
        if deficit == 0.0:
            return partial, n, dps
        if dps >= MAX_DPS:
            raise NonConvergence(f"{level}: precision cap of {MAX_DPS} digits reached",
                                 level=level)
        dps = min(MAX_DPS, dps + int(math.ceil(deficit)) + 10)

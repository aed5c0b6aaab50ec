"""Cross-validation suites and a JSON-lines report.

Each check compares two independent evaluations (series against transform
oracle, Monte Carlo against series, numeric derivative against difference
operator, ...) and reports one metric against one threshold.  Checks are
grouped into suites; ``run_suite`` runs a suite and returns the reports
sorted by ``check_id``.  Stochastic checks draw from ``RngSpec(seed, stream)``
with a fixed stream per check, so a report is a pure function of the seed.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
import os
import tempfile
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special, stats

from . import fracderiv, pmf, simulate, specfun, ztrans
from .errors import InvalidParameter
from .pmf import CompositeParams, GegenbauerParams, ProcessParams
from .simulate import RngSpec
from .specfun import SeriesConfig

__all__ = [
    "CheckReport",
    "Check",
    "SUITES",
    "CHECKS",
    "INVARIANTS",
    "DEFAULT_SEED",
    "run_suite",
    "fresh_seed",
    "report_header",
    "report_lines",
    "write_report",
    "all_passed",
]

SUITES = ("reductions", "oracle", "montecarlo", "moments", "governing", "identities")
DEFAULT_SEED = 0

# standard parameter grid
ALPHAS = (0.3, 0.5, 0.7, 1.0)
BETAS = (0.3, 0.5, 0.7, 1.0)
MUS = (0.0, 0.5, 2.0)
DS = (0.15, 0.25, 0.5)
US = (-0.5, 0.0, 0.5, 1.0)
LAMS = (0.5, 1.0, 2.0)
TS = (0.5, 1.0, 2.0)

ORACLE_K = 20
MASS_K = 200
REDUCTION_K = 15
MC_N = 100_000
H = 1.0 / 512


# ---------------------------------------------------------------------------
# report type


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one check.

    ``status`` is ``"pass"`` iff ``metric`` lies on the passing side of
    ``threshold``: ``metric <= threshold`` for ``comparison "<="`` (errors,
    distances, z-scores) and ``metric >= threshold`` for ``">="`` (p-values).
    A check that could not be evaluated has ``metric None`` and fails.
    """

    check_id: str
    status: str
    metric: float | None
    threshold: float
    details: str
    seed: RngSpec | None = None
    comparison: str = "<="

    @classmethod
    def evaluate(cls, check_id, metric, threshold, details="", seed=None, comparison="<="):
        if comparison not in ("<=", ">="):
            raise InvalidParameter(f"unknown comparison {comparison!r}")
        if metric is None or not math.isfinite(metric):
            return cls(check_id, "fail", None, threshold, details, seed, comparison)
        ok = metric <= threshold if comparison == "<=" else metric >= threshold
        return cls(check_id, "pass" if ok else "fail", float(metric), float(threshold),
                   details, seed, comparison)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "status": self.status,
            "metric": self.metric,
            "comparison": self.comparison,
            "threshold": self.threshold,
            "details": self.details,
            "seed": None if self.seed is None else {"seed": self.seed.seed,
                                                    "stream": self.seed.stream},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), allow_nan=False)


@dataclass(frozen=True)
class Outcome:
    metric: float | None
    threshold: float
    details: str = ""
    comparison: str = "<="


@dataclass(frozen=True)
class Check:
    check_id: str
    suite: str
    fn: Callable
    stream: int | None = None  # None for deterministic checks


def _fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# cached evaluations shared by several checks


DEFAULT_SERIES = SeriesConfig()


@functools.lru_cache(maxsize=None)
def _column(family: str, params, t: float, k_max: int, method: str | None = None):
    vals, _, _ = pmf.column(params, k_max, t, DEFAULT_SERIES, family=family, method=method)
    return np.asarray(vals)


@functools.lru_cache(maxsize=None)
def _oracle(family: str, params, t: float, k_max: int):
    return np.array([float(v) for v in ztrans.extract_pmf(family, params, k_max, t)])


def _parameter_grid(family: str) -> list:
    """Parameter objects of the standard grid for one family."""
    grid = []
    if family == "sfpp":
        grid = [ProcessParams(l, alpha=a) for a in ALPHAS for l in LAMS]
    elif family == "tsfpp":
        grid = [ProcessParams(l, alpha=a, beta=b) for a in ALPHAS for b in BETAS for l in LAMS]
    elif family == "tempered-sfpp":
        grid = [ProcessParams(l, alpha=a, mu=m) for a in ALPHAS for m in MUS for l in LAMS]
    elif family == "gegenbauer":
        grid = [GegenbauerParams(l, d, u) for d in DS for u in US for l in LAMS]
    elif family == "gegenbauer-ts":
        grid = [GegenbauerParams(l, d, u, b) for d in DS for u in US for b in BETAS
                for l in LAMS]
    elif family == "composite":
        grid = [CompositeParams(l, a1, a2)
                for a1, a2 in itertools.combinations_with_replacement(ALPHAS, 2) for l in LAMS]
    return grid


# ---------------------------------------------------------------------------
# reductions suite


def _max_abs(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def _reduction(pairs) -> Outcome:
    worst, where = 0.0, ""
    for label, left, right in pairs:
        err = _max_abs(left(), right())
        if err >= worst:
            worst, where = err, label
    return Outcome(worst, 1e-10, f"k<={REDUCTION_K}; worst at {where}")


def _red_grid():
    return [(l, t) for l in LAMS for t in TS]


def check_reduction_ttsfpp(ctx):
    K, cfg = REDUCTION_K, DEFAULT_SERIES
    pairs = [(f"alpha={a},beta={b},lam={l},t={t}",
              lambda a=a, b=b, l=l, t=t: pmf._ttsfpp_collapsed(l, a, b, 0.0, 0.0, t, 0, K, cfg)[0],
              lambda a=a, b=b, l=l, t=t: pmf._sfpp_like_column(l ** a, a, b, t, 0, K, cfg)[0])
             for a in ALPHAS for b in BETAS if b < 1 for l, t in _red_grid()]
    return _reduction(pairs)


def check_reduction_tsfpp_beta1(ctx):
    K, cfg = REDUCTION_K, DEFAULT_SERIES
    pairs = [(f"alpha={a},lam={l},t={t}",
              lambda a=a, l=l, t=t: pmf._sfpp_like_column(l ** a, a, 1.0, t, 0, K, cfg)[0],
              lambda a=a, l=l, t=t: pmf._sfpp_like_column(l ** a, a, None, t, 0, K, cfg)[0])
             for a in ALPHAS for l, t in _red_grid()]
    return _reduction(pairs)


def check_reduction_tsfpp_alpha1(ctx):
    K, cfg = REDUCTION_K, DEFAULT_SERIES
    pairs = [(f"beta={b},lam={l},t={t}",
              lambda b=b, l=l, t=t: pmf._sfpp_like_column(l, 1.0, b, t, 0, K, cfg)[0],
              lambda b=b, l=l, t=t: pmf._tfpp_series(l, b, t, 0, K, cfg)[0])
             for b in BETAS for l, t in _red_grid()]
    return _reduction(pairs)


def check_reduction_sfpp_alpha1(ctx):
    K, cfg = REDUCTION_K, DEFAULT_SERIES
    pairs = [(f"lam={l},t={t}",
              lambda l=l, t=t: pmf._sfpp_like_column(l, 1.0, None, t, 0, K, cfg)[0],
              lambda l=l, t=t: [pmf.poisson_pmf(l, k, t) for k in range(K + 1)])
             for l, t in _red_grid()]
    return _reduction(pairs)


def check_reduction_tfpp_beta1(ctx):
    K, cfg = REDUCTION_K, DEFAULT_SERIES
    pairs = [(f"lam={l},t={t}",
              lambda l=l, t=t: pmf._tfpp_series(l, 1.0, t, 0, K, cfg)[0],
              lambda l=l, t=t: [pmf.poisson_pmf(l, k, t) for k in range(K + 1)])
             for l, t in _red_grid()]
    return _reduction(pairs)


def check_reduction_gegenbauer_u1(ctx):
    K, cfg = REDUCTION_K, DEFAULT_SERIES
    pairs = [(f"alpha={a},lam={l},t={t}",
              lambda a=a, l=l, t=t: pmf._gegenbauer_column_series(l, a / 2, 1.0, None, t, 0, K,
                                                                  cfg)[0],
              lambda a=a, l=l, t=t: pmf._sfpp_like_column(l ** a, a, None, t, 0, K, cfg)[0])
             for a in ALPHAS for l, t in _red_grid()]
    return _reduction(pairs)


def check_reduction_gegenbauer_ts_beta1(ctx):
    K, cfg = REDUCTION_K, DEFAULT_SERIES
    pairs = [(f"d={d},u={u},lam={l},t={t}",
              lambda d=d, u=u, l=l, t=t: pmf._gegenbauer_column_series(l, d, u, 1.0, t, 0, K,
                                                                       cfg)[0],
              lambda d=d, u=u, l=l, t=t: pmf._gegenbauer_column_series(l, d, u, None, t, 0, K,
                                                                       cfg)[0])
             for d in DS for u in US for l, t in _red_grid()]
    return _reduction(pairs)


def _rel(a, b) -> float:
    return abs(a - b) / abs(b)


def _k0(cases) -> Outcome:
    worst, where = 0.0, ""
    for label, value, exact in cases:
        err = _rel(value, exact)
        if err >= worst:
            worst, where = err, label
    return Outcome(worst, 1e-10, f"relative error; worst at {where}")


def check_k0_sfpp(ctx):
    return _k0([(f"alpha={a},lam={l},t={t}", pmf.sfpp_pmf(l, a, 0, t), math.exp(-l ** a * t))
                for a in ALPHAS for l, t in _red_grid()])


def check_k0_tsfpp(ctx):
    return _k0([(f"alpha={a},beta={b},lam={l},t={t}", pmf.tsfpp_pmf(l, a, b, 0, t),
                 specfun.mittag_leffler(b, 1.0, -l ** a * t ** b))
                for a in ALPHAS for b in BETAS for l, t in _red_grid()])


def check_k0_tempered_sfpp(ctx):
    return _k0([(f"alpha={a},mu={m},lam={l},t={t}", pmf.tempered_sfpp_pmf(l, a, m, 0, t),
                 math.exp(-t * ((m + l) ** a - m ** a)))
                for a in ALPHAS for m in MUS for l, t in _red_grid()])


def check_k0_gegenbauer(ctx):
    return _k0([(f"d={d},u={u},lam={l},t={t}",
                 pmf.gegenbauer_pmf(GegenbauerParams(l, d, u), 0, t), math.exp(-l ** (2 * d) * t))
                for d in DS for u in US for l, t in _red_grid()])


# ---------------------------------------------------------------------------
# oracle suite


def _oracle_check(family: str) -> Outcome:
    worst, where = 0.0, ""
    grid = [(p, t) for p in _parameter_grid(family) for t in TS]
    for params, t in grid:
        series = _column(family, params, t, ORACLE_K)
        oracle = _oracle(family, params, t, ORACLE_K)
        err = _max_abs(series, oracle)
        if err >= worst:
            worst, where = err, f"{params} t={t}"
    return Outcome(worst, 1e-10, f"{len(grid)} grid points, k<={ORACLE_K}; worst at {where}")


def check_oracle_sfpp(ctx):
    return _oracle_check("sfpp")


def check_oracle_tsfpp(ctx):
    return _oracle_check("tsfpp")


def check_oracle_tempered_sfpp(ctx):
    return _oracle_check("tempered-sfpp")


def check_oracle_gegenbauer(ctx):
    return _oracle_check("gegenbauer")


def check_oracle_gegenbauer_ts(ctx):
    return _oracle_check("gegenbauer-ts")


def check_oracle_composite(ctx):
    return _oracle_check("composite")


def _normalization(family: str) -> Outcome:
    """sum_{k<=200} P(k,t) must lie in [1 - eps_tail, 1 + 1e-9].

    ``eps_tail`` is the transform at w = 1 minus the partial sum of the
    oracle coefficients.  The lower end gets the same 1e-9 allowance for
    rounding, so the metric is the largest excursion outside
    ``[1 - eps_tail, 1]``.
    """
    worst, where, tail_max = -math.inf, "", 0.0
    grid = [(p, t) for p in _parameter_grid(family) for t in TS]
    for params, t in grid:
        total = math.fsum(_column(family, params, t, MASS_K))
        eps_tail = (ztrans.total_mass(family, params, t)
                    - math.fsum(_oracle(family, params, t, MASS_K)))
        excess = max((1.0 - eps_tail) - total, total - 1.0)
        tail_max = max(tail_max, eps_tail)
        if excess >= worst:
            worst, where = excess, f"{params} t={t} sum={_fmt(total)} eps_tail={_fmt(eps_tail)}"
    return Outcome(worst, 1e-9, f"{len(grid)} grid points, k<={MASS_K}, "
                               f"largest eps_tail {_fmt(tail_max)}; worst at {where}")


def check_norm_sfpp(ctx):
    return _normalization("sfpp")


def check_norm_tsfpp(ctx):
    return _normalization("tsfpp")


def check_norm_tempered_sfpp(ctx):
    return _normalization("tempered-sfpp")


def check_norm_composite(ctx):
    return _normalization("composite")


def _gegenbauer_limit(params, t):
    return ztrans.total_mass("gegenbauer", params, t)


def check_norm_gegenbauer(ctx):
    worst, where = 0.0, ""
    grid = [(p, t) for p in _parameter_grid("gegenbauer") for t in TS]
    for params, t in grid:
        total = math.fsum(_column("gegenbauer", params, t, MASS_K))
        err = abs(total - _gegenbauer_limit(params, t))
        if err >= worst:
            worst, where = err, f"{params} t={t} sum={_fmt(total)}"
    return Outcome(worst, 1e-6, f"|sum_(k<={MASS_K}) P - exp(-lam^(2d) (2-2u)^d t)| over "
                               f"{len(grid)} grid points; worst at {where}")


def check_gegenbauer_mass(ctx):
    params = GegenbauerParams(1.0, 0.25, 0.5)
    total = math.fsum(_column("gegenbauer", params, 1.0, MASS_K))
    limit = _gegenbauer_limit(params, 1.0)
    return Outcome(abs(total - limit), 1e-6,
                   f"d=0.25 u=0.5 lam=1 t=1: sum_(k<={MASS_K}) P = {_fmt(total)}, "
                   f"limit exp(-(2-2u)^d) = {_fmt(limit)}")


def check_tsfpp_pgf(ctx):
    lam, a, b, t, K = 1.0, 0.7, 0.6, 1.0, 300
    col = _column("tsfpp", ProcessParams(lam, alpha=a, beta=b), t, K)
    worst = 0.0
    for u in (0.2, 0.5, 0.9):
        pgf = math.fsum(col * u ** np.arange(K + 1))
        exact = specfun.mittag_leffler(b, 1.0, -lam ** a * t ** b * (1 - u) ** a)
        worst = max(worst, abs(pgf - exact))
    return Outcome(worst, 1e-8, f"alpha={a} beta={b} lam={lam} t={t}, u in (0.2,0.5,0.9), K={K}")


def check_nonnegativity(ctx):
    worst, where, count = math.inf, "", 0
    seen = set()
    for a, b, m, n, l in itertools.product(ALPHAS, BETAS, MUS, MUS, LAMS):
        # mu has no effect when alpha = 1 and nu none when beta = 1
        key = (a, b, m if a < 1 else 0.0, n if b < 1 else 0.0, l)
        if key in seen:
            continue
        seen.add(key)
        params = ProcessParams(l, alpha=a, beta=b, mu=key[2], nu=key[3])
        table = pmf.pmf_table(params, 50, [0.1, 1.0, 5.0], DEFAULT_SERIES, workers=1)
        count += 1
        low = float(table.values.min())
        if low < worst:
            worst, where = low, f"{params}"
    return Outcome(-worst, 1e-12, f"min P over {count} distinct parameter sets, k<=50, "
                                  f"t in (0.1,1,5) is {_fmt(worst)} at {where}")


def check_ttsfpp_methods(ctx):
    worst = 0.0
    for a, b, m, n, t in itertools.product((0.5, 0.8), (0.55, 0.8), (0.5, 2.0), (0.5, 2.0),
                                           (0.5, 2.0)):
        params = ProcessParams(1.0, alpha=a, beta=b, mu=m, nu=n)
        nested = _column("tempered-tsfpp", params, t, 10, "nested")
        collapsed = _column("tempered-tsfpp", params, t, 10, "collapsed")
        worst = max(worst, _max_abs(nested, collapsed))
    return Outcome(worst, 1e-10, "nested versus collapsed tempered time-space series, "
                                 "32 parameter points, k<=10")


def check_tempered_sfpp_methods(ctx):
    worst = 0.0
    for a, m, l, t in itertools.product(ALPHAS, (0.25, 0.5), (1.0, 2.0), TS):
        lit = [pmf.tempered_sfpp_pmf(l, a, m, k, t, method="literal") for k in range(11)]
        res = _column("tempered-sfpp", ProcessParams(l, alpha=a, mu=m), t, MASS_K)[:11]
        worst = max(worst, _max_abs(lit, res))
    return Outcome(worst, 1e-10, "literal versus resummed tempered series for mu < lam, k<=10")


def check_composite_methods(ctx):
    worst = 0.0
    for (a1, a2), l, t in itertools.product(((0.3, 0.7), (0.5, 1.0), (0.7, 0.7)), LAMS, TS):
        params = CompositeParams(l, a1, a2)
        series = _column("composite", params, t, 30, "series")
        conv = _column("composite", params, t, MASS_K)[:31]
        worst = max(worst, _max_abs(series, conv))
    return Outcome(worst, 1e-10, "double series versus convolution of factors, k<=30")


def check_tfpp_methods(ctx):
    worst = 0.0
    for b, l, t in itertools.product((0.3, 0.5, 0.7), LAMS, TS):
        per_k = pmf._tfpp_series(l, b, t, 0, REDUCTION_K, DEFAULT_SERIES)[0]
        col = _column("tfpp", ProcessParams(l, beta=b), t, REDUCTION_K)
        worst = max(worst, _max_abs(per_k, col))
    return Outcome(worst, 1e-10, "per-k series versus shared column series, k<=15")


# ---------------------------------------------------------------------------
# identities suite


def check_binomial_identity(ctx):
    worst = 0.0
    for a in (0.3, 0.5, 1.7, 2.4):
        for p in range(1, 7):
            left = specfun.gen_binomial(2 * a, 2 * p)
            terms = [4 ** j * specfun.gen_binomial(a, p + j) * specfun.gen_binomial(p + j, 2 * j)
                     for j in range(p + 1)]
            # C(1, 2p) vanishes for a = 0.5, so the error is taken relative to
            # the largest of |left| and the summands
            scale = max(abs(left), max(abs(x) for x in terms))
            worst = max(worst, abs(math.fsum(terms) - left) / scale)
    return Outcome(worst, 1e-12, "C(2a,2p) = sum_j 4^j C(a,p+j) C(p+j,2j), "
                                 "a in (0.3,0.5,1.7,2.4), p=1..6, relative")


def check_pochhammer_relation(ctx):
    worst = 0.0
    for a in (0.3, 0.5, 1.7, 2.4):
        for k in range(0, 21):
            left = specfun.pochhammer(-a, k)
            right = (-1) ** k * math.factorial(k) * specfun.gen_binomial(a, k)
            worst = max(worst, _rel(left, right))
    return Outcome(worst, 1e-12, "(-a)_k = (-1)^k k! C(a,k), k<=20, relative")


def check_ml_exp(ctx):
    zs = np.linspace(-20.0, 20.0, 50)
    worst = max(_rel(specfun.mittag_leffler(1.0, 1.0, z), math.exp(z)) for z in zs)
    return Outcome(worst, 1e-12, "E_{1,1}(z) = exp(z) on 50 points in [-20, 20], relative")


def check_ml_cos(ctx):
    xs = np.linspace(0.0, 10.0, 50)
    worst = max(abs(specfun.mittag_leffler(2.0, 1.0, -x * x) - math.cos(x)) for x in xs)
    return Outcome(worst, 1e-12, "E_{2,1}(-x^2) = cos(x) on 50 points in [0, 10], absolute")


def check_prabhakar_c1(ctx):
    zs = np.linspace(-10.0, 5.0, 50)
    worst = 0.0
    for a, b in ((0.6, 1.2), (0.5, 1.0), (1.5, 0.7)):
        for z in zs:
            worst = max(worst, _rel(specfun.prabhakar_ml(a, b, 1.0, z),
                                    specfun.mittag_leffler(a, b, z)))
    return Outcome(worst, 1e-12, "M^1_{a,b} = E_{a,b} on 50 points in [-10, 5] for "
                                 "(a,b) in ((0.6,1.2),(0.5,1),(1.5,0.7)), relative")


def check_prabhakar_laplace(ctx):
    a, b, c, eta, s, t_max = 0.6, 1.0, 2.0, 1.0, 2.0, 40.0

    def integrand(t):
        return t ** (b - 1) * specfun.prabhakar_ml(a, b, c, -eta * t ** a) * math.exp(-s * t)

    value, _ = integrate.quad(integrand, 0.0, t_max, epsabs=1e-12, epsrel=1e-10, limit=200)
    exact = s ** (a * c - b) / (s ** a + eta) ** c
    return Outcome(abs(value - exact), 1e-6,
                   f"(a,b,c,eta,s)=({a},{b},{c},{eta},{s}), T_max={t_max}: "
                   f"integral {_fmt(value)}, closed form {_fmt(exact)}")


def check_series_pow(ctx):
    worst = 0.0
    base = ztrans.PowerSeries.polynomial([1.0, -0.7, 0.2, 0.05], 30, 50)
    # exponents are dyadic so that a + b is exact in binary
    for a, b in ((0.25, 0.375), (1.75, -0.625), (0.5, 0.5), (2.375, 1.125)):
        left = ztrans.series_pow(base, a + b)
        right = ztrans.series_pow(base, a) * ztrans.series_pow(base, b)
        worst = max(worst, max(abs(float(x - y)) for x, y in zip(left.coeffs, right.coeffs)))
    return Outcome(worst, 1e-30, "s^(a+b) = s^a s^b coefficient-wise, order 30, 50 digits")


def check_eq32_identity(ctx):
    worst = 0.0
    for a in (0.3, 0.7, 1.7, 2.4):
        one = ztrans.PowerSeries.polynomial([1, -1], 40, 50)
        quad = ztrans.PowerSeries.polynomial([1, -2, 1], 40, 50)
        left = ztrans.series_pow(one, 2 * a)
        right = ztrans.series_pow(quad, a)
        worst = max(worst, max(abs(float(x - y)) for x, y in zip(left.coeffs, right.coeffs)))
    return Outcome(worst, 1e-30, "(1-w)^(2a) = (1 - w(2-w))^a coefficient-wise, order 40")


def check_shift_rules(ctx):
    seq = [0.5, -1.25, 3.0, 0.125, 7.5, -2.0]
    failures = sum(0 if ztrans.shift_identity_check(seq, m) else 1 for m in range(0, 5))
    return Outcome(float(failures), 0.0, "delay and advance rules for shifts m=0..4")


def check_shift_examples(ctx):
    delta = np.zeros(8)
    delta[0] = 1.0
    k = np.arange(8)
    cases = [
        (fracderiv.fractional_shift(delta, 1.0, 0.0, 1.0), np.r_[1.0, -1.0, np.zeros(6)]),
        (fracderiv.fractional_shift(delta, 0.5, 0.0, 1.0),
         np.array([(-1) ** j * specfun.gen_binomial(0.5, j) for j in k])),
        (fracderiv.gegenbauer_shift(delta, 0.25, 0.5), special.eval_gegenbauer(k, -0.25, 0.5)),
    ]
    worst = max(_max_abs(a, b) for a, b in cases)
    return Outcome(worst, 1e-14, "shift operators on delta_k0 against binomial and "
                                 "Gegenbauer polynomial values")


# ---------------------------------------------------------------------------
# Monte Carlo suite


def _tv(empirical, exact) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(empirical) - np.asarray(exact))))


def _z(sample, target) -> tuple[float, float]:
    sample = np.asarray(sample, dtype=float)
    se = float(sample.std(ddof=1)) / math.sqrt(sample.size)
    return abs(float(sample.mean()) - target) / se, se


def check_tv_tsfpp(ctx):
    rng = ctx.rng
    s = simulate.sample_process(ProcessParams(1.0, alpha=0.7, beta=0.6), 1.0, MC_N, rng)
    exact = [pmf.tsfpp_pmf(1.0, 0.7, 0.6, k, 1.0) for k in range(21)]
    return Outcome(_tv(s.empirical_pmf(20), exact), 0.01,
                   f"N(S_alpha(Y_beta(t))) alpha=0.7 beta=0.6 lam=1 t=1 n={MC_N}, k<=20")


def check_tv_tempered_sfpp(ctx):
    s = simulate.sample_process(ProcessParams(1.0, alpha=0.6, mu=0.5), 1.0, MC_N, ctx.rng)
    exact = [pmf.tempered_sfpp_pmf(1.0, 0.6, 0.5, k, 1.0) for k in range(21)]
    return Outcome(_tv(s.empirical_pmf(20), exact), 0.01,
                   f"N(S_alpha,mu(t)) alpha=0.6 mu=0.5 lam=1 t=1 n={MC_N}, k<=20")


def check_tv_renewal(ctx):
    s = simulate.sample_tfpp_renewal(1.0, 0.5, 1.0, MC_N, ctx.rng)
    exact = [pmf.tfpp_pmf(1.0, 0.5, k, 1.0) for k in range(21)]
    return Outcome(_tv(s.empirical_pmf(20), exact), 0.01,
                   f"renewal with Mittag-Leffler waiting times beta=0.5 lam=1 t=1 n={MC_N}")


def _pooled_table(a, b, min_expected=5.0):
    """2 x m contingency table of two count samples, tail bins pooled."""
    top = int(max(a.max(), b.max()))
    ha = np.bincount(a, minlength=top + 1).astype(float)
    hb = np.bincount(b, minlength=top + 1).astype(float)
    cols, acc_a, acc_b = [], 0.0, 0.0
    for x, y in zip(ha, hb):
        acc_a += x
        acc_b += y
        if min(acc_a, acc_b) >= min_expected:
            cols.append((acc_a, acc_b))
            acc_a = acc_b = 0.0
    if cols and (acc_a or acc_b):
        last = cols.pop()
        cols.append((last[0] + acc_a, last[1] + acc_b))
    return np.array(cols).T


def check_renewal_vs_subordination(ctx):
    gen = ctx.rng.generator()
    a = simulate.sample_tfpp_renewal(1.0, 0.5, 1.0, MC_N, gen).counts
    b = simulate.sample_process(ProcessParams(1.0, beta=0.5), 1.0, MC_N, gen).counts
    p = stats.chi2_contingency(_pooled_table(a, b))[1]
    return Outcome(float(p), 0.01, "two-sample chi-square, renewal versus N(Y_beta(t)), "
                                   f"beta=0.5 lam=1 t=1, n={MC_N} each", ">=")


def check_renewal_poisson(ctx):
    counts = simulate.sample_tfpp_renewal(1.0, 1.0, 2.0, MC_N, ctx.rng).counts
    top = 12
    observed = np.bincount(np.minimum(counts, top), minlength=top + 1)
    probs = np.array([pmf.poisson_pmf(1.0, k, 2.0) for k in range(top)])
    probs = np.r_[probs, 1.0 - probs.sum()]
    p = stats.chisquare(observed, MC_N * probs)[1]
    return Outcome(float(p), 0.01, "beta=1 renewal against Poisson(2), chi-square", ">=")


def check_renewal_p0(ctx):
    counts = simulate.sample_tfpp_renewal(1.0, 0.5, 1.0, MC_N, ctx.rng).counts
    z, _ = _z(counts == 0, specfun.mittag_leffler(0.5, 1.0, -1.0))
    return Outcome(z, 4.0, "|P(N=0) - E_0.5(-1)| in standard errors")


def check_levy_cdf(ctx):
    x = simulate.sample_stable(0.5, 1.0, ctx.rng, 1_000_000)
    exact = float(special.erfc(0.5))
    z, _ = _z(x <= 1.0, exact)
    return Outcome(z, 4.0, f"alpha=1/2: P(S(1) <= 1) against erfc(1/2) = {_fmt(exact)}, "
                           "in standard errors, 10^6 draws")


def check_stable_scaling(ctx):
    gen = ctx.rng.generator()
    a = simulate.sample_stable(0.9, 2.0, gen, MC_N) / 2 ** (1 / 0.9)
    b = simulate.sample_stable(0.9, 1.0, gen, MC_N)
    p = stats.ks_2samp(a, b).pvalue
    return Outcome(float(p), 0.01, "S(2)/2^(1/alpha) against S(1), alpha=0.9, two-sample KS",
                   ">=")


def check_stable_density(ctx):
    n = 1_000_000
    x = simulate.sample_stable(0.7, 1.0, ctx.rng, n)
    edges = np.linspace(2.0, 10.0, 33)
    hist, _ = np.histogram(x, edges)
    density = hist / (n * np.diff(edges))
    mids = 0.5 * (edges[1:] + edges[:-1])
    err = float(np.max(np.abs(density - simulate.stable_density_series(0.7, mids, 60))))
    return Outcome(err, 0.01, "alpha=0.7 histogram on [2,10] (32 bins) against the "
                              "60-term density series, 10^6 draws")


def check_tempered_mu0(ctx):
    gen = ctx.rng.generator()
    a = simulate.sample_tempered_stable(0.6, 0.0, 1.0, gen, MC_N)
    b = simulate.sample_stable(0.6, 1.0, gen, MC_N)
    p = stats.ks_2samp(a, b).pvalue
    return Outcome(float(p), 0.01, "mu=0 tempered sampler against stable sampler, "
                                   "independent draws, two-sample KS", ">=")


def check_inverse_laplace(ctx):
    y = simulate.sample_inverse_subordinator(0.5, 0.0, 1.0, ctx.rng, MC_N)
    exact = specfun.mittag_leffler(0.5, 1.0, -1.0)
    z, _ = _z(np.exp(-y), exact)
    return Outcome(z, 4.0, f"|E exp(-Y_0.5(1)) - E_0.5(-1)| in standard errors, n={MC_N}")


def _tempered_inverse_oracle(beta, nu, t):
    import mpmath

    with mpmath.workdps(30):
        def transform(s):
            phi = (s + nu) ** beta - nu ** beta
            return phi / (s * (1 + phi))

        return float(mpmath.invertlaplace(transform, t, method="talbot"))


def check_inverse_tempered_laplace(ctx):
    beta, nu, t = 0.7, 1.0, 1.0
    y = simulate.sample_inverse_subordinator(beta, nu, t, ctx.rng, MC_N)
    exact = _tempered_inverse_oracle(beta, nu, t)
    z, _ = _z(np.exp(-y), exact)
    return Outcome(z, 4.0, f"beta={beta} nu={nu} t={t}: E exp(-Y) against Talbot inversion "
                           f"{_fmt(exact)}, in standard errors, grid_dt=0.01t")


def check_paths_monotone(ctx):
    gen = ctx.rng.generator()
    times = np.linspace(0.01, 5.0, 500)
    violations = 0
    for alpha, mu in ((0.3, 0.0), (0.6, 0.0), (0.6, 1.5), (0.9, 4.0)):
        for _ in range(20):
            path = simulate.sample_subordinator_path(alpha, mu, times, gen)
            violations += int(np.sum(np.diff(path.values) < 0)) + int(path.values[0] < 0)
    return Outcome(float(violations), 0.0, "80 stable and tempered paths on 500 points")


def check_determinism(ctx):
    params = ProcessParams(1.0, alpha=0.7, beta=0.6, mu=0.5, nu=0.5)
    a = simulate.sample_process(params, 1.0, 2000, ctx.rng)
    b = simulate.sample_process(params, 1.0, 2000, ctx.rng)
    merged1 = simulate.merge_sample_sets([
        simulate.sample_process(params, 1.0, 500, RngSpec(ctx.rng.seed, s)) for s in range(3)])
    merged2 = simulate.merge_sample_sets([
        simulate.sample_process(params, 1.0, 500, RngSpec(ctx.rng.seed, s)) for s in (2, 0, 1)])
    mismatches = int(np.sum(a.counts != b.counts)) + int(np.sum(merged1.counts != merged2.counts))
    return Outcome(float(mismatches), 0.0, "same RngSpec twice and substream merge order")


# ---------------------------------------------------------------------------
# moments suite


def _var_z(sample, target) -> float:
    x = np.asarray(sample, dtype=float)
    centered = x - x.mean()
    var = float(np.mean(centered ** 2)) * x.size / (x.size - 1)
    m4 = float(np.mean(centered ** 4))
    se = math.sqrt(max(m4 - var ** 2, 0.0) / x.size)
    return abs(var - target) / se


def check_tempered_stable_mean(ctx):
    a, mu, t = 0.6, 1.5, 3.0
    x = simulate.sample_tempered_stable(a, mu, t, ctx.rng, MC_N)
    z, _ = _z(x, a * mu ** (a - 1) * t)
    return Outcome(z, 4.0, "E S_alpha,mu(t) = alpha mu^(alpha-1) t, alpha=0.6 mu=1.5 t=3")


def check_tempered_stable_var(ctx):
    a, mu, t = 0.6, 1.5, 3.0
    x = simulate.sample_tempered_stable(a, mu, t, ctx.rng, MC_N)
    return Outcome(_var_z(x, a * (1 - a) * mu ** (a - 2) * t), 4.0,
                   "Var S_alpha,mu(t) = alpha(1-alpha) mu^(alpha-2) t")


def _tempered_counts(ctx):
    return simulate.sample_process(ProcessParams(2.0, alpha=0.6, mu=1.5), 3.0, MC_N,
                                   ctx.rng).counts


def check_tempered_count_mean(ctx):
    lam, a, mu, t = 2.0, 0.6, 1.5, 3.0
    z, _ = _z(_tempered_counts(ctx), lam * a * mu ** (a - 1) * t)
    return Outcome(z, 4.0, "E N(t) = lam alpha mu^(alpha-1) t, (lam,alpha,mu,t)=(2,0.6,1.5,3)")


def check_tempered_count_var(ctx):
    lam, a, mu, t = 2.0, 0.6, 1.5, 3.0
    target = lam * a * mu ** (a - 1) * t + lam ** 2 * a * (1 - a) * mu ** (a - 2) * t
    return Outcome(_var_z(_tempered_counts(ctx), target), 4.0,
                   "Var N(t) = lam alpha mu^(alpha-1) t + lam^2 alpha(1-alpha) mu^(alpha-2) t")


def check_poisson_mean(ctx):
    s = simulate.sample_process(ProcessParams(2.0), 1.0, MC_N, ctx.rng)
    z, _ = _z(s.counts, 2.0)
    return Outcome(z, 4.0, "Poisson lam=2 t=1 mean")


def check_inverse_stable_mean(ctx):
    y = simulate.sample_inverse_subordinator(0.5, 0.0, 1.0, ctx.rng, MC_N)
    z, _ = _z(y, 1.0 / math.gamma(1.5))
    return Outcome(z, 4.0, "E Y_beta(t) = t^beta / Gamma(1+beta), beta=0.5 t=1")


# ---------------------------------------------------------------------------
# governing suite


def _residual(equation, params, **kwargs):
    metric, info = fracderiv.governing_residual(equation, params, h=H, config=DEFAULT_SERIES,
                                                **kwargs)
    detail = ", ".join(f"{k}={_fmt(v) if isinstance(v, float) else v}" for k, v in info.items())
    return metric, f"{params}: {detail}"


def check_residual_sfpp(ctx):
    m, d = _residual("sfpp", ProcessParams(1.0, alpha=0.7))
    return Outcome(m, 1e-2, d)


def check_residual_tsfpp(ctx):
    m, d = _residual("tsfpp", ProcessParams(1.0, alpha=0.7, beta=0.6))
    return Outcome(m, 1e-2, d)


def check_residual_tempered_sfpp(ctx):
    m, d = _residual("tempered-sfpp", ProcessParams(1.0, alpha=0.6, mu=0.5))
    return Outcome(m, 1e-2, d)


def check_residual_tempered_tsfpp(ctx):
    m, d = _residual("tempered-tsfpp", ProcessParams(1.0, alpha=0.7, beta=0.6, mu=0.5, nu=0.5))
    return Outcome(m, 1e-2, d)


def check_residual_gegenbauer(ctx):
    m, d = _residual("gegenbauer", GegenbauerParams(1.0, 0.25, 0.5))
    return Outcome(m, 1e-2, d)


def check_residual_tfpp(ctx):
    params = ProcessParams(2.0, beta=0.5)
    m, d = _residual("tfpp", params)
    alt, _ = fracderiv.governing_residual("tfpp", params, h=H, config=DEFAULT_SERIES,
                                          coefficient=params.lam ** params.beta)
    return Outcome(m, 1e-2, f"{d}; with rate lam^beta instead of lam the residual is "
                            f"{_fmt(alt)}")


def _window(f: fracderiv.TimeGridFn, lo=0.25, hi=2.0):
    return (f.t_grid >= lo) & (f.t_grid <= hi)


def check_caputo_constant(ctx):
    f = fracderiv.TimeGridFn.sample(lambda t: np.full_like(t, 2.5), H, 2.0)
    d = fracderiv.caputo_derivative(f, 0.5)
    return Outcome(float(np.max(np.abs(d.values))), 1e-12, "Caputo derivative of a constant")


def check_caputo_linear(ctx):
    f = fracderiv.TimeGridFn.sample(lambda t: t, H, 2.0)
    d = fracderiv.caputo_derivative(f, 0.5)
    w = _window(f)
    exact = f.t_grid[w] ** 0.5 / math.gamma(1.5)
    return Outcome(float(np.max(np.abs(d.values[w] - exact))), 4 * H,
                   "D^0.5 t = t^0.5 / Gamma(1.5) on [0.25, 2], threshold 4h")


def check_caputo_ml(ctx):
    beta = 0.5
    f = fracderiv.TimeGridFn.sample(
        lambda t: np.array([specfun.mittag_leffler(beta, 1.0, -x ** beta) for x in t]), H, 2.0)
    d = fracderiv.caputo_derivative(f, beta)
    w = _window(f, 0.2, 2.0)
    return Outcome(float(np.max(np.abs(d.values[w] + f.values[w]))), 4 * H,
                   "D^beta E_beta(-t^beta) = -E_beta(-t^beta) on [0.2, 2], threshold 4h")


def _tempered_constant_oracle(c, beta, nu, t):
    # Riemann-Liouville derivative of exp(nu s), from d/dt of the convolution
    conv, _ = integrate.quad(lambda s: math.exp(nu * s), 0.0, t, weight="alg",
                             wvar=(0.0, -beta))
    # weight (s-0)^0 (t-s)^-beta
    rl = (t ** (-beta) + nu * conv) / math.gamma(1.0 - beta)
    tail, _ = integrate.quad(lambda r: math.exp(-nu * r) * beta * r ** (-beta - 1.0), t, np.inf)
    return c * math.exp(-nu * t) * rl - nu ** beta * c - c * tail / math.gamma(1.0 - beta)


def check_tempered_constant(ctx):
    c, beta, nu = 3.0, 0.5, 1.0
    f = fracderiv.TimeGridFn.sample(lambda t: np.full_like(t, c), H, 2.0)
    d = fracderiv.caputo_tempered_derivative(f, beta, nu)
    idx = np.nonzero(_window(f))[0][::64]
    oracle = np.array([_tempered_constant_oracle(c, beta, nu, f.t_grid[i]) for i in idx])
    err = float(np.max(np.abs(d.values[idx] - oracle)))
    return Outcome(err, 4 * H, f"tempered Caputo derivative of c=3 (beta=0.5, nu=1) against "
                               f"quadrature of the definition at {idx.size} points; "
                               f"largest |oracle| {_fmt(np.max(np.abs(oracle)))}")


def check_tempered_nu0(ctx):
    f = fracderiv.TimeGridFn.sample(lambda t: t, H, 2.0)
    a = fracderiv.caputo_tempered_derivative(f, 0.5, 0.0)
    b = fracderiv.caputo_derivative(f, 0.5)
    return Outcome(float(np.max(np.abs(a.values[1:] - b.values[1:]))), 2 * H,
                   "nu=0 tempered derivative against Caputo derivative, f(t)=t")


# ---------------------------------------------------------------------------
# registry


def _checks():
    c = []

    def add(check_id, suite, fn, stream=None):
        c.append(Check(check_id, suite, fn, stream))

    add("pmf.reduction.tempered_tsfpp_mu_nu_0", "reductions", check_reduction_ttsfpp)
    add("pmf.reduction.tsfpp_beta_1", "reductions", check_reduction_tsfpp_beta1)
    add("pmf.reduction.tsfpp_alpha_1", "reductions", check_reduction_tsfpp_alpha1)
    add("pmf.reduction.sfpp_alpha_1", "reductions", check_reduction_sfpp_alpha1)
    add("pmf.reduction.tfpp_beta_1", "reductions", check_reduction_tfpp_beta1)
    add("pmf.reduction.gegenbauer_u_1", "reductions", check_reduction_gegenbauer_u1)
    add("pmf.reduction.gegenbauer_ts_beta_1", "reductions", check_reduction_gegenbauer_ts_beta1)
    add("pmf.k0.sfpp", "reductions", check_k0_sfpp)
    add("pmf.k0.tsfpp", "reductions", check_k0_tsfpp)
    add("pmf.k0.tempered_sfpp", "reductions", check_k0_tempered_sfpp)
    add("pmf.k0.gegenbauer", "reductions", check_k0_gegenbauer)

    add("ztrans.oracle.sfpp", "oracle", check_oracle_sfpp)
    add("ztrans.oracle.tsfpp", "oracle", check_oracle_tsfpp)
    add("ztrans.oracle.tempered_sfpp", "oracle", check_oracle_tempered_sfpp)
    add("ztrans.oracle.gegenbauer", "oracle", check_oracle_gegenbauer)
    add("ztrans.oracle.gegenbauer_ts", "oracle", check_oracle_gegenbauer_ts)
    add("ztrans.oracle.composite", "oracle", check_oracle_composite)
    add("pmf.normalization.sfpp", "oracle", check_norm_sfpp)
    add("pmf.normalization.tsfpp", "oracle", check_norm_tsfpp)
    add("pmf.normalization.tempered_sfpp", "oracle", check_norm_tempered_sfpp)
    add("pmf.normalization.composite", "oracle", check_norm_composite)
    add("pmf.normalization.gegenbauer", "oracle", check_norm_gegenbauer)
    add("pmf.gegenbauer_mass", "oracle", check_gegenbauer_mass)
    add("pmf.tsfpp_pgf", "oracle", check_tsfpp_pgf)
    add("pmf.nonnegativity", "oracle", check_nonnegativity)
    add("pmf.methods.tempered_tsfpp", "oracle", check_ttsfpp_methods)
    add("pmf.methods.tempered_sfpp", "oracle", check_tempered_sfpp_methods)
    add("pmf.methods.composite", "oracle", check_composite_methods)
    add("pmf.methods.tfpp", "oracle", check_tfpp_methods)

    add("specfun.binomial_identity", "identities", check_binomial_identity)
    add("specfun.pochhammer_relation", "identities", check_pochhammer_relation)
    add("specfun.ml_exp", "identities", check_ml_exp)
    add("specfun.ml_cos", "identities", check_ml_cos)
    add("specfun.prabhakar_c1", "identities", check_prabhakar_c1)
    add("specfun.prabhakar_laplace", "identities", check_prabhakar_laplace)
    add("ztrans.series_pow", "identities", check_series_pow)
    add("ztrans.double_order_identity", "identities", check_eq32_identity)
    add("ztrans.shift_rules", "identities", check_shift_rules)
    add("fracderiv.shift_examples", "identities", check_shift_examples)

    add("simulate.tv.tsfpp", "montecarlo", check_tv_tsfpp, 1)
    add("simulate.tv.tempered_sfpp", "montecarlo", check_tv_tempered_sfpp, 2)
    add("simulate.tv.tfpp_renewal", "montecarlo", check_tv_renewal, 3)
    add("simulate.renewal.vs_subordination", "montecarlo", check_renewal_vs_subordination, 4)
    add("simulate.renewal.poisson", "montecarlo", check_renewal_poisson, 5)
    add("simulate.renewal.p0", "montecarlo", check_renewal_p0, 6)
    add("simulate.stable.levy_cdf", "montecarlo", check_levy_cdf, 7)
    add("simulate.stable.scaling", "montecarlo", check_stable_scaling, 8)
    add("simulate.stable.density_series", "montecarlo", check_stable_density, 9)
    add("simulate.tempered.mu_0", "montecarlo", check_tempered_mu0, 10)
    add("simulate.inverse.laplace", "montecarlo", check_inverse_laplace, 11)
    add("simulate.inverse.tempered_laplace", "montecarlo", check_inverse_tempered_laplace, 12)
    add("simulate.paths_monotone", "montecarlo", check_paths_monotone, 13)
    add("simulate.determinism", "montecarlo", check_determinism, 14)

    add("simulate.moments.tempered_stable_mean", "moments", check_tempered_stable_mean, 21)
    add("simulate.moments.tempered_stable_var", "moments", check_tempered_stable_var, 22)
    add("simulate.moments.tempered_count_mean", "moments", check_tempered_count_mean, 23)
    add("simulate.moments.tempered_count_var", "moments", check_tempered_count_var, 23)
    add("simulate.moments.poisson_mean", "moments", check_poisson_mean, 24)
    add("simulate.moments.inverse_stable_mean", "moments", check_inverse_stable_mean, 25)

    add("fracderiv.residual.sfpp", "governing", check_residual_sfpp)
    add("fracderiv.residual.tsfpp", "governing", check_residual_tsfpp)
    add("fracderiv.residual.tempered_sfpp", "governing", check_residual_tempered_sfpp)
    add("fracderiv.residual.tempered_tsfpp", "governing", check_residual_tempered_tsfpp)
    add("fracderiv.residual.gegenbauer", "governing", check_residual_gegenbauer)
    add("fracderiv.residual.tfpp", "governing", check_residual_tfpp)
    add("fracderiv.caputo.constant", "governing", check_caputo_constant)
    add("fracderiv.caputo.linear", "governing", check_caputo_linear)
    add("fracderiv.caputo.ml_eigenfunction", "governing", check_caputo_ml)
    add("fracderiv.tempered.constant", "governing", check_tempered_constant)
    add("fracderiv.tempered.nu_0", "governing", check_tempered_nu0)
    return tuple(c)


CHECKS = _checks()
_BY_ID = {c.check_id: c for c in CHECKS}

# Static coverage list: every module invariant and the suite/checks covering it.
INVARIANTS = (
    ("specfun.binomial_identity", "identities", ("specfun.binomial_identity",)),
    ("specfun.pochhammer_relation", "identities", ("specfun.pochhammer_relation",)),
    ("specfun.ml_exp", "identities", ("specfun.ml_exp",)),
    ("specfun.prabhakar_c1", "identities", ("specfun.prabhakar_c1",)),
    ("specfun.prabhakar_laplace_pair", "identities", ("specfun.prabhakar_laplace",)),
    ("pmf.reduction_lattice", "reductions", tuple(c.check_id for c in CHECKS
                                                  if c.check_id.startswith("pmf.reduction."))),
    ("pmf.nonnegativity", "oracle", ("pmf.nonnegativity",)),
    ("pmf.k0_closed_forms", "reductions", tuple(c.check_id for c in CHECKS
                                                if c.check_id.startswith("pmf.k0."))),
    ("pmf.gegenbauer_total_mass", "oracle", ("pmf.gegenbauer_mass",)),
    ("pmf.tsfpp_pgf", "oracle", ("pmf.tsfpp_pgf",)),
    ("ztrans.oracle_agreement", "oracle", tuple(c.check_id for c in CHECKS
                                                if c.check_id.startswith("ztrans.oracle."))),
    ("ztrans.series_pow_consistency", "identities", ("ztrans.series_pow",)),
    ("ztrans.double_order_identity", "identities", ("ztrans.double_order_identity",)),
    ("simulate.tsfpp_representations", "montecarlo", ("simulate.tv.tsfpp",)),
    ("simulate.tempered_representations", "montecarlo", ("simulate.tv.tempered_sfpp",)),
    ("simulate.monotone_paths", "montecarlo", ("simulate.paths_monotone",)),
    ("simulate.determinism", "montecarlo", ("simulate.determinism",)),
    ("fracderiv.governing_residuals", "governing",
     ("fracderiv.residual.sfpp", "fracderiv.residual.tsfpp", "fracderiv.residual.tempered_sfpp",
      "fracderiv.residual.tempered_tsfpp", "fracderiv.residual.gegenbauer")),
    ("fracderiv.tfpp_rate_convention", "governing", ("fracderiv.residual.tfpp",)),
)


# ---------------------------------------------------------------------------
# running


@dataclass(frozen=True)
class _Context:
    rng: RngSpec | None


def fresh_seed() -> int:
    """A new 64-bit seed from operating-system entropy."""
    return int(np.random.SeedSequence().entropy % (2 ** 64))


def _run_check(args) -> CheckReport:
    check_id, seed = args
    check = _BY_ID[check_id]
    spec = None if check.stream is None else RngSpec(seed, check.stream)
    try:
        out = check.fn(_Context(spec))
    except Exception as exc:  # reported, not raised
        reason = "".join(traceback.format_exception_only(type(exc), exc)).strip()
        return CheckReport.evaluate(check_id, None, math.nan, f"error: {reason}", spec)
    return CheckReport.evaluate(check_id, out.metric, out.threshold, out.details, spec,
                                out.comparison)


def _suite_checks(suite: str) -> list[Check]:
    if suite == "all":
        return list(CHECKS)
    if suite not in SUITES:
        raise InvalidParameter(f"unknown suite {suite!r}; expected one of "
                               f"{SUITES + ('all',)}")
    return [c for c in CHECKS if c.suite == suite]


def run_suite(suite: str, seed: int = DEFAULT_SEED, *, workers: int | None = None,
              checks: list[str] | None = None) -> list[CheckReport]:
    """Run a suite (or ``"all"``) and return reports sorted by ``check_id``.

    Checks run in worker processes when ``workers`` (or
    ``FRACPOISSON_THREADS``) exceeds one; the reports do not depend on it.
    ``checks`` optionally restricts the run to the given check ids.
    """
    RngSpec(seed)  # validates the seed
    selected = _suite_checks(suite)
    if checks is not None:
        unknown = set(checks) - {c.check_id for c in selected}
        if unknown:
            raise InvalidParameter(f"checks not in suite {suite!r}: {sorted(unknown)}")
        selected = [c for c in selected if c.check_id in set(checks)]
    tasks = [(c.check_id, int(seed)) for c in selected]
    workers = workers or pmf._workers()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_check, tasks))
    else:
        reports = [_run_check(t) for t in tasks]
    return sorted(reports, key=lambda r: r.check_id)


def report_header(suite: str, seed: int) -> dict:
    """Header record: the run parameters and the static coverage list."""
    return {
        "type": "header",
        "suite": suite,
        "seed": int(seed),
        "coverage": [{"invariant": inv, "suite": s, "checks": list(ids)}
                     for inv, s, ids in INVARIANTS],
    }


def report_lines(suite: str, seed: int, reports: list[CheckReport]) -> list[str]:
    lines = [json.dumps(report_header(suite, seed))]
    lines.extend(r.to_json() for r in sorted(reports, key=lambda r: r.check_id))
    return lines


def write_report(path: str, suite: str, seed: int, reports: list[CheckReport]) -> None:
    """Write the JSONL report atomically (temporary file, then rename)."""
    text = "\n".join(report_lines(suite, seed, reports)) + "\n"
    atomic_write(path, text)


def atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def all_passed(reports: list[CheckReport]) -> bool:
    return all(r.passed for r in reports)

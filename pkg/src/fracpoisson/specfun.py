"""Special functions: generalized binomials, Pochhammer symbols and
Mittag-Leffler type functions.

The Mittag-Leffler functions are evaluated from their defining power series
in extended precision (see :mod:`fracpoisson._series`).  The working
precision is raised until the rounding error of the alternating sum is below
the requested tolerance, so arguments far out on the negative axis are
handled by the same series, only more slowly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _series
from .errors import InvalidParameter

__all__ = [
    "SeriesConfig",
    "MLParams",
    "gen_binomial",
    "pochhammer",
    "mittag_leffler",
    "prabhakar_ml",
]


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation policy for an infinite series.

    A series stops once ``stagnation_window`` consecutive terms satisfy
    ``|term| < rel_tol * |partial| + abs_tol``.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-300
    max_terms: int = 10_000
    stagnation_window: int = 3

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise InvalidParameter(f"rel_tol must be > 0, got {self.rel_tol}")
        if not self.abs_tol >= 0:
            raise InvalidParameter(f"abs_tol must be >= 0, got {self.abs_tol}")
        if self.max_terms < 1:
            raise InvalidParameter(f"max_terms must be >= 1, got {self.max_terms}")
        if self.stagnation_window < 1:
            raise InvalidParameter(
                f"stagnation_window must be >= 1, got {self.stagnation_window}")


DEFAULT_CONFIG = SeriesConfig()


def _gamma_sign(x: float) -> int:
    """Sign of Gamma(x) for x not a non-positive integer."""
    if x > 0:
        return 1
    return -1 if math.floor(-x) % 2 == 0 else 1


def _is_nonpos_int(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gen_binomial(alpha: float, k: int) -> float:
    """Generalized binomial coefficient ``Gamma(a+1) / (k! Gamma(a-k+1))``.

    Evaluated as the product ``prod_i (a-i)/(i+1)`` for ``k <= 64`` and
    through log-gamma with explicit sign tracking above.  Integer
    ``alpha`` is handled exactly: for ``alpha >= 0`` the classical binomial
    (zero when ``k > alpha``), for negative integers the limit
    ``(-1)^k C(k-alpha-1, k)`` of the gamma ratio.
    """
    k = int(k)
    if k < 0:
        raise InvalidParameter(f"k must be >= 0, got {k}")
    if k == 0:
        return 1.0
    alpha = float(alpha)
    if alpha.is_integer():
        n = int(alpha)
        if n >= 0:
            return float(math.comb(n, k)) if k <= n else 0.0
        value = math.comb(-n + k - 1, k)
        return float(-value if k % 2 else value)
    if k <= 64 or _is_nonpos_int(alpha - k + 1.0) or _is_nonpos_int(alpha + 1.0):
        # the product has no poles and keeps full relative accuracy when alpha
        # is close to an integer, where the rounded gamma argument alpha-k+1
        # sits next to a pole
        return math.prod((alpha - i) / (i + 1) for i in range(k))
    log_mag = math.lgamma(alpha + 1.0) - math.lgamma(k + 1.0) - math.lgamma(alpha - k + 1.0)
    sign = _gamma_sign(alpha + 1.0) * _gamma_sign(alpha - k + 1.0)
    return sign * math.exp(log_mag)


def pochhammer(lam: float, k: int) -> float:
    """Rising factorial ``(lam)_k = lam (lam+1) ... (lam+k-1)``."""
    k = int(k)
    if k < 0:
        raise InvalidParameter(f"k must be >= 0, got {k}")
    lam = float(lam)
    if k <= 64:
        out = 1.0
        for i in range(k):
            out *= lam + i
        return out
    if _is_nonpos_int(lam):
        return 0.0 if k > -lam else _product_sign_log(lam, k)
    log_mag = math.lgamma(lam + k) - math.lgamma(lam)
    return _gamma_sign(lam + k) * _gamma_sign(lam) * math.exp(log_mag)


def _product_sign_log(lam: float, k: int) -> float:
    # lam is a non-positive integer and every factor is nonzero
    m = int(-lam)
    sign = -1.0 if k % 2 else 1.0
    return sign * math.exp(math.lgamma(m + 1.0) - math.lgamma(m - k + 1.0))


@dataclass(frozen=True)
class MLParams:
    """Arguments of the three-parameter (Prabhakar) Mittag-Leffler function.

    ``c = 1`` selects the two-parameter function ``E_{a,b}``.
    """

    a: float
    b: float = 1.0
    c: float = 1.0
    arg: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidParameter(f"Mittag-Leffler order a must be > 0, got {self.a}")
        if isinstance(self.arg, complex):
            raise InvalidParameter("only real arguments are supported")

    def evaluate(self, config: SeriesConfig | None = None) -> float:
        if self.c == 1.0:
            return mittag_leffler(self.a, self.b, self.arg, config)
        return prabhakar_ml(self.a, self.b, self.c, self.arg, config)


def _pole_terms(a: float, b: float) -> int:
    """Number of leading indices n with a*n + b <= 0 (possible Gamma poles)."""
    if b > 0:
        return 0
    return int(math.floor(-b / a)) + 1


def _safe_lgamma(x: float) -> float:
    if _is_nonpos_int(x):
        return math.inf
    return math.lgamma(x)


def mittag_leffler(a: float, b: float, z: float, config: SeriesConfig | None = None) -> float:
    """Two-parameter Mittag-Leffler function ``sum_k z^k / Gamma(a k + b)``."""
    if not a > 0:
        raise InvalidParameter(f"Mittag-Leffler order a must be > 0, got {a}")
    config = config or DEFAULT_CONFIG
    a, b, z = float(a), float(b), float(z)
    log_z = math.log(abs(z)) if z != 0 else -math.inf

    def log_term(n):
        if n == 0:
            return -_safe_lgamma(b)
        return n * log_z - _safe_lgamma(a * n + b)

    dps = _series.initial_dps(_series.log10_peak(log_term))

    def terms(ctx):
        za = ctx.mpf(z)
        aa = ctx.mpf(a)
        bb = ctx.mpf(b)
        power = ctx.one
        n = 0
        while True:
            value = power * ctx.rgamma(aa * n + bb)
            yield (value,), abs(value)
            power *= za
            n += 1

    partial, _, _ = _series.adaptive_sum(terms, 1, config, dps=dps,
                                         min_terms=_pole_terms(a, b), level="mittag_leffler")
    return float(partial[0])


def prabhakar_ml(a: float, b: float, c: float, z: float,
                 config: SeriesConfig | None = None) -> float:
    """Prabhakar function ``sum_n (c)_n z^n / (n! Gamma(a n + b))``.

    Reciprocal-gamma poles contribute zero; ``c = 1`` gives ``E_{a,b}``.
    """
    if not a > 0:
        raise InvalidParameter(f"Prabhakar order a must be > 0, got {a}")
    config = config or DEFAULT_CONFIG
    a, b, c, z = float(a), float(b), float(c), float(z)
    log_z = math.log(abs(z)) if z != 0 else -math.inf
    state = {"log_poch": 0.0, "n": 0}

    def log_term(n):
        # called with n = 0, 1, 2, ... in order
        if n > 0:
            factor = abs(c + n - 1)
            state["log_poch"] += math.log(factor) if factor > 0 else -math.inf
        if n == 0:
            return -_safe_lgamma(b)
        return state["log_poch"] + n * log_z - math.lgamma(n + 1.0) - _safe_lgamma(a * n + b)

    dps = _series.initial_dps(_series.log10_peak(log_term))

    def terms(ctx):
        za = ctx.mpf(z)
        aa = ctx.mpf(a)
        bb = ctx.mpf(b)
        cc = ctx.mpf(c)
        coef = ctx.one
        n = 0
        while True:
            value = coef * ctx.rgamma(aa * n + bb)
            yield (value,), abs(value)
            coef = coef * (cc + n) * za / (n + 1)
            n += 1

    min_terms = _pole_terms(a, b)
    partial, _, _ = _series.adaptive_sum(terms, 1, config, dps=dps,
                                         min_terms=min_terms, level="prabhakar_ml")
    return float(partial[0])

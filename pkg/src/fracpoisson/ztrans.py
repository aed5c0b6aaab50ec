"""Truncated power series in ``w = 1/z`` and coefficient extraction.

Each family's z-transform is built from closed-form pieces (``(1-w)^a``,
``(1 - 2uw + w^2)^d``, exponentials and Mittag-Leffler compositions) in
extended precision; the coefficient of ``w^k`` is then ``P(k, t)``.  The
construction never expands the outer function into powers of the inner one,
so it is an independent check of the series in :mod:`fracpoisson.pmf`.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, Sequence

from . import _series
from .errors import InvalidParameter, NonConvergence, ZeroConstantTerm
from .pmf import CompositeParams, GegenbauerParams, ProcessParams

__all__ = [
    "PowerSeries",
    "series_pow",
    "series_exp",
    "series_ml_compose",
    "extract_pmf",
    "total_mass",
    "ztransform_of",
    "shift_identity_check",
    "ORACLE_FAMILIES",
]

DEFAULT_DPS = 40
GUARD_ORDER = 8

ORACLE_FAMILIES = ("poisson", "tfpp", "sfpp", "tsfpp", "tempered-sfpp", "gegenbauer",
                   "gegenbauer-ts", "composite")


class PowerSeries:
    """Immutable truncated power series ``sum_k coeffs[k] w^k``.

    ``order`` is the number of stored coefficients; every operation is exact
    modulo ``w^order`` up to the working precision ``dps``.
    """

    __slots__ = ("_coeffs", "_dps")

    def __init__(self, coeffs: Iterable, dps: int = DEFAULT_DPS):
        with _series.workdps(dps) as ctx:
            values = tuple(ctx.mpf(c) for c in coeffs)
        if not values:
            raise InvalidParameter("a power series needs at least one coefficient")
        self._coeffs = values
        self._dps = int(dps)

    # construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, value, order: int, dps: int = DEFAULT_DPS) -> "PowerSeries":
        return cls([value] + [0] * (order - 1), dps)

    @classmethod
    def polynomial(cls, coeffs: Sequence, order: int, dps: int = DEFAULT_DPS) -> "PowerSeries":
        coeffs = list(coeffs)[:order]
        return cls(coeffs + [0] * (order - len(coeffs)), dps)

    # accessors -----------------------------------------------------------
    @property
    def coeffs(self) -> tuple:
        return self._coeffs

    @property
    def order(self) -> int:
        return len(self._coeffs)

    @property
    def dps(self) -> int:
        return self._dps

    def __len__(self):
        return len(self._coeffs)

    def __getitem__(self, k):
        return self._coeffs[k]

    def __repr__(self):
        head = ", ".join(_short(c) for c in self._coeffs[:6])
        more = ", ..." if self.order > 6 else ""
        return f"PowerSeries([{head}{more}], order={self.order}, dps={self.dps})"

    def to_floats(self) -> list[float]:
        return [float(c) for c in self._coeffs]

    def truncate(self, order: int) -> "PowerSeries":
        order = min(order, self.order)
        return PowerSeries(self._coeffs[:order], self.dps)

    def shifted(self, m: int) -> "PowerSeries":
        """Multiply by ``w^m`` (keeping the order)."""
        return PowerSeries([0] * m + list(self._coeffs[: self.order - m]), self.dps)

    # arithmetic ------------------------------------------------------------
    def _pair(self, other):
        if not isinstance(other, PowerSeries):
            return None
        return min(self.order, other.order), max(self.dps, other.dps)

    def __add__(self, other):
        if not isinstance(other, PowerSeries):
            with _series.workdps(self.dps) as ctx:
                c = list(self._coeffs)
                c[0] = c[0] + ctx.mpf(other)
            return PowerSeries(c, self.dps)
        n, dps = self._pair(other)
        with _series.workdps(dps) as ctx:
            c = [ctx.mpf(a) + ctx.mpf(b) for a, b in zip(self._coeffs[:n], other._coeffs[:n])]
        return PowerSeries(c, dps)

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries([-c for c in self._coeffs], self.dps)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PowerSeries):
            with _series.workdps(self.dps) as ctx:
                s = ctx.mpf(other)
                c = [s * a for a in self._coeffs]
            return PowerSeries(c, self.dps)
        n, dps = self._pair(other)
        with _series.workdps(dps) as ctx:
            c = _mul(ctx, list(self._coeffs[:n]), list(other._coeffs[:n]), n)
        return PowerSeries(c, dps)

    __rmul__ = __mul__


def _short(c) -> str:
    return format(float(c), ".6g")


def _mul(ctx, a: list, b: list, n: int) -> list:
    """Truncated product, exploiting sparsity of either factor."""
    nz_a = [i for i, v in enumerate(a) if v]
    nz_b = [i for i, v in enumerate(b) if v]
    if len(nz_b) < len(nz_a):
        a, b, nz_a, nz_b = b, a, nz_b, nz_a
    out = [ctx.zero] * n
    for i in nz_a:
        ai = a[i]
        for j in nz_b:
            if i + j >= n:
                break
            out[i + j] += ai * b[j]
    return out


def series_pow(s: PowerSeries, gamma: float) -> PowerSeries:
    """``s^gamma`` for a series with positive constant term.

    Writes ``s = c0 (1 + r)`` and sums ``c0^gamma sum_j C(gamma, j) r^j``;
    ``r`` has no constant term so ``j < order`` terms are exact.
    """
    c0 = s[0]
    if not c0 > 0:
        raise ZeroConstantTerm(f"series_pow needs a positive constant term, got {_short(c0)}")
    n = s.order
    with _series.workdps(s.dps) as ctx:
        g = ctx.mpf(gamma)
        c0 = ctx.mpf(c0)
        r = [ctx.mpf(c) / c0 for c in s.coeffs]
        r[0] = ctx.zero
        # C(g, j) by the product recurrence, exact for any real g
        weights = [ctx.one]
        for j in range(1, n):
            weights.append(weights[-1] * (g - (j - 1)) / j)
        # Horner: (((w_{n-1} r + w_{n-2}) r + ...) r + w_0)
        acc = [ctx.zero] * n
        acc[0] = weights[n - 1]
        for j in range(n - 2, -1, -1):
            acc = _mul(ctx, acc, r, n)
            acc[0] += weights[j]
        scale = ctx.power(c0, g)
        out = [scale * c for c in acc]
    return PowerSeries(out, s.dps)


def series_exp(s: PowerSeries) -> PowerSeries:
    """``exp(s)`` from the recurrence ``k f_k = sum_j j s_j f_{k-j}``."""
    n = s.order
    with _series.workdps(s.dps) as ctx:
        a = [ctx.mpf(c) for c in s.coeffs]
        f = [ctx.exp(a[0])]
        ja = [j * a[j] for j in range(n)]
        for k in range(1, n):
            f.append(ctx.fsum(ja[j] * f[k - j] for j in range(1, k + 1)) / k)
    return PowerSeries(f, s.dps)


def _ml_taylor_weights(ctx, beta, s0, n, config):
    """``d_j = E_beta^{(j)}(s0) / j!`` for ``j < n`` by summing over the ML series."""
    rel = ctx.eps
    d = [ctx.zero] * n
    bm = ctx.mpf(beta)
    power = ctx.one  # s0^m
    m = 0
    run = 0
    while True:
        g = ctx.rgamma(1 + bm * m)
        # term for index m contributes C(m, j) s0^(m-j) / Gamma(1 + beta m) to d_j
        top = min(m, n - 1)
        biggest = ctx.zero
        if s0:
            coef = power * g  # j = 0
            for j in range(top + 1):
                d[j] += coef
                a = abs(coef)
                if a > biggest:
                    biggest = a
                if j < top:
                    coef = coef * (m - j) / ((j + 1) * s0)
        else:
            if m < n:
                d[m] += g
                biggest = g
        m += 1
        power *= s0
        if m > n:
            smallest = min(abs(v) for v in d if v) if any(d) else ctx.one
            if biggest <= rel * smallest:
                run += 1
                if run >= config.stagnation_window:
                    return d
            else:
                run = 0
        if m >= config.max_terms:
            raise NonConvergence("Mittag-Leffler composition did not stagnate", level="n")


def series_ml_compose(beta: float, s: PowerSeries, config=None) -> PowerSeries:
    """``E_beta(s) = sum_n s^n / Gamma(1 + n beta)`` on the truncated algebra.

    The sum is regrouped around the constant term ``s0``:
    ``E_beta(s0 + r) = sum_j E_beta^{(j)}(s0)/j! r^j`` where ``r`` has no
    constant term, so only ``j < order`` contribute.  ``beta = 1`` gives
    :func:`series_exp`.
    """
    from .specfun import DEFAULT_CONFIG

    if not 0 < beta <= 1:
        raise InvalidParameter(f"beta must lie in (0, 1], got {beta}")
    if beta == 1:
        return series_exp(s)
    config = config or DEFAULT_CONFIG
    n = s.order
    with _series.workdps(s.dps) as ctx:
        a = [ctx.mpf(c) for c in s.coeffs]
        s0 = a[0]
        r = [ctx.zero] + a[1:]
        d = _ml_taylor_weights(ctx, beta, s0, n, config)
        acc = [ctx.zero] * n
        acc[0] = d[n - 1]
        for j in range(n - 2, -1, -1):
            acc = _mul(ctx, acc, r, n)
            acc[0] += d[j]
    return PowerSeries(acc, s.dps)


# ---------------------------------------------------------------------------
# closed-form transforms


@lru_cache(maxsize=64)
def _centered_powers(kind: tuple, n: int, dps: int) -> tuple:
    """Powers ``h^j`` (j < n) of ``h = base - 1`` for a cached base series."""
    base = _base_series(kind, n, dps)
    with _series.workdps(dps) as ctx:
        h = [ctx.mpf(c) for c in base.coeffs]
        h[0] -= 1
        powers = [[ctx.one] + [ctx.zero] * (n - 1)]
        for _ in range(1, n):
            powers.append(_mul(ctx, powers[-1], h, n))
    return tuple(tuple(p) for p in powers)


@lru_cache(maxsize=64)
def _base_series(kind: tuple, n: int, dps: int) -> PowerSeries:
    if kind[0] == "binomial":
        return series_pow(PowerSeries.polynomial([1, -1], n, dps), kind[1])
    if kind[0] == "gegenbauer":
        _, d, u = kind
        return series_pow(PowerSeries.polynomial([1, -2 * u, 1], n, dps), d)
    raise InvalidParameter(f"unknown base {kind!r}")


def _compose_scaled(kind: tuple, x: float, beta, n: int, dps: int, config) -> PowerSeries:
    """``E_beta(-x * base)`` (``exp`` when beta is None) using cached powers."""
    base = _base_series(kind, n, dps)
    if beta is None or beta == 1:
        return series_exp(base * (-x))
    from .specfun import DEFAULT_CONFIG

    config = config or DEFAULT_CONFIG
    powers = _centered_powers(kind, n, dps)
    with _series.workdps(dps) as ctx:
        s0 = -ctx.mpf(x) * ctx.mpf(base[0])
        d = _ml_taylor_weights(ctx, beta, s0, n, config)
        scale = -ctx.mpf(x)
        acc = [ctx.zero] * n
        factor = ctx.one
        for j in range(n):
            w = d[j] * factor
            row = powers[j]
            for k in range(j, n):
                acc[k] += w * row[k]
            factor *= scale
    return PowerSeries(acc, dps)


def _oracle_dps(majorant: float, beta, n: int, floor: int) -> int:
    """Digits needed to absorb the cancellation of an ``E_beta(s)`` expansion.

    ``majorant`` bounds ``|s_0| + sum_(k>=1) |s_k|``, so the largest term of
    ``E_beta(majorant)`` bounds every intermediate quantity.
    """
    b = 1.0 if beta is None else beta
    log_x = math.log(majorant) if majorant > 0 else -math.inf

    def log_term(m):
        if m == 0:
            return 0.0
        return m * log_x - math.lgamma(1.0 + b * m)

    peak = _series.log10_peak(log_term)
    dps = floor + int(math.ceil(max(0.0, peak))) + int(math.log10(n + 1)) + 5
    return int(20 * math.ceil(dps / 20))  # bucket so caches are reused


def extract_pmf(family: str, params, k_max: int, t: float, *, order: int | None = None,
                dps: int | None = None, config=None) -> list:
    """Coefficients ``w^0 .. w^k_max`` of the family's closed-form transform.

    Values are mpf numbers carrying at least 30 significant digits.
    """
    if k_max < 0:
        raise InvalidParameter(f"k_max must be >= 0, got {k_max}")
    n = order or (k_max + 1 + GUARD_ORDER)
    if n < k_max + 1:
        raise InvalidParameter("order must exceed k_max")
    if t < 0:
        raise InvalidParameter(f"t must be >= 0, got {t}")
    if t == 0:
        with _series.workdps(dps or DEFAULT_DPS) as ctx:
            return [ctx.one if k == 0 else ctx.zero for k in range(k_max + 1)]
    p = params
    if family in ("poisson", "tfpp", "sfpp", "tsfpp"):
        if not isinstance(p, ProcessParams):
            raise InvalidParameter(f"{family} needs ProcessParams")
        alpha = 1.0 if family in ("poisson", "tfpp") else p.alpha
        beta = None if family in ("poisson", "sfpp") or p.beta == 1 else p.beta
        x = p.lam ** alpha * (t if beta is None else t ** beta)
        prec = dps or _oracle_dps(2 * x, beta, n, DEFAULT_DPS)
        series = _compose_scaled(("binomial", float(alpha)), x, beta, n, prec, config)
    elif family == "tempered-sfpp":
        if not isinstance(p, ProcessParams):
            raise InvalidParameter(f"{family} needs ProcessParams")
        prec = dps or _oracle_dps(2 * t * (p.mu + p.lam) ** p.alpha, None, n, DEFAULT_DPS)
        inner = series_pow(PowerSeries.polynomial([p.mu + p.lam, -p.lam], n, prec), p.alpha)
        series = series_exp((inner - (p.mu ** p.alpha if p.mu > 0 else 0.0)) * (-t))
    elif family in ("gegenbauer", "gegenbauer-ts"):
        if not isinstance(p, GegenbauerParams):
            raise InvalidParameter(f"{family} needs GegenbauerParams")
        beta = None if family == "gegenbauer" or p.beta == 1 else p.beta
        x = p.lam ** (2 * p.d) * (t if beta is None else t ** beta)
        # coefficients of (1 - 2uw + w^2)^d have absolute sum <= (2 + 2|u|)^d
        majorant = x * (2 + (2 + 2 * abs(p.u)) ** p.d)
        prec = dps or _oracle_dps(majorant, beta, n, DEFAULT_DPS)
        series = _compose_scaled(("gegenbauer", float(p.d), float(p.u)), x, beta, n, prec,
                                 config)
    elif family == "composite":
        if not isinstance(p, CompositeParams):
            raise InvalidParameter(f"{family} needs CompositeParams")
        x = p.lam * t
        prec = dps or _oracle_dps(4 * x, None, n, DEFAULT_DPS)
        one = PowerSeries.polynomial([1, -1], n, prec)
        inner = series_pow(one, p.alpha1) + series_pow(one, p.alpha2)
        series = series_exp(inner * (-x))
    else:
        raise InvalidParameter(f"no closed-form transform for family {family!r}")
    return list(series.coeffs[: k_max + 1])


def total_mass(family: str, params, t: float):
    """Transform evaluated at ``z = 1`` (``w = 1``): the limit of the partial sums."""
    from .specfun import mittag_leffler

    if t == 0 or family in ("poisson", "tfpp", "sfpp", "tsfpp", "tempered-sfpp",
                            "tempered-tsfpp", "composite"):
        return 1.0
    if family in ("gegenbauer", "gegenbauer-ts"):
        p = params
        # 1 - 2u + 1 = 2 - 2u at w = 1
        a = p.lam ** (2 * p.d) * (2.0 - 2.0 * p.u) ** p.d
        if family == "gegenbauer" or p.beta == 1:
            return math.exp(-a * t)
        return mittag_leffler(p.beta, 1.0, -a * t ** p.beta)
    raise InvalidParameter(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# shift rules


def ztransform_of(seq: Sequence, dps: int = DEFAULT_DPS) -> PowerSeries:
    """Transform of a finite sequence ``f(0..n-1)`` as a power series in ``w``."""
    seq = list(seq)
    if not seq:
        raise InvalidParameter("sequence must not be empty")
    return PowerSeries(seq, dps)


def shift_identity_check(seq: Sequence, m: int) -> bool:
    """Check both shift rules on the truncated algebra.

    Delay: ``Z f(k-m) = w^m F(w)``.  Advance:
    ``Z f(k+m) = w^-m (F(w) - sum_{j<m} f(j) w^j)``.  The delayed sequence is
    compared on order ``n + m`` so nothing is truncated away.
    """
    if m < 0:
        raise InvalidParameter(f"m must be >= 0, got {m}")
    seq = list(seq)
    n = len(seq)
    F = ztransform_of(seq + [0] * m)
    delayed = ztransform_of([0] * m + seq)
    ok_delay = F.shifted(m).coeffs == delayed.coeffs

    head = ztransform_of(seq[:m] + [0] * (n + m - min(m, n)))
    tail = (F - head).coeffs[m:]
    advanced = ztransform_of(seq[m:] + [0] * (n - len(seq[m:]) + m))
    ok_advance = tuple(advanced.coeffs[: len(tail)]) == tuple(tail)
    return bool(ok_delay and ok_advance)

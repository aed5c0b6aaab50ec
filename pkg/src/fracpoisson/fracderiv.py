"""Grid-based fractional derivatives and fractional difference operators.

These operators are used to check, numerically, that evaluated state
probabilities satisfy the differential-difference equations that define
them.  Time derivatives act on samples of a function on a uniform grid
``t_j = j h``; difference operators act on a column ``P(0..K)`` in ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import GridTooCoarse, InvalidParameter

__all__ = [
    "TimeGridFn",
    "MIN_GRID_POINTS",
    "gl_weights",
    "caputo_derivative",
    "caputo_tempered_derivative",
    "tempered_tail",
    "binomial_shift_coefficients",
    "gegenbauer_coefficients",
    "fractional_shift",
    "gegenbauer_shift",
    "apply_lower_triangular",
    "EQUATIONS",
    "governing_residual",
]

MIN_GRID_POINTS = 8


@dataclass(frozen=True)
class TimeGridFn:
    """Samples of a function on the uniform grid ``t_j = t0 + j h``."""

    t_grid: np.ndarray
    values: np.ndarray
    f0: float

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or v.shape != t.shape:
            raise InvalidParameter("t_grid and values must be 1-d arrays of equal length")
        if t.size >= 2:
            steps = np.diff(t)
            h = steps[0]
            if not h > 0:
                raise InvalidParameter("grid step must be > 0")
            if np.max(np.abs(steps - h)) > 1e-9 * max(1.0, abs(t[-1])):
                raise InvalidParameter("t_grid must be uniform")
        if not np.all(np.isfinite(v)) or not math.isfinite(self.f0):
            raise InvalidParameter("values must be finite")
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, f, h: float, t_max: float) -> "TimeGridFn":
        """Sample a vectorized callable on ``0, h, ..., t_max``."""
        n = int(round(t_max / h))
        t = h * np.arange(n + 1)
        values = np.asarray(f(t), dtype=float)
        return cls(t, values, float(values[0]))

    @property
    def h(self) -> float:
        return float(self.t_grid[1] - self.t_grid[0])

    def _require_points(self):
        if self.t_grid.size < MIN_GRID_POINTS:
            raise GridTooCoarse(
                f"need at least {MIN_GRID_POINTS} grid points, got {self.t_grid.size}")


def gl_weights(beta: float, n: int) -> np.ndarray:
    """Grunwald-Letnikov weights ``w_j = (-1)^j C(beta, j)`` for j < n."""
    w = np.empty(n)
    w[0] = 1.0
    for j in range(1, n):
        w[j] = w[j - 1] * (1.0 - (beta + 1.0) / j)
    return w


def _gl(values: np.ndarray, beta: float, h: float) -> np.ndarray:
    w = gl_weights(beta, values.size)
    return np.convolve(w, values)[: values.size] / h ** beta


def caputo_derivative(f: TimeGridFn, beta: float) -> TimeGridFn:
    """Caputo derivative of order ``beta`` in (0, 1].

    For ``beta < 1`` this is the Grunwald-Letnikov approximation of the
    Riemann-Liouville derivative of ``f - f0``, first order in ``h``.  For
    ``beta = 1`` it is the ordinary derivative by central differences
    (one-sided at the ends).
    """
    if not 0 < beta <= 1:
        raise InvalidParameter(f"beta must lie in (0, 1], got {beta}")
    f._require_points()
    if beta == 1:
        out = np.gradient(f.values, f.h)
    else:
        out = _gl(f.values - f.f0, beta, f.h)
    return TimeGridFn(f.t_grid, out, float(out[0]))


def tempered_tail(beta: float, nu: float, t) -> np.ndarray:
    """``(1/Gamma(1-beta)) int_t^inf exp(-nu r) beta r^(-beta-1) dr`` for t > 0.

    Uses ``beta nu^beta Gamma(-beta, nu t)`` with the upper incomplete gamma
    function reduced to positive order; ``nu = 0`` gives
    ``t^-beta / Gamma(1-beta)``.
    """
    t = np.asarray(t, dtype=float)
    if nu == 0:
        return t ** (-beta) / math.gamma(1.0 - beta)
    x = nu * t
    # Gamma(-b, x) = (x^-b e^-x - Gamma(1-b, x)) / b
    upper = special.gammaincc(1.0 - beta, x) * math.gamma(1.0 - beta)
    gamma_neg = (x ** (-beta) * np.exp(-x) - upper) / beta
    return beta * nu ** beta * gamma_neg / math.gamma(1.0 - beta)


def caputo_tempered_derivative(f: TimeGridFn, beta: float, nu: float) -> TimeGridFn:
    """Tempered Caputo derivative of order ``beta`` in (0, 1).

    Evaluates ``exp(-nu t) D^beta[exp(nu t) f](t) - nu^beta f(t)`` minus
    ``f0`` times the tempered tail (see ``tempered_tail``), where ``D^beta``
    is the Riemann-Liouville derivative.  The Riemann-Liouville part is split
    into a Grunwald-Letnikov sum of ``exp(nu t) f - f0`` plus the exact
    ``f0 t^-beta / Gamma(1-beta)`` so the grid error stays first order.
    The value at ``t = 0`` is not defined; it is filled with the value at
    ``t = h``.
    """
    if not 0 < beta < 1:
        raise InvalidParameter(f"beta must lie in (0, 1), got {beta}")
    if nu < 0:
        raise InvalidParameter(f"nu must be >= 0, got {nu}")
    f._require_points()
    t = f.t_grid
    tilt = np.exp(nu * t)
    gl = _gl(tilt * f.values - f.f0, beta, f.h)
    out = np.full(t.shape, np.nan)
    pos = t > 0
    singular = f.f0 * t[pos] ** (-beta) / math.gamma(1.0 - beta)
    out[pos] = ((gl[pos] + singular) / tilt[pos] - nu ** beta * f.values[pos]
                - f.f0 * tempered_tail(beta, nu, t[pos]))
    return _with_nan(t, out)


def _with_nan(t, out):
    # TimeGridFn requires finite values; the undefined origin is set to the
    # first interior value, which residual checks exclude anyway
    out = out.copy()
    if np.isnan(out[0]) and out.size > 1:
        out[0] = out[1]
    return TimeGridFn(t, out, float(out[0]))


# ---------------------------------------------------------------------------
# difference operators in k


def binomial_shift_coefficients(alpha: float, mu: float, lam: float, n: int) -> np.ndarray:
    """Coefficients of ``B^j`` in ``(mu + lam (1 - B))^alpha``, j < n.

    Written as ``(mu+lam)^alpha (1 - q B)^alpha`` with ``q = lam/(mu+lam)``,
    which converges for every ``mu >= 0``.
    """
    if not lam > 0:
        raise InvalidParameter(f"lambda must be > 0, got {lam}")
    if mu < 0:
        raise InvalidParameter(f"mu must be >= 0, got {mu}")
    q = lam / (mu + lam)
    c = np.empty(n)
    c[0] = (mu + lam) ** alpha
    for j in range(1, n):
        c[j] = c[j - 1] * (j - 1 - alpha) / j * q
    return c


def gegenbauer_coefficients(d: float, u: float, n: int) -> np.ndarray:
    """Coefficients of ``B^j`` in ``(1 - 2uB + B^2)^d``, i.e. ``C_j^(-d)(u)``.

    Three-term recurrence ``j C_j = 2u(j - d - 1) C_{j-1} - (j - 2d - 2) C_{j-2}``.
    """
    g = -d
    c = np.zeros(n)
    c[0] = 1.0
    if n > 1:
        c[1] = 2.0 * g * u
    for j in range(2, n):
        c[j] = (2.0 * u * (j + g - 1.0) * c[j - 1] - (j + 2.0 * g - 2.0) * c[j - 2]) / j
    return c


def apply_lower_triangular(coefficients: np.ndarray, column) -> np.ndarray:
    """``y_k = sum_{j<=k} c_j x_{k-j}`` along axis 0 (values below k=0 are zero)."""
    x = np.asarray(column, dtype=float)
    n = x.shape[0]
    c = np.asarray(coefficients, dtype=float)[:n]
    out = np.zeros_like(x)
    for j, cj in enumerate(c):
        if cj != 0.0:
            out[j:] += cj * x[: n - j]
    return out


def fractional_shift(pmf_column, alpha: float, mu: float, lam: float) -> np.ndarray:
    """Apply ``(mu + lam (1 - B))^alpha`` to a column indexed by ``k = 0..K``.

    ``B`` is the backward shift ``B P(k) = P(k-1)`` with ``P(k) = 0`` for
    ``k < 0``, so the result at ``k`` is a finite sum.  A 2-d input is treated
    as columns over ``k`` (axis 0).
    """
    x = np.asarray(pmf_column, dtype=float)
    return apply_lower_triangular(binomial_shift_coefficients(alpha, mu, lam, x.shape[0]), x)


def gegenbauer_shift(pmf_column, d: float, u: float) -> np.ndarray:
    """Apply ``(1 - 2uB + B^2)^d`` to a column indexed by ``k = 0..K``."""
    x = np.asarray(pmf_column, dtype=float)
    return apply_lower_triangular(gegenbauer_coefficients(d, u, x.shape[0]), x)


# ---------------------------------------------------------------------------
# governing-equation residuals

EQUATIONS = ("sfpp", "tsfpp", "tempered-sfpp", "tempered-tsfpp", "gegenbauer", "tfpp")


def governing_residual(equation: str, params, *, h: float = 1.0 / 512,
                       t_window: tuple[float, float] = (0.25, 2.0), k_max: int = 8,
                       config=None, coefficient: float | None = None) -> tuple[float, dict]:
    """Relative sup-norm residual of a governing equation on a time grid.

    ``P(k, t)`` is tabulated for ``k <= k_max`` on ``t = 0, h, ..., t_hi + h``;
    the left side (time derivative of the appropriate kind) is compared with
    the right side (difference operator in ``k``) on ``t_window``.  Returns
    ``sup |lhs - rhs| / sup |rhs|`` and a dict of diagnostics.

    Equations, with ``A`` the operator ``(mu + lam (1-B))^alpha - mu^alpha``:

    * ``sfpp``: ``d/dt P = -lam^alpha (1-B)^alpha P``
    * ``tsfpp``: Caputo ``D^beta P = -lam^alpha (1-B)^alpha P``
    * ``tempered-sfpp``: ``d/dt P = -A P``
    * ``tempered-tsfpp``: tempered Caputo ``D^{beta,nu} P = -A P``
    * ``gegenbauer``: ``d/dt P = -lam^(2d) (1 - 2uB + B^2)^d P``
    * ``tfpp``: Caputo ``D^beta P = -c (1-B) P`` with ``c = coefficient``
      (default ``lam``)
    """
    from .pmf import pmf_table

    if equation not in EQUATIONS:
        raise InvalidParameter(f"unknown equation {equation!r}; expected one of {EQUATIONS}")
    t_lo, t_hi = t_window
    n = int(round(t_hi / h)) + 1
    t_grid = h * np.arange(n + 1)
    family = "gegenbauer" if equation == "gegenbauer" else equation
    table = pmf_table(params, k_max, t_grid, config, family=family)
    P = table.values
    p = params
    if equation == "gegenbauer":
        rhs = -(p.lam ** (2.0 * p.d)) * gegenbauer_shift(P, p.d, p.u)
    elif equation == "tfpp":
        rate = p.lam if coefficient is None else float(coefficient)
        rhs = -fractional_shift(P, 1.0, 0.0, rate)
    else:
        mu = p.mu if equation.startswith("tempered") else 0.0
        rhs = -(fractional_shift(P, p.alpha, mu, p.lam) - mu ** p.alpha * P)

    lhs = np.empty_like(P)
    for k in range(k_max + 1):
        f = TimeGridFn(t_grid, P[k], float(P[k, 0]))
        if equation in ("sfpp", "tempered-sfpp", "gegenbauer"):
            lhs[k] = caputo_derivative(f, 1.0).values
        elif equation == "tempered-tsfpp":
            lhs[k] = caputo_tempered_derivative(f, p.beta, p.nu).values
        else:
            lhs[k] = caputo_derivative(f, p.beta).values
    window = (t_grid >= t_lo - 1e-12) & (t_grid <= t_hi + 1e-12)
    res = np.abs(lhs - rhs)[:, window]
    scale = float(np.max(np.abs(rhs[:, window])))
    metric = float(np.max(res)) / scale
    k_worst, j_worst = np.unravel_index(int(np.argmax(res)), res.shape)
    details = {"h": h, "points": int(window.sum()), "rhs_sup": scale,
               "worst_k": int(k_worst), "worst_t": float(t_grid[window][j_worst])}
    return metric, details

"""Pearson correlation with exact Student-t inference, and OLS regression.

The t distribution is evaluated through the regularised incomplete beta
function (Lentz continued fraction), so p-values stay accurate at the very
small sample sizes (n = 12 monthly means) the study works with.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import linalg

from .errors import LengthMismatch, RankDeficient, TooFewObservations, ZeroVariance

CF_MAX_ITER = 200
CF_TOL = 1e-12
_TINY = 1e-300


def _beta_cf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_TOL:
            break
    return h


def betainc(a: float, b: float, x: float) -> float:
    """Regularised incomplete beta function I_x(a, b) for a, b > 0."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc needs a, b > 0")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"betainc argument {x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    lbt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
           + a * math.log(x) + b * math.log1p(-x))
    bt = math.exp(lbt)
    # the fraction converges fast only on this side of the mean; use the
    # symmetry I_x(a,b) = 1 - I_{1-x}(b,a) otherwise
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _beta_cf(a, b, x) / a
    return 1.0 - bt * _beta_cf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: int) -> float:
    """Two-sided tail probability P(|T| >= |t|) of Student's t with ``df`` dof."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return min(1.0, max(0.0, betainc(0.5 * df, 0.5, x)))


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n: int
    t: float
    p: float

    def __str__(self):
        return f"r={self.r:.3f} p={self.p:.3f}"


def pearson(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    """Sample correlation of ``x`` and ``y`` with its two-sided t-test.

    Raises
    ------
    LengthMismatch
        when the inputs differ in length.
    ZeroVariance
        when either input is constant.
    TooFewObservations
        for fewer than three pairs (no residual degrees of freedom).
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise LengthMismatch(f"x has {xa.size} values, y has {ya.size}")
    n = len(xa)
    if n < 3:
        raise TooFewObservations(f"correlation test needs n >= 3, got {n}")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        which = "x" if sxx == 0.0 else "y"
        raise ZeroVariance(f"{which} is constant; correlation undefined")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) == 1.0:
        return CorrelationResult(r, n, math.copysign(math.inf, r), 0.0)
    t = r * math.sqrt(df) / math.sqrt(1.0 - r * r)
    return CorrelationResult(r, n, t, t_two_sided_p(t, df))


@dataclass(frozen=True, eq=False)
class RegressionFit:
    intercept: float
    slopes: dict[str, float]
    n: int
    k: int
    sse: float
    sst: float
    s: float
    r2: float
    fitted: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.slopes)

    def equation(self, response: str = "y") -> str:
        """One-line summary, e.g. ``y = 1314 - 5.44 D + 1.15 H``."""
        parts = [f"{response} = {_fmt_coef(self.intercept)}"]
        for name, b in self.slopes.items():
            sign = "-" if b < 0 else "+"
            parts.append(f"{sign} {_fmt_coef(abs(b))} {name}")
        return " ".join(parts)

    def summary_line(self) -> str:
        return f"S = {self.s:.6g}  R^2 = {100 * self.r2:.1f}%"


def _fmt_coef(v: float) -> str:
    # three significant figures, but never fewer than two decimals for small
    # magnitudes (0.00 rather than 1.2e-05)
    if v == 0 or abs(v) < 0.005:
        return "0.00"
    if abs(v) >= 100:
        return f"{v:.0f}"
    return f"{v:.3g}"


def ols(y: Sequence[float], X: Mapping[str, Sequence[float]]) -> RegressionFit:
    """Least squares fit of ``y`` on an intercept plus the named columns of ``X``.

    Solved through a QR factorisation of the design matrix.

    Raises
    ------
    TooFewObservations
        unless n > k + 1.
    RankDeficient
        naming the columns that are linear combinations of the others.
    """
    ya = np.asarray(y, dtype=float)
    names = list(X)
    cols = [np.asarray(X[c], dtype=float) for c in names]
    n, k = len(ya), len(names)
    for name, c in zip(names, cols):
        if c.shape != ya.shape:
            raise LengthMismatch(f"column {name!r} has {c.size} values, y has {n}")
    if not n > k + 1:
        raise TooFewObservations(f"need n > k + 1 observations, got n={n}, k={k}")
    A = np.column_stack([np.ones(n)] + cols)
    labels = ["(intercept)"] + names

    # rank diagnosis by column-pivoted QR; pivots past the numerical rank are
    # the dependent columns
    _, R, piv = linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = diag[0] * max(A.shape) * np.finfo(float).eps if diag.size else 0.0
    rank = int(np.sum(diag > tol))
    if rank < k + 1:
        raise RankDeficient(sorted((labels[j] for j in piv[rank:]), key=labels.index))

    Q, R = np.linalg.qr(A)
    beta = linalg.solve_triangular(R, Q.T @ ya)
    fitted = A @ beta
    resid = ya - fitted
    sse = float(resid @ resid)
    dy = ya - ya.mean()
    sst = float(dy @ dy)
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    s = math.sqrt(sse / (n - k - 1))
    return RegressionFit(float(beta[0]), dict(zip(names, map(float, beta[1:]))),
                         n, k, sse, sst, s, r2, fitted, resid)

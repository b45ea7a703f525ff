"""ARMA(p, q) estimation, exact Gaussian likelihood, AICC order selection,
forecasting and simulation.

Sign conventions follow ``X_t - phi_1 X_{t-1} - ... = Z_t + theta_1 Z_{t-1} + ...``
on the mean-centred series.  The likelihood is evaluated with the
innovations algorithm (see :mod:`solarstudy._backend` for the kernel choice).
"""
from __future__ import annotations

import math
from concurrent.futures import Executor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy import optimize, signal

from ._backend import kernels
from .errors import (DegenerateSampleSize, NoConvergedCandidate,
                     NonCausalModel, NonInvertibleModel, OptimizationDiverged,
                     SeriesTooShort, SingularDesign, StudyError)

MAX_ITER = 500
FTOL = 1e-8
GTOL = 1e-6
TIE_TOL = 1e-12
ROOT_MARGIN = 1.01      # candidates need every root modulus >= this
# bound on the unconstrained partial-autocorrelation parameters; tanh(8) keeps
# every root at least ~2e-7 outside the unit circle
_U_BOUND = 8.0


@dataclass(frozen=True)
class ArmaModel:
    p: int
    q: int
    ar: tuple[float, ...]
    ma: tuple[float, ...]
    mean: float
    sigma2: float
    loglik: float
    aicc: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(float(a) for a in self.ar))
        object.__setattr__(self, "ma", tuple(float(b) for b in self.ma))
        if len(self.ar) != self.p or len(self.ma) != self.q:
            raise ValueError("coefficient counts do not match (p, q)")
        if not self.sigma2 >= 0:
            raise ValueError(f"innovation variance must be non-negative, got {self.sigma2}")

    @property
    def order(self) -> tuple[int, int]:
        return self.p, self.q


@dataclass(frozen=True)
class Candidate:
    p: int
    q: int
    aicc: float
    converged: bool
    reason: str = ""


@dataclass(frozen=True)
class OrderSelectionReport:
    p_max: int
    q_max: int
    candidates: tuple[Candidate, ...]
    chosen: tuple[int, int]
    tie_break_applied: bool


@dataclass(frozen=True)
class ForecastSeries:
    horizon: int
    point: np.ndarray
    mse: np.ndarray
    scale: str = "differenced"

    def __post_init__(self):
        if self.scale not in ("differenced", "original"):
            raise ValueError(f"unknown scale {self.scale!r}")
        if len(self.point) != self.horizon or len(self.mse) != self.horizon:
            raise ValueError("point and mse must both have `horizon` entries")


# -- polynomial checks -------------------------------------------------------

def min_root_modulus(coefs: Sequence[float], sign: float) -> float:
    """Smallest |z| over the roots of ``1 + sign * sum c_k z^k`` (inf if none)."""
    c = np.trim_zeros(np.asarray(coefs, dtype=float), "b")
    if len(c) == 0:
        return math.inf
    poly = np.r_[1.0, sign * c]
    return float(np.abs(np.roots(poly[::-1])).min())


def is_causal(ar) -> bool:
    return min_root_modulus(ar, -1.0) > 1.0


def is_invertible(ma) -> bool:
    return min_root_modulus(ma, 1.0) > 1.0


# -- partial-autocorrelation reparametrisation -------------------------------

def _pacf_to_coefs(r: np.ndarray) -> np.ndarray:
    """Durbin-Levinson map from partial autocorrelations in (-1, 1) to a
    causal AR coefficient vector."""
    y = np.array(r, dtype=float)
    for k in range(1, len(y)):
        a = y[:k].copy()
        y[:k] = a - y[k] * a[::-1]
    return y


def _coefs_to_pacf(phi: np.ndarray) -> np.ndarray:
    y = np.array(phi, dtype=float)
    r = np.zeros_like(y)
    for k in range(len(y) - 1, -1, -1):
        r[k] = y[k]
        a = y[:k].copy()
        y[:k] = (a + r[k] * a[::-1]) / (1.0 - r[k] ** 2)
    return r


def _to_free(ar, ma, enforce):
    lim = math.tanh(_U_BOUND)
    u_ar = np.arctanh(np.clip(_coefs_to_pacf(np.asarray(ar)), -lim, lim))
    if enforce:
        u_ma = np.arctanh(np.clip(_coefs_to_pacf(-np.asarray(ma)), -lim, lim))
    else:
        u_ma = np.asarray(ma, dtype=float)
    return np.r_[u_ar, u_ma]


def _from_free(u, p, enforce):
    ar = _pacf_to_coefs(np.tanh(u[:p]))
    ma = -_pacf_to_coefs(np.tanh(u[p:])) if enforce else np.asarray(u[p:])
    return ar, ma


# -- likelihood and criterion -------------------------------------------------

def aicc(loglik: float, p: int, q: int, n: int) -> float:
    denom = n - p - q - 2
    if denom <= 0:
        raise DegenerateSampleSize(f"n - p - q - 2 = {denom} <= 0 (n={n}, p={p}, q={q})")
    return -2.0 * loglik + 2.0 * (p + q + 1) * n / denom


def _check_region(ar, ma, check_ma=True):
    if not is_causal(ar):
        raise NonCausalModel(f"AR polynomial has a root on or inside the unit circle: {list(ar)}")
    if check_ma and not is_invertible(ma):
        raise NonInvertibleModel(f"MA polynomial has a root on or inside the unit circle: {list(ma)}")


def gaussian_loglik(model: ArmaModel, values: Sequence[float], *, check_invertible=True) -> float:
    """Exact Gaussian log-likelihood of ``values - model.mean``."""
    x = np.asarray(values, dtype=float)
    if len(x) != model.n:
        raise ValueError(f"model was fitted on {model.n} values, got {len(x)}")
    if not model.sigma2 > 0:
        raise ValueError("likelihood needs a positive innovation variance")
    _check_region(model.ar, model.ma, check_invertible)
    ssq, slog = kernels.reduced_likelihood(x - model.mean, model.ar, model.ma)
    n = len(x)
    return -0.5 * (n * math.log(2 * math.pi * model.sigma2) + slog + ssq / model.sigma2)


def _profile(x, ar, ma):
    """Return (-2 loglik / n with sigma^2 profiled out, sigma^2 hat)."""
    ssq, slog = kernels.reduced_likelihood(x, ar, ma)
    n = len(x)
    s2 = ssq / n
    return math.log(2 * math.pi * s2) + slog / n + 1.0, s2


def _finish(p, q, ar, ma, mean, sigma2, x, check_invertible=True):
    """Build an ArmaModel with loglik/aicc filled in (NaN outside the region)."""
    n = len(x)
    model = ArmaModel(p, q, tuple(ar), tuple(ma), mean, sigma2, math.nan, math.nan, n)
    try:
        ll = gaussian_loglik(model, x + mean, check_invertible=check_invertible)
    except (NonCausalModel, NonInvertibleModel):
        return model
    return replace(model, loglik=ll, aicc=aicc(ll, p, q, n))


# -- estimation ---------------------------------------------------------------

def _lag_matrix(x, lags, start):
    return np.column_stack([x[start - k:len(x) - k] for k in lags]) if lags else np.empty((len(x) - start, 0))


def _lstsq(design, target, what):
    if design.shape[1] and np.linalg.matrix_rank(design) < design.shape[1]:
        raise SingularDesign(f"{what}: regression matrix is rank deficient")
    coef = np.linalg.lstsq(design, target, rcond=None)[0]
    return coef, target - design @ coef


def hannan_rissanen(values: Sequence[float], p: int, q: int) -> ArmaModel:
    """Initial ARMA estimate from a long autoregression and a lagged regression.

    ``loglik`` and ``aicc`` are NaN when the estimate falls outside the causal
    and invertible region.
    """
    x0 = np.asarray(values, dtype=float)
    n = len(x0)
    if n < 20 + 2 * (p + q):
        raise SeriesTooShort(f"ARMA({p},{q}) needs at least {20 + 2 * (p + q)} values, got {n}")
    mean = float(x0.mean())
    x = x0 - mean

    if p == 0 and q == 0:
        sigma2 = float(np.mean(x * x))
        if not sigma2 > 0:
            raise SingularDesign("series has zero variance")
        return _finish(0, 0, (), (), mean, sigma2, x)

    if q == 0:
        coef, resid = _lstsq(_lag_matrix(x, range(1, p + 1), p), x[p:], f"AR({p})")
        ar, ma = coef, np.empty(0)
    else:
        m_long = min(max(20, p + q + 10), n // 4)
        m_long = max(m_long, 1)
        ar_long, _ = _lstsq(_lag_matrix(x, range(1, m_long + 1), m_long), x[m_long:], "long AR")
        z = np.zeros(n)
        z[m_long:] = x[m_long:] - _lag_matrix(x, range(1, m_long + 1), m_long) @ ar_long
        start = max(p, m_long + q)
        design = np.hstack([_lag_matrix(x, range(1, p + 1), start),
                            _lag_matrix(z, range(1, q + 1), start)])
        coef, resid = _lstsq(design, x[start:], f"ARMA({p},{q})")
        ar, ma = coef[:p], coef[p:]
    sigma2 = float(np.mean(resid * resid))
    if not sigma2 > 0:
        raise SingularDesign("regression residuals vanish identically")
    return _finish(p, q, ar, ma, mean, sigma2, x)


def _shrink_inside(coefs, sign, margin=0.95):
    """Scale lag-k coefficients by lam**k so every root moves outside the circle."""
    c = np.asarray(coefs, dtype=float)
    rmin = min_root_modulus(c, sign)
    if rmin > 1.0:
        return c
    lam = margin * rmin
    return c * lam ** np.arange(1, len(c) + 1)


def stabilize(model: ArmaModel, values: Sequence[float]) -> ArmaModel:
    """Pull a non-causal or non-invertible estimate into the admissible region."""
    if is_causal(model.ar) and is_invertible(model.ma):
        return model
    x = np.asarray(values, dtype=float) - model.mean
    ar = _shrink_inside(model.ar, -1.0)
    ma = _shrink_inside(model.ma, 1.0)
    return _finish(model.p, model.q, ar, ma, model.mean, model.sigma2, x)


def refine_mle(initial: ArmaModel, values: Sequence[float], *,
               enforce_invertibility: bool = True, max_iter: int = MAX_ITER) -> ArmaModel:
    """Maximise the exact likelihood starting from ``initial``.

    The coefficients are optimised through partial autocorrelations so every
    iterate stays causal (and invertible when enforced); sigma^2 is profiled
    out.  Stops when the relative change of the objective drops below 1e-8 or
    the gradient max-norm below 1e-6.
    """
    x = np.asarray(values, dtype=float) - initial.mean
    p, q = initial.p, initial.q
    if len(x) != initial.n:
        raise ValueError(f"model was fitted on {initial.n} values, got {len(x)}")
    if p + q == 0:
        return initial
    _check_region(initial.ar, initial.ma, enforce_invertibility)

    u0 = _to_free(initial.ar, initial.ma, enforce_invertibility)
    lim = _U_BOUND if enforce_invertibility else math.inf
    lower = np.r_[np.full(p, -_U_BOUND), np.full(q, -lim)]
    upper = -lower
    bounds = [(lo if math.isfinite(lo) else None, hi if math.isfinite(hi) else None)
              for lo, hi in zip(lower, upper)]
    res = optimize.minimize(kernels.profile_objective_grad, u0, jac=True, method="L-BFGS-B",
                            args=(x, p, enforce_invertibility),
                            bounds=bounds,
                            options={"maxiter": max_iter, "ftol": FTOL, "gtol": GTOL})
    if not np.all(np.isfinite(res.x)) or not math.isfinite(res.fun) or res.fun >= 1e10:
        raise OptimizationDiverged(f"ARMA({p},{q}): {res.message}")
    if res.nit >= max_iter and not res.success:
        raise OptimizationDiverged(f"ARMA({p},{q}): no convergence after {max_iter} iterations")

    ar, ma = _from_free(res.x, p, enforce_invertibility)
    _, s2 = _profile(x, ar, ma)
    refined = _finish(p, q, ar, ma, initial.mean, s2, x, enforce_invertibility)
    if not math.isfinite(refined.loglik):
        raise OptimizationDiverged(f"ARMA({p},{q}): optimum left the admissible region")
    if math.isfinite(initial.loglik) and refined.loglik < initial.loglik:
        return initial
    return refined


def fit(values: Sequence[float], p: int, q: int, *, enforce_invertibility: bool = True,
        max_iter: int = MAX_ITER) -> ArmaModel:
    """Hannan-Rissanen start, pulled inside the admissible region, then MLE."""
    x = np.asarray(values, dtype=float)
    init = hannan_rissanen(x, p, q)
    if not math.isfinite(init.loglik):
        init = stabilize(init, x)
    model = refine_mle(init, x, enforce_invertibility=enforce_invertibility, max_iter=max_iter)
    if enforce_invertibility:
        _check_region(model.ar, model.ma)
    elif not is_causal(model.ar):
        raise NonCausalModel(f"ARMA({p},{q}) fit is not causal")
    return model


def _fit_candidate(args):
    x, p, q, enforce, max_iter = args
    try:
        model = fit(x, p, q, enforce_invertibility=enforce, max_iter=max_iter)
    except (StudyError, np.linalg.LinAlgError) as exc:
        return p, q, None, f"{type(exc).__name__}: {exc}"
    if not math.isfinite(model.aicc):
        return p, q, None, "non-finite AICC"
    # optima that press against the unit circle are numerically on it:
    # near-cancelling AR/MA root pairs that the exact likelihood rewards
    # spuriously
    if min_root_modulus(model.ar, -1.0) < ROOT_MARGIN:
        return p, q, None, "AR root within 1% of the unit circle"
    if enforce and min_root_modulus(model.ma, 1.0) < ROOT_MARGIN:
        return p, q, None, "MA root within 1% of the unit circle"
    return p, q, model, ""


def choose_candidate(candidates: Sequence[Candidate]) -> tuple[Candidate, bool]:
    """Minimum-AICC converged candidate; AICC ties within 1e-12 go to the
    smaller p + q, then the smaller p.  Returns (winner, tie_break_applied)."""
    ok = [c for c in candidates if c.converged and math.isfinite(c.aicc)]
    if not ok:
        raise NoConvergedCandidate("no candidate order produced a converged fit")
    best = min(c.aicc for c in ok)
    tied = [c for c in ok if c.aicc - best <= TIE_TOL]
    winner = min(tied, key=lambda c: (c.p + c.q, c.p))
    return winner, len(tied) > 1


def select_order(values: Sequence[float], p_max: int = 5, q_max: int = 5, *,
                 enforce_invertibility: bool = True, max_iter: int = MAX_ITER,
                 executor: Executor | None = None):
    """Fit every ARMA(p, q) on the grid and keep the minimum-AICC model.

    Candidate fits are independent; pass an ``executor`` to run them
    concurrently.  The result does not depend on evaluation order.
    """
    if p_max < 0 or q_max < 0:
        raise ValueError("grid bounds must be non-negative")
    x = np.asarray(values, dtype=float)
    jobs = [(x, p, q, enforce_invertibility, max_iter)
            for p in range(p_max + 1) for q in range(q_max + 1)]
    if executor is None:
        results = [_fit_candidate(j) for j in jobs]
    else:
        results = list(executor.map(_fit_candidate, jobs))
    results.sort(key=lambda r: (r[0], r[1]))
    models = {}
    rows = []
    for p, q, model, reason in results:
        if model is None:
            rows.append(Candidate(p, q, math.nan, False, reason))
        else:
            models[p, q] = model
            rows.append(Candidate(p, q, model.aicc, True))
    winner, tie = choose_candidate(rows)
    report = OrderSelectionReport(p_max, q_max, tuple(rows), (winner.p, winner.q), tie)
    return models[winner.p, winner.q], report


# -- forecasting --------------------------------------------------------------

def _forecast_core(model: ArmaModel, values, h: int):
    """Point forecasts (centred) and the innovation weights of each error.

    Returns ``point`` (h,), ``weights`` (h, h) where row k-1 holds the
    coefficients of the innovations U_{n+1}..U_{n+k} in the k-step error, and
    ``var`` (h,) with Var(U_{n+s}) / sigma^2.
    """
    x = np.asarray(values, dtype=float) - model.mean
    n = len(x)
    p, q = model.p, model.q
    m = max(p, q)
    if n < m + 1:
        raise SeriesTooShort(f"need more than {m} values to forecast ARMA({p},{q})")
    _check_region(model.ar, (), check_ma=False)
    ar = np.asarray(model.ar)
    theta, v = kernels.innovations(model.ar, model.ma, n + h)
    err, _ = kernels.innovations_errors(x, model.ar, model.ma)

    ext = np.concatenate([x, np.zeros(h)])
    for k in range(1, h + 1):
        t = n + k - 1
        s = 0.0
        for i in range(1, p + 1):
            s += ar[i - 1] * ext[t - i]
        for j in range(k, q + 1):
            s += theta[t, j] * err[t - j]
        ext[t] = s
    point = ext[n:]

    # chi: power series of 1 / phi(z)
    chi = np.zeros(h)
    chi[0] = 1.0
    for r in range(1, h):
        chi[r] = sum(ar[i - 1] * chi[r - i] for i in range(1, min(r, p) + 1))

    # c_{k,j} = sum_s chi[j - s] * theta[n + k - 1 - (j - s), s]; rows at or
    # beyond m carry no coefficients past lag q, so s runs over 0..q only
    kk, jj = np.tril_indices(h)
    weights = np.zeros((h, h))
    for s in range(min(q, h - 1) + 1):
        sel = jj >= s
        k, j = kk[sel], jj[sel]
        coef = 1.0 if s == 0 else theta[n + k - (j - s), s]
        np.add.at(weights, (k, k - j), chi[j - s] * coef)
    var = v[n:n + h]
    return point, weights, var


def forecast(model: ArmaModel, values: Sequence[float], h: int, *,
             anchor: float | None = None) -> ForecastSeries:
    """Best linear predictor of the next ``h`` values given ``values``.

    With ``anchor`` (the last level before ``values`` was differenced) the
    forecasts are integrated back to the original scale, and the mean square
    errors become those of the cumulated forecast errors.
    """
    if h < 1:
        raise ValueError("forecast horizon must be positive")
    point, weights, var = _forecast_core(model, values, h)
    point = point + model.mean
    if anchor is None:
        mse = model.sigma2 * (weights ** 2) @ var
        return ForecastSeries(h, point, mse, "differenced")
    levels = anchor + np.cumsum(point)
    cum = np.cumsum(weights, axis=0)
    mse = model.sigma2 * (cum ** 2) @ var
    return ForecastSeries(h, levels, mse, "original")


def simulate(model: ArmaModel, n: int, seed: int) -> np.ndarray:
    """Gaussian ARMA sample of length ``n`` (burn-in of 10 (p + q + 1) dropped)."""
    if n < 1:
        raise ValueError("n must be positive")
    burn = 10 * (model.p + model.q + 1)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n + burn) * math.sqrt(max(model.sigma2, 0.0))
    x = signal.lfilter(np.r_[1.0, model.ma], np.r_[1.0, -np.asarray(model.ar)], z)
    return x[burn:] + model.mean


def white_noise(mean: float = 0.0, sigma2: float = 1.0) -> ArmaModel:
    return arma_model((), (), mean, sigma2)


def arma_model(ar=(), ma=(), mean: float = 0.0, sigma2: float = 1.0, n: int = 0) -> ArmaModel:
    """Convenience constructor for a model with known coefficients."""
    return ArmaModel(len(ar), len(ma), tuple(ar), tuple(ma), mean, sigma2, math.nan, math.nan, n)

"""Pure-Python innovations-algorithm kernels.

Reference implementation and import-time fallback for ``_kernels.pyx``; both
modules expose the same four functions with identical semantics.

Conventions: ``ar`` holds phi_1..phi_p of ``X_t - sum phi_i X_{t-i}``, ``ma``
holds theta_1..theta_q of ``Z_t + sum theta_j Z_{t-j}``; the innovation
variance is fixed at one, so returned variances are the ratios ``r_n`` of
the one-step mean square errors to sigma^2.
"""
import math

import numpy as np


def arma_acvf(ar, ma, nlags):
    """Autocovariances at lags 0..nlags-1 of a causal ARMA with unit noise."""
    ar = [float(a) for a in ar]
    ma = [float(b) for b in ma]
    p, q = len(ar), len(ma)
    th = [1.0] + ma
    psi = [0.0] * (q + 1)
    for j in range(q + 1):
        s = th[j]
        for k in range(1, min(j, p) + 1):
            s += ar[k - 1] * psi[j - k]
        psi[j] = s
    top = max(p, q) + 1
    rhs = [0.0] * top
    for k in range(min(top, q + 1)):
        rhs[k] = sum(th[j] * psi[j - k] for j in range(k, q + 1))

    a = np.zeros((p + 1, p + 1))
    for k in range(p + 1):
        a[k, k] += 1.0
        for r in range(1, p + 1):
            a[k, abs(k - r)] -= ar[r - 1]
    g0 = np.linalg.solve(a, np.array(rhs[:p + 1]))

    n = max(nlags, p + 1)
    gamma = [0.0] * n
    gamma[:p + 1] = g0.tolist()
    for k in range(p + 1, n):
        s = rhs[k] if k < top else 0.0
        for r in range(1, p + 1):
            s += ar[r - 1] * gamma[k - r]
        gamma[k] = s
    return np.array(gamma[:nlags])


def _kappa_factory(ar, ma, gamma, m):
    p, q = len(ar), len(ma)
    th = [1.0] + list(ma)

    def kappa(i, j):
        # 1-based autocovariance of W_t = X_t (t <= m), phi(B) X_t (t > m)
        if j > i:
            i, j = j, i
        h = i - j
        if i <= m:
            return gamma[h]
        if j <= m:
            if i > 2 * m:
                return 0.0
            s = gamma[h]
            for r in range(1, p + 1):
                s -= ar[r - 1] * gamma[abs(r - h)]
            return s
        if h > q:
            return 0.0
        return sum(th[r] * th[r + h] for r in range(q - h + 1))

    return kappa


def innovations(ar, ma, nobs):
    """Innovations coefficients theta[n, j] and variances v[n] for n < nobs.

    Row ``n`` gives the predictor of observation ``n`` (0-based) from the
    ``n`` earlier ones; column ``j`` (1..m, m = max(p, q)) multiplies the
    innovation ``j`` steps back.  Column 0 is unused.
    """
    ar = [float(a) for a in ar]
    ma = [float(b) for b in ma]
    p, q = len(ar), len(ma)
    m = max(p, q)
    gamma = arma_acvf(ar, ma, 2 * m + p + 1).tolist()
    kappa = _kappa_factory(ar, ma, gamma, m)
    theta = np.zeros((nobs, m + 1))
    v = np.zeros(nobs)
    if nobs == 0:
        return theta, v
    th = theta.tolist()
    vv = [0.0] * nobs
    vv[0] = kappa(1, 1)
    same = 0
    for n in range(1, nobs):
        lo = 0 if n < m else n - q
        row = th[n]
        for k in range(lo, n):
            s = kappa(n + 1, k + 1)
            rk = th[k]
            for j in range(lo, k):
                s -= rk[k - j] * row[n - j] * vv[j]
            row[n - k] = s / vv[k]
        s = kappa(n + 1, n + 1)
        for j in range(lo, n):
            s -= row[n - j] * row[n - j] * vv[j]
        vv[n] = s
        if n > 2 * m + 1:
            # q + 1 bitwise-identical consecutive rows: fixed point reached
            equal = vv[n] == vv[n - 1] and row[1:q + 1] == th[n - 1][1:q + 1]
            same = same + 1 if equal else 0
            if same >= q + 1:
                for k in range(n + 1, nobs):
                    vv[k] = vv[n]
                    th[k][1:q + 1] = row[1:q + 1]
                break
    theta[:, :] = th
    v[:] = vv
    return theta, v


def _predict(x, ar, theta, m, q):
    n_obs = len(x)
    p = len(ar)
    err = [0.0] * n_obs
    for n in range(n_obs):
        row = theta[n]
        if n < m:
            s = 0.0
            for j in range(1, n + 1):
                s += row[j] * err[n - j]
        else:
            s = 0.0
            for i in range(1, p + 1):
                s += ar[i - 1] * x[n - i]
            for j in range(1, q + 1):
                s += row[j] * err[n - j]
        err[n] = x[n] - s
    return err


def innovations_errors(x, ar, ma):
    """One-step prediction errors ``x - xhat`` and scaled variances ``r``."""
    x = [float(t) for t in x]
    ar = [float(a) for a in ar]
    q = len(ma)
    m = max(len(ar), q)
    theta, v = innovations(ar, ma, len(x))
    err = _predict(x, ar, theta.tolist(), m, q)
    return np.array(err), v


def reduced_likelihood(x, ar, ma):
    """Return (sum e_t^2 / r_t, sum log r_t) for the profile likelihood.

    A variance that rounds to zero or below (roots on the unit circle) gives
    non-finite sums, as IEEE arithmetic does in the compiled kernel.
    """
    err, v = innovations_errors(x, ar, ma)
    ssq = 0.0
    slog = 0.0
    for e, r in zip(err.tolist(), v.tolist()):
        if not r > 0.0:
            return math.nan, math.nan
        ssq += e * e / r
        slog += math.log(r)
    return ssq, slog


_BIG = 1e10
_FD_STEP = 1.4901161193847656e-08


def _pacf_map(u, sign):
    y = [math.tanh(t) for t in u]
    for i in range(1, len(y)):
        tmp = y[:i]
        for j in range(i):
            y[j] = tmp[j] - y[i] * tmp[i - 1 - j]
    return [sign * t for t in y]


def _objective(x, u, p, enforce):
    ar = _pacf_map(u[:p], 1.0)
    ma = _pacf_map(u[p:], -1.0) if enforce else list(u[p:])
    try:
        ssq, slog = reduced_likelihood(x, ar, ma)
    except np.linalg.LinAlgError:
        return _BIG
    if not ssq > 0.0:
        return _BIG
    n = len(x)
    f = math.log(2 * math.pi * ssq / n) + slog / n + 1.0
    return f if math.isfinite(f) else _BIG


def profile_objective(u, x, p, enforce, gradient=True, lower=None, upper=None):
    """Profiled -2 loglik / n at free parameters ``u`` and, optionally, its
    forward-difference gradient (steps flipped to stay inside the bounds)."""
    x = [float(t) for t in x]
    u = [float(t) for t in u]
    k = len(u)
    hi = [math.inf] * k if upper is None else [float(t) for t in upper]
    f0 = _objective(x, u, p, enforce)
    if not gradient:
        return f0
    grad = np.zeros(k)
    for i in range(k):
        keep = u[i]
        h = _FD_STEP * max(abs(keep), 1.0)
        if keep + h > hi[i]:
            h = -h
        u[i] = keep + h
        h = u[i] - keep
        grad[i] = (_objective(x, u, p, enforce) - f0) / h
        u[i] = keep
    return f0, grad


def profile_objective_grad(u, x, p, enforce):
    """Objective and gradient for the optimiser.

    The compiled kernel accumulates the gradient in reverse through the
    recursion; this fallback uses forward differences instead.
    """
    return profile_objective(u, x, p, enforce, True)

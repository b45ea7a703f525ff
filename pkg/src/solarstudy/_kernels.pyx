# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled innovations-algorithm kernels (see _kernels_py for the reference)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, fabs, tanh, isfinite
from libc.stdlib cimport malloc, calloc, free

cnp.import_array()

cdef double BIG = 1e10
cdef double TWO_PI = 6.283185307179586
# sqrt of double epsilon, as in scipy's two-point scheme
cdef double FD_STEP = 1.4901161193847656e-08


cdef int _solve(double* a, double* b, Py_ssize_t n) noexcept nogil:
    # Gaussian elimination with partial pivoting on row-major a; solution in b.
    cdef Py_ssize_t i, j, k, piv
    cdef double t, best
    for k in range(n):
        piv = k
        best = fabs(a[k * n + k])
        for i in range(k + 1, n):
            if fabs(a[i * n + k]) > best:
                best = fabs(a[i * n + k])
                piv = i
        if best == 0.0:
            return -1
        if piv != k:
            for j in range(n):
                t = a[k * n + j]; a[k * n + j] = a[piv * n + j]; a[piv * n + j] = t
            t = b[k]; b[k] = b[piv]; b[piv] = t
        for i in range(k + 1, n):
            t = a[i * n + k] / a[k * n + k]
            if t != 0.0:
                for j in range(k, n):
                    a[i * n + j] -= t * a[k * n + j]
                b[i] -= t * b[k]
    for k in range(n - 1, -1, -1):
        t = b[k]
        for j in range(k + 1, n):
            t -= a[k * n + j] * b[j]
        b[k] = t / a[k * n + k]
    return 0


cdef int _acvf(const double* ar, Py_ssize_t p, const double* ma, Py_ssize_t q,
               double* g, Py_ssize_t n) noexcept nogil:
    # g must hold n >= p + 1 entries.
    cdef Py_ssize_t top = (p if p > q else q) + 1
    cdef Py_ssize_t j, k, r
    cdef double s
    cdef int status
    cdef double* th = <double*> malloc((q + 1) * sizeof(double))
    cdef double* psi = <double*> malloc((q + 1) * sizeof(double))
    cdef double* rhs = <double*> calloc(top, sizeof(double))
    cdef double* a = <double*> calloc((p + 1) * (p + 1), sizeof(double))
    th[0] = 1.0
    for j in range(q):
        th[j + 1] = ma[j]
    for j in range(q + 1):
        s = th[j]
        for k in range(1, (j if j < p else p) + 1):
            s += ar[k - 1] * psi[j - k]
        psi[j] = s
    for k in range(q + 1):
        s = 0.0
        for j in range(k, q + 1):
            s += th[j] * psi[j - k]
        rhs[k] = s
    for k in range(p + 1):
        a[k * (p + 1) + k] += 1.0
        for r in range(1, p + 1):
            a[k * (p + 1) + (k - r if k >= r else r - k)] -= ar[r - 1]
        g[k] = rhs[k]
    status = _solve(a, g, p + 1)
    if status == 0:
        for k in range(p + 1, n):
            s = rhs[k] if k < top else 0.0
            for r in range(1, p + 1):
                s += ar[r - 1] * g[k - r]
            g[k] = s
    free(th); free(psi); free(rhs); free(a)
    return status


def arma_acvf(ar, ma, nlags):
    """Autocovariances at lags 0..nlags-1 of a causal ARMA with unit noise."""
    cdef double[::1] a = np.ascontiguousarray(ar, dtype=float)
    cdef double[::1] b = np.ascontiguousarray(ma, dtype=float)
    cdef Py_ssize_t p = a.shape[0], q = b.shape[0]
    cdef Py_ssize_t n = nlags if nlags > p + 1 else p + 1
    out = np.zeros(n)
    cdef double[::1] g = out
    if _acvf(&a[0] if p else NULL, p, &b[0] if q else NULL, q, &g[0], n) != 0:
        raise np.linalg.LinAlgError("Singular matrix")
    return out[:nlags].copy()


cdef struct Cov:
    Py_ssize_t m, p, q
    double* gamma   # lags 0..2m
    double* mixed   # lags 0..2m
    double* maacf   # lags 0..q


cdef int _cov_init(Cov* c, const double* ar, Py_ssize_t p,
                   const double* ma, Py_ssize_t q) noexcept nogil:
    cdef Py_ssize_t m = p if p > q else q
    cdef Py_ssize_t ng = 2 * m + p + 1
    cdef Py_ssize_t h, r
    cdef double s
    c.m = m; c.p = p; c.q = q
    c.gamma = <double*> calloc(ng, sizeof(double))
    c.mixed = <double*> calloc(2 * m + 1, sizeof(double))
    c.maacf = <double*> calloc(q + 1, sizeof(double))
    if _acvf(ar, p, ma, q, c.gamma, ng) != 0:
        return -1
    for h in range(2 * m + 1):
        s = c.gamma[h]
        for r in range(1, p + 1):
            s -= ar[r - 1] * c.gamma[r - h if r >= h else h - r]
        c.mixed[h] = s
    for h in range(q + 1):
        s = 1.0 * (ma[h - 1] if h > 0 else 1.0)
        for r in range(1, q - h + 1):
            s += ma[r - 1] * ma[r + h - 1]
        c.maacf[h] = s
    return 0


cdef void _cov_free(Cov* c) noexcept nogil:
    free(c.gamma); free(c.mixed); free(c.maacf)


cdef inline double _kappa(const Cov* c, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef Py_ssize_t h
    if j > i:
        h = i; i = j; j = h
    h = i - j
    if i <= c.m:
        return c.gamma[h]
    if j <= c.m:
        return c.mixed[h] if i <= 2 * c.m else 0.0
    return c.maacf[h] if h <= c.q else 0.0


cdef Py_ssize_t _recursion(const Cov* c, double* theta, Py_ssize_t w, double* v,
                           Py_ssize_t nobs) noexcept nogil:
    # theta is row-major (nobs, w) with w = m + 1; zero-initialised by caller.
    # Returns the last row computed explicitly (later rows are copies of it).
    cdef Py_ssize_t m = c.m, q = c.q
    cdef Py_ssize_t n, k, j, lo, same = 0
    cdef double s
    cdef double* row
    cdef double* rk
    cdef bint equal
    if nobs == 0:
        return -1
    v[0] = _kappa(c, 1, 1)
    for n in range(1, nobs):
        row = theta + n * w
        if n <= 2 * m + 1:
            lo = 0 if n < m else n - q
            for k in range(lo, n):
                rk = theta + k * w
                s = _kappa(c, n + 1, k + 1)
                for j in range(lo, k):
                    s -= rk[k - j] * row[n - j] * v[j]
                row[n - k] = s / v[k]
            s = _kappa(c, n + 1, n + 1)
            for j in range(lo, n):
                s -= row[n - j] * row[n - j] * v[j]
            v[n] = s
            continue
        # steady region: every index involved exceeds m, so kappa is the
        # MA autocovariance at the lag
        lo = n - q
        for k in range(lo, n):
            rk = theta + k * w
            s = c.maacf[n - k]
            for j in range(lo, k):
                s -= rk[k - j] * row[n - j] * v[j]
            row[n - k] = s / v[k]
        s = c.maacf[0]
        for j in range(lo, n):
            s -= row[n - j] * row[n - j] * v[j]
        v[n] = s
        # once q + 1 consecutive rows agree bitwise the recursion is at its
        # fixed point and every later row is identical
        equal = v[n] == v[n - 1]
        for j in range(1, q + 1):
            if row[j] != row[j - w]:
                equal = False
        same = same + 1 if equal else 0
        if same >= q + 1:
            for k in range(n + 1, nobs):
                v[k] = v[n]
                for j in range(1, q + 1):
                    theta[k * w + j] = row[j]
            return n
    return nobs - 1


cdef void _predict(const double* x, Py_ssize_t nobs, const double* ar,
                   Py_ssize_t p, Py_ssize_t q, Py_ssize_t m,
                   const double* theta, Py_ssize_t w, double* err) noexcept nogil:
    cdef Py_ssize_t n, i, j
    cdef double s
    cdef const double* row
    for n in range(nobs):
        row = theta + n * w
        s = 0.0
        if n < m:
            for j in range(1, n + 1):
                s += row[j] * err[n - j]
        else:
            for i in range(1, p + 1):
                s += ar[i - 1] * x[n - i]
            for j in range(1, q + 1):
                s += row[j] * err[n - j]
        err[n] = x[n] - s


cdef inline const double* _ptr(double[::1] a):
    return &a[0] if a.shape[0] else NULL


def innovations(ar, ma, Py_ssize_t nobs):
    """Innovations coefficients theta[n, j] and variances v[n] for n < nobs."""
    cdef double[::1] a = np.ascontiguousarray(ar, dtype=float)
    cdef double[::1] b = np.ascontiguousarray(ma, dtype=float)
    cdef Py_ssize_t p = a.shape[0], q = b.shape[0]
    cdef Py_ssize_t w = (p if p > q else q) + 1
    cdef Cov c
    theta = np.zeros((nobs, w))
    v = np.zeros(nobs)
    cdef double[:, ::1] tv = theta
    cdef double[::1] vv = v
    if _cov_init(&c, _ptr(a), p, _ptr(b), q) != 0:
        _cov_free(&c)
        raise np.linalg.LinAlgError("Singular matrix")
    if nobs:
        _recursion(&c, &tv[0, 0], w, &vv[0], nobs)
    _cov_free(&c)
    return theta, v


cdef int _errors_raw(const double* x, Py_ssize_t nobs, const double* ar,
                    Py_ssize_t p, const double* ma, Py_ssize_t q,
                    double* err, double* v) noexcept nogil:
    cdef Py_ssize_t m = p if p > q else q
    cdef Py_ssize_t w = m + 1
    cdef Cov c
    cdef double* theta
    if _cov_init(&c, ar, p, ma, q) != 0:
        _cov_free(&c)
        return -1
    theta = <double*> calloc(nobs * w, sizeof(double))
    _recursion(&c, theta, w, v, nobs)
    _predict(x, nobs, ar, p, q, m, theta, w, err)
    free(theta)
    _cov_free(&c)
    return 0


def innovations_errors(x, ar, ma):
    """One-step prediction errors ``x - xhat`` and scaled variances ``r``."""
    cdef double[::1] xx = np.ascontiguousarray(x, dtype=float)
    cdef double[::1] a = np.ascontiguousarray(ar, dtype=float)
    cdef double[::1] b = np.ascontiguousarray(ma, dtype=float)
    cdef Py_ssize_t nobs = xx.shape[0]
    err = np.zeros(nobs)
    v = np.zeros(nobs)
    cdef double[::1] ev = err
    cdef double[::1] vv = v
    if nobs:
        if _errors_raw(&xx[0], nobs, _ptr(a), a.shape[0], _ptr(b), b.shape[0],
                       &ev[0], &vv[0]) != 0:
            raise np.linalg.LinAlgError("Singular matrix")
    return err, v


cdef int _reduced(const double* x, Py_ssize_t nobs, const double* ar, Py_ssize_t p,
                  const double* ma, Py_ssize_t q, double* ssq, double* slog) noexcept nogil:
    cdef Py_ssize_t t
    cdef int status
    cdef double* err = <double*> malloc(nobs * sizeof(double))
    cdef double* v = <double*> malloc(nobs * sizeof(double))
    status = _errors_raw(x, nobs, ar, p, ma, q, err, v)
    ssq[0] = 0.0
    slog[0] = 0.0
    if status == 0:
        for t in range(nobs):
            ssq[0] += err[t] * err[t] / v[t]
            slog[0] += log(v[t])
    free(err); free(v)
    return status


def reduced_likelihood(x, ar, ma):
    """Return (sum e_t^2 / r_t, sum log r_t) for the profile likelihood."""
    cdef double[::1] xx = np.ascontiguousarray(x, dtype=float)
    cdef double[::1] a = np.ascontiguousarray(ar, dtype=float)
    cdef double[::1] b = np.ascontiguousarray(ma, dtype=float)
    cdef double ssq = 0.0, slog = 0.0
    if xx.shape[0] == 0:
        return 0.0, 0.0
    if _reduced(&xx[0], xx.shape[0], _ptr(a), a.shape[0], _ptr(b), b.shape[0],
                &ssq, &slog) != 0:
        raise np.linalg.LinAlgError("Singular matrix")
    return ssq, slog


cdef void _pacf_map(const double* u, Py_ssize_t k, double sign, double* out,
                    double* tmp) noexcept nogil:
    # tanh, then Durbin-Levinson: partial autocorrelations -> coefficients
    cdef Py_ssize_t i, j
    for i in range(k):
        out[i] = tanh(u[i])
    for i in range(1, k):
        for j in range(i):
            tmp[j] = out[j]
        for j in range(i):
            out[j] = tmp[j] - out[i] * tmp[i - 1 - j]
    for i in range(k):
        out[i] *= sign


cdef double _objective(const double* x, Py_ssize_t nobs, const double* u,
                       Py_ssize_t p, Py_ssize_t q, bint enforce,
                       double* coef, double* tmp) noexcept nogil:
    cdef double ssq, slog, f
    cdef Py_ssize_t j
    _pacf_map(u, p, 1.0, coef, tmp)
    if enforce:
        _pacf_map(u + p, q, -1.0, coef + p, tmp)
    else:
        for j in range(q):
            coef[p + j] = u[p + j]
    if _reduced(x, nobs, coef, p, coef + p, q, &ssq, &slog) != 0:
        return BIG
    if not ssq > 0.0:
        return BIG
    f = log(TWO_PI * ssq / nobs) + slog / nobs + 1.0
    if not isfinite(f):
        return BIG
    return f


def profile_objective(u, x, Py_ssize_t p, bint enforce, bint gradient=True,
                      lower=None, upper=None):
    """Profiled -2 loglik / n at free parameters ``u`` and, optionally, its
    forward-difference gradient (steps flipped to stay inside the bounds)."""
    cdef double[::1] xx = np.ascontiguousarray(x, dtype=float)
    cdef double[::1] uu = np.array(u, dtype=float)
    cdef Py_ssize_t k = uu.shape[0], q = k - p, i
    cdef double f0, f1, h, keep
    cdef double[::1] lo = np.full(k, -np.inf) if lower is None else np.ascontiguousarray(lower, dtype=float)
    cdef double[::1] hi = np.full(k, np.inf) if upper is None else np.ascontiguousarray(upper, dtype=float)
    grad = np.zeros(k)
    cdef double[::1] g = grad
    cdef double* coef = <double*> malloc((k + 1) * sizeof(double))
    cdef double* tmp = <double*> malloc((k + 1) * sizeof(double))
    cdef const double* up = &uu[0] if k else NULL
    with nogil:
        f0 = _objective(&xx[0], xx.shape[0], up, p, q, enforce, coef, tmp)
        if gradient:
            for i in range(k):
                keep = uu[i]
                h = FD_STEP * (fabs(keep) if fabs(keep) > 1.0 else 1.0)
                if keep + h > hi[i]:
                    h = -h
                uu[i] = keep + h
                h = uu[i] - keep
                f1 = _objective(&xx[0], xx.shape[0], up, p, q, enforce, coef, tmp)
                uu[i] = keep
                g[i] = (f1 - f0) / h
    free(coef); free(tmp)
    if gradient:
        return f0, grad
    return f0


cdef inline void _kappa_bar(const Cov* c, Py_ssize_t i, Py_ssize_t j, double a,
                            double* gbar, double* mbar, double* abar) noexcept nogil:
    # adjoint of _kappa: route `a` to the covariance piece it was read from
    cdef Py_ssize_t h
    if j > i:
        h = i; i = j; j = h
    h = i - j
    if i <= c.m:
        gbar[h] += a
    elif j <= c.m:
        if i <= 2 * c.m:
            mbar[h] += a
    elif h <= c.q:
        abar[h] += a


cdef int _coefs_from_free(const double* u, Py_ssize_t p, Py_ssize_t q, bint enforce,
                          double* coef, double* tmp) noexcept nogil:
    cdef Py_ssize_t j
    _pacf_map(u, p, 1.0, coef, tmp)
    if enforce:
        _pacf_map(u + p, q, -1.0, coef + p, tmp)
    else:
        for j in range(q):
            coef[p + j] = u[p + j]
    return 0


cdef double _objective_adjoint(const double* x, Py_ssize_t nobs, double* u,
                               Py_ssize_t p, Py_ssize_t q, bint enforce,
                               double* grad) noexcept nogil:
    """Profiled objective with its gradient by reverse accumulation through
    the prediction and innovations recursions; the cheap map from free
    parameters to coefficients and covariance pieces is differentiated by
    central differences."""
    cdef Py_ssize_t k = p + q
    cdef Py_ssize_t m = p if p > q else q
    cdef Py_ssize_t w = m + 1, ng = 2 * m + p + 1
    cdef Py_ssize_t n, i, j, kk, lo, nstar
    cdef double S = 0.0, L = 0.0, f, a, sbar, tbar, xhbar, h, keep, acc
    cdef Cov c, cp, cm
    cdef double* coef = <double*> malloc((k + 1) * sizeof(double))
    cdef double* cplus = <double*> malloc((k + 1) * sizeof(double))
    cdef double* cminus = <double*> malloc((k + 1) * sizeof(double))
    cdef double* tmp = <double*> malloc((k + 1) * sizeof(double))
    cdef double* theta
    cdef double* v
    cdef double* e
    cdef double* thbar
    cdef double* vbar
    cdef double* ebar
    cdef double* phibar
    cdef double* gbar
    cdef double* mbar
    cdef double* abar
    cdef double* row
    cdef double* rk
    cdef double* rowbar
    cdef double* rkbar

    for i in range(k):
        grad[i] = 0.0
    _coefs_from_free(u, p, q, enforce, coef, tmp)
    if _cov_init(&c, coef, p, coef + p, q) != 0:
        _cov_free(&c)
        free(coef); free(cplus); free(cminus); free(tmp)
        return BIG

    theta = <double*> calloc(nobs * w, sizeof(double))
    v = <double*> malloc(nobs * sizeof(double))
    e = <double*> malloc(nobs * sizeof(double))
    nstar = _recursion(&c, theta, w, v, nobs)
    _predict(x, nobs, coef, p, q, m, theta, w, e)
    for n in range(nobs):
        S += e[n] * e[n] / v[n]
        L += log(v[n])
    f = log(TWO_PI * S / nobs) + L / nobs + 1.0
    if not (S > 0.0 and isfinite(f)):
        _cov_free(&c)
        free(theta); free(v); free(e)
        free(coef); free(cplus); free(cminus); free(tmp)
        return BIG

    thbar = <double*> calloc(nobs * w, sizeof(double))
    vbar = <double*> malloc(nobs * sizeof(double))
    ebar = <double*> malloc(nobs * sizeof(double))
    phibar = <double*> calloc(p + 1, sizeof(double))
    gbar = <double*> calloc(ng, sizeof(double))
    mbar = <double*> calloc(2 * m + 1, sizeof(double))
    abar = <double*> calloc(q + 1, sizeof(double))

    # f = log(2 pi S / n) + L / n + 1
    for n in range(nobs):
        ebar[n] = 2.0 * e[n] / (v[n] * S)
        vbar[n] = -e[n] * e[n] / (v[n] * v[n] * S) + 1.0 / (nobs * v[n])

    # predictions, newest first
    for n in range(nobs - 1, -1, -1):
        xhbar = -ebar[n]
        row = theta + n * w
        rowbar = thbar + n * w
        if n < m:
            for j in range(1, n + 1):
                rowbar[j] += xhbar * e[n - j]
                ebar[n - j] += xhbar * row[j]
        else:
            for i in range(1, p + 1):
                phibar[i - 1] += xhbar * x[n - i]
            for j in range(1, q + 1):
                rowbar[j] += xhbar * e[n - j]
                ebar[n - j] += xhbar * row[j]

    # rows copied forward from the fixed point feed back into it
    if nstar < nobs - 1:
        rowbar = thbar + nstar * w
        for n in range(nstar + 1, nobs):
            for j in range(1, q + 1):
                rowbar[j] += thbar[n * w + j]
            vbar[nstar] += vbar[n]

    # innovations recursion, newest row first
    for n in range(nstar, 0, -1):
        lo = 0 if n < m else n - q
        row = theta + n * w
        rowbar = thbar + n * w
        tbar = vbar[n]
        _kappa_bar(&c, n + 1, n + 1, tbar, gbar, mbar, abar)
        for j in range(lo, n):
            rowbar[n - j] -= 2.0 * tbar * row[n - j] * v[j]
            vbar[j] -= tbar * row[n - j] * row[n - j]
        for kk in range(n - 1, lo - 1, -1):
            a = rowbar[n - kk]
            sbar = a / v[kk]
            vbar[kk] -= a * row[n - kk] / v[kk]
            _kappa_bar(&c, n + 1, kk + 1, sbar, gbar, mbar, abar)
            rk = theta + kk * w
            rkbar = thbar + kk * w
            for j in range(lo, kk):
                rkbar[kk - j] -= sbar * row[n - j] * v[j]
                rowbar[n - j] -= sbar * rk[kk - j] * v[j]
                vbar[j] -= sbar * rk[kk - j] * row[n - j]
    if nobs:
        _kappa_bar(&c, 1, 1, vbar[0], gbar, mbar, abar)

    # chain through free params -> (phi, covariance pieces)
    for i in range(k):
        keep = u[i]
        h = 1e-5 * (fabs(keep) if fabs(keep) > 1.0 else 1.0)
        u[i] = keep + h
        _coefs_from_free(u, p, q, enforce, cplus, tmp)
        u[i] = keep - h
        _coefs_from_free(u, p, q, enforce, cminus, tmp)
        u[i] = keep
        if _cov_init(&cp, cplus, p, cplus + p, q) != 0 or _cov_init(&cm, cminus, p, cminus + p, q) != 0:
            _cov_free(&cp); _cov_free(&cm)
            f = BIG
            break
        acc = 0.0
        for j in range(p):
            acc += phibar[j] * (cplus[j] - cminus[j])
        for j in range(m):
            acc += gbar[j] * (cp.gamma[j] - cm.gamma[j])
        for j in range(2 * m + 1):
            acc += mbar[j] * (cp.mixed[j] - cm.mixed[j])
        for j in range(q + 1):
            acc += abar[j] * (cp.maacf[j] - cm.maacf[j])
        grad[i] = acc / (2.0 * h)
        _cov_free(&cp); _cov_free(&cm)

    _cov_free(&c)
    free(theta); free(v); free(e)
    free(thbar); free(vbar); free(ebar); free(phibar); free(gbar); free(mbar); free(abar)
    free(coef); free(cplus); free(cminus); free(tmp)
    return f


def profile_objective_grad(u, x, Py_ssize_t p, bint enforce):
    """Profiled -2 loglik / n and its gradient via reverse accumulation."""
    cdef double[::1] xx = np.ascontiguousarray(x, dtype=float)
    cdef double[::1] uu = np.array(u, dtype=float)
    cdef Py_ssize_t k = uu.shape[0]
    grad = np.zeros(k)
    cdef double[::1] g = grad
    cdef double f
    cdef double dummy = 0.0
    with nogil:
        f = _objective_adjoint(&xx[0], xx.shape[0], &uu[0] if k else &dummy,
                               p, k - p, enforce, &g[0] if k else &dummy)
    return f, grad

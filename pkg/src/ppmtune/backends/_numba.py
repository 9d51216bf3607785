"""Numba-compiled backend for the hot inner loops.

Mirrors the contracts in `_numpy`: per-patient logistic fits over
cosine-nearest subpopulations, and the tricube LOESS smoother. Input
validation that needs rich error messages stays in thin Python wrappers;
the jitted cores only see clean arrays.
"""

import numpy as np
from numba import njit

BACKEND_NAME = "numba"

PROB_EPS = 1e-12
SEPARATION_COEF = 15.0

STATUS_OK = 0
STATUS_RIDGE_RETRY = 1
STATUS_MEAN_FALLBACK = 2
STATUS_SEPARATION = 3


@njit(cache=True)
def _log_lik(eta, y, beta, ridge):
    ll = 0.0
    for i in range(eta.shape[0]):
        e = eta[i]
        if e > 0.0:
            lse = e + np.log1p(np.exp(-e))
        else:
            lse = np.log1p(np.exp(e))
        ll += y[i] * e - lse
    if ridge > 0.0:
        ll -= 0.5 * ridge * np.dot(beta, beta)
    return ll


@njit(cache=True)
def _chol_solve(H, g):
    """Solve H x = g for SPD H via Cholesky; returns (x, ok)."""
    q = H.shape[0]
    L = np.zeros((q, q))
    for j in range(q):
        s = H[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if s <= 1e-300:
            return np.zeros(q), False
        L[j, j] = np.sqrt(s)
        for i in range(j + 1, q):
            s = H[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            L[i, j] = s / L[j, j]
    x = np.zeros(q)
    for i in range(q):
        s = g[i]
        for k in range(i):
            s -= L[i, k] * x[k]
        x[i] = s / L[i, i]
    for i in range(q - 1, -1, -1):
        s = x[i]
        for k in range(i + 1, q):
            s -= L[k, i] * x[k]
        x[i] = s / L[i, i]
    return x, True


@njit(cache=True)
def fit_irls(Xd, y, max_iter, tol, ridge):
    m, q = Xd.shape
    beta = np.zeros(q)
    ll = _log_lik(np.zeros(m), y, beta, ridge)
    converged = False
    iters = 0
    for it in range(max_iter):
        iters = it + 1
        eta = np.dot(Xd, beta)
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = mu * (1.0 - mu)
        grad = np.dot(Xd.T, y - mu) - ridge * beta
        Xw = Xd * w.reshape(-1, 1)
        H = np.dot(Xd.T, Xw)
        if ridge > 0.0:
            for j in range(q):
                H[j, j] += ridge
        delta, ok = _chol_solve(H, grad)
        if not ok:
            return beta, False, iters, False
        finite = True
        for j in range(q):
            if not np.isfinite(delta[j]):
                finite = False
        if not finite:
            return beta, False, iters, False
        step = 1.0
        new_beta = beta + delta
        new_ll = _log_lik(np.dot(Xd, new_beta), y, new_beta, ridge)
        halvings = 0
        while new_ll < ll - 1e-12 and halvings < 30:
            step *= 0.5
            new_beta = beta + step * delta
            new_ll = _log_lik(np.dot(Xd, new_beta), y, new_beta, ridge)
            halvings += 1
        beta = new_beta
        if abs(new_ll - ll) < tol:
            converged = True
            ll = new_ll
            break
        ll = new_ll
    return beta, converged, iters, True


@njit(cache=True)
def _ppm_multi_core(test_X, train_X, train_y, train_norms, m_values,
                    max_iter, tol, ridge):
    n_test = test_X.shape[0]
    p = train_X.shape[1]
    n_m = m_values.shape[0]
    out = np.empty((n_test, n_m))
    status = np.zeros((n_test, n_m), dtype=np.int8)
    for i in range(n_test):
        x = test_X[i]
        xn = np.sqrt(np.dot(x, x))
        scores = np.dot(train_X, x) / (train_norms * xn)
        order = np.argsort(-scores, kind="mergesort")
        for j in range(n_m):
            M = m_values[j]
            s = 0.0
            for t in range(M):
                s += train_y[order[t]]
            if s == 0.0 or s == M:
                out[i, j] = (s + 0.5) / (M + 1.0)
                status[i, j] = STATUS_MEAN_FALLBACK
                continue
            Xd = np.empty((M, p + 1))
            ys = np.empty(M)
            for t in range(M):
                r = order[t]
                Xd[t, 0] = 1.0
                Xd[t, 1:] = train_X[r]
                ys[t] = train_y[r]
            beta, converged, _, ok = fit_irls(Xd, ys, max_iter, tol, ridge)
            st = STATUS_OK
            if not ok:
                beta, converged, _, ok = fit_irls(Xd, ys, max_iter, tol, 1e-8)
                st = STATUS_RIDGE_RETRY
            if not ok:
                out[i, j] = (s + 0.5) / (M + 1.0)
                status[i, j] = STATUS_MEAN_FALLBACK
                continue
            maxabs = 0.0
            for b in range(p + 1):
                ab = abs(beta[b])
                if ab > maxabs:
                    maxabs = ab
            if maxabs > SEPARATION_COEF:
                st = STATUS_SEPARATION
            eta = beta[0] + np.dot(beta[1:], x)
            prob = 1.0 / (1.0 + np.exp(-eta))
            if prob < PROB_EPS:
                prob = PROB_EPS
            elif prob > 1.0 - PROB_EPS:
                prob = 1.0 - PROB_EPS
            out[i, j] = prob
            status[i, j] = st
    return out, status


def ppm_predict_multi(test_X, train_X, train_y, m_values, max_iter, tol, ridge):
    train_norms = np.sqrt(np.sum(train_X * train_X, axis=1))
    if np.any(train_norms == 0.0):
        raise ValueError("zero predictor vector in training data at row %d"
                         % int(np.argmin(train_norms)))
    test_norms = np.sqrt(np.sum(test_X * test_X, axis=1))
    if np.any(test_norms == 0.0):
        raise ValueError("zero predictor vector for test row %d"
                         % int(np.argmin(test_norms)))
    m_values = np.asarray(m_values, dtype=np.int64)
    return _ppm_multi_core(
        np.ascontiguousarray(test_X), np.ascontiguousarray(train_X),
        np.asarray(train_y, dtype=np.float64), train_norms, m_values,
        max_iter, tol, ridge)


@njit(cache=True)
def _loess_core(x, y, span, degree):
    n = x.shape[0]
    k = int(np.ceil(span * n))
    if k < 2:
        k = 2
    if k > n:
        k = n
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    ys = y[order]
    fitted = np.empty(n)
    lo = 0
    for i in range(n):
        while lo + k < n and xs[lo + k] - xs[i] < xs[i] - xs[lo]:
            lo += 1
        dmax = 0.0
        for t in range(lo, lo + k):
            d = abs(xs[t] - xs[i])
            if d > dmax:
                dmax = d
        if dmax == 0.0:
            # zero bandwidth: average every point tied with xs[i]
            a = i
            while a > 0 and xs[a - 1] == xs[i]:
                a -= 1
            b = i + 1
            while b < n and xs[b] == xs[i]:
                b += 1
            acc = 0.0
            for t in range(a, b):
                acc += ys[t]
            fitted[i] = acc / (b - a)
            continue
        w = np.empty(k)
        for t in range(k):
            u = abs(xs[lo + t] - xs[i]) / dmax
            wt = (1.0 - u ** 3) ** 3
            w[t] = wt if wt > 0.0 else 0.0
        sw = 0.0
        for t in range(k):
            sw += w[t]
        if degree == 0:
            acc = 0.0
            for t in range(k):
                acc += w[t] * ys[lo + t]
            fitted[i] = acc / sw
        else:
            xbar = 0.0
            ybar = 0.0
            for t in range(k):
                xbar += w[t] * xs[lo + t]
                ybar += w[t] * ys[lo + t]
            xbar /= sw
            ybar /= sw
            sxx = 0.0
            sxy = 0.0
            for t in range(k):
                dx = xs[lo + t] - xbar
                sxx += w[t] * dx * dx
                sxy += w[t] * dx * (ys[lo + t] - ybar)
            if sxx < 1e-12:
                fitted[i] = ybar
            else:
                fitted[i] = ybar + (sxy / sxx) * (xs[i] - xbar)
    result = np.empty(n)
    for i in range(n):
        result[order[i]] = fitted[i]
    return result


def loess_smooth_values(x, y, span, degree):
    return _loess_core(np.asarray(x, dtype=np.float64),
                       np.asarray(y, dtype=np.float64), span, degree)

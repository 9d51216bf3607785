"""Pure-numpy reference backend.

Same contracts as the numba backend; used when numba is unavailable or
when PPMTUNE_BACKEND=numpy is set. Slower on the per-patient fitting
loops but easier to debug.
"""

import numpy as np

BACKEND_NAME = "numpy"

# Predictions are clamped so that logit(p_hat) stays finite downstream.
PROB_EPS = 1e-12

# |coefficient| beyond this at termination is treated as (quasi-)separation.
SEPARATION_COEF = 15.0


def _log_lik(eta, y, beta, ridge):
    # log(1+exp(eta)) computed stably
    lse = np.maximum(eta, 0.0) + np.log1p(np.exp(-np.abs(eta)))
    ll = np.sum(y * eta - lse)
    if ridge > 0.0:
        ll -= 0.5 * ridge * np.dot(beta, beta)
    return ll


def fit_irls(Xd, y, max_iter, tol, ridge):
    """Newton/IRLS on the logistic log-likelihood with step-halving.

    Xd carries the intercept column. Returns (beta, converged, iters, ok);
    ok is False when the weighted system was singular (caller may retry
    with a small ridge).
    """
    m, q = Xd.shape
    beta = np.zeros(q)
    ll = _log_lik(np.zeros(m), y, beta, ridge)
    converged = False
    iters = 0
    eye = np.eye(q)
    for it in range(max_iter):
        iters = it + 1
        eta = Xd @ beta
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = mu * (1.0 - mu)
        grad = Xd.T @ (y - mu) - ridge * beta
        H = (Xd * w[:, None]).T @ Xd + ridge * eye
        try:
            delta = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            return beta, False, iters, False
        if not np.all(np.isfinite(delta)):
            return beta, False, iters, False
        step = 1.0
        new_beta = beta + delta
        new_ll = _log_lik(Xd @ new_beta, y, new_beta, ridge)
        halvings = 0
        while new_ll < ll - 1e-12 and halvings < 30:
            step *= 0.5
            new_beta = beta + step * delta
            new_ll = _log_lik(Xd @ new_beta, y, new_beta, ridge)
            halvings += 1
        beta = new_beta
        if abs(new_ll - ll) < tol:
            converged = True
            ll = new_ll
            break
        ll = new_ll
    return beta, converged, iters, True


def _predict_one(beta, x):
    eta = beta[0] + np.dot(beta[1:], x)
    p = 1.0 / (1.0 + np.exp(-eta))
    return min(max(p, PROB_EPS), 1.0 - PROB_EPS)


# Per-patient status codes emitted by the batch kernel.
STATUS_OK = 0
STATUS_RIDGE_RETRY = 1
STATUS_MEAN_FALLBACK = 2
STATUS_SEPARATION = 3


def ppm_predict_multi(test_X, train_X, train_y, m_values, max_iter, tol, ridge):
    """Personalized predictions for every test patient at every M.

    For each test row: cosine-score all training rows, take the top-M
    most similar (ties broken by smaller row index), fit a logistic
    model on that subpopulation and predict. Returns (p_hat, status)
    with shapes (n_test, len(m_values)).
    """
    n_test = test_X.shape[0]
    n_m = len(m_values)
    out = np.empty((n_test, n_m))
    status = np.zeros((n_test, n_m), dtype=np.int8)
    train_norms = np.sqrt(np.sum(train_X * train_X, axis=1))
    if np.any(train_norms == 0.0):
        raise ValueError("zero predictor vector in training data at row %d"
                         % int(np.argmin(train_norms)))
    for i in range(n_test):
        x = test_X[i]
        xn = np.sqrt(np.dot(x, x))
        if xn == 0.0:
            raise ValueError("zero predictor vector for test row %d" % i)
        scores = (train_X @ x) / (train_norms * xn)
        order = np.argsort(-scores, kind="mergesort")
        for j in range(n_m):
            M = m_values[j]
            idx = order[:M]
            ys = train_y[idx]
            s = ys.sum()
            if s == 0 or s == M:
                out[i, j] = (s + 0.5) / (M + 1.0)
                status[i, j] = STATUS_MEAN_FALLBACK
                continue
            Xd = np.empty((M, train_X.shape[1] + 1))
            Xd[:, 0] = 1.0
            Xd[:, 1:] = train_X[idx]
            beta, converged, _, ok = fit_irls(Xd, ys, max_iter, tol, ridge)
            st = STATUS_OK
            if not ok:
                beta, converged, _, ok = fit_irls(Xd, ys, max_iter, tol, 1e-8)
                st = STATUS_RIDGE_RETRY
            if not ok:
                out[i, j] = (s + 0.5) / (M + 1.0)
                status[i, j] = STATUS_MEAN_FALLBACK
                continue
            if np.max(np.abs(beta)) > SEPARATION_COEF:
                st = STATUS_SEPARATION
            out[i, j] = _predict_one(beta, x)
            status[i, j] = st
    return out, status


def loess_smooth_values(x, y, span, degree):
    """Tricube-weighted local polynomial smooth of y on x, evaluated at
    each x[i] over its ceil(span*n) nearest neighbours."""
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
        # slide the window of k points to the one nearest xs[i]
        while lo + k < n and xs[lo + k] - xs[i] < xs[i] - xs[lo]:
            lo += 1
        d = np.abs(xs[lo:lo + k] - xs[i])
        dmax = d.max()
        if dmax == 0.0:
            # zero bandwidth: average every point tied with xs[i]
            a = i
            while a > 0 and xs[a - 1] == xs[i]:
                a -= 1
            b = i + 1
            while b < n and xs[b] == xs[i]:
                b += 1
            fitted[i] = np.mean(ys[a:b])
            continue
        w = (1.0 - (d / dmax) ** 3) ** 3
        w[w < 0.0] = 0.0
        sw = w.sum()
        if degree == 0:
            fitted[i] = np.dot(w, ys[lo:lo + k]) / sw
        else:
            xw = xs[lo:lo + k]
            yw = ys[lo:lo + k]
            xbar = np.dot(w, xw) / sw
            ybar = np.dot(w, yw) / sw
            sxx = np.dot(w, (xw - xbar) ** 2)
            if sxx < 1e-12:
                fitted[i] = ybar
            else:
                b = np.dot(w, (xw - xbar) * (yw - ybar)) / sxx
                fitted[i] = ybar + b * (xs[i] - xbar)
    result = np.empty(n)
    result[order] = fitted
    return result

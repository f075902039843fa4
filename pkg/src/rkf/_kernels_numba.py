"""JIT-compiled kernels. Same contracts as ``_kernels_numpy``."""
import numpy as np
from numba import njit


@njit(cache=True)
def _lower_solve(low, rhs):
    # low @ x = rhs, low lower triangular, rhs n x m
    n, m = rhs.shape
    x = np.empty((n, m))
    for j in range(m):
        for i in range(n):
            s = rhs[i, j]
            for k in range(i):
                s -= low[i, k] * x[k, j]
            x[i, j] = s / low[i, i]
    return x


@njit(cache=True)
def riccati_step(sigma, a, cw, q):
    n = sigma.shape[0]
    low = np.linalg.cholesky(sigma)
    b = cw @ low
    g = np.eye(n) + b.T @ b
    u = np.linalg.cholesky(g)
    z = _lower_solve(u, np.ascontiguousarray(low.T))
    p = z.T @ z
    ap = a @ p
    nxt = ap @ a.T + q
    nxt = 0.5 * (nxt + nxt.T)
    return nxt, ap @ cw.T


@njit(cache=True)
def kalman_pass(a, cw, q, yw, x0, sigma0):
    t_rounds = yw.shape[0]
    n = a.shape[0]
    p = cw.shape[0]
    xhat = np.empty((t_rounds + 1, n))
    losses = np.empty(t_rounds)
    gains = np.empty((t_rounds, n, p))
    xhat[0] = x0
    sigma = sigma0.copy()
    for t in range(t_rounds):
        e = yw[t] - cw @ xhat[t]
        losses[t] = e @ e
        sigma, kw = riccati_step(sigma, a, cw, q)
        gains[t] = kw
        xhat[t + 1] = a @ xhat[t] + kw @ e
    return xhat, losses, gains, sigma


@njit(cache=True)
def riccati_iterate(a, cw, q, sigma0, tol, max_iter):
    sigma = sigma0.copy()
    gap = np.inf
    for k in range(1, max_iter + 1):
        nxt, _ = riccati_step(sigma, a, cw, q)
        gap = np.max(np.abs(np.linalg.eigvalsh(nxt - sigma)))
        sigma = nxt
        if gap <= tol:
            return sigma, k, gap
    return sigma, -1, gap


@njit(cache=True)
def riccati_sequence(a, cw, q, sigma0, steps):
    n = a.shape[0]
    out = np.empty((steps + 1, n, n))
    out[0] = sigma0
    for k in range(steps):
        nxt, _ = riccati_step(out[k].copy(), a, cw, q)
        out[k + 1] = nxt
    return out


LinAlgError = np.linalg.LinAlgError

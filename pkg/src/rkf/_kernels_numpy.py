"""Reference kernels in plain numpy/scipy (LAPACK-backed, no JIT)."""
import numpy as np
from scipy.linalg import cholesky, solve_triangular, eigvalsh, LinAlgError


def riccati_step(sigma, a, cw, q):
    # (Sigma^-1 + Cw'Cw)^-1 = Z'Z with Sigma = L L', I + (Cw L)'(Cw L) = U U', Z = U^-1 L'
    n = sigma.shape[0]
    low = cholesky(sigma, lower=True)
    b = cw @ low
    g = np.eye(n) + b.T @ b
    u = cholesky(g, lower=True)
    z = solve_triangular(u, low.T, lower=True)
    p = z.T @ z
    ap = a @ p
    nxt = ap @ a.T + q
    nxt = 0.5 * (nxt + nxt.T)
    return nxt, ap @ cw.T


def kalman_pass(a, cw, q, yw, x0, sigma0):
    t_rounds = yw.shape[0]
    n = a.shape[0]
    p = cw.shape[0]
    xhat = np.empty((t_rounds + 1, n))
    losses = np.empty(t_rounds)
    gains = np.empty((t_rounds, n, p))
    xhat[0] = x0
    sigma = sigma0
    for t in range(t_rounds):
        e = yw[t] - cw @ xhat[t]
        losses[t] = e @ e
        sigma, kw = riccati_step(sigma, a, cw, q)
        gains[t] = kw
        xhat[t + 1] = a @ xhat[t] + kw @ e
    return xhat, losses, gains, sigma


def riccati_iterate(a, cw, q, sigma0, tol, max_iter):
    sigma = sigma0
    gap = np.inf
    for k in range(1, max_iter + 1):
        nxt, _ = riccati_step(sigma, a, cw, q)
        gap = np.max(np.abs(eigvalsh(nxt - sigma)))
        sigma = nxt
        if gap <= tol:
            return sigma, k, gap
    return sigma, -1, gap


def riccati_sequence(a, cw, q, sigma0, steps):
    n = a.shape[0]
    out = np.empty((steps + 1, n, n))
    out[0] = sigma0
    for k in range(steps):
        out[k + 1], _ = riccati_step(out[k], a, cw, q)
    return out


__all__ = ["riccati_step", "kalman_pass", "riccati_iterate", "riccati_sequence", "LinAlgError"]

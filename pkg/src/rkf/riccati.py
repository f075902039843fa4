"""Steady state of the Riccati recursion: DARE solution, gain, closed loop.

The DARE ``Sigma = A (Sigma^-1 + C' V^-1 C)^-1 A' + Q`` is solved by iterating
the filter's own recursion from ``Sigma_0 = I``, so the solver follows exactly
the trajectory the filter takes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, linops
from .errors import ConvergenceError, DomainError, NumericalFailure, PreconditionError
from .filter import whitening
from .model import SystemModel, validate

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True, eq=False)
class SteadySummary:
    sigma_ss: np.ndarray
    k_ss: np.ndarray
    h: np.ndarray
    sigma_h: float
    rho_h: float
    iterations: int
    residual: float


def _require_hypotheses(model: SystemModel) -> None:
    report = validate(model)
    if not report.detectable:
        raise PreconditionError("(C, A) is not detectable")
    if not report.stabilizable:
        raise PreconditionError("(A, Q) is not stabilizable")


def steady_quantities(model: SystemModel, sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gain ``K = A (Sigma^-1 + C'V^-1 C)^-1 C'V^-1`` and closed loop ``H = A - K C`` at ``sigma``."""
    w = whitening(model)
    try:
        _, kw = kernels.riccati_step(sigma, model.a, w.cw, model.q)
    except kernels.LinAlgError:
        raise DomainError("sigma is not positive definite") from None
    k = w.gain(kw)
    return k, model.a - k @ model.c


def solve_dare(model: SystemModel, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> SteadySummary:
    if not tol > 0:
        raise DomainError("tol must be positive")
    _require_hypotheses(model)
    w = whitening(model)
    try:
        sigma, iters, gap = kernels.riccati_iterate(model.a, w.cw, model.q, np.eye(model.n), tol, max_iter)
    except kernels.LinAlgError:
        raise NumericalFailure("Riccati iterate lost positive definiteness") from None
    if iters < 0:
        raise ConvergenceError(
            f"no convergence in {max_iter} iterations (last gap {gap:.3e})", residual=gap, iterations=max_iter
        )
    k, h = steady_quantities(model, sigma)
    return SteadySummary(
        sigma_ss=sigma,
        k_ss=k,
        h=h,
        sigma_h=linops.largest_singular_value(h),
        rho_h=linops.spectral_radius(h),
        iterations=iters,
        residual=residual(model, sigma),
    )


def residual(model: SystemModel, sigma) -> float:
    """Largest singular value of the DARE defect at ``sigma``.

    Evaluated with explicit inverses, independently of the kernel path.
    """
    sigma = linops.as_matrix(sigma, "sigma")
    if sigma.shape != (model.n, model.n):
        raise DomainError(f"sigma must be {model.n}x{model.n}")
    if not linops.is_positive_definite(sigma, 0.0):
        raise DomainError("sigma is not positive definite")
    info = model.c.T @ np.linalg.solve(model.v, model.c)
    inner = np.linalg.inv(np.linalg.inv(sigma) + info)
    defect = sigma - model.a @ inner @ model.a.T - model.q
    return linops.largest_singular_value(linops.sym(defect))


def convergence_trace(
    model: SystemModel,
    t_max: int,
    sigma0=None,
    steady: SteadySummary | None = None,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """``e_k = sigma_max(Sigma_k - Sigma)`` for ``k = 0..t_max``.

    Uses the exact difference form of the recursion,
    ``Sigma_{k+1} - Sigma = (A - K_k C)(Sigma_k - Sigma)(A - K C)'``,
    so each ``e_k`` carries full relative precision far below the roundoff
    floor of a direct subtraction. ``sigma0`` replaces the identity start
    (diagnostic use).
    """
    if t_max < 0:
        raise DomainError("t_max must be nonnegative")
    ss = steady if steady is not None else solve_dare(model, tol=tol)
    w = whitening(model)
    start = np.eye(model.n) if sigma0 is None else linops.sym(linops.as_matrix(sigma0, "sigma0"))
    seq = kernels.riccati_sequence(model.a, w.cw, model.q, start, t_max)
    diff = start - ss.sigma_ss
    log_scale = 0.0
    out = np.zeros(t_max + 1)
    for k in range(t_max + 1):
        s = linops.largest_singular_value(diff)
        if s == 0.0:
            break
        log_scale += math.log(s)
        diff = diff / s
        out[k] = math.exp(log_scale) if log_scale > -745.0 else 0.0
        if k == t_max:
            break
        _, kw = kernels.riccati_step(seq[k], model.a, w.cw, model.q)
        diff = (model.a - kw @ w.cw) @ diff @ ss.h.T
    return out

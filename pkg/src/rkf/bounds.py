"""Worst-case loss certification.

Given a model, its steady state, an observation stream and any comparator
sequence ``xbar_0..xbar_T``, this module computes the accumulators

* ``L_T`` player loss, ``V_T`` comparator loss (both in the ``V^-1`` norm),
* ``W_T = sum ||xbar_{t+1} - A xbar_t||^2`` total drift,

and the two upper bounds on ``L_T``: the tracking bound ``b1`` (requires
``sigma_max(H) < 1``) and the H-infinity derived bound ``b3`` (needs only
``r_bar``). The bound formulas accept numpy arrays so whole per-round curves
can be evaluated at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linops
from .errors import DimensionError, DomainError, InapplicableError
from .filter import trajectory, whitening
from .model import SystemModel
from .riccati import SteadySummary, solve_dare


@dataclass(frozen=True)
class BoundConstants:
    r_bar: float
    a: float
    b: Optional[float]
    c: Optional[float]
    sigma_kk: float
    sigma_qinv: float
    sigma_h: float

    @property
    def applicable(self) -> bool:
        """Whether ``b`` and ``c`` exist, i.e. ``sigma_max(H) < 1``."""
        return self.b is not None and self.c is not None


@dataclass(frozen=True, eq=False)
class ComparatorTrace:
    xbar: np.ndarray
    v_t_cum: float
    w_t_cum: float
    xbar0_normsq: float
    # per-round terms; cumulative sums give the prefix accumulators
    comparator_losses: np.ndarray
    drifts: np.ndarray

    @property
    def t_rounds(self) -> int:
        return self.drifts.shape[0]


@dataclass(frozen=True)
class BoundReport:
    l_t: float
    v_t: float
    w_t: float
    b1: float
    b3: float
    alpha_b1: float
    alpha_b3: float
    applicable_b1: bool


def constants(model: SystemModel, ss: SteadySummary) -> BoundConstants:
    sigma = ss.sigma_ss
    v_ih = linops.inv_sqrtm_pd(model.v)
    r_bar = linops.largest_singular_value(linops.sym(v_ih @ (model.v + model.c @ sigma @ model.c.T) @ v_ih))
    a = linops.largest_singular_value(linops.sym(np.linalg.inv(sigma)))
    b = c = None
    if ss.sigma_h < 1.0:
        s = ss.sigma_h**2
        b = 1.0 / (1.0 - s)
        c = (1.0 + s) / (1.0 - s) ** 3
    return BoundConstants(
        r_bar=r_bar,
        a=a,
        b=b,
        c=c,
        sigma_kk=linops.largest_singular_value(ss.k_ss.T @ ss.k_ss),
        sigma_qinv=linops.largest_singular_value(linops.sym(np.linalg.inv(model.q))),
        sigma_h=ss.sigma_h,
    )


def accumulate_comparator(model: SystemModel, xbar, observations) -> ComparatorTrace:
    xbar = np.asarray(xbar, dtype=float)
    ys = np.asarray(observations, dtype=float)
    if ys.size == 0:
        ys = ys.reshape(0, model.p)
    if xbar.ndim != 2 or xbar.shape[1] != model.n:
        raise DimensionError(f"xbar must be (T+1) x {model.n}")
    if ys.ndim != 2 or ys.shape[1] != model.p:
        raise DimensionError(f"observations must be T x {model.p}")
    if xbar.shape[0] != ys.shape[0] + 1:
        raise DimensionError(f"xbar has {xbar.shape[0]} entries, need {ys.shape[0] + 1}")
    resid = whitening(model).outputs(ys - xbar[:-1] @ model.c.T)
    comp = np.einsum("ij,ij->i", resid, resid)
    w = xbar[1:] - xbar[:-1] @ model.a.T
    drifts = np.einsum("ij,ij->i", w, w)
    return ComparatorTrace(
        xbar=xbar,
        v_t_cum=float(np.cumsum(comp)[-1]) if comp.size else 0.0,
        w_t_cum=float(np.cumsum(drifts)[-1]) if drifts.size else 0.0,
        xbar0_normsq=float(xbar[0] @ xbar[0]),
        comparator_losses=comp,
        drifts=drifts,
    )


def estimation_error_cum(xbar, xhat) -> float:
    """True ``sum_{t<T} ||xbar_t - xhat_t||^2``; only computable when the comparator is known."""
    xbar = np.asarray(xbar, dtype=float)
    xhat = np.asarray(xhat, dtype=float)
    d = xbar[:-1] - xhat[: xbar.shape[0] - 1]
    return float(np.sum(d * d))


def _need_bc(k: BoundConstants) -> None:
    if not k.applicable:
        raise InapplicableError(f"b and c are undefined: sigma_max(H) = {k.sigma_h:.6g} >= 1")


def lemma3_bound(k: BoundConstants, trace: ComparatorTrace, xtilde_cum: float, alpha: float) -> float:
    """``r V_T + r ||xbar_0||^2 + r a (X_T / alpha + alpha W_T)`` for a chosen ``alpha``."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    r = k.r_bar
    return r * trace.v_t_cum + r * trace.xbar0_normsq + r * k.a * (xtilde_cum / alpha + alpha * trace.w_t_cum)


def xtilde_bound_value(k: BoundConstants, x0sq, v_cum, w_cum):
    _need_bc(k)
    return 2.0 * k.b * x0sq + 8.0 * k.c * (w_cum + k.sigma_kk * v_cum)


def xtilde_cum_bound(k: BoundConstants, trace: ComparatorTrace) -> float:
    """Ceiling on the cumulative state estimation error."""
    return float(xtilde_bound_value(k, trace.xbar0_normsq, trace.v_t_cum, trace.w_t_cum))


def b1_value(k: BoundConstants, x0sq, v_cum, w_cum):
    _need_bc(k)
    r = k.r_bar
    inner = k.b * x0sq + 4.0 * k.c * (w_cum + k.sigma_kk * v_cum)
    return r * v_cum + r * x0sq + 2.0 * r * k.a * np.sqrt(2.0 * w_cum * inner)


def bound_b1(k: BoundConstants, trace: ComparatorTrace) -> tuple[float, float]:
    """Tracking bound and its optimising ``alpha``.

    With zero drift the optimal ``alpha`` is infinite and the drift term vanishes.
    """
    _need_bc(k)
    value = float(b1_value(k, trace.xbar0_normsq, trace.v_t_cum, trace.w_t_cum))
    w = trace.w_t_cum
    if w == 0.0:
        return value, math.inf
    inner = k.b * trace.xbar0_normsq + 4.0 * k.c * (w + k.sigma_kk * trace.v_t_cum)
    return value, math.sqrt(2.0 * inner / w)


def b3_value(k: BoundConstants, x0sq, v_cum, w_cum):
    g = (math.sqrt(k.r_bar) + 1.0) ** 2
    disturbance = x0sq + v_cum + k.sigma_qinv * w_cum
    return (
        (1.0 + g) * v_cum
        + g * x0sq
        + g * k.sigma_qinv * w_cum
        + 2.0 * math.sqrt(g) * np.sqrt(v_cum * disturbance)
    )


def bound_b3(k: BoundConstants, trace: ComparatorTrace) -> tuple[float, float]:
    """H-infinity derived bound and its ``alpha`` (0 when the comparator loss is zero)."""
    value = float(b3_value(k, trace.xbar0_normsq, trace.v_t_cum, trace.w_t_cum))
    g = (math.sqrt(k.r_bar) + 1.0) ** 2
    denom = g * (trace.xbar0_normsq + trace.v_t_cum + k.sigma_qinv * trace.w_t_cum)
    if trace.v_t_cum == 0.0 or denom == 0.0:
        return value, 0.0
    return value, math.sqrt(trace.v_t_cum / denom)


def certify(
    model: SystemModel,
    observations,
    xbar,
    steady: SteadySummary | None = None,
) -> BoundReport:
    """Run the filter on ``observations`` and check both bounds against ``xbar``."""
    ss = steady if steady is not None else solve_dare(model)
    k = constants(model, ss)
    traj = trajectory(model, observations)
    trace = accumulate_comparator(model, xbar, observations)
    l_t = float(traj.cum_loss[-1]) if traj.cum_loss.size else 0.0
    b3, alpha3 = bound_b3(k, trace)
    if k.applicable:
        b1, alpha1 = bound_b1(k, trace)
    else:
        b1, alpha1 = math.nan, math.nan
    return BoundReport(
        l_t=l_t,
        v_t=trace.v_t_cum,
        w_t=trace.w_t_cum,
        b1=b1,
        b3=b3,
        alpha_b1=alpha1,
        alpha_b3=alpha3,
        applicable_b1=k.applicable,
    )


# Auxiliary inequalities used by the proofs; exposed for property checks.


def lemma5_rhs(a_vec, b_vec, m, alpha: float) -> float:
    """``(1 + 1/alpha) a'Ma + (1 + alpha) b'Mb``, which dominates ``(a+b)'M(a+b)``."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    return (1.0 + 1.0 / alpha) * linops.weighted_norm_sq(a_vec, m) + (1.0 + alpha) * linops.weighted_norm_sq(b_vec, m)


def prop1_infimum(a: float, b: float) -> tuple[float, float]:
    """``inf_{xi>0} a/xi + xi b`` and its minimiser."""
    if not (a > 0 and b > 0):
        raise DomainError("a and b must be positive")
    return 2.0 * math.sqrt(a * b), math.sqrt(a / b)


def polylog_bound(s: float, t: int) -> tuple[float, float]:
    """Partial sum ``sum_{k<t} (k+1)^2 s^k`` and its closed-form ceiling ``(1+s)/(1-s)^3``."""
    if not 0.0 <= s < 1.0:
        raise DomainError("s must lie in [0, 1)")
    if t < 0:
        raise DomainError("t must be nonnegative")
    # Both sides are evaluated exactly for the given float ``s = m/d`` and
    # rounded once (int / int is correctly rounded). Rounding is monotone, so
    # partial sums stay below the ceiling and nondecreasing in ``t``.
    m, d = float(s).as_integer_ratio()
    ceiling = (d + m) * d * d / (d - m) ** 3
    if t == 0:
        return 0.0, ceiling
    num, scale = 0, 1
    for k in range(t, 0, -1):
        num = num * m + k * k * scale
        scale *= d
    return num / (scale // d), ceiling


def inverse_square_partial_sum(t: int) -> float:
    """``sum_{k=1}^t 1/k^2``, bounded by 2 for every ``t``."""
    k = np.arange(1, t + 1, dtype=float)
    return float(np.sum(1.0 / (k * k)))


def lemma6_holds(model: SystemModel, sigma_t, sigma_next, rtol: float = 1e-8) -> bool:
    """Check ``Sigma_{t+1}^-1 <= A^-T (Sigma_t^-1 + C'V^-1 C) A^-1`` for nonsingular ``A``.

    The tolerance is relative to the largest singular value of the right side.
    """
    a_inv = np.linalg.inv(model.a)
    info = model.c.T @ np.linalg.solve(model.v, model.c)
    rhs = linops.sym(a_inv.T @ (np.linalg.inv(sigma_t) + info) @ a_inv)
    lhs = linops.sym(np.linalg.inv(sigma_next))
    return linops.psd_leq(lhs, rhs, rtol * max(1.0, linops.largest_singular_value(rhs)))

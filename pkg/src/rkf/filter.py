"""The game-theoretic Kalman filter: predict, observe, incur loss, update.

The player starts from ``xhat = 0`` and ``sigma = I``. Each round it predicts
``C xhat``, pays ``||y - C xhat||^2`` in the ``V^-1`` norm and then applies the
gain ``K_t = A (sigma^-1 + C' V^-1 C)^-1 C' V^-1`` and the Riccati update.

Internally everything runs in whitened output coordinates: with ``V = Lv Lv'``
the observation map becomes ``Lv^-1 C`` and the loss an ordinary squared norm.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from . import kernels, linops
from .errors import DimensionError, InvalidModelError, NumericalFailure
from .model import SystemModel


@dataclass(frozen=True)
class Whitening:
    """Cholesky factor of V and the whitened observation map, computed once per model."""

    lv: np.ndarray
    cw: np.ndarray

    @classmethod
    def of(cls, model: SystemModel) -> "Whitening":
        try:
            lv = cholesky(model.v, lower=True)
        except np.linalg.LinAlgError:
            raise InvalidModelError("v is not positive definite") from None
        cw = solve_triangular(lv, model.c, lower=True)
        return cls(lv=lv, cw=cw)

    def outputs(self, y) -> np.ndarray:
        """Whiten one observation (1-D) or a stack of them (T x p)."""
        y = np.asarray(y, dtype=float)
        return solve_triangular(self.lv, y.T, lower=True).T

    def gain(self, kw: np.ndarray) -> np.ndarray:
        """Map a whitened-coordinate gain back to ``K_t`` acting on raw innovations."""
        return solve_triangular(self.lv, kw.T, lower=True, trans="T").T


def whitening(model: SystemModel) -> Whitening:
    # cached on the instance; SystemModel is immutable
    w = model.__dict__.get("_whitening")
    if w is None:
        w = Whitening.of(model)
        model.__dict__["_whitening"] = w
    return w


@dataclass(frozen=True, eq=False)
class FilterState:
    t: int
    xhat: np.ndarray
    sigma: np.ndarray
    cum_loss: float

    def __eq__(self, other):
        if not isinstance(other, FilterState):
            return NotImplemented
        return (
            self.t == other.t
            and self.cum_loss == other.cum_loss
            and np.array_equal(self.xhat, other.xhat)
            and np.array_equal(self.sigma, other.sigma)
        )


@dataclass(frozen=True, eq=False)
class StepRecord:
    t: int
    y: np.ndarray
    yhat: np.ndarray
    loss: float
    gain: np.ndarray


def _readonly(x):
    x = np.array(x, dtype=float)
    x.setflags(write=False)
    return x


def init(model: SystemModel) -> FilterState:
    whitening(model)
    return FilterState(t=0, xhat=_readonly(np.zeros(model.n)), sigma=_readonly(np.eye(model.n)), cum_loss=0.0)


def predict(state: FilterState, model: SystemModel) -> np.ndarray:
    return model.c @ state.xhat


def _check_obs(y, p: int) -> np.ndarray:
    y = linops.as_vector(y, "observation")
    if y.shape[0] != p:
        raise DimensionError(f"observation has length {y.shape[0]}, expected {p}")
    return y


def step(state: FilterState, model: SystemModel, y) -> tuple[FilterState, StepRecord]:
    """One round of the game. Returns the next state and the round's record."""
    y = _check_obs(y, model.p)
    w = whitening(model)
    yhat = predict(state, model)
    e = w.outputs(y - yhat)
    loss = float(e @ e)
    try:
        sigma, kw = kernels.riccati_step(state.sigma, model.a, w.cw, model.q)
    except kernels.LinAlgError:
        raise NumericalFailure(f"sigma lost positive definiteness at round {state.t}") from None
    xhat = model.a @ state.xhat + kw @ e
    nxt = FilterState(
        t=state.t + 1,
        xhat=_readonly(xhat),
        sigma=_readonly(sigma),
        cum_loss=state.cum_loss + loss,
    )
    record = StepRecord(t=state.t, y=_readonly(y), yhat=_readonly(yhat), loss=loss, gain=_readonly(w.gain(kw)))
    return nxt, record


@dataclass(frozen=True)
class Trajectory:
    """Array form of a full run: ``xhat`` has T+1 rows, ``losses`` and ``gains`` T."""

    xhat: np.ndarray
    losses: np.ndarray
    gains: np.ndarray
    sigma_final: np.ndarray
    cum_loss: np.ndarray


def trajectory(model: SystemModel, observations) -> Trajectory:
    """Run the whole observation stream through the compiled kernel."""
    ys = np.asarray(observations, dtype=float)
    if ys.size == 0:
        ys = ys.reshape(0, model.p)
    if ys.ndim != 2 or ys.shape[1] != model.p:
        raise DimensionError(f"observations must be T x {model.p}")
    if not np.all(np.isfinite(ys)):
        raise DimensionError("observations contain non-finite values")
    w = whitening(model)
    try:
        xhat, losses, gains_w, sigma = kernels.kalman_pass(
            model.a, w.cw, model.q, w.outputs(ys), np.zeros(model.n), np.eye(model.n)
        )
    except kernels.LinAlgError:
        raise NumericalFailure("sigma lost positive definiteness during run") from None
    gains = np.array([w.gain(k) for k in gains_w]) if len(gains_w) else np.zeros((0, model.n, model.p))
    return Trajectory(xhat=xhat, losses=losses, gains=gains, sigma_final=sigma, cum_loss=np.cumsum(losses))


def run(model: SystemModel, observations: Sequence) -> tuple[FilterState, list[StepRecord]]:
    """Fold :func:`step` over ``observations`` starting from :func:`init`.

    Executed by the kernel; the result matches a Python-level fold of
    :func:`step` to roundoff. ``cum_loss`` is the running sum of the round losses.
    """
    for y in observations:
        _check_obs(y, model.p)
    if len(observations) == 0:
        return init(model), []
    ys = np.array([np.atleast_1d(np.asarray(y, dtype=float)) for y in observations])
    traj = trajectory(model, ys)
    records = []
    total = 0.0
    for t in range(ys.shape[0]):
        total += float(traj.losses[t])
        records.append(
            StepRecord(
                t=t,
                y=_readonly(ys[t]),
                yhat=_readonly(model.c @ traj.xhat[t]),
                loss=float(traj.losses[t]),
                gain=_readonly(traj.gains[t]),
            )
        )
    state = FilterState(t=ys.shape[0], xhat=_readonly(traj.xhat[-1]), sigma=_readonly(traj.sigma_final), cum_loss=total)
    return state, records

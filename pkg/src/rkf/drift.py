"""Comparator sequences and observations for the two drift regimes.

``linear``: each step drifts by a Gaussian direction rescaled to norm ``delta``,
so the total drift grows like ``T * delta**2``.
``sublinear``: step ``t`` drifts by ``(t+1)**(-beta/2)`` along a direction that
rotates by ``omega`` radians per step in the plane of the first two
coordinates, so ``||w_t||^2 = (t+1)**-beta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ConfigError, DimensionError
from .model import SystemModel

Regime = Literal["linear", "sublinear"]
Noise = Literal["unit_gaussian", "none"]


@dataclass(frozen=True)
class DriftSpec:
    regime: Regime = "sublinear"
    delta: float = 1.0
    beta: float = 0.5
    noise_v: Noise = "unit_gaussian"
    seed: int = 0
    omega: float = 0.1

    def __post_init__(self):
        if self.regime not in ("linear", "sublinear"):
            raise ConfigError("drift.regime", f"must be linear or sublinear, got {self.regime!r}")
        if self.noise_v not in ("unit_gaussian", "none"):
            raise ConfigError("drift.noise_v", f"must be unit_gaussian or none, got {self.noise_v!r}")
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise ConfigError("drift.delta", "must be a finite nonnegative number")
        if self.regime == "sublinear" and not (self.beta > 0 and math.isfinite(self.beta)):
            raise ConfigError("drift.beta", "must be positive for the sublinear regime")
        if self.seed < 0:
            raise ConfigError("drift.seed", "must be nonnegative")


@dataclass(frozen=True, eq=False)
class GeneratedRun:
    xbar: np.ndarray  # (T+1, n)
    w: np.ndarray  # (T, n)
    observations: np.ndarray  # (T, p)

    @property
    def t_rounds(self) -> int:
        return self.w.shape[0]


def drift_terms(spec: DriftSpec, n: int, t_rounds: int, rng: np.random.Generator) -> np.ndarray:
    if spec.regime == "linear":
        g = rng.standard_normal((t_rounds, n))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        return spec.delta * g / norms
    if n < 2:
        raise ConfigError("drift.regime", "sublinear rotation needs n >= 2")
    t = np.arange(t_rounds)
    mag = (t + 1.0) ** (-spec.beta / 2.0)
    w = np.zeros((t_rounds, n))
    w[:, 0] = mag * np.cos(spec.omega * t)
    w[:, 1] = mag * np.sin(spec.omega * t)
    return w


def generate(model: SystemModel, spec: DriftSpec, t_rounds: int) -> GeneratedRun:
    """Comparator ``xbar_{t+1} = A xbar_t + w_t`` from ``xbar_0 = 0`` and ``y_t = C xbar_t + v_t``."""
    if t_rounds < 1:
        raise DimensionError("t_rounds must be at least 1")
    rng = np.random.default_rng(spec.seed)
    w = drift_terms(spec, model.n, t_rounds, rng)
    if spec.noise_v == "unit_gaussian":
        v = rng.standard_normal((t_rounds, model.p))
    else:
        v = np.zeros((t_rounds, model.p))
    xbar = np.zeros((t_rounds + 1, model.n))
    for t in range(t_rounds):
        xbar[t + 1] = model.a @ xbar[t] + w[t]
    observations = xbar[:-1] @ model.c.T + v
    return GeneratedRun(xbar=xbar, w=w, observations=observations)


def drift_budget(spec: DriftSpec, t_rounds: int) -> float:
    """Analytic ceiling on the total drift after ``t_rounds`` steps."""
    if t_rounds < 1:
        raise DimensionError("t_rounds must be at least 1")
    if spec.regime == "linear":
        return t_rounds * spec.delta**2
    if spec.beta == 1.0:
        return math.log(t_rounds) + 1.0
    return (t_rounds ** (1.0 - spec.beta) - spec.beta) / (1.0 - spec.beta)

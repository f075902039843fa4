"""Simulation harness: config loading, per-round bound curves, CSV output, self-test."""
from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import bounds, drift, linops, riccati
from .errors import ConfigError, RKFError
from .filter import Trajectory, trajectory
from .model import SystemModel, model_from_section, random_stable_system

CSV_HEADER = "t,L,V,W,B1,B3,avg_gap"

_KEYS = {
    "system": {"n", "p", "system_seed", "a", "c", "q", "v"},
    "drift": {"regime", "delta", "beta", "noise_v", "seed", "omega"},
    "run": {"t_rounds", "output_path", "tol_dare", "emit_every"},
}


@dataclass(frozen=True)
class SeededSystem:
    n: int
    p: int
    system_seed: int

    def build(self) -> SystemModel:
        return random_stable_system(self.n, self.p, self.system_seed)


@dataclass(frozen=True)
class ExperimentConfig:
    system: Union[SystemModel, SeededSystem]
    drift: drift.DriftSpec = field(default_factory=drift.DriftSpec)
    t_rounds: int = 2000
    output_path: str = "run.csv"
    tol_dare: float = riccati.DEFAULT_TOL
    emit_every: int = 1

    def __post_init__(self):
        if self.t_rounds < 1:
            raise ConfigError("run.t_rounds", "must be at least 1")
        if self.emit_every < 1:
            raise ConfigError("run.emit_every", "must be at least 1")
        if not self.tol_dare > 0:
            raise ConfigError("run.tol_dare", "must be positive")

    def build_model(self) -> SystemModel:
        return self.system.build() if isinstance(self.system, SeededSystem) else self.system

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Same experiment with the drift seed, and the system seed when generated, set to ``seed``."""
        system = self.system
        if isinstance(system, SeededSystem):
            system = replace(system, system_seed=seed)
        return replace(self, system=system, drift=replace(self.drift, seed=seed))


@dataclass(frozen=True)
class SummaryRow:
    t: int
    l_t: float
    v_t: float
    w_t: float
    b1: float
    b3: float
    avg_loss_gap: float


def _get(section, key, conv, field_name, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(field_name, "missing")
        return default
    try:
        return conv(section[key])
    except ValueError:
        raise ConfigError(field_name, f"cannot parse {section[key]!r}") from None


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError("file", str(exc).splitlines()[0]) from None
    for name in parser.sections():
        if name not in _KEYS:
            raise ConfigError(name, "unknown section")
        for key in parser[name]:
            if key not in _KEYS[name]:
                raise ConfigError(f"{name}.{key}", "unknown key")
    if not parser.has_section("system"):
        raise ConfigError("system", "missing section")
    sys_sec = parser["system"]
    if "system_seed" in sys_sec:
        n = _get(sys_sec, "n", int, "system.n")
        p = _get(sys_sec, "p", int, "system.p")
        seed = _get(sys_sec, "system_seed", int, "system.system_seed")
        if n < 1 or p < 1:
            raise ConfigError("system.n", "n and p must be positive")
        if seed < 0:
            raise ConfigError("system.system_seed", "must be nonnegative")
        system: Union[SystemModel, SeededSystem] = SeededSystem(n, p, seed)
    else:
        try:
            system = model_from_section(sys_sec, defaults=True)
        except RKFError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("system", str(exc)) from None

    d = parser["drift"] if parser.has_section("drift") else {}
    spec = drift.DriftSpec(
        regime=d.get("regime", "sublinear").strip(),
        delta=_get(d, "delta", float, "drift.delta", 1.0),
        beta=_get(d, "beta", float, "drift.beta", 0.5),
        noise_v=d.get("noise_v", "unit_gaussian").strip(),
        seed=_get(d, "seed", int, "drift.seed", 0),
        omega=_get(d, "omega", float, "drift.omega", 0.1),
    )
    r = parser["run"] if parser.has_section("run") else {}
    return ExperimentConfig(
        system=system,
        drift=spec,
        t_rounds=_get(r, "t_rounds", int, "run.t_rounds"),
        output_path=r.get("output_path", "run.csv").strip(),
        tol_dare=_get(r, "tol_dare", float, "run.tol_dare", riccati.DEFAULT_TOL),
        emit_every=_get(r, "emit_every", int, "run.emit_every", 1),
    )


def load_config(path) -> ExperimentConfig:
    """Read an INI-style experiment file with sections [system], [drift], [run].

    Defaults: Q = 0.5 I, V = I, tol_dare = 1e-12, emit_every = 1.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("file", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, source=str(path))


def dump_config(config: ExperimentConfig) -> str:
    lines = ["[system]"]
    if isinstance(config.system, SeededSystem):
        lines += [f"n = {config.system.n}", f"p = {config.system.p}", f"system_seed = {config.system.system_seed}"]
    else:
        lines += config.system.to_text().splitlines()[1:]
    d = config.drift
    lines += [
        "",
        "[drift]",
        f"regime = {d.regime}",
        f"delta = {d.delta!r}",
        f"beta = {d.beta!r}",
        f"noise_v = {d.noise_v}",
        f"seed = {d.seed}",
        f"omega = {d.omega!r}",
        "",
        "[run]",
        f"t_rounds = {config.t_rounds}",
        f"output_path = {config.output_path}",
        f"tol_dare = {config.tol_dare!r}",
        f"emit_every = {config.emit_every}",
    ]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    rows: list
    model: SystemModel
    steady: riccati.SteadySummary
    constants: bounds.BoundConstants
    generated: drift.GeneratedRun
    trajectory: Trajectory
    trace: bounds.ComparatorTrace
    l_cum: np.ndarray
    v_cum: np.ndarray
    w_cum: np.ndarray
    b1: np.ndarray
    b3: np.ndarray

    @property
    def xtilde_cum(self) -> float:
        return bounds.estimation_error_cum(self.generated.xbar, self.trajectory.xhat)


def execute(config: ExperimentConfig, model: Optional[SystemModel] = None) -> ExperimentResult:
    """Run one experiment and evaluate both bounds at every horizon ``t = 1..T``.

    Each prefix of length ``t`` is treated as the horizon of the bounds, which
    hold for any ``T``, so the curves are valid pointwise.
    """
    model = model if model is not None else config.build_model()
    ss = riccati.solve_dare(model, tol=config.tol_dare)
    k = bounds.constants(model, ss)
    gen = drift.generate(model, config.drift, config.t_rounds)
    traj = trajectory(model, gen.observations)
    trace = bounds.accumulate_comparator(model, gen.xbar, gen.observations)
    l_cum = traj.cum_loss
    v_cum = np.cumsum(trace.comparator_losses)
    w_cum = np.cumsum(trace.drifts)
    x0 = trace.xbar0_normsq
    b1 = bounds.b1_value(k, x0, v_cum, w_cum) if k.applicable else np.full_like(l_cum, np.nan)
    b3 = bounds.b3_value(k, x0, v_cum, w_cum)
    t = np.arange(1, config.t_rounds + 1)
    gap = (l_cum - v_cum) / t
    emit = (t % config.emit_every == 0) | (t == config.t_rounds)
    rows = [
        SummaryRow(int(t[i]), float(l_cum[i]), float(v_cum[i]), float(w_cum[i]), float(b1[i]), float(b3[i]), float(gap[i]))
        for i in np.flatnonzero(emit)
    ]
    return ExperimentResult(rows, model, ss, k, gen, traj, trace, l_cum, v_cum, w_cum, b1, b3)


def run_experiment(config: ExperimentConfig) -> list[SummaryRow]:
    return execute(config).rows


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.17g}"


def format_rows(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([str(r.t)] + [_fmt(x) for x in (r.l_t, r.v_t, r.w_t, r.b1, r.b3, r.avg_loss_gap)]))
    return "\n".join(lines) + "\n"


def emit_csv(rows, path) -> None:
    """Write ``rows`` as CSV (17 significant digits, unix newlines). B1 is ``nan`` where inapplicable."""
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(format_rows(rows))


def read_csv(path) -> list[SummaryRow]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError("csv", f"unexpected header in {path}")
    rows = []
    for line in lines[1:]:
        t, *vals = line.split(",")
        rows.append(SummaryRow(int(t), *(float(v) for v in vals)))
    return rows


# --- self-test -------------------------------------------------------------

SCALAR_ROOT = (-0.25 + math.sqrt(0.25**2 + 2.0)) / 2.0


def _check_scalar_dare(inject):
    m = SystemModel(a=[[0.5]], c=[[1.0]], q=[[0.5]], v=[[1.0]])
    ss = riccati.solve_dare(m)
    sigma = float(ss.sigma_ss[0, 0])
    if inject == "scalar-dare":
        sigma *= 1.0 + 1e-6
    k = 0.5 * SCALAR_ROOT / (1.0 + SCALAR_ROOT)
    if abs(sigma - SCALAR_ROOT) > 1e-10 or abs(float(ss.k_ss[0, 0]) - k) > 1e-10:
        return f"sigma={sigma!r} expected {SCALAR_ROOT!r}"
    return None


def _check_weighted_split(inject):
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(1, 6))
        g = rng.standard_normal((n, n))
        m = g @ g.T + 1e-3 * np.eye(n)
        a, b = rng.standard_normal(n), rng.standard_normal(n)
        alpha = float(np.exp(rng.uniform(-4, 4)))
        lhs = linops.weighted_norm_sq(a + b, m)
        if lhs > bounds.lemma5_rhs(a, b, m, alpha) * (1 + 1e-12) + 1e-12:
            return f"violated at alpha={alpha}"
    return None


def _check_information_order(inject):
    from .filter import init, step

    model = random_stable_system(3, 2, 5)
    gen = drift.generate(model, drift.DriftSpec(regime="linear", seed=5), 40)
    state = init(model)
    for y in gen.observations:
        nxt, _ = step(state, model, y)
        if not bounds.lemma6_holds(model, state.sigma, nxt.sigma):
            return f"order fails at round {state.t}"
        state = nxt
    return None


def _check_infimum(inject):
    a, b = 3.0, 0.7
    value, xi = bounds.prop1_infimum(a, b)
    grid = np.geomspace(xi / 100, xi * 100, 1000)
    if np.min(a / grid + grid * b) < value - 1e-9:
        return "grid beats closed form"
    return None


def _check_polylog(inject):
    for s in np.arange(10) / 10:
        for t in (1, 10, 100, 500):
            fs, bd = bounds.polylog_bound(float(s), t)
            if fs > bd * (1 + 1e-12):
                return f"s={s} t={t}"
    return None


def _check_end_to_end(inject):
    for regime in ("linear", "sublinear"):
        cfg = ExperimentConfig(
            system=SeededSystem(3, 2, 1),
            drift=drift.DriftSpec(regime=regime, seed=1),
            t_rounds=50,
        )
        res = execute(cfg)
        last = res.rows[-1]
        if res.constants.applicable and last.b1 < last.l_t * (1 - 1e-8):
            return f"{regime}: B1={last.b1} < L={last.l_t}"
        if last.b3 < last.l_t * (1 - 1e-8):
            return f"{regime}: B3={last.b3} < L={last.l_t}"
    return None


SELFTEST_CHECKS = {
    "scalar-dare": _check_scalar_dare,
    "weighted-split": _check_weighted_split,
    "information-order": _check_information_order,
    "infimum": _check_infimum,
    "polylog": _check_polylog,
    "end-to-end": _check_end_to_end,
}


def selftest(inject: Optional[str] = None, out=print) -> int:
    """Run the built-in checks; 0 if all pass, 3 otherwise. ``inject`` corrupts the named check."""
    failed = []
    for name, check in SELFTEST_CHECKS.items():
        try:
            problem = check(inject)
        except RKFError as exc:
            problem = f"{type(exc).__name__}: {exc}"
        if problem is None:
            out(f"PASS {name}")
        else:
            out(f"FAIL {name}: {problem}")
            failed.append(name)
    return 3 if failed else 0


def sweep_workers() -> int:
    raw = os.environ.get("RKF_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError("RKF_THREADS", f"not an integer: {raw!r}") from None

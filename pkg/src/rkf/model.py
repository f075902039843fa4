"""The (A, C, V, Q) game definition, structural checks, and random stable systems."""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass

import numpy as np

from . import linops
from .errors import ConfigError, DimensionError, InvalidModelError

PBH_RTOL = 1e-8
DET_TOL = 1e-12


def _frozen(m) -> np.ndarray:
    arr = np.array(m, dtype=float, copy=True, order="C")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Immutable 4-tuple defining the prediction game.

    ``a`` is the n x n transition, ``c`` the p x n observation map, ``q`` the
    n x n drift weight and ``v`` the p x p loss weight. Shapes and symmetry are
    checked on construction; definiteness of ``q`` and ``v`` is checked by
    :func:`validate` so that degenerate pairs can still be analysed.
    """

    a: np.ndarray
    c: np.ndarray
    q: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        a = linops.as_matrix(self.a, "a")
        c = linops.as_matrix(self.c, "c")
        q = linops.as_matrix(self.q, "q")
        v = linops.as_matrix(self.v, "v")
        n = a.shape[0]
        if a.shape != (n, n):
            raise DimensionError(f"a must be square, got {a.shape}")
        if c.shape[1] != n:
            raise DimensionError(f"c must have {n} columns, got {c.shape}")
        p = c.shape[0]
        if q.shape != (n, n):
            raise DimensionError(f"q must be {n}x{n}, got {q.shape}")
        if v.shape != (p, p):
            raise DimensionError(f"v must be {p}x{p}, got {v.shape}")
        for name, m in (("q", q), ("v", v)):
            if not linops.is_symmetric(m):
                raise InvalidModelError(f"{name} is not symmetric")
        object.__setattr__(self, "a", _frozen(a))
        object.__setattr__(self, "c", _frozen(c))
        object.__setattr__(self, "q", _frozen(linops.sym(q)))
        object.__setattr__(self, "v", _frozen(linops.sym(v)))

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def p(self) -> int:
        return self.c.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SystemModel):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f)) for f in ("a", "c", "q", "v")
        )

    def __hash__(self):
        return hash(tuple(getattr(self, f).tobytes() for f in ("a", "c", "q", "v")))

    def to_text(self) -> str:
        return dump_model(self)


@dataclass(frozen=True)
class StructureReport:
    detectable: bool
    stabilizable: bool
    a_nonsingular: bool
    controllable_aq: bool


def _pbh_full_rank(a: np.ndarray, b: np.ndarray, eigs: np.ndarray, stacked_rows: bool) -> bool:
    n = a.shape[0]
    for lam in eigs:
        shifted = lam * np.eye(n) - a
        m = np.vstack([shifted, b]) if stacked_rows else np.hstack([shifted, b])
        if linops.numerical_rank(m, PBH_RTOL) < n:
            return False
    return True


def structure(model: SystemModel) -> StructureReport:
    """PBH structural tests without checking definiteness of Q and V."""
    a = model.a
    eigs = np.linalg.eigvals(a)
    unstable = eigs[np.abs(eigs) >= 1.0]
    q_half = linops.sqrtm_psd(model.q)
    detectable = _pbh_full_rank(a, model.c, unstable, stacked_rows=True)
    controllable = _pbh_full_rank(a, q_half, eigs, stacked_rows=False)
    stabilizable = controllable or _pbh_full_rank(a, q_half, unstable, stacked_rows=False)
    return StructureReport(
        detectable=detectable,
        stabilizable=stabilizable,
        a_nonsingular=bool(abs(np.linalg.det(a)) > DET_TOL),
        controllable_aq=controllable,
    )


def validate(model: SystemModel, require_definite: bool = True) -> StructureReport:
    """Check Q, V positive definite and run the PBH tests.

    Detectability of (C, A) uses rank([lambda I - A; C]) = n for every
    eigenvalue with modulus >= 1; stabilizability and controllability of
    (A, Q) use the symmetric square root of Q as input matrix.
    """
    if require_definite:
        if not linops.is_positive_definite(model.q):
            raise InvalidModelError("q is not positive definite")
        if not linops.is_positive_definite(model.v):
            raise InvalidModelError("v is not positive definite")
    return structure(model)


def random_stable_system(n: int, p: int, seed: int) -> SystemModel:
    """Random stable (A, C) with Q = 0.5 I and V = I.

    A is a standard normal draw rescaled so its spectral radius is uniform in
    [0.3, 0.9]; C is standard normal. Draws failing the PBH tests are
    discarded, so the result is always detectable and stabilizable.
    """
    if n < 1 or p < 1:
        raise DimensionError("n and p must be positive")
    rng = np.random.default_rng(seed)
    while True:
        a = rng.standard_normal((n, n))
        target = rng.uniform(0.3, 0.9)
        c = rng.standard_normal((p, n))
        rho = linops.spectral_radius(a)
        if rho == 0.0:
            continue
        model = SystemModel(a=a * (target / rho), c=c, q=0.5 * np.eye(n), v=np.eye(p))
        report = validate(model)
        if report.detectable and report.stabilizable:
            return model


def _fmt(m: np.ndarray) -> str:
    return " ".join(f"{x:.17g}" for x in np.ravel(m))


def dump_model(model: SystemModel) -> str:
    """Plain-text ``[system]`` section with row-major entries at 17 significant digits."""
    lines = [
        "[system]",
        f"n = {model.n}",
        f"p = {model.p}",
        f"a = {_fmt(model.a)}",
        f"c = {_fmt(model.c)}",
        f"q = {_fmt(model.q)}",
        f"v = {_fmt(model.v)}",
    ]
    return "\n".join(lines) + "\n"


def _parse_entries(text: str, shape, field: str) -> np.ndarray:
    try:
        vals = np.array([float(tok) for tok in text.replace(",", " ").split()])
    except ValueError as exc:
        raise ConfigError(field, f"non-numeric entry ({exc})") from None
    if vals.size != shape[0] * shape[1]:
        raise ConfigError(field, f"expected {shape[0] * shape[1]} entries, got {vals.size}")
    return vals.reshape(shape)


def model_from_section(section, defaults: bool = False) -> SystemModel:
    """Build a model from a mapping with keys n, p, a, c and optionally q, v.

    With ``defaults`` true, missing q and v fall back to 0.5 I and I.
    """
    try:
        n = int(section["n"])
        p = int(section["p"])
    except KeyError as exc:
        raise ConfigError(f"system.{exc.args[0]}", "missing") from None
    except ValueError:
        raise ConfigError("system.n", "n and p must be integers") from None
    if n < 1 or p < 1:
        raise ConfigError("system.n", "n and p must be positive")
    mats = {}
    for key, shape in (("a", (n, n)), ("c", (p, n)), ("q", (n, n)), ("v", (p, p))):
        if key in section:
            mats[key] = _parse_entries(section[key], shape, f"system.{key}")
        elif defaults and key == "q":
            mats[key] = 0.5 * np.eye(n)
        elif defaults and key == "v":
            mats[key] = np.eye(p)
        else:
            raise ConfigError(f"system.{key}", "missing")
    return SystemModel(**mats)


def load_model(text: str) -> SystemModel:
    parser = configparser.ConfigParser()
    parser.read_file(io.StringIO(text))
    if not parser.has_section("system"):
            raise ConfigError("system", "missing section")
    return model_from_section(parser["system"])

import numpy as np
import pytest

from rkf import linops
from rkf.errors import ConfigError, DimensionError, InvalidModelError
from rkf.model import SystemModel, load_model, random_stable_system, structure, validate


def test_scalar_all_flags():
    r = validate(SystemModel(a=[[0.5]], c=[[1.0]], q=[[0.5]], v=[[1.0]]))
    assert r.detectable and r.stabilizable and r.a_nonsingular and r.controllable_aq


def test_unobserved_unit_eigenvalue():
    m = SystemModel(a=[[1.0]], c=[[0.0]], q=[[0.0]], v=[[1.0]])
    r = validate(m, require_definite=False)
    assert not r.detectable
    assert not r.stabilizable and not r.controllable_aq
    with pytest.raises(InvalidModelError):
        validate(m)


def test_unstable_mode_unobserved():
    # PBH at lambda = 2: [[1.1, 0], [0, 0], [1, 0]] has rank 1 < 2
    m = SystemModel(a=np.diag([0.9, 2.0]), c=[[1.0, 0.0]], q=np.eye(2), v=[[1.0]])
    r = validate(m)
    assert not r.detectable
    assert r.stabilizable


def test_shape_checks():
    with pytest.raises(DimensionError):
        SystemModel(a=np.eye(2), c=np.ones((1, 3)), q=np.eye(2), v=np.eye(1))
    with pytest.raises(DimensionError):
        SystemModel(a=np.eye(2), c=np.ones((1, 2)), q=np.eye(3), v=np.eye(1))
    with pytest.raises(InvalidModelError):
        SystemModel(a=np.eye(2), c=np.ones((1, 2)), q=[[1.0, 0.5], [0.0, 1.0]], v=np.eye(1))


def test_immutable():
    m = SystemModel(a=np.eye(2), c=np.ones((1, 2)), q=np.eye(2), v=np.eye(1))
    with pytest.raises(ValueError):
        m.a[0, 0] = 3.0


def test_random_system_reference_dims():
    m = random_stable_system(10, 4, 7)
    assert (m.n, m.p) == (10, 4)
    assert linops.spectral_radius(m.a) < 1
    np.testing.assert_array_equal(m.q, 0.5 * np.eye(10))
    np.testing.assert_array_equal(m.v, np.eye(4))


def test_random_system_scalar_and_determinism():
    m = random_stable_system(1, 1, 0)
    assert abs(m.a[0, 0]) < 1
    a, b = random_stable_system(4, 2, 9), random_stable_system(4, 2, 9)
    assert a == b
    for f in ("a", "c", "q", "v"):
        assert getattr(a, f).tobytes() == getattr(b, f).tobytes()


def test_random_systems_satisfy_hypotheses():
    for seed in range(100):
        m = random_stable_system(3 + seed % 5, 1 + seed % 3, seed)
        rho = linops.spectral_radius(m.a)
        assert 0.3 - 1e-12 <= rho <= 0.9 + 1e-12
        r = validate(m)
        assert r.detectable and r.stabilizable
        assert r == validate(m)


def test_controllable_implies_stabilizable():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = 3
        a = rng.standard_normal((n, n))
        qh = rng.standard_normal((n, 1)) * (rng.random() < 0.7)
        m = SystemModel(a=a, c=np.ones((1, n)), q=qh @ qh.T, v=np.eye(1))
        r = structure(m)
        if r.controllable_aq:
            assert r.stabilizable


def test_text_round_trip():
    m = random_stable_system(5, 3, 11)
    assert load_model(m.to_text()) == m


def test_text_errors():
    with pytest.raises(ConfigError, match="system.a"):
        load_model("[system]\nn = 2\np = 1\na = 1 2 3\nc = 1 1\nq = 1 0 0 1\nv = 1\n")
    with pytest.raises(ConfigError, match="system.c"):
        load_model("[system]\nn = 1\np = 1\na = 0.5\nq = 1\nv = 1\n")

import math

import numpy as np
import pytest

from rkf.model import SystemModel, random_stable_system

# Frozen from an independent pure-python scalar oracle (closed-form DARE root
# of S^2 + 0.25 S - 0.5 = 0 and direct arithmetic).
SCALAR_SIGMA = 0.5930703308172536
SCALAR_K = 0.18614066163450715
SCALAR_H = 0.31385933836549285
SCALAR_RBAR = 1.5930703308172536
SCALAR_A = 1.6861406616345072
SCALAR_B = 1.1092717958449425
SCALAR_C = 1.499398291807353
SCALAR_KK = 0.03464834591373208


@pytest.fixture
def scalar_model():
    return SystemModel(a=[[0.5]], c=[[1.0]], q=[[0.5]], v=[[1.0]])


@pytest.fixture(scope="session")
def random_models():
    return [random_stable_system(n, p, s) for s in range(6) for (n, p) in ((3, 2), (10, 4))]


def assert_close(x, y, rtol=1e-10, atol=0.0):
    assert math.isclose(float(x), float(y), rel_tol=rtol, abs_tol=atol), (x, y)


def spd(rng, n, floor=1e-2):
    g = rng.standard_normal((n, n))
    return g @ g.T + floor * np.eye(n)

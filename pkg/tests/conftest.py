import logging
import os
import sys

import numpy as np
import pytest

# Add repository root to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from data_sources.water_table import load_builtin_water  # noqa: E402
from perturb.experiment import prepare_problem, solve  # noqa: E402
from utils.config import RunConfig  # noqa: E402


class LinearSystem:
    """Scalar test problem with closed-form solutions.

    theta' = -lam theta + eps u c,  Phi(theta) = (theta - target)^2 / 2.
    """

    def __init__(self, lam=1.0, c=1.0, target=0.0):
        self.lam = float(lam)
        self.c = float(c)
        self.target = float(target)

    @property
    def p(self):
        return 1

    def drift(self, theta):
        return -self.lam * np.asarray(theta, dtype=float)

    def train_loss(self, theta):
        return float(0.5 * self.lam * np.asarray(theta, dtype=float)[0] ** 2)

    def validation_loss(self, theta):
        return float(0.5 * (np.asarray(theta, dtype=float)[0] - self.target) ** 2)

    phi = validation_loss

    def phi_grad(self, theta):
        return np.asarray(theta, dtype=float) - self.target

    def train_hessian(self, theta):
        return np.array([[self.lam]])

    def b_term(self, theta):
        return np.array([self.c])

    def full_rhs(self, theta, u, epsilon):
        return self.drift(theta) + epsilon * u * self.b_term(theta)

    def hessian_spectral_radius(self, theta):
        return abs(self.lam)


@pytest.fixture(autouse=True)
def restore_logging():
    """The CLI reconfigures the root logger; put it back after every test."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def linear_system():
    return LinearSystem


@pytest.fixture(scope="session")
def density():
    return load_builtin_water("density")


@pytest.fixture(scope="session")
def density_problem():
    """Default configuration: density, degree 2, 18/6 split, 1% noise, eps=0.001, T=50, 2000 steps."""
    return prepare_problem(RunConfig())


@pytest.fixture(scope="session")
def density_result(density_problem):
    return solve(density_problem)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    out = tmp_path / "reports"
    monkeypatch.setenv("WEAKFLOW_OUTPUT_DIR", str(out))
    return out

"""
Full controlled dynamics under a frozen control, and the epsilon sweep that
measures how fast the first-order cost prediction degrades.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
from scipy.stats import linregress

from perturb.algorithm import EPSILON_MAX, solve_decomposed
from utils.errors import ConfigurationError, NumericalDivergenceError

logger = logging.getLogger(__name__)

NUMERICAL_FLOOR = 1e-14
SLOPE_ENVELOPE = (1.8, 2.3)


def integrate_full(system, theta_init, grid, control, epsilon):
    """RK4 on theta' = -grad J0(theta) + eps u(t) B(theta), u held per step.

    Returns the node values, shape (n_steps + 1, p); the last row is theta^eps(T).
    """
    control = np.asarray(control, dtype=float)
    n, h = grid.n_steps, grid.dt
    if control.shape != (n + 1,):
        raise ValueError(f"control must have {n + 1} node values, got shape {control.shape}")
    theta = np.asarray(theta_init, dtype=float).copy()
    nodes = np.empty((n + 1, theta.size))
    nodes[0] = theta
    for k in range(n):
        u = control[k]
        k1 = system.full_rhs(theta, u, epsilon)
        k2 = system.full_rhs(theta + 0.5 * h * k1, u, epsilon)
        k3 = system.full_rhs(theta + 0.5 * h * k2, u, epsilon)
        k4 = system.full_rhs(theta + h * k3, u, epsilon)
        theta = theta + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(theta)):
            raise NumericalDivergenceError("full dynamics became non-finite", step=k + 1, time=(k + 1) * h)
        nodes[k + 1] = theta
    return nodes


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    residual: float
    cost: float
    predicted_cost: float
    state_gap: float


@dataclass
class SweepResult:
    rows: List[SweepRow]
    slope: Optional[float]
    intercept: Optional[float]
    status: str
    meta: dict = field(default_factory=dict)

    @property
    def at_floor(self):
        return self.status == "numerical_floor"

    def in_envelope(self, low=SLOPE_ENVELOPE[0], high=SLOPE_ENVELOPE[1]):
        return self.slope is not None and low <= self.slope <= high

    def to_frame(self):
        return pd.DataFrame([row.__dict__ for row in self.rows],
                            columns=["epsilon", "residual", "cost", "predicted_cost", "state_gap"])

    def summary(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "status": self.status,
            "rows": [row.__dict__ for row in self.rows],
            **self.meta,
        }


def check_epsilons(epsilons, epsilon_max=EPSILON_MAX):
    eps = np.asarray(list(epsilons), dtype=float)
    if eps.size < 4:
        raise ConfigurationError("epsilons", f"need at least 4 values, got {eps.size}")
    if np.any(~np.isfinite(eps)) or np.any(eps <= 0) or np.any(eps >= epsilon_max):
        raise ConfigurationError("epsilons", f"all values must lie in (0, {epsilon_max})")
    if eps.max() / eps.min() < 100.0:
        raise ConfigurationError("epsilons", "values must span at least two decades")
    return eps


def fit_rate(epsilons, residuals, floor=NUMERICAL_FLOOR):
    """Least-squares slope of log r against log eps over residuals above the floor."""
    eps = np.asarray(epsilons, dtype=float)
    r = np.asarray(residuals, dtype=float)
    keep = r > floor
    if np.count_nonzero(keep) < 2:
        return None, None, "numerical_floor"
    fit = linregress(np.log(eps[keep]), np.log(r[keep]))
    return float(fit.slope), float(fit.intercept), "ok"


def epsilon_sweep(system, grid, control_set, epsilons, theta_init=None, *, epsilon_max=EPSILON_MAX,
                  tie_tol=1e-12, adjoint_mode="corrected", interpolation="stage", workers=1,
                  decomposed=None):
    """Expansion residual r(eps) = |J^eps[u0] - (Phi(theta0(T)) - eps <p0(T), theta1(T)>)| per eps.

    J^eps[u0] integrates the full dynamics under the frozen zeroth-order
    control. The zeroth/first-order solution does not depend on eps and is
    computed once (or taken from ``decomposed``).
    """
    eps = check_epsilons(epsilons, epsilon_max)
    if decomposed is None:
        decomposed = solve_decomposed(system, grid, control_set, theta_init, tie_tol,
                                      adjoint_mode, interpolation)
    traj = decomposed[0]
    start = traj.theta0[0]
    theta0_T, theta1_T = traj.theta0[-1], traj.theta1[-1]
    phi0 = system.phi(theta0_T)
    first_order = float(traj.p0[-1] @ theta1_T)

    def evaluate(e):
        theta_eps = integrate_full(system, start, grid, traj.u0, e)[-1]
        cost = system.phi(theta_eps)
        predicted = phi0 - e * first_order
        gap = float(np.linalg.norm(theta_eps - theta0_T - e * theta1_T))
        return SweepRow(float(e), abs(cost - predicted), cost, predicted, gap)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate, eps))
    else:
        rows = [evaluate(e) for e in eps]

    slope, intercept, status = fit_rate(eps, [row.residual for row in rows])
    if status == "numerical_floor":
        logger.warning("all expansion residuals are at the numerical floor; slope undefined")
    else:
        logger.info("expansion residual slope %.4f over eps in [%g, %g]", slope, eps.min(), eps.max())
    return SweepResult(rows, slope, intercept, status,
                       meta={"first_order_term": first_order, "phi_theta0_T": phi0,
                             "n_steps": grid.n_steps, "T": grid.T})

"""
Zeroth/first-order decomposition and aggregation.

    1. theta0 forward, p0 backward
    2. u0(t) = argmax_u u <p0(t), B(theta0(t))>
    3. theta1 forward under u0
    4. theta* = theta0(T) + eps theta1(T)
"""

import logging
from dataclasses import dataclass, field
from typing import Any, List, Optional

import numpy as np

from flow.integrators import duality_gap, integrate_p0, integrate_theta0, integrate_theta1
from switching.bang_bang import compute_u0, count_switches, switch_events
from utils.errors import ConfigurationError, NumericalDivergenceError

logger = logging.getLogger(__name__)

EPSILON_MAX = 0.1


def check_epsilon(epsilon, epsilon_max=EPSILON_MAX, allow_zero=True):
    if not np.isfinite(epsilon) or epsilon < 0 or (epsilon == 0 and not allow_zero):
        raise ConfigurationError("epsilon", f"must lie in (0, epsilon_max), got {epsilon}")
    if epsilon >= epsilon_max:
        raise ConfigurationError(
            "epsilon", f"{epsilon} is outside the expansion regime: must be below epsilon_max={epsilon_max}")


@dataclass
class PerturbationResult:
    """Output of the algorithm, in the coordinates the flows ran in.

    ``raw`` holds theta0(T), theta1-mapped theta* and the loss scale in raw
    polynomial coordinates when the run was standardized.
    """

    theta0_T: np.ndarray
    theta1_T: np.ndarray
    theta_star: np.ndarray
    epsilon: float
    J_train_0: float
    J_train_star: float
    J_val_0: float
    J_val_star: float
    first_order_term: float
    delta_train: float
    delta_val: float
    duality_gap: float
    trajectory: Any = None
    switches: List[Any] = field(default_factory=list)
    raw: Optional[dict] = None
    manifest: dict = field(default_factory=dict)

    def summary(self):
        """Full-precision numbers for manifests and result rows."""
        out = {
            "epsilon": self.epsilon,
            "theta0_T": self.theta0_T,
            "theta1_T": self.theta1_T,
            "theta_star": self.theta_star,
            "J_train_0": self.J_train_0,
            "J_train_star": self.J_train_star,
            "J_val_0": self.J_val_0,
            "J_val_star": self.J_val_star,
            "first_order_term": self.first_order_term,
            "delta_train": self.delta_train,
            "delta_val": self.delta_val,
            "duality_gap": self.duality_gap,
        }
        if self.raw is not None:
            out["raw"] = self.raw
        return out


def solve_decomposed(system, grid, control_set, theta_init=None, tie_tol=1e-12,
                     adjoint_mode="corrected", interpolation="stage"):
    """Steps 1-3: a Trajectory with theta0, p0, u0 and theta1 filled, plus the switch records."""
    theta_init = np.zeros(system.p) if theta_init is None else np.asarray(theta_init, dtype=float)
    traj = integrate_theta0(system, theta_init, grid)
    traj = integrate_p0(traj, system, adjoint_mode=adjoint_mode, interpolation=interpolation)
    traj, records = compute_u0(traj, system, control_set, tie_tol=tie_tol)
    traj = integrate_theta1(traj, system, interpolation=interpolation)
    return traj, records


def aggregate(traj, epsilon):
    """Step 4."""
    theta_star = traj.theta0[-1] + epsilon * traj.theta1[-1]
    if not np.all(np.isfinite(theta_star)):
        raise NumericalDivergenceError("aggregated parameter theta* is not finite")
    return theta_star


def run_algorithm(system, grid, control_set, epsilon, theta_init=None, *, epsilon_max=EPSILON_MAX,
                  tie_tol=1e-12, adjoint_mode="corrected", interpolation="stage", standardizer=None):
    """Run the four-step algorithm and evaluate losses, improvements and diagnostics."""
    check_epsilon(epsilon, epsilon_max)
    traj, records = solve_decomposed(system, grid, control_set, theta_init, tie_tol,
                                     adjoint_mode, interpolation)
    theta0_T = np.array(traj.theta0[-1])
    theta1_T = np.array(traj.theta1[-1])
    theta_star = aggregate(traj, epsilon)

    first_order = float(traj.p0[-1] @ theta1_T)
    gap = duality_gap(traj, system)
    if adjoint_mode == "corrected" and control_set.u_min <= 0 <= control_set.u_max and first_order < -1e-10:
        logger.warning("first-order term %.3g is negative: u0 does not improve the expanded cost", first_order)

    result = PerturbationResult(
        theta0_T=theta0_T,
        theta1_T=theta1_T,
        theta_star=theta_star,
        epsilon=float(epsilon),
        J_train_0=system.train_loss(theta0_T),
        J_train_star=system.train_loss(theta_star),
        J_val_0=system.phi(theta0_T),
        J_val_star=system.phi(theta_star),
        first_order_term=first_order,
        delta_train=0.0,
        delta_val=0.0,
        duality_gap=gap,
        trajectory=traj,
        switches=records,
    )
    result.delta_train, result.delta_val = improvements(result, system)

    if standardizer is not None:
        result.raw = {
            "theta0_T": standardizer.params_to_raw(theta0_T),
            "theta_star": standardizer.params_to_raw(theta_star),
            "loss_scale": standardizer.std_y ** 2,
        }

    result.manifest = {
        "results": result.summary(),
        "diagnostics": {
            "terminal_grad_norm": traj.meta.get("terminal_grad_norm"),
            "tie_fraction": traj.meta.get("tie_fraction"),
            "switch_count": count_switches(traj.u0),
            "duality_gap": gap,
            "expansion_residual": cost_expansion(result, system)[1],
        },
        "decisions": {
            "adjoint_mode": adjoint_mode,
            "interpolation": interpolation,
            "tie_rule": f"|s| <= {tie_tol:g} * |p0| |B| -> projection of 0 onto U",
            "control_hold": "left node value, piecewise constant per step",
        },
        "switches": switch_events(records),
    }
    logger.info("theta* = %s (eps=%g, first-order term %.6g)", theta_star, epsilon, first_order)
    return result


def cost_expansion(result, system):
    """(J_pred, r): first-order prediction of Phi(theta*) and the residual |Phi(theta*) - J_pred|."""
    J_pred = system.phi(result.theta0_T) - result.epsilon * result.first_order_term
    return J_pred, abs(system.phi(result.theta_star) - J_pred)


def improvements(result, system, form="summation"):
    """(delta_train, delta_val): loss at theta* minus loss at theta0(T), on Z1 and Z2.

    ``summation`` averages the per-sample loss differences; ``direct``
    subtracts the two mean losses.
    """
    out = []
    for surface in (system.train, system.validate):
        if form == "direct":
            out.append(surface.loss(result.theta_star) - surface.loss(result.theta0_T))
        elif form == "summation":
            diff = surface.residual_terms(result.theta_star) - surface.residual_terms(result.theta0_T)
            out.append(float(np.sum(diff) / surface.m))
        else:
            raise ValueError(f"form must be 'summation' or 'direct', got {form!r}")
    return tuple(out)

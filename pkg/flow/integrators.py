"""
Fixed-step classical RK4 for the decomposed systems:

    theta0' = -grad J0(theta0),                      theta0(0) = theta_init
    p0'     =  hess J0(theta0) p0,                   p0(T)     = -grad Phi(theta0(T))
    theta1' = -hess J0(theta0) theta1 + u0 B(theta0), theta1(0) = 0

The adjoint runs backward (forward in s = T - t). The control is held at
its left-node value over each step.

Evaluation points of theta0 inside a step:
  ``stage``  theta1 uses the RK4 stage states recorded by integrate_theta0,
             which makes it the exact epsilon-derivative of the discrete
             full flow; the adjoint uses cubic Hermite midpoints.
  ``linear`` linear interpolation between nodes for both.
"""

import logging

import numpy as np

from flow.trajectory import Trajectory
from utils.errors import NumericalDivergenceError

logger = logging.getLogger(__name__)

ADJOINT_MODES = ("corrected", "paper_literal")
INTERPOLATIONS = ("stage", "linear")

_DESCENT_TOL = 1e-12


def _check_finite(state, what, step, grid):
    if not np.all(np.isfinite(state)):
        raise NumericalDivergenceError(f"{what} became non-finite", step=step, time=step * grid.dt)


def _stability_hint(system, theta, grid):
    try:
        lam = system.hessian_spectral_radius(theta)
    except (AttributeError, np.linalg.LinAlgError):
        return ""
    return (f"; h*lambda_max = {grid.dt * lam:.3g} (RK4 is stable below ~2.78), "
            f"try n_steps >= {int(np.ceil(grid.T * lam / 2.5))}")


def integrate_theta0(system, theta_init, grid):
    """Zeroth-order gradient flow. Returns a Trajectory with theta0 and its stage states."""
    n, h = grid.n_steps, grid.dt
    theta = np.asarray(theta_init, dtype=float).copy()
    _check_finite(theta, "initial parameter", 0, grid)
    nodes = np.empty((n + 1, theta.size))
    stages = np.empty((n, 4, theta.size))
    nodes[0] = theta
    loss_prev = system.train_loss(theta)

    for k in range(n):
        y1 = theta
        k1 = system.drift(y1)
        y2 = theta + 0.5 * h * k1
        k2 = system.drift(y2)
        y3 = theta + 0.5 * h * k2
        k3 = system.drift(y3)
        y4 = theta + h * k3
        k4 = system.drift(y4)
        theta = theta + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_finite(theta, "theta0", k + 1, grid)

        loss_next = system.train_loss(theta)
        if loss_next > loss_prev + _DESCENT_TOL * max(1.0, abs(loss_prev)):
            raise NumericalDivergenceError(
                f"training loss increased from {loss_prev:.17g} to {loss_next:.17g}; "
                f"step too large for the gradient flow{_stability_hint(system, y1, grid)}",
                step=k + 1, time=(k + 1) * h)
        loss_prev = loss_next

        stages[k] = (y1, y2, y3, y4)
        nodes[k + 1] = theta

    grad_norm = float(np.linalg.norm(system.drift(theta)))
    if grad_norm > 1e-6:
        logger.warning("gradient flow not converged at T=%g: |grad J0| = %.3g", grid.T, grad_norm)
    logger.debug("theta0(T) = %s, |grad J0(theta0(T))| = %.3g", theta, grad_norm)
    return Trajectory(grid=grid, theta0=nodes, theta0_stages=stages,
                      meta={"terminal_grad_norm": grad_norm})


def midpoint(traj, system, k, interpolation="stage"):
    """theta0 at t_k + h/2."""
    a, b = traj.theta0[k], traj.theta0[k + 1]
    if interpolation == "linear":
        return 0.5 * (a + b)
    h = traj.grid.dt
    return 0.5 * (a + b) + (h / 8.0) * (system.drift(a) - system.drift(b))


def integrate_p0(traj, system, adjoint_mode="corrected", interpolation="stage"):
    """Zeroth-order adjoint, integrated from t = T back to t = 0."""
    if adjoint_mode not in ADJOINT_MODES:
        raise ValueError(f"adjoint_mode must be one of {ADJOINT_MODES}, got {adjoint_mode!r}")
    if interpolation not in INTERPOLATIONS:
        raise ValueError(f"interpolation must be one of {INTERPOLATIONS}, got {interpolation!r}")
    if adjoint_mode == "paper_literal":
        logger.warning("paper_literal adjoint: p0' = hess J0 * 1, not the linearization of the state equation")

    grid = traj.grid
    n, h = grid.n_steps, grid.dt
    ones = np.ones(traj.p)

    def rhs(theta, p):
        # d/ds p(T - s) = -p'(T - s)
        if adjoint_mode == "corrected":
            return -(system.train_hessian(theta) @ p)
        return -(system.train_hessian(theta) @ ones)

    p = -np.asarray(system.phi_grad(traj.theta0[n]), dtype=float)
    out = np.empty_like(traj.theta0)
    out[n] = p
    for k in range(n - 1, -1, -1):
        right, left = traj.theta0[k + 1], traj.theta0[k]
        mid = midpoint(traj, system, k, interpolation)
        a1 = rhs(right, p)
        a2 = rhs(mid, p + 0.5 * h * a1)
        a3 = rhs(mid, p + 0.5 * h * a2)
        a4 = rhs(left, p + h * a3)
        p = p + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        _check_finite(p, "p0", k, grid)
        out[k] = p

    return traj.filled(p0=out, meta={"adjoint_mode": adjoint_mode, "interpolation": interpolation})


def _step_states(traj, system, k, interpolation):
    if interpolation == "stage":
        if traj.theta0_stages is None:
            raise ValueError("stage interpolation needs the RK4 stage states from integrate_theta0")
        return traj.theta0_stages[k]
    mid = midpoint(traj, system, k, "linear")
    return traj.theta0[k], mid, mid, traj.theta0[k + 1]


def integrate_theta1(traj, system, control=None, interpolation="stage"):
    """First-order correction driven by the per-node control (traj.u0 unless ``control`` is given)."""
    u = traj.u0 if control is None else np.asarray(control, dtype=float)
    if u is None:
        raise ValueError("integrate_theta1 needs a control: compute u0 first or pass control=")
    grid = traj.grid
    if u.shape != (grid.n_steps + 1,):
        raise ValueError(f"control must have {grid.n_steps + 1} node values, got shape {u.shape}")

    n, h = grid.n_steps, grid.dt
    delta = np.zeros(traj.p)
    out = np.empty_like(traj.theta0)
    out[0] = delta
    for k in range(n):
        y1, y2, y3, y4 = _step_states(traj, system, k, interpolation)
        uk = u[k]
        k1 = -(system.train_hessian(y1) @ delta) + uk * system.b_term(y1)
        k2 = -(system.train_hessian(y2) @ (delta + 0.5 * h * k1)) + uk * system.b_term(y2)
        k3 = -(system.train_hessian(y3) @ (delta + 0.5 * h * k2)) + uk * system.b_term(y3)
        k4 = -(system.train_hessian(y4) @ (delta + h * k3)) + uk * system.b_term(y4)
        delta = delta + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_finite(delta, "theta1", k + 1, grid)
        out[k + 1] = delta

    if control is not None:
        return traj.filled(theta1=out, u0=u)
    return traj.filled(theta1=out)


def duality_gap(traj, system):
    """<p0(T), theta1(T)> minus the quadrature of the integral of u0 <p0, B(theta0)> dt.

    The control is held at u0(t_k) on each step and the switching function
    is integrated by the trapezoid rule, so the gap is O(dt^2) when the
    adjoint is the true linearization.
    """
    s = traj.switching
    if s is None:
        s = np.einsum("kj,kj->k", traj.p0, np.array([system.b_term(th) for th in traj.theta0]))
    h = traj.grid.dt
    integral = float(np.sum(traj.u0[:-1] * 0.5 * (s[:-1] + s[1:])) * h)
    return float(traj.p0[-1] @ traj.theta1[-1]) - integral

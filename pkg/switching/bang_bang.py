"""
Hamiltonian and pointwise maximization for the zeroth-order control.

H(theta, p, u) = <p, -grad J0(theta) + eps u B(theta)> is linear in u, so its
maximum over an interval sits at an endpoint chosen by the sign of the
switching value s = <p, B(theta)>. Near-zero s is a tie; the tie value is the
admissible control closest to 0, which applies no dithering force.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from utils.errors import DimensionError

logger = logging.getLogger(__name__)

TIE_WARN_FRACTION = 0.01


@dataclass(frozen=True)
class ControlSet:
    """Admissible controls U = [u_min, u_max]."""

    u_min: float = -1.0
    u_max: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.u_min) and np.isfinite(self.u_max)):
            raise ValueError("control bounds must be finite")
        if self.u_min > self.u_max:
            raise ValueError(f"u_min ({self.u_min}) must not exceed u_max ({self.u_max})")

    def project(self, value):
        return float(min(max(value, self.u_min), self.u_max))

    def contains(self, value):
        return self.u_min <= value <= self.u_max

    def sample(self, rng, size):
        return rng.uniform(self.u_min, self.u_max, size=size)


class SwitchRecord(NamedTuple):
    node: int
    time: float
    s: float
    u: float
    tie: bool


def hamiltonian(system, theta, p, u, epsilon):
    """H^eps(theta, p, u) for the controlled gradient system."""
    p = np.asarray(p, dtype=float)
    if p.shape != (system.p,):
        raise DimensionError(f"costate has shape {p.shape}, system expects ({system.p},)")
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    return float(p @ (system.drift(theta) + epsilon * u * system.b_term(theta)))


def argmax_u(p, b, control_set, tie_tol=1e-12):
    """Maximize u * <p, b> over the control set. Returns (u, s).

    |s| <= tie_tol * |p| |b| is a tie and returns the projection of 0.
    """
    p = np.asarray(p, dtype=float)
    b = np.asarray(b, dtype=float)
    if p.shape != b.shape:
        raise DimensionError(f"costate shape {p.shape} does not match B shape {b.shape}")
    u, s, _ = _decide(p, b, control_set, tie_tol)
    return u, s


def _decide(p, b, control_set, tie_tol):
    s = float(p @ b)
    scale = float(np.linalg.norm(p) * np.linalg.norm(b))
    if scale == 0.0 or abs(s) <= tie_tol * scale:
        return control_set.project(0.0), s, True
    return (control_set.u_max if s > 0 else control_set.u_min), s, False


def compute_u0(traj, system, control_set, tie_tol=1e-12):
    """Per-node argmax of the Hamiltonian along (theta0, p0).

    Returns the trajectory with u0 and the switching function filled, and
    the list of SwitchRecord (one per node).
    """
    if traj.p0 is None:
        raise ValueError("compute_u0 needs p0: run integrate_p0 first")
    t = traj.t
    u0 = np.empty(t.size)
    s_all = np.empty(t.size)
    records = []
    ties = 0
    for k in range(t.size):
        b = system.b_term(traj.theta0[k])
        u, s, tie = _decide(traj.p0[k], b, control_set, tie_tol)
        ties += int(tie)
        u0[k], s_all[k] = u, s
        records.append(SwitchRecord(k, float(t[k]), s, u, bool(tie)))

    fraction = ties / t.size
    if fraction > TIE_WARN_FRACTION:
        logger.warning("tie rule fired on %.1f%% of nodes (%d of %d)", 100 * fraction, ties, t.size)
    logger.debug("u0: %d switches, %d ties", count_switches(u0), ties)
    return traj.filled(u0=u0, switching=s_all, meta={"tie_fraction": fraction}), records


def count_switches(u0):
    u = np.asarray(u0)
    return int(np.count_nonzero(u[1:] != u[:-1]))


def switch_events(records):
    """Records at which the control value changes (plus the first node), for the manifest."""
    events = []
    previous = None
    for rec in records:
        if previous is None or rec.u != previous:
            events.append({"node": rec.node, "time": rec.time, "s": rec.s, "u": rec.u})
        previous = rec.u
    return events

from flow.trajectory import TimeGrid, Trajectory
from flow.integrators import (integrate_theta0, integrate_p0, integrate_theta1, duality_gap,
                              ADJOINT_MODES, INTERPOLATIONS)

__all__ = [
    "TimeGrid", "Trajectory", "integrate_theta0", "integrate_p0", "integrate_theta1",
    "duality_gap", "ADJOINT_MODES", "INTERPOLATIONS",
]

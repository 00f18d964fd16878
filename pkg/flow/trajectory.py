from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import pandas as pd


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k T / n_steps, k = 0..n_steps."""

    T: float
    n_steps: int

    def __post_init__(self):
        if not np.isfinite(self.T) or self.T <= 0:
            raise ValueError(f"final time T must be positive, got {self.T}")
        if int(self.n_steps) < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        object.__setattr__(self, "n_steps", int(self.n_steps))
        object.__setattr__(self, "T", float(self.T))

    @property
    def dt(self):
        return self.T / self.n_steps

    @property
    def nodes(self):
        return np.arange(self.n_steps + 1) * self.T / self.n_steps

    def refined(self, factor=2):
        return TimeGrid(self.T, self.n_steps * factor)


def _frozen(arr):
    if arr is None:
        return None
    arr = np.asarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Trajectory:
    """
    Zeroth- and first-order solutions sampled on one grid.

    theta0, p0, theta1 have shape (n_steps + 1, p); u0 and switching have
    shape (n_steps + 1,). theta0_stages holds the four RK4 stage states of
    every forward step, shape (n_steps, 4, p). Filling a field returns a new
    Trajectory; an existing one is never mutated.
    """

    grid: TimeGrid
    theta0: np.ndarray
    theta0_stages: Optional[np.ndarray] = None
    p0: Optional[np.ndarray] = None
    u0: Optional[np.ndarray] = None
    switching: Optional[np.ndarray] = None
    theta1: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("theta0", "theta0_stages", "p0", "u0", "switching", "theta1"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def p(self):
        return self.theta0.shape[1]

    @property
    def t(self):
        return self.grid.nodes

    def filled(self, **fields):
        meta = dict(self.meta)
        meta.update(fields.pop("meta", {}))
        return replace(self, meta=meta, **fields)

    def to_frame(self):
        """One row per node: t, theta0_*, p0_*, u0, theta1_* (unfilled blocks are omitted)."""
        columns = {"t": self.t}
        for j in range(self.p):
            columns[f"theta0_{j + 1}"] = self.theta0[:, j]
        if self.p0 is not None:
            for j in range(self.p):
                columns[f"p0_{j + 1}"] = self.p0[:, j]
        if self.u0 is not None:
            columns["u0"] = self.u0
        if self.theta1 is not None:
            for j in range(self.p):
                columns[f"theta1_{j + 1}"] = self.theta1[:, j]
        return pd.DataFrame(columns)

    def export_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        return path

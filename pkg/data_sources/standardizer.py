"""
Z-scoring of (x, y) data and the matching map for polynomial coefficients.

A degree-d polynomial a fitted on standardized data,

    (y - mean_y) / std_y = sum_j a_j ((x - mean_x) / std_x)^j,

is the raw-coordinate polynomial c = M a + mean_y e_0 with the upper
triangular M[k, j] = std_y * C(j, k) * (-mean_x)^(j - k) / std_x^j.
"""

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import comb
from sklearn.preprocessing import StandardScaler

from utils.errors import DataError


class Standardizer:
    """Affine maps between raw and standardized data and parameters."""

    def __init__(self, x_scaler, y_scaler):
        self.x_scaler = x_scaler
        self.y_scaler = y_scaler

    @property
    def mean_x(self):
        return float(self.x_scaler.mean_[0])

    @property
    def std_x(self):
        return float(self.x_scaler.scale_[0])

    @property
    def mean_y(self):
        return float(self.y_scaler.mean_[0])

    @property
    def std_y(self):
        return float(self.y_scaler.scale_[0])

    def transform(self, data):
        x = self.x_scaler.transform(data.x.reshape(-1, 1)).ravel()
        y = self.y_scaler.transform(data.y.reshape(-1, 1)).ravel()
        return data.with_values(x=x, y=y)

    def inverse(self, data):
        x = self.x_scaler.inverse_transform(data.x.reshape(-1, 1)).ravel()
        y = self.y_scaler.inverse_transform(data.y.reshape(-1, 1)).ravel()
        return data.with_values(x=x, y=y)

    def transform_x(self, x):
        return self.x_scaler.transform(np.asarray(x, dtype=float).reshape(-1, 1)).ravel()

    def coefficient_map(self, degree):
        p = degree + 1
        M = np.zeros((p, p))
        for j in range(p):
            for k in range(j + 1):
                M[k, j] = self.std_y * comb(j, k, exact=True) * (-self.mean_x) ** (j - k) / self.std_x ** j
        return M

    def params_to_raw(self, a):
        a = np.asarray(a, dtype=float)
        c = self.coefficient_map(a.size - 1) @ a
        c[0] += self.mean_y
        return c

    def params_from_raw(self, c):
        c = np.asarray(c, dtype=float).copy()
        c[0] -= self.mean_y
        return solve_triangular(self.coefficient_map(c.size - 1), c, lower=False)

    def predict_raw(self, a, x_raw):
        """Raw-unit predictions of the standardized-coordinate polynomial a at raw inputs."""
        xs = self.transform_x(x_raw)
        ys = np.vander(xs, len(a), increasing=True) @ np.asarray(a, dtype=float)
        return self.y_scaler.inverse_transform(ys.reshape(-1, 1)).ravel()

    def to_dict(self):
        return {"mean_x": self.mean_x, "std_x": self.std_x, "mean_y": self.mean_y, "std_y": self.std_y}


def fit_standardizer(data):
    """Fit z-scores of x and y on a dataset with at least two samples and non-constant x and y."""
    if data.size < 2:
        raise DataError("standardization needs at least 2 samples")
    if np.ptp(data.x) == 0:
        raise DataError("cannot standardize: x has zero variance")
    if np.ptp(data.y) == 0:
        raise DataError("cannot standardize: y has zero variance")
    x_scaler = StandardScaler().fit(data.x.reshape(-1, 1))
    y_scaler = StandardScaler().fit(data.y.reshape(-1, 1))
    return Standardizer(x_scaler, y_scaler)

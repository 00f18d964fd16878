"""
Polynomial hypothesis class, pointwise loss and the derivative quantities
the flows need.

The model is linear in its parameters, h_theta(x) = sum_j theta_j x^j, so
with X the Vandermonde design matrix

    J0(theta)        = (1/m) sum_i l(X theta, y)_i
    grad J0(theta)   = (1/m) X^T l'(X theta, y)
    hess J0(theta)   = (1/m) X^T diag(l''(X theta, y)) X

For the squared loss l'' = 2 is constant, so the Hessian does not depend on
theta and is cached per surface.
"""

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from utils.errors import DimensionError, RankDeficientError


class SquaredLoss:
    """l(yhat, y) = (yhat - y)^2."""

    name = "squared"
    constant_curvature = True

    def value(self, yhat, y):
        r = yhat - y
        return r * r

    def first(self, yhat, y):
        return 2.0 * (yhat - y)

    def second(self, yhat, y):
        return np.full_like(yhat, 2.0)


class PolynomialModel:
    """h_theta(x) = theta_1 + theta_2 x + ... + theta_{d+1} x^d."""

    def __init__(self, degree, loss=None):
        if int(degree) < 0:
            raise ValueError(f"degree must be non-negative, got {degree}")
        self.degree = int(degree)
        self.loss = loss or SquaredLoss()

    @property
    def p(self):
        return self.degree + 1

    def design_matrix(self, x):
        return np.vander(np.asarray(x, dtype=float), self.p, increasing=True)

    def check(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.p,):
            raise DimensionError(f"parameter vector has shape {theta.shape}, model expects ({self.p},)")
        return theta

    def predict(self, theta, x):
        return self.design_matrix(x) @ self.check(theta)

    def surface(self, data):
        return LossSurface(self, data)

    def __repr__(self):
        return f"PolynomialModel(degree={self.degree}, loss={self.loss.name})"


class LossSurface:
    """Mean loss of a model over one dataset, with analytic derivatives."""

    def __init__(self, model, data):
        self.model = model
        self.data = data
        self.X = model.design_matrix(data.x)
        self.y = data.y
        self.m = data.size
        self._hessian = None

    def residual_terms(self, theta):
        return self.model.loss.value(self.X @ self.model.check(theta), self.y)

    def loss(self, theta):
        return float(np.mean(self.residual_terms(theta)))

    def grad(self, theta):
        yhat = self.X @ self.model.check(theta)
        return self.X.T @ self.model.loss.first(yhat, self.y) / self.m

    def hessian(self, theta):
        theta = self.model.check(theta)
        if self.model.loss.constant_curvature and self._hessian is not None:
            return self._hessian
        w = self.model.loss.second(self.X @ theta, self.y)
        H = (self.X.T * w) @ self.X / self.m
        H = 0.5 * (H + H.T)
        if self.model.loss.constant_curvature:
            H.setflags(write=False)
            self._hessian = H
        return H


def loss(theta, data, model):
    """Mean loss J0(theta, data)."""
    return model.surface(data).loss(theta)


def grad(theta, data, model):
    return model.surface(data).grad(theta)


def hessian(theta, data, model):
    return model.surface(data).hessian(theta)


def b_term(theta, dithered, model):
    """B(theta): componentwise square of the gradient over the dithered data."""
    g = grad(theta, dithered, model)
    return g * g


def b_jacobian(theta, dithered, model):
    """dB_i/dtheta_j = 2 g_i H~_ij with g, H~ the gradient and Hessian over the dithered data."""
    surface = model.surface(dithered)
    return 2.0 * surface.grad(theta)[:, None] * surface.hessian(theta)


def phi(theta, validate, model):
    """Terminal cost: mean loss over the validation set."""
    return loss(theta, validate, model)


def phi_grad(theta, validate, model):
    return grad(theta, validate, model)


def least_squares_oracle(data, degree):
    """Closed-form mean-squared-error minimizer via a Cholesky solve of the normal equations."""
    model = PolynomialModel(degree)
    X = model.design_matrix(data.x)
    # column equilibration keeps raw-temperature Vandermonde columns (1, T, T^2) factorizable
    norms = np.linalg.norm(X, axis=0)
    norms[norms == 0] = 1.0
    Xs = X / norms
    if np.linalg.matrix_rank(Xs) < model.p:
        raise RankDeficientError(
            f"design matrix for degree {degree} on {data.size} samples "
            f"({np.unique(data.x).size} distinct x) is rank deficient")
    try:
        factor = cho_factor(Xs.T @ Xs)
    except LinAlgError as e:
        raise RankDeficientError(f"normal equations are not positive definite: {e}") from None
    return cho_solve(factor, Xs.T @ data.y) / norms

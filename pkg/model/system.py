"""The weakly-controlled gradient system assembled from the three datasets."""

import numpy as np

from model.polynomial import LossSurface


class ControlledGradientSystem:
    """
    theta' = -grad J0(theta, Z1) + eps * u(t) * B(theta, Z1~),  Phi(theta) = J0(theta, Z2).

    Everything the flows, the control law and the aggregation step evaluate
    goes through this object, so alternative systems (closed-form test
    problems, other losses) only need to provide the same methods.
    """

    def __init__(self, model, train, validate, dithered):
        self.model = model
        self.train = LossSurface(model, train)
        self.validate = LossSurface(model, validate)
        self.dithered = LossSurface(model, dithered)

    @property
    def p(self):
        return self.model.p

    def drift(self, theta):
        """Unforced gradient-flow velocity -grad J0(theta, Z1)."""
        return -self.train.grad(theta)

    def train_loss(self, theta):
        return self.train.loss(theta)

    def validation_loss(self, theta):
        return self.validate.loss(theta)

    def train_hessian(self, theta):
        return self.train.hessian(theta)

    def b_term(self, theta):
        g = self.dithered.grad(theta)
        return g * g

    def b_jacobian(self, theta):
        return 2.0 * self.dithered.grad(theta)[:, None] * self.dithered.hessian(theta)

    def phi(self, theta):
        return self.validate.loss(theta)

    def phi_grad(self, theta):
        return self.validate.grad(theta)

    def phi_hessian(self, theta):
        return self.validate.hessian(theta)

    def full_rhs(self, theta, u, epsilon):
        """Right-hand side of the full controlled dynamics."""
        return self.drift(theta) + epsilon * u * self.b_term(theta)

    def hessian_spectral_radius(self, theta):
        return float(np.max(np.abs(np.linalg.eigvalsh(self.train_hessian(theta)))))

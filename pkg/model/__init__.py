from model.polynomial import (PolynomialModel, SquaredLoss, LossSurface, loss, grad, hessian,
                              b_term, b_jacobian, phi, phi_grad, least_squares_oracle)
from model.system import ControlledGradientSystem

__all__ = [
    "PolynomialModel", "SquaredLoss", "LossSurface", "loss", "grad", "hessian", "b_term",
    "b_jacobian", "phi", "phi_grad", "least_squares_oracle", "ControlledGradientSystem",
]

"""
Config-driven experiment pipeline: load -> split -> dither -> standardize -> system -> run.

Flows run in working coordinates (z-scored when ``standardize`` is on);
parameters and residual statistics are reported in raw polynomial units.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from data_sources.csv_loader import load_csv
from data_sources.sampling import NoiseSpec, SplitSpec, dither, split, split_metadata
from data_sources.standardizer import fit_standardizer
from data_sources.water_table import load_builtin_water
from flow.trajectory import TimeGrid
from model.polynomial import PolynomialModel
from model.system import ControlledGradientSystem
from perturb.algorithm import cost_expansion, run_algorithm
from switching.bang_bang import ControlSet
from utils.helpers import get_library_versions

logger = logging.getLogger(__name__)


@dataclass
class Problem:
    """Everything a run needs, built once from a RunConfig."""

    config: object
    original: object
    train: object
    validate: object
    dithered: object
    standardizer: Optional[object]
    system: ControlledGradientSystem
    grid: TimeGrid
    control_set: ControlSet
    theta_init: np.ndarray
    sigma: float
    provenance: dict = field(default_factory=dict)

    @property
    def model(self):
        return self.system.model

    def to_raw(self, theta):
        """Working-coordinate parameters -> raw polynomial coefficients."""
        if self.standardizer is None:
            return np.asarray(theta, dtype=float)
        return self.standardizer.params_to_raw(theta)

    def predict_raw(self, theta, x_raw):
        if self.standardizer is None:
            return self.model.predict(theta, x_raw)
        return self.standardizer.predict_raw(theta, x_raw)

    @property
    def loss_scale(self):
        """Factor turning working-coordinate losses into raw units."""
        return 1.0 if self.standardizer is None else self.standardizer.std_y ** 2


def load_original(config):
    if config.csv_path:
        return load_csv(config.csv_path, config.x_column, config.y_column)
    return load_builtin_water(config.property)


def prepare_problem(config):
    """Validate the config and build the datasets, the standardizer and the controlled system."""
    config.validate()
    original = load_original(config)
    split_spec = SplitSpec(config.m1, config.m2, config.split_mode, int(config.split_seed))
    noise = NoiseSpec(float(config.noise_level), int(config.noise_seed), config.noise_scale)

    train, validate = split(original, split_spec)
    dithered = dither(train, noise)
    sigma = noise.sigma(train.y) if noise.level > 0 else 0.0

    model = PolynomialModel(config.degree)
    standardizer = None
    working = (train, validate, dithered)
    if config.standardize:
        standardizer = fit_standardizer(original)
        working = tuple(standardizer.transform(d) for d in working)
    system = ControlledGradientSystem(model, *working)

    if config.theta0 is None:
        theta_init = np.zeros(model.p)
    else:
        theta_init = np.asarray(config.theta0, dtype=float)
        if standardizer is not None:
            theta_init = standardizer.params_from_raw(theta_init)

    provenance = split_metadata(split_spec, noise, train, validate, sigma)
    if standardizer is not None:
        provenance["standardizer"] = standardizer.to_dict()
    logger.info("%s: m0=%d, train=%d, validate=%d, sigma=%.6g", original.name, original.size,
                train.size, validate.size, sigma)
    return Problem(
        config=config,
        original=original,
        train=train,
        validate=validate,
        dithered=dithered,
        standardizer=standardizer,
        system=system,
        grid=TimeGrid(config.T, config.n_steps),
        control_set=ControlSet(config.u_min, config.u_max),
        theta_init=theta_init,
        sigma=sigma,
        provenance=provenance,
    )


def residual_stats(problem, theta):
    """Residuals y_i - h_theta(x_i) over the whole original dataset, and their sample std."""
    residuals = problem.original.y - problem.predict_raw(theta, problem.original.x)
    std = float(np.std(residuals, ddof=1)) if residuals.size > 1 else 0.0
    return residuals, std


def solve(problem):
    """Run the algorithm on a prepared problem."""
    config = problem.config
    return run_algorithm(
        problem.system, problem.grid, problem.control_set, config.epsilon, problem.theta_init,
        epsilon_max=config.epsilon_max, tie_tol=config.tie_tol, adjoint_mode=config.adjoint_mode,
        interpolation=config.interpolation, standardizer=problem.standardizer,
    )


def run_experiment(config):
    """prepare_problem + solve. Returns (problem, result)."""
    problem = prepare_problem(config)
    return problem, solve(problem)


def report_row(problem, result):
    """One result row: raw parameters, residual std and the theta0(T) / theta* comparison."""
    config = problem.config
    _, std_star = residual_stats(problem, result.theta_star)
    _, std_zero = residual_stats(problem, result.theta0_T)
    _, r = cost_expansion(result, problem.system)
    scale = problem.loss_scale
    row = {"model": problem.original.name, "noise_level": float(config.noise_level),
           "epsilon": result.epsilon}
    for j, value in enumerate(problem.to_raw(result.theta_star), start=1):
        row[f"theta_star_{j}"] = float(value)
    row["residual_std"] = std_star
    for j, value in enumerate(problem.to_raw(result.theta0_T), start=1):
        row[f"theta0_T_{j}"] = float(value)
    row["residual_std_theta0_T"] = std_zero
    row.update({
        "J_train_0": result.J_train_0 * scale,
        "J_train_star": result.J_train_star * scale,
        "J_val_0": result.J_val_0 * scale,
        "J_val_star": result.J_val_star * scale,
        "delta_train": result.delta_train * scale,
        "delta_val": result.delta_val * scale,
        "first_order_term": result.first_order_term,
        "expansion_residual": r,
        "duality_gap": result.duality_gap,
        "split_seed": int(config.split_seed),
        "noise_seed": int(config.noise_seed),
        "config_hash": config.config_hash(),
    })
    return row


def build_manifest(problem, result=None, extra=None):
    """Run manifest: config, hash, seeds, provenance, decisions, versions and results.

    Contains no timestamps, so the same config always produces the same bytes.
    """
    config = problem.config
    manifest = {
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
        "seeds": config.seeds(),
        "split": problem.provenance["split"],
        "dither": problem.provenance["dither"],
        "decisions": {
            "standardize": bool(config.standardize),
            "standardizer_fit_on": "original" if config.standardize else None,
            "theta0_coordinates": "raw polynomial coefficients",
            "noise_scale": config.noise_scale,
        },
        "versions": get_library_versions(),
    }
    if "standardizer" in problem.provenance:
        manifest["standardizer"] = problem.provenance["standardizer"]
    if result is not None:
        manifest["decisions"].update(result.manifest["decisions"])
        manifest["diagnostics"] = result.manifest["diagnostics"]
        manifest["switches"] = result.manifest["switches"]
        manifest["results"] = dict(result.manifest["results"])
        manifest["results"]["report_row"] = report_row(problem, result)
        manifest["results"]["loss_scale"] = problem.loss_scale
    if extra:
        manifest.update(extra)
    return manifest


def loss_curve_frame(problem, result):
    """Per-node train/validation loss along theta0(t), then terminal markers for theta0(T) and theta*.

    Losses are in raw units. Columns: t, level, kind, train_loss, val_loss.
    """
    traj = result.trajectory
    system = problem.system
    scale = problem.loss_scale
    level = float(problem.config.noise_level)
    train = np.array([system.train_loss(th) for th in traj.theta0]) * scale
    val = np.array([system.validation_loss(th) for th in traj.theta0]) * scale
    frame = pd.DataFrame({"t": traj.t, "level": level, "kind": "flow",
                          "train_loss": train, "val_loss": val})
    markers = pd.DataFrame({
        "t": [problem.grid.T, problem.grid.T],
        "level": [level, level],
        "kind": ["theta0_T", "theta_star"],
        "train_loss": [result.J_train_0 * scale, result.J_train_star * scale],
        "val_loss": [result.J_val_0 * scale, result.J_val_star * scale],
    })
    return pd.concat([frame, markers], ignore_index=True)

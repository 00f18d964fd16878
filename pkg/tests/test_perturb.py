from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from flow.integrators import integrate_theta1
from flow.trajectory import TimeGrid
from model.polynomial import least_squares_oracle
from perturb.algorithm import aggregate, check_epsilon, cost_expansion, improvements, run_algorithm
from perturb.experiment import prepare_problem, run_experiment, solve
from perturb.sweep import NUMERICAL_FLOOR, check_epsilons, epsilon_sweep, fit_rate, integrate_full
from switching.bang_bang import ControlSet
from utils.config import RunConfig
from utils.errors import ConfigurationError
from utils.helpers import canonical_json

SWEEP_EPSILONS = (1e-4, 3e-4, 1e-3, 3e-3, 1e-2)


def with_epsilon(result, epsilon):
    """The same decomposed solution aggregated at another epsilon."""
    return replace(result, epsilon=epsilon, theta_star=aggregate(result.trajectory, epsilon))


class TestAggregation:
    """Test cases for theta* = theta0(T) + eps theta1(T)."""

    def test_identity(self, density_result):
        expected = density_result.theta0_T + density_result.epsilon * density_result.theta1_T
        assert_array_equal(density_result.theta_star, expected)

    def test_zero_epsilon(self, density_problem):
        result = run_algorithm(density_problem.system, TimeGrid(20.0, 400), density_problem.control_set, 0.0)
        assert_array_equal(result.theta_star, result.theta0_T)
        assert cost_expansion(result, density_problem.system)[1] == 0.0

    @pytest.mark.parametrize("epsilon", [0.1, 0.5, -0.001, float("nan")])
    def test_out_of_regime_refused(self, epsilon):
        with pytest.raises(ConfigurationError) as info:
            check_epsilon(epsilon, 0.1)
        assert info.value.field == "epsilon"

    def test_refusal_names_bound(self):
        with pytest.raises(ConfigurationError, match="epsilon_max"):
            check_epsilon(0.5)

    def test_zero_control_set(self, density_problem):
        system = density_problem.system
        result = run_algorithm(system, TimeGrid(20.0, 400), ControlSet(0.0, 0.0), 0.01)
        assert np.all(result.trajectory.u0 == 0.0)
        assert_array_equal(result.theta_star, result.theta0_T)
        assert improvements(result, system) == (0.0, 0.0)


class TestImprovements:
    """Test cases for the loss differences at theta*."""

    def test_forms_agree(self, density_problem, density_result):
        system = density_problem.system
        summed = improvements(density_result, system, form="summation")
        direct = improvements(density_result, system, form="direct")
        assert_allclose(summed, direct, rtol=0, atol=1e-12)
        assert (density_result.delta_train, density_result.delta_val) == summed

    def test_unknown_form(self, density_problem, density_result):
        with pytest.raises(ValueError):
            improvements(density_result, density_problem.system, form="mean")

    def test_validation_bound(self, density_problem, density_result):
        _, r = cost_expansion(density_result, density_problem.system)
        assert density_result.J_val_star <= density_result.J_val_0 + r + 1e-15


class TestFirstOrderOptimality:
    """u0 maximizes the first-order improvement <p0(T), theta1(T)>."""

    def test_non_negative(self, density_result):
        assert density_result.first_order_term >= -1e-10

    def test_beats_random_controls(self, density_problem, density_result):
        traj = density_result.trajectory
        system = density_problem.system
        rng = np.random.default_rng(3)
        for _ in range(20):
            u = density_problem.control_set.sample(rng, traj.t.size)
            theta1 = integrate_theta1(traj, system, control=u).theta1[-1]
            assert traj.p0[-1] @ theta1 <= density_result.first_order_term + 1e-8

    def test_beats_constant_controls(self, density_problem, density_result):
        traj = density_result.trajectory
        for value in (-1.0, 0.0, 1.0):
            theta1 = integrate_theta1(traj, density_problem.system, control=np.full(traj.t.size, value)).theta1[-1]
            assert traj.p0[-1] @ theta1 <= density_result.first_order_term + 1e-8


class TestCostExpansion:
    """Test cases for the residual of the first-order cost prediction."""

    def test_second_order_consistency(self, density_problem, density_result):
        system = density_problem.system
        residuals = [cost_expansion(with_epsilon(density_result, e), system)[1]
                     for e in (4e-3, 2e-3, 1e-3, 5e-4)]
        ratios = np.array(residuals[:-1]) / np.array(residuals[1:])
        assert np.all((ratios >= 3.0) & (ratios <= 5.0))

    def test_state_gap_is_second_order(self, density_problem, density_result):
        traj = density_result.trajectory
        gaps = []
        for e in (4e-3, 2e-3, 1e-3, 5e-4):
            theta_eps = integrate_full(density_problem.system, traj.theta0[0], traj.grid, traj.u0, e)[-1]
            gaps.append(np.linalg.norm(theta_eps - density_result.theta0_T - e * density_result.theta1_T))
        ratios = np.array(gaps[:-1]) / np.array(gaps[1:])
        assert np.all((ratios >= 3.0) & (ratios <= 5.0))

    def test_insensitive_to_refinement(self, density_result):
        fine = run_experiment(RunConfig(n_steps=4000))
        r_coarse = density_result.manifest["diagnostics"]["expansion_residual"]
        r_fine = fine[1].manifest["diagnostics"]["expansion_residual"]
        assert abs(r_fine - r_coarse) <= 0.05 * r_coarse

    def test_deterministic(self):
        config = RunConfig(T=20.0, n_steps=400)
        first = solve(prepare_problem(config))
        second = solve(prepare_problem(config))
        assert canonical_json(first.manifest) == canonical_json(second.manifest)


class TestFullDynamics:
    """Test cases for the full controlled flow under a frozen control."""

    def test_zero_epsilon_matches_gradient_flow(self, density_result, density_problem):
        traj = density_result.trajectory
        nodes = integrate_full(density_problem.system, traj.theta0[0], traj.grid, traj.u0, 0.0)
        assert_allclose(nodes, traj.theta0, rtol=0, atol=1e-14)

    def test_linear_closed_form(self, linear_system):
        system = linear_system(lam=1.0, c=1.0)
        grid = TimeGrid(2.0, 200)
        theta_T = integrate_full(system, np.array([1.0]), grid, np.ones(201), 0.05)[-1, 0]
        expected = np.exp(-2.0) + 0.05 * (1.0 - np.exp(-2.0))
        assert theta_T == pytest.approx(expected, rel=1e-8)

    def test_control_shape(self, linear_system):
        with pytest.raises(ValueError):
            integrate_full(linear_system(), np.array([1.0]), TimeGrid(1.0, 10), np.ones(10), 0.01)


class TestEpsilonSweep:
    """Test cases for the convergence rate of the expansion residual."""

    def test_second_order_slope(self, density_problem, density_result):
        sweep = epsilon_sweep(density_problem.system, density_problem.grid, density_problem.control_set,
                              SWEEP_EPSILONS, decomposed=(density_result.trajectory, density_result.switches))
        assert sweep.status == "ok"
        assert 1.8 <= sweep.slope <= 2.3
        assert sweep.in_envelope()
        frame = sweep.to_frame()
        assert list(frame.columns) == ["epsilon", "residual", "cost", "predicted_cost", "state_gap"]
        assert_allclose(frame["epsilon"], SWEEP_EPSILONS)

    def test_threaded_matches_serial(self, density_problem, density_result):
        decomposed = (density_result.trajectory, density_result.switches)
        args = (density_problem.system, density_problem.grid, density_problem.control_set, SWEEP_EPSILONS)
        serial = epsilon_sweep(*args, decomposed=decomposed)
        threaded = epsilon_sweep(*args, decomposed=decomposed, workers=3)
        assert serial.rows == threaded.rows

    def test_zero_control_is_at_floor(self, density_problem):
        sweep = epsilon_sweep(density_problem.system, TimeGrid(20.0, 400), ControlSet(0.0, 0.0), SWEEP_EPSILONS)
        assert sweep.at_floor
        assert sweep.slope is None
        assert all(row.residual <= NUMERICAL_FLOOR for row in sweep.rows)

    @pytest.mark.parametrize("epsilons", [
        (1e-4, 1e-3, 1e-2),
        (1e-3, 2e-3, 3e-3, 5e-3),
        (1e-4, 1e-3, 1e-2, 0.2),
        (0.0, 1e-3, 1e-2, 5e-2),
    ])
    def test_invalid_epsilons(self, epsilons):
        with pytest.raises(ConfigurationError) as info:
            check_epsilons(epsilons)
        assert info.value.field == "epsilons"

    def test_fit_rate(self):
        eps = np.array(SWEEP_EPSILONS)
        slope, intercept, status = fit_rate(eps, 3.0 * eps ** 2)
        assert status == "ok"
        assert slope == pytest.approx(2.0, abs=1e-10)
        assert intercept == pytest.approx(np.log(3.0), abs=1e-9)

    def test_fit_rate_ignores_floor(self):
        eps = np.array(SWEEP_EPSILONS)
        residuals = np.array([0.0, 1e-15, *(eps[2:] ** 2)])
        slope, _, status = fit_rate(eps, residuals)
        assert status == "ok"
        assert slope == pytest.approx(2.0, abs=1e-10)
        assert fit_rate(eps, np.zeros(5)) == (None, None, "numerical_floor")


class TestOracleEquivalence:
    """With no noise and eps = 0 the run reduces to ordinary least squares on the training split."""

    @pytest.mark.parametrize("prop", ["density", "specific_heat", "conductivity"])
    def test_matches_least_squares(self, prop):
        problem, result = run_experiment(RunConfig(property=prop, noise_level=0.0, epsilon=0.0))
        raw = problem.to_raw(result.theta_star)
        expected = least_squares_oracle(problem.train, 2)
        assert np.linalg.norm(raw - expected) / np.linalg.norm(expected) < 1e-5

    @pytest.mark.parametrize("prop", ["density", "specific_heat", "conductivity"])
    def test_matches_least_squares_in_working_coordinates(self, prop):
        problem, result = run_experiment(RunConfig(property=prop, noise_level=0.0, epsilon=0.0))
        expected = least_squares_oracle(problem.system.train.data, 2)
        assert np.linalg.norm(result.theta0_T - expected) / np.linalg.norm(expected) < 1e-5
        assert_array_equal(result.theta_star, result.theta0_T)

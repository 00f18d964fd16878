from perturb.algorithm import (PerturbationResult, run_algorithm, solve_decomposed, aggregate,
                               cost_expansion, improvements, check_epsilon, EPSILON_MAX)
from perturb.sweep import (SweepResult, SweepRow, integrate_full, epsilon_sweep, fit_rate,
                           check_epsilons, SLOPE_ENVELOPE)

__all__ = [
    "PerturbationResult", "run_algorithm", "solve_decomposed", "aggregate", "cost_expansion",
    "improvements", "check_epsilon", "EPSILON_MAX", "SweepResult", "SweepRow", "integrate_full",
    "epsilon_sweep", "fit_rate", "check_epsilons", "SLOPE_ENVELOPE",
]

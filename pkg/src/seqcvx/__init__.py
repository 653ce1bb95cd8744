"""Sequential convex programming for structured nonconvex programs.

The problems handled are

    minimize  f(x) + p(x) - u(x)
    subject to g_i(x) + q_i(x) - v_i(x) <= 0,  x in X,

with ``f``, ``g_i`` smooth and ``p``, ``u``, ``q_i``, ``v_i`` convex.
"""

from .errors import InputError, NonconvergenceError, OracleError, SeqCvxError, SubproblemInfeasibleError
from .exact import ExactOptions, default_kkt_stop, run_exact
from .harness import ExperimentConfig, compare_methods, run_experiment
from .inexact import EpsSchedule, InexactOptions, dual_gap_monitor, run_inexact
from .instances import InstanceLibraryEntry, bundled_instances, get_instance
from .kkt import KktResidual, active_set, brute_force_minimize, kkt_residual
from .oracles import ConvexFunction, LeastSquares, Quadratic, SmoothFunction, WeightedL1, Zero
from .penalties import PenaltySpec, build_sparse_nlp, penalty_value, u_subgradient, u_value
from .problem import (
    ProblemInstance,
    check_oracles,
    evaluate_constraint,
    evaluate_objective,
    is_feasible,
)
from .sets import Ball, Box, EpiAbsProduct, FullSpace, Halfspaces, Intersection, Product
from .subproblem import (
    SubproblemData,
    SubproblemSolution,
    find_slater_point,
    linearize,
    model_constraint,
    model_objective,
    solve_exact,
    solve_inexact,
)
from .trace import SolverTrace
from .variant import VariantOptions, bb_estimate, nonmonotone_reference, run_variant

__version__ = "0.1.0"

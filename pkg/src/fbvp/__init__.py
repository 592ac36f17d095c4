"""Free boundary formulations of semi-infinite BVPs solved by non-iterative
transformation methods (translation/spiral and scaling groups)."""

from .analysis import (
    ConvergenceReport,
    closed_form_sweep,
    epsilon_sweep,
    solve_benchmark,
    step_refinement,
    sup_norm_error,
)
from .groups import (
    FbfSolution,
    ScalingFreeBvp,
    Term,
    TranslationFreeBvp,
    check_class_membership,
    check_spiral_invariance,
    locate_event,
    solve_scaling,
    solve_translation,
)
from .problems import BenchmarkProblem, ExactSolution, get_problem
from .rk import RK4, RK6, RK8, ButcherTableau, FirstOrderSystem, Trajectory, get_tableau

__version__ = "0.1.0"

"""Solvers for delay differential equations with unbounded delay.

Histories live on (-inf, 0] and are represented by a sampled window plus a
tail; solutions are built by Picard iteration on short steps and continued
step by step.  Nonautonomous equations run through a clock-augmented
autonomous system, and Volterra integro-differential equations through a
nonautonomous right-hand side with growing delay.
"""

from .errors import (
    AlignmentError,
    DDEError,
    DomainError,
    DomainExitError,
    HorizonError,
    InvariantError,
    NonconvergenceError,
    RunFailedError,
    StepSelectionError,
)
from .history import (
    ForwardPath,
    HistoryFunction,
    TailPolicy,
    Trajectory,
    concat,
    history_distance,
    odd_prolong,
    prolong_const,
    segment,
    seminorm,
    zero_extend,
)
from .numerics import SIMPSON, TRAPEZOID, QuadratureRule, Tolerance, fd_directional, integrate
from .picard import PicardReport, SolverConfig, StepPlan, picard_map, plan_step, solve_local
from .problems import REGISTRY, Problem, parse_history, parse_problem
from .process import augment, check_cocycle, clock_defect, process, solve_process
from .rhs import RhsAutonomous, RhsNonautonomous, eval_df, eval_f
from .semiflow import SemiflowRun, Termination, check_semigroup, check_uniqueness, semiflow
from .variational import fd_solution_derivative, solve_variational
from .vide import VideProblem, solve_vide, vide_g, volterra_direct

__all__ = [name for name in dir() if not name.startswith("_")]

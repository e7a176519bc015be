"""Best L2 approximation by weighted sums of ridge functions on product domains."""

from .closed_form import (
    ApproxSolution,
    InconsistentQuadratureError,
    characterization_defect,
    error_closed_form,
    solve_unweighted,
)
from .config import AssembledProblem, ConfigError, ProblemConfig, assemble, load_config, parse_config
from .domain import GridFunction, RidgeComponent, RSetDomain
from .geometry import DependentDirectionsError, DirectionBasis
from .oracle import ComparisonReport, OracleResult, compare, solve_oracle
from .weighted import (
    SolverConfig,
    WeightedProblem,
    ZeroSliceMassError,
    error_from_norms,
    orthogonality_defect,
    solve_fixed_point,
    unit_weights,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxSolution",
    "AssembledProblem",
    "ComparisonReport",
    "ConfigError",
    "DependentDirectionsError",
    "DirectionBasis",
    "GridFunction",
    "InconsistentQuadratureError",
    "OracleResult",
    "ProblemConfig",
    "RSetDomain",
    "RidgeComponent",
    "SolverConfig",
    "WeightedProblem",
    "ZeroSliceMassError",
    "assemble",
    "characterization_defect",
    "compare",
    "error_closed_form",
    "error_from_norms",
    "load_config",
    "orthogonality_defect",
    "parse_config",
    "solve_fixed_point",
    "solve_oracle",
    "solve_unweighted",
    "unit_weights",
    "__version__",
]

"""Brute-force discrete least squares used to validate the solvers.

The approximant is linear in the component node values, so the
discretized problem is an ordinary least-squares system: one row per
tensor node (scaled by the square root of its quadrature weight), one
column per (component, node) pair.  Solving it with a rank-revealing
factorization gives an independent minimizer of exactly the objective
the solvers discretize, which isolates solver bugs from discretization
error.  Intended sizes stay small (q <= 8, n <= 4), so a dense solve is
fine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .closed_form import ApproxSolution
from .domain import GridFunction, RidgeComponent
from .weighted import WeightedProblem

# Singular values below this fraction of the largest are treated as
# rank-deficient; the minimum-norm solution then fixes the constant
# shifts the decomposition leaves free.
RCOND = 1e-10


@dataclass(frozen=True, eq=False)
class DiscreteLSModel:
    problem: WeightedProblem
    matrix: np.ndarray
    rhs: np.ndarray


@dataclass(eq=False)
class OracleResult:
    problem: WeightedProblem
    coefficients: np.ndarray
    components: tuple[RidgeComponent, ...]
    combined: GridFunction
    residual_norm: float
    error: float


@dataclass(frozen=True)
class ComparisonReport:
    solver_error: float
    oracle_error: float
    error_gap: float
    approximant_gap: float


def build_model(problem: WeightedProblem) -> DiscreteLSModel:
    """Assemble the weighted design matrix and right-hand side."""
    dom = problem.domain
    q = dom.order
    r = dom.ridge_count
    tensor_weights = np.ones(1)
    for w in dom.weights:
        tensor_weights = np.multiply.outer(tensor_weights, w)
    scale = np.sqrt(tensor_weights.reshape(-1))
    index = np.indices(dom.shape).reshape(dom.ndim, -1)
    matrix = np.zeros((scale.size, r * q))
    for i in range(r):
        weighted = scale * problem.weights_star[i].samples.reshape(-1)
        axis_positions = index[i]
        for k in range(q):
            matrix[axis_positions == k, i * q + k] = weighted[axis_positions == k]
    rhs = scale * problem.f_star.samples.reshape(-1)
    return DiscreteLSModel(problem=problem, matrix=matrix, rhs=rhs)


def solve_ls(model: DiscreteLSModel) -> OracleResult:
    """Minimum-norm least-squares solution and its residual."""
    coefficients, _, _, _ = np.linalg.lstsq(model.matrix, model.rhs, rcond=RCOND)
    residual = float(np.linalg.norm(model.matrix @ coefficients - model.rhs))
    problem = model.problem
    dom = problem.domain
    grid = coefficients.reshape(dom.ridge_count, dom.order)
    components = tuple(RidgeComponent(j, grid[j]) for j in range(dom.ridge_count))
    combined = dom.combine(components, problem.weights_star)
    error = residual / math.sqrt(abs(problem.basis.det))
    return OracleResult(
        problem=problem,
        coefficients=coefficients,
        components=components,
        combined=combined,
        residual_norm=residual,
        error=error,
    )


def solve_oracle(problem: WeightedProblem) -> OracleResult:
    return solve_ls(build_model(problem))


def compare(solution: ApproxSolution, result: OracleResult) -> ComparisonReport:
    """Gaps between a solver solution and the oracle, same instance.

    Approximants are compared nodewise as sums; individual components
    are never compared because the decomposition is only determined up
    to constant shifts.
    """
    problem = result.problem
    dom = problem.domain
    solver_combined = dom.combine(solution.components, problem.weights_star)
    approximant_gap = float(np.max(np.abs(solver_combined.samples - result.combined.samples)))
    return ComparisonReport(
        solver_error=solution.error,
        oracle_error=result.error,
        error_gap=abs(solution.error - result.error),
        approximant_gap=approximant_gap,
    )

"""Closed-form best approximation by unweighted sums of ridge components.

On a product domain the minimizer has an explicit form: each component
is the marginal mean of the target along its axis, with a single global
constant correction applied to the first component.  The approximation
error also has a closed form built from the target's norm, the marginal
norms, and the total integral.  Both are computed with the domain's
quadrature, so on polynomial data they are exact up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .domain import GridFunction, RidgeComponent
from .geometry import DirectionBasis

# A squared error this far below zero cannot be rounding noise and
# signals inconsistent quadrature inputs.
RADICAND_FLOOR = -1e-12


class InconsistentQuadratureError(ArithmeticError):
    """A squared error came out negative beyond rounding tolerance."""


@dataclass(eq=False)
class ApproxSolution:
    """Result of a solve: components, error, and diagnostics.

    ``error`` is the L2(X) distance from the target to the computed
    approximant.  ``residual_error`` is the directly integrated residual
    norm, kept as a diagnostic: the two agreeing is itself a check.
    ``residual_orthogonality`` is the defect of the route's own
    optimality characterization (mean-based for the closed form,
    residual orthogonality for the fixed point).  Individual components
    are only determined up to constant shifts that cancel in the sum, so
    comparisons between solutions must use the combined approximant.
    """

    components: tuple[RidgeComponent, ...]
    error: float
    residual_error: float
    residual_orthogonality: float
    method: str
    converged: bool = True
    sweeps: int = 0
    last_change: float = 0.0
    residual_history: tuple[float, ...] = field(default=())


def error_closed_form(f_star: GridFunction, basis: DirectionBasis) -> float:
    """Approximation error from norms and marginals alone.

    Tiny negative radicands in [RADICAND_FLOOR, 0) are clamped to zero;
    anything lower raises InconsistentQuadratureError.
    """
    dom = f_star.domain
    r = dom.ridge_count
    total = f_star.integrate()
    radicand = f_star.norm_sq()
    for j in range(r):
        marginal = f_star.marginal(j)
        radicand -= dom.ridge_norm_sq(marginal) / dom.measure_complement(j) ** 2
    radicand += (r - 1) * total**2 / dom.measure
    if radicand < RADICAND_FLOOR:
        raise InconsistentQuadratureError(
            f"squared error {radicand} is negative beyond rounding tolerance"
        )
    return math.sqrt(max(radicand, 0.0) / abs(basis.det))


def solve_unweighted(f_star: GridFunction, basis: DirectionBasis) -> ApproxSolution:
    """Best unweighted approximant of a grid-sampled target.

    Component j is the axis-j marginal divided by the complementary
    measure; the constant correction -(r-1) * mean sits entirely on
    component 1, matching the explicit construction (the decomposition
    is only unique up to such shifts anyway).
    """
    dom = f_star.domain
    r = dom.ridge_count
    mean = f_star.integrate() / dom.measure
    components = []
    for j in range(r):
        values = f_star.marginal(j).values / dom.measure_complement(j)
        if j == 0:
            values = values - (r - 1) * mean
        components.append(RidgeComponent(j, values))
    components = tuple(components)

    error = error_closed_form(f_star, basis)
    combined = dom.combine(components)
    residual_sq = GridFunction(dom, f_star.samples - combined.samples).norm_sq()
    residual_error = math.sqrt(max(residual_sq, 0.0) / abs(basis.det))
    defect = characterization_defect(components, f_star)
    return ApproxSolution(
        components=components,
        error=error,
        residual_error=residual_error,
        residual_orthogonality=defect,
        method="closed_form",
    )


def characterization_residuals(
    components: tuple[RidgeComponent, ...], f_star: GridFunction
) -> list:
    """Per-node defect of the mean-based optimality characterization.

    The best unweighted approximant is characterized by each component
    equaling the complementary-mean of the target minus the other
    components; entry j holds that difference at every axis-j node.
    """
    dom = f_star.domain
    residuals = []
    for j in range(dom.ridge_count):
        partial = f_star.samples.copy()
        for i, comp in enumerate(components):
            if i != j:
                partial = partial - dom.broadcast(comp)
        rhs = GridFunction(dom, partial).marginal(j).values / dom.measure_complement(j)
        residuals.append(rhs - components[j].values)
    return residuals


def characterization_defect(
    components: tuple[RidgeComponent, ...], f_star: GridFunction
) -> float:
    """Maximum absolute defect of the mean-based characterization."""
    residuals = characterization_residuals(components, f_star)
    return max(float(abs(res).max()) for res in residuals)

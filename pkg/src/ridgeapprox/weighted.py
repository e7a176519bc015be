"""Fixed-point solver for approximation by weighted ridge sums.

Each component update is the exact minimizer of the residual over that
component alone: a weighted marginal of the current residual divided by
the per-node mass of the squared weight over the complementary axes.
Cycling through the components (Gauss-Seidel) therefore never increases
the residual, and a fixed point of the sweep is a best approximant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import closed_form
from .closed_form import ApproxSolution, InconsistentQuadratureError, RADICAND_FLOOR
from .domain import GridFunction, RidgeComponent, RSetDomain
from .geometry import DirectionBasis

# Fraction of the largest squared-weight sample below which a slice mass
# counts as zero: the update divides by it, and a vanishing slice leaves
# the component undetermined there.
MASS_RTOL = 1e-12

INIT_MODES = ("zeros", "closed_form")


class ZeroSliceMassError(ValueError):
    """A weight vanishes (in quadrature) on some slice of its axis."""

    def __init__(self, axis: int, node: int, mass: float):
        super().__init__(
            f"weight {axis + 1} has vanishing slice mass {mass} at node "
            f"{node + 1} of axis {axis + 1}; its component is undetermined there"
        )
        self.axis = axis
        self.node = node


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls for the fixed-point solve.

    tolerance: per-sweep stop threshold on the scale-free change
        max_j sup|g_j_new - g_j_old| / (1 + sup|g_j_new|).
    damping: step fraction toward each exact single-component minimizer;
        1 is the plain update.
    init: starting point, all zeros or the unweighted closed form.
    """

    tolerance: float = 1e-10
    max_sweeps: int = 10000
    damping: float = 1.0
    init: str = "zeros"

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be >= 1, got {self.max_sweeps}")
        if not 0 < self.damping <= 1:
            raise ValueError(f"damping must be in (0, 1], got {self.damping}")
        if self.init not in INIT_MODES:
            raise ValueError(f"init must be one of {INIT_MODES}, got {self.init!r}")


@dataclass(frozen=True, eq=False)
class WeightedProblem:
    """Target, weights, and precomputed slice masses on one domain."""

    f_star: GridFunction
    weights_star: tuple[GridFunction, ...]
    basis: DirectionBasis
    slice_masses: tuple[np.ndarray, ...]

    @property
    def domain(self) -> RSetDomain:
        return self.f_star.domain

    @classmethod
    def build(
        cls,
        f_star: GridFunction,
        weights_star: Sequence[GridFunction],
        basis: DirectionBasis,
    ) -> "WeightedProblem":
        dom = f_star.domain
        if len(weights_star) != dom.ridge_count:
            raise ValueError(
                f"expected {dom.ridge_count} weight functions, got {len(weights_star)}"
            )
        masses = []
        for j, w in enumerate(weights_star):
            if w.domain is not dom:
                raise ValueError(f"weight {j + 1} is sampled on a different domain")
            squared = w.samples**2
            mass = GridFunction(dom, squared).marginal(j).values
            floor = MASS_RTOL * dom.measure_complement(j) * float(squared.max())
            worst = int(np.argmin(mass))
            if mass[worst] <= floor:
                raise ZeroSliceMassError(j, worst, float(mass[worst]))
            masses.append(mass)
        return cls(
            f_star=f_star,
            weights_star=tuple(weights_star),
            basis=basis,
            slice_masses=tuple(masses),
        )

    def unit_weighted(self) -> bool:
        return all(np.all(w.samples == 1.0) for w in self.weights_star)


def unit_weights(dom: RSetDomain) -> tuple[GridFunction, ...]:
    """Weight functions identically one, for the unweighted problem."""
    return tuple(GridFunction(dom, np.ones(dom.shape)) for _ in range(dom.ridge_count))


def update_component(
    problem: WeightedProblem, components: Sequence[RidgeComponent], j: int
) -> RidgeComponent:
    """Exact minimizer of the residual over component j alone.

    At each axis-j node: the weighted marginal of (target minus the
    other weighted components) against weight j, divided by the slice
    mass of weight j squared.
    """
    dom = problem.domain
    partial = problem.f_star.samples.copy()
    for i, comp in enumerate(components):
        if i == j:
            continue
        partial = partial - problem.weights_star[i].samples * dom.broadcast(comp)
    integrand = partial * problem.weights_star[j].samples
    numerator = GridFunction(dom, integrand).marginal(j).values
    return RidgeComponent(j, numerator / problem.slice_masses[j])


def _residual_norm(problem: WeightedProblem, components: Sequence[RidgeComponent]) -> float:
    dom = problem.domain
    combined = dom.combine(components, problem.weights_star)
    residual_sq = GridFunction(dom, problem.f_star.samples - combined.samples).norm_sq()
    return math.sqrt(max(residual_sq, 0.0) / abs(problem.basis.det))


def error_from_norms(f_norm_sq: float, approximant_norm_sq: float) -> float:
    """Error as the root of the norm difference (orthogonal splitting).

    Both arguments are squared L2(X) norms.  Tiny negative differences
    are clamped like the closed-form radicand.
    """
    difference = f_norm_sq - approximant_norm_sq
    if difference < RADICAND_FLOOR:
        raise InconsistentQuadratureError(
            f"squared error {difference} is negative beyond rounding tolerance"
        )
    return math.sqrt(max(difference, 0.0))


def solve_fixed_point(
    problem: WeightedProblem, config: SolverConfig | None = None
) -> ApproxSolution:
    """Gauss-Seidel sweeps over the components until the change stalls.

    Non-convergence within max_sweeps is not an exception: the solution
    is returned with ``converged=False`` plus the last change and sweep
    count, so callers can surface the diagnostics.
    """
    cfg = config or SolverConfig()
    dom = problem.domain
    r = dom.ridge_count

    if cfg.init == "closed_form":
        warm = closed_form.solve_unweighted(problem.f_star, problem.basis)
        components = list(warm.components)
    else:
        components = [RidgeComponent(j, np.zeros(dom.order)) for j in range(r)]

    history = [_residual_norm(problem, components)]
    sweeps = 0
    change = math.inf
    converged = False
    while sweeps < cfg.max_sweeps:
        sweeps += 1
        change = 0.0
        for j in range(r):
            update = update_component(problem, components, j)
            if cfg.damping != 1.0:
                blended = (1.0 - cfg.damping) * components[j].values + cfg.damping * update.values
                update = RidgeComponent(j, blended)
            step = float(np.max(np.abs(update.values - components[j].values)))
            scale = 1.0 + float(np.max(np.abs(update.values)))
            change = max(change, step / scale)
            components[j] = update
        history.append(_residual_norm(problem, components))
        if change < cfg.tolerance:
            converged = True
            break

    components = tuple(components)
    combined = dom.combine(components, problem.weights_star)
    det = abs(problem.basis.det)
    error = error_from_norms(problem.f_star.norm_sq() / det, combined.norm_sq() / det)
    defect = orthogonality_defect(problem, components)
    return ApproxSolution(
        components=components,
        error=error,
        residual_error=history[-1],
        residual_orthogonality=defect,
        method="fixed_point",
        converged=converged,
        sweeps=sweeps,
        last_change=change,
        residual_history=tuple(history),
    )


def orthogonality_residuals(
    problem: WeightedProblem, components: Sequence[RidgeComponent]
) -> list:
    """Normalized residual inner products against every probe function.

    The probes for axis j are weight j times the Lagrange cardinal
    function of each axis-j node (which is an indicator on the grid), so
    entry j holds <residual, w_j e_k> / (|f*| |w_j e_k|) for every node k.
    At a best approximant all entries vanish.
    """
    dom = problem.domain
    combined = dom.combine(components, problem.weights_star)
    residual = problem.f_star.samples - combined.samples
    f_norm = math.sqrt(max(problem.f_star.norm_sq(), 0.0))
    if f_norm == 0.0:
        f_norm = 1.0
    out = []
    for j in range(dom.ridge_count):
        integrand = residual * problem.weights_star[j].samples
        slice_inner = GridFunction(dom, integrand).marginal(j).values
        axis_weights = dom.weights[j]
        inner = axis_weights * slice_inner
        probe_norm = np.sqrt(axis_weights * problem.slice_masses[j])
        out.append(inner / (f_norm * probe_norm))
    return out


def orthogonality_defect(
    problem: WeightedProblem, components: Sequence[RidgeComponent]
) -> float:
    """Maximum normalized residual inner product over all probes."""
    residuals = orthogonality_residuals(problem, components)
    return max(float(abs(res).max()) for res in residuals)

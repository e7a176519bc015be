"""Product domains Y1 x ... x Yr x Y0 with tensor Gauss-Legendre quadrature.

The first r axes carry the ridge variables, the remaining axes the box
Y0.  Every axis uses the same quadrature order q, so a grid-sampled
function is a (q, ..., q) array.  All integrals are plain tensor
contractions against the per-axis weight vectors; marginalizing over
every axis but one yields the values of a one-dimensional (ridge)
component at the nodes of that axis.

Domains, grid functions and components are immutable after construction;
sampling may run on several threads (capped by RIDGEAPPROX_THREADS) and
its result never depends on the partitioning.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

DEFAULT_ORDER = 8
THREADS_ENV = "RIDGEAPPROX_THREADS"


class GridSampleError(ValueError):
    """Evaluation failed or produced a non-finite value at a grid node."""


def _worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0, got {value}")
    if value == 0:
        # auto: per-node evaluators are GIL-bound Python, so one worker
        # is the fastest safe choice
        return 1
    return min(value, os.cpu_count() or 1)


def _gauss_axis(lo: float, hi: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    base_nodes, base_weights = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return mid + half * base_nodes, half * base_weights


@dataclass(frozen=True, eq=False)
class RidgeComponent:
    """Values of a one-dimensional component at the nodes of its axis."""

    axis: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        self.values.setflags(write=False)


@dataclass(frozen=True, eq=False)
class RSetDomain:
    intervals: tuple[tuple[float, float], ...]
    box0: tuple[tuple[float, float], ...]
    order: int
    nodes: tuple[np.ndarray, ...]
    weights: tuple[np.ndarray, ...]

    def __post_init__(self):
        for arr in self.nodes + self.weights:
            arr.setflags(write=False)

    @classmethod
    def build(
        cls,
        intervals: Sequence[Sequence[float]],
        box0: Sequence[Sequence[float]] = (),
        order: int = DEFAULT_ORDER,
    ) -> "RSetDomain":
        """Create the domain with q-point Gauss-Legendre rules per axis."""
        if order < 1:
            raise ValueError(f"quadrature order must be >= 1, got {order}")
        if not intervals:
            raise ValueError("at least one ridge interval is required")
        ridge = tuple((float(lo), float(hi)) for lo, hi in intervals)
        box = tuple((float(lo), float(hi)) for lo, hi in box0)
        for kind, axes in (("interval", ridge), ("box0 interval", box)):
            for i, (lo, hi) in enumerate(axes):
                if not (np.isfinite(lo) and np.isfinite(hi)):
                    raise ValueError(f"{kind} {i + 1} has non-finite endpoints")
                if hi <= lo:
                    raise ValueError(f"{kind} {i + 1} must have positive length, got [{lo}, {hi}]")
        nodes = []
        weights = []
        for lo, hi in ridge + box:
            n, w = _gauss_axis(lo, hi, order)
            nodes.append(n)
            weights.append(w)
        return cls(
            intervals=ridge,
            box0=box,
            order=order,
            nodes=tuple(nodes),
            weights=tuple(weights),
        )

    @property
    def ridge_count(self) -> int:
        return len(self.intervals)

    @property
    def ndim(self) -> int:
        return len(self.intervals) + len(self.box0)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.order,) * self.ndim

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(hi - lo for lo, hi in self.intervals + self.box0)

    @property
    def measure(self) -> float:
        """|Y|, the product of all axis lengths."""
        return float(np.prod(self.lengths))

    def measure_complement(self, axis: int) -> float:
        """|Y| with the given axis removed."""
        lengths = self.lengths
        return float(np.prod([lengths[k] for k in range(self.ndim) if k != axis]))

    def grid(self) -> np.ndarray:
        """All tensor nodes as a (q^n, n) array in C order."""
        mesh = np.meshgrid(*self.nodes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def sample(self, fn: Callable[[np.ndarray], float]) -> "GridFunction":
        """Evaluate fn at every tensor node.

        Evaluation order is unspecified; with RIDGEAPPROX_THREADS > 1 the
        nodes are split across a thread pool, and the result is identical
        either way because each node writes its own slot.
        """
        points = self.grid()
        out = np.empty(len(points))

        def run(start: int, stop: int) -> None:
            for i in range(start, stop):
                try:
                    out[i] = fn(points[i])
                except Exception as exc:
                    raise GridSampleError(
                        f"evaluation failed at node {tuple(points[i])}: {exc}"
                    ) from exc

        workers = _worker_count()
        if workers > 1:
            chunk = -(-len(points) // workers)
            bounds = [(s, min(s + chunk, len(points))) for s in range(0, len(points), chunk)]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for future in [pool.submit(run, s, t) for s, t in bounds]:
                    future.result()
        else:
            run(0, len(points))

        bad = np.flatnonzero(~np.isfinite(out))
        if bad.size:
            raise GridSampleError(f"non-finite value at node {tuple(points[bad[0]])}")
        return GridFunction(self, out.reshape(self.shape))

    def grid_function(self, samples: np.ndarray) -> "GridFunction":
        """Wrap an existing sample array (copied) as a grid function."""
        return GridFunction(self, samples)

    def broadcast(self, component: RidgeComponent) -> np.ndarray:
        """Component values broadcast over the full grid shape."""
        shape = [1] * self.ndim
        shape[component.axis] = self.order
        return component.values.reshape(shape)

    def combine(
        self,
        components: Sequence[RidgeComponent],
        weights: Sequence["GridFunction"] | None = None,
    ) -> "GridFunction":
        """Grid samples of sum_i w_i(y) * g_i(y_i); weights default to 1."""
        if len(components) != self.ridge_count:
            raise ValueError(f"expected {self.ridge_count} components, got {len(components)}")
        total = np.zeros(self.shape)
        for i, comp in enumerate(components):
            if comp.axis != i:
                raise ValueError(f"component {i + 1} is tied to axis {comp.axis + 1}")
            shaped = self.broadcast(comp)
            total += shaped if weights is None else weights[i].samples * shaped
        return GridFunction(self, total)

    def ridge_norm_sq(self, component: RidgeComponent) -> float:
        """Squared L2(Y) norm of a component viewed as a function on Y."""
        axis_part = float(self.weights[component.axis] @ component.values**2)
        return self.measure_complement(component.axis) * axis_part

    def ridge_integral(self, component: RidgeComponent) -> float:
        """Integral of the component over its own axis."""
        return float(self.weights[component.axis] @ component.values)

    def resample(self, component: RidgeComponent, count: int) -> tuple[np.ndarray, np.ndarray]:
        """Component values on a uniform grid of its interval.

        Uses barycentric Lagrange interpolation through the quadrature
        nodes, the natural collocation set for the component.
        """
        if count < 2:
            raise ValueError(f"resample count must be >= 2, got {count}")
        lo, hi = (self.intervals + self.box0)[component.axis]
        points = np.linspace(lo, hi, count)
        nodes = self.nodes[component.axis]
        values = barycentric_interpolate(nodes, component.values, points)
        return points, values


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Scalar samples at every tensor quadrature node of a domain."""

    domain: RSetDomain
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.shape != self.domain.shape:
            raise ValueError(f"samples have shape {samples.shape}, expected {self.domain.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain non-finite values")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def integrate(self) -> float:
        """Tensor quadrature over the whole domain."""
        value = self.samples
        for axis in range(value.ndim - 1, -1, -1):
            value = np.tensordot(value, self.domain.weights[axis], axes=([axis], [0]))
        return float(value)

    def marginal(self, axis: int) -> RidgeComponent:
        """Integrate out every axis except one."""
        if not 0 <= axis < self.domain.ridge_count:
            raise ValueError(f"axis must be a ridge axis in 0..{self.domain.ridge_count - 1}")
        value = self.samples
        for ax in range(value.ndim - 1, -1, -1):
            if ax == axis:
                continue
            value = np.tensordot(value, self.domain.weights[ax], axes=([ax], [0]))
        return RidgeComponent(axis, value)

    def norm_sq(self) -> float:
        """Squared L2(Y) norm by quadrature of the pointwise square."""
        return GridFunction(self.domain, self.samples**2).integrate()


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    """Weights w_i = 1 / prod_{j != i} (x_i - x_j) for distinct nodes."""
    n = len(nodes)
    weights = np.ones(n)
    for i in range(n):
        diff = nodes[i] - nodes
        diff[i] = 1.0
        weights[i] = 1.0 / np.prod(diff)
    return weights


def barycentric_interpolate(
    nodes: np.ndarray, values: np.ndarray, points: np.ndarray
) -> np.ndarray:
    """Evaluate the interpolating polynomial through (nodes, values)."""
    weights = barycentric_weights(np.asarray(nodes, dtype=float))
    out = np.empty(len(points))
    for k, x in enumerate(points):
        diff = x - nodes
        hit = np.flatnonzero(np.abs(diff) < 1e-14)
        if hit.size:
            out[k] = values[hit[0]]
            continue
        ratio = weights / diff
        out[k] = (ratio @ values) / ratio.sum()
    return out

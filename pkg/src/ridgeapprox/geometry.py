"""Direction sets completed to a basis of R^n.

The first r rows of the transform matrix are the ridge directions, the
remaining rows a completion to a basis.  The forward map sends a point x
to its transformed coordinates y (row i dotted with x); the stored
inverse matrix recovers x from y row by row, which is all that is needed
to express a function of x in the y coordinates (its pullback).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import expr as expr_mod

# A pivot below RANK_RTOL times the largest row norm counts as zero:
# directions are user-entered numbers and a silently near-singular
# transform would corrupt every |det|^(-1/2) scaling downstream.
RANK_RTOL = 1e-10


class DependentDirectionsError(ValueError):
    """Raised when the supplied rows cannot form a basis."""


def _try_absorb(row: np.ndarray, echelon: list[tuple[int, np.ndarray]], tol: float) -> bool:
    """Reduce row against the echelon; absorb it if independent."""
    v = row.astype(float).copy()
    for pivot_col, basis_row in echelon:
        v -= v[pivot_col] * basis_row
    pivot_col = int(np.argmax(np.abs(v)))
    if abs(v[pivot_col]) <= tol:
        return False
    echelon.append((pivot_col, v / v[pivot_col]))
    return True


def _det_and_inverse(matrix: np.ndarray, tol: float) -> tuple[float, np.ndarray]:
    """Determinant and inverse by Gauss-Jordan with partial pivoting."""
    n = matrix.shape[0]
    a = matrix.astype(float).copy()
    inv = np.eye(n)
    det = 1.0
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[pivot, col]) <= tol:
            raise DependentDirectionsError("transform matrix is singular within tolerance")
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            inv[[col, pivot]] = inv[[pivot, col]]
            det = -det
        det *= a[col, col]
        inv[col] /= a[col, col]
        a[col] /= a[col, col]
        for row in range(n):
            if row != col and a[row, col] != 0.0:
                factor = a[row, col]
                a[row] -= factor * a[col]
                inv[row] -= factor * inv[col]
    return det, inv


@dataclass(frozen=True, eq=False)
class DirectionBasis:
    """r ridge directions plus a completion, with transform data.

    Attributes
    ----------
    ridge_count : number of ridge directions r.
    matrix : (n, n) array; rows are the directions followed by the
        completion.  Row i dotted with x gives coordinate y_i.
    inverse_matrix : (n, n) array; row i dotted with y gives x_i.
    det : determinant of ``matrix``.
    """

    ridge_count: int
    matrix: np.ndarray
    inverse_matrix: np.ndarray
    det: float

    def __post_init__(self):
        self.matrix.setflags(write=False)
        self.inverse_matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def directions(self) -> np.ndarray:
        return self.matrix[: self.ridge_count]

    @property
    def completion(self) -> np.ndarray:
        return self.matrix[self.ridge_count:]

    @classmethod
    def build(
        cls,
        directions: Sequence[Sequence[float]],
        completion: Sequence[Sequence[float]] | None = None,
    ) -> "DirectionBasis":
        """Validate the directions and complete them to a basis.

        With no completion given, standard basis vectors e_k are appended
        in ascending k whenever they increase the rank, which makes the
        completion deterministic.  Raises DependentDirectionsError naming
        the first offending row otherwise.
        """
        rows = [np.asarray(d, dtype=float) for d in directions]
        if not rows:
            raise ValueError("at least one direction is required")
        n = rows[0].size
        r = len(rows)
        if r > n:
            raise ValueError(f"more directions ({r}) than dimensions ({n})")
        for i, row in enumerate(rows):
            if row.ndim != 1 or row.size != n:
                raise ValueError(f"direction {i + 1} does not have length {n}")
            if not np.all(np.isfinite(row)):
                raise ValueError(f"direction {i + 1} has non-finite entries")
            if not np.any(row):
                raise ValueError(f"direction {i + 1} is the zero vector")

        extra = [np.asarray(c, dtype=float) for c in completion] if completion is not None else None
        if extra is not None:
            if len(extra) != n - r:
                raise ValueError(f"completion must have {n - r} rows, got {len(extra)}")
            for i, row in enumerate(extra):
                if row.ndim != 1 or row.size != n:
                    raise ValueError(f"completion row {i + 1} does not have length {n}")

        scale = max(float(np.linalg.norm(row)) for row in rows + (extra or []) + [np.ones(1)])
        tol = RANK_RTOL * scale

        echelon: list[tuple[int, np.ndarray]] = []
        for i, row in enumerate(rows):
            if not _try_absorb(row, echelon, tol):
                raise DependentDirectionsError(
                    f"direction {i + 1} is linearly dependent on the preceding directions"
                )
        if extra is not None:
            for i, row in enumerate(extra):
                if not _try_absorb(row, echelon, tol):
                    raise DependentDirectionsError(
                        f"completion row {i + 1} does not extend the directions to a basis"
                    )
            chosen = extra
        else:
            chosen = []
            for k in range(n):
                if len(echelon) == n:
                    break
                candidate = np.zeros(n)
                candidate[k] = 1.0
                if _try_absorb(candidate, echelon, tol):
                    chosen.append(candidate)

        matrix = np.vstack(rows + list(chosen))
        det, inverse = _det_and_inverse(matrix, tol)
        return cls(ridge_count=r, matrix=matrix, inverse_matrix=inverse, det=det)

    def forward(self, x: Sequence[float]) -> np.ndarray:
        """Transformed coordinates y of a point x."""
        return self.matrix @ np.asarray(x, dtype=float)

    def inverse(self, y: Sequence[float]) -> np.ndarray:
        """Original coordinates x of a transformed point y."""
        return self.inverse_matrix @ np.asarray(y, dtype=float)

    def pullback(self, expression: expr_mod.Expr) -> Callable[[Sequence[float]], float]:
        """Evaluator for the expression (in x1..xn) as a function of y.

        The returned callable is pure and safe to call concurrently.
        """
        names = [f"x{i + 1}" for i in range(self.dim)]
        allowed = set(names)
        free = expr_mod.free_variables(expression)
        unknown = [name for name in free if name not in allowed]
        if unknown:
            raise ValueError(f"expression uses variables outside x1..x{self.dim}: {unknown}")
        inverse_matrix = self.inverse_matrix

        def evaluator(y: Sequence[float]) -> float:
            x = inverse_matrix @ np.asarray(y, dtype=float)
            return expr_mod.evaluate(expression, dict(zip(names, x)))

        return evaluator

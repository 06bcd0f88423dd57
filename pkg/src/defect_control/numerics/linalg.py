"""
Stiffness matrix of the 5-point Laplacian and the SPD solves built on it.

The matrix is assembled without the 1/h^2 factor, so that z^T K z is the sum
of squared differences over all horizontal and vertical edges (edges to the
zero boundary included), which approximates the integral of |grad z|^2.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg, factorized

from defect_control.config import LINEAR_MAX_ITER_FACTOR, LINEAR_SOLVERS, LINEAR_TOL
from defect_control.errors import DimensionError, SolverIterationLimitError
from defect_control.numerics.fields import ScalarField
from defect_control.numerics.grid import Grid

logger = logging.getLogger(__name__)

SparseSpdMatrix = sp.csr_matrix


def assemble_stiffness(grid: Grid) -> SparseSpdMatrix:
    """
    Assemble K with (Kz)_p = 4 z_p - sum of the four neighbours of p.

    Missing neighbours lie on the boundary and contribute zero.
    """
    side = grid.side
    index = np.arange(grid.m).reshape(side, side)

    # (row-neighbour, column-neighbour) pairs along x and along y
    left, right = index[:, :-1].ravel(), index[:, 1:].ravel()
    below, above = index[:-1, :].ravel(), index[1:, :].ravel()
    first = np.concatenate([left, right, below, above])
    second = np.concatenate([right, left, above, below])

    rows = np.concatenate([index.ravel(), first])
    cols = np.concatenate([index.ravel(), second])
    data = np.concatenate([np.full(grid.m, 4.0), np.full(first.size, -1.0)])

    matrix = sp.csr_matrix((data, (rows, cols)), shape=(grid.m, grid.m))
    matrix.sort_indices()
    return matrix


def _check_dimension(matrix: SparseSpdMatrix, size: int) -> None:
    if matrix.shape != (size, size):
        raise DimensionError(f"operator of shape {matrix.shape} applied to a vector of length {size}")


def _conjugate_gradient(
    matrix: SparseSpdMatrix, rhs: np.ndarray, tol: float, max_iter: int
) -> np.ndarray:
    """CG from a zero initial guess; stops at ||Kz - rhs|| <= tol * max(1, ||rhs||)."""
    if not np.any(rhs):
        return np.zeros_like(rhs)

    solution, info = cg(matrix, rhs, rtol=tol, atol=tol, maxiter=max_iter)
    if info != 0:
        residual = float(np.linalg.norm(matrix @ solution - rhs))
        raise SolverIterationLimitError(
            f"conjugate gradients did not converge in {max_iter} iterations "
            f"(residual {residual:.3e})",
            residual=residual,
            iterations=max_iter,
        )
    return np.asarray(solution, dtype=np.float64)


def solve_spd(
    matrix: SparseSpdMatrix,
    rhs: ScalarField,
    tol: float = LINEAR_TOL,
    max_iter: int | None = None,
) -> ScalarField:
    """
    Solve K z = rhs by conjugate gradients.

    Args:
        matrix: Symmetric positive definite matrix
        rhs: Right-hand side
        tol: Relative tolerance, applied as tol * max(1, ||rhs||)
        max_iter: Iteration cap, 10 * m by default

    Returns:
        The solution as a field on the grid of ``rhs``
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    _check_dimension(matrix, rhs.grid.m)
    limit = max_iter if max_iter is not None else LINEAR_MAX_ITER_FACTOR * rhs.grid.m
    return rhs.with_values(_conjugate_gradient(matrix, rhs.values, tol, limit))


def h1_seminorm_sq(w: ScalarField, matrix: SparseSpdMatrix) -> float:
    """w^T K w, the discrete squared L2 norm of grad w."""
    _check_dimension(matrix, w.grid.m)
    return max(0.0, float(np.dot(w.values, matrix @ w.values)))


@dataclass
class StiffnessSystem:
    """The stiffness matrix of a grid together with the way it is solved.

    ``method`` is ``"cg"`` (conjugate gradients, zero initial guess) or
    ``"direct"`` (sparse LU factorization computed once and reused).
    """

    grid: Grid
    matrix: SparseSpdMatrix
    method: str = "cg"
    tol: float = LINEAR_TOL
    max_iter: int | None = None
    solve_count: int = field(default=0, init=False)
    _factor: Callable[[np.ndarray], np.ndarray] | None = field(
        default=None, init=False, repr=False
    )

    def __post_init__(self) -> None:
        if self.method not in LINEAR_SOLVERS:
            raise ValueError(
                f"unknown linear solver {self.method!r}, expected one of {sorted(LINEAR_SOLVERS)}"
            )
        if self.tol <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")
        _check_dimension(self.matrix, self.grid.m)

    @classmethod
    def assemble(
        cls,
        grid: Grid,
        method: str = "cg",
        tol: float = LINEAR_TOL,
        max_iter: int | None = None,
    ) -> "StiffnessSystem":
        return cls(grid=grid, matrix=assemble_stiffness(grid), method=method, tol=tol, max_iter=max_iter)

    @property
    def h(self) -> float:
        return self.grid.h

    def apply(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(self.matrix @ z)

    def energy(self, z: np.ndarray, y: np.ndarray | None = None) -> float:
        """The bilinear form z^T K y (y = z by default)."""
        return float(np.dot(z, self.matrix @ (z if y is None else y)))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve K z = rhs for a raw value vector."""
        self.solve_count += 1
        if self.method == "direct":
            if self._factor is None:
                logger.debug(f"factorizing stiffness matrix for n={self.grid.n}")
                self._factor = factorized(self.matrix.tocsc())
            return np.asarray(self._factor(rhs), dtype=np.float64)
        limit = self.max_iter if self.max_iter is not None else LINEAR_MAX_ITER_FACTOR * self.grid.m
        return _conjugate_gradient(self.matrix, rhs, self.tol, limit)

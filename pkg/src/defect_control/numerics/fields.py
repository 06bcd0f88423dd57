"""Nodal scalar fields and the lumped L2 inner product."""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from defect_control.errors import DimensionError, NonFiniteFieldError
from defect_control.numerics.grid import Grid


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Values at the interior nodes of a grid, in storage order.

    The value array is copied on construction and made read-only.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if values.shape != (self.grid.m,):
            raise DimensionError(
                f"field has {values.size} values, grid n={self.grid.n} has {self.grid.m} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteFieldError("field contains NaN or infinite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.m))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.m, float(value)))

    @classmethod
    def from_function(
        cls, grid: Grid, func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    ) -> "ScalarField":
        """Sample ``func(x, y)`` (vectorized) at the interior nodes."""
        x, y = grid.coordinates
        return cls(grid, np.broadcast_to(func(x, y), (grid.m,)))

    def with_values(self, values: np.ndarray) -> "ScalarField":
        """A new field on the same grid."""
        return ScalarField(self.grid, values)

    def as_matrix(self) -> np.ndarray:
        """Values as a (n-1, n-1) array, rows indexed by y and columns by x."""
        return self.values.reshape(self.grid.side, self.grid.side)

    def mirrored_x(self) -> "ScalarField":
        """The field composed with x -> 1 - x."""
        return self.with_values(self.as_matrix()[:, ::-1].ravel())

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def check_same_grid(*fields: ScalarField) -> Grid:
    """Return the common grid of ``fields`` or raise DimensionError."""
    grid = fields[0].grid
    for other in fields[1:]:
        if other.grid != grid:
            raise DimensionError(
                f"fields live on different grids (n={grid.n} and n={other.grid.n})"
            )
    return grid


def l2_inner(f: ScalarField, g: ScalarField) -> float:
    """Lumped-mass approximation h^2 * sum(f * g) of the integral of f g."""
    grid = check_same_grid(f, g)
    return float(grid.h**2 * np.dot(f.values, g.values))


def l2_norm(f: ScalarField) -> float:
    return float(np.sqrt(l2_inner(f, f)))

"""
Uniform node-centred grid on the unit square.

Interior nodes (i*h, j*h), i, j = 1..n-1, are numbered row-major with x
running fastest: (i, j) -> (j-1)(n-1) + (i-1). Boundary values are zero
(homogeneous Dirichlet) and are never stored.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from defect_control.errors import InvalidResolutionError


@dataclass(frozen=True)
class Grid:
    """Interior nodes of the uniform n x n subdivision of (0, 1)^2."""

    n: int

    @property
    def h(self) -> float:
        """Mesh width."""
        return 1.0 / self.n

    @property
    def side(self) -> int:
        """Interior nodes per side."""
        return self.n - 1

    @property
    def m(self) -> int:
        """Number of interior nodes."""
        return (self.n - 1) ** 2

    def index(self, i: int, j: int) -> int:
        """Row-major position of node (i, j), both 1-based."""
        return (j - 1) * self.side + (i - 1)

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates (x, y), each of length m, in storage order."""
        ticks = np.arange(1, self.n) * self.h
        x, y = np.meshgrid(ticks, ticks, indexing="xy")
        x = x.ravel()
        y = y.ravel()
        x.flags.writeable = False
        y.flags.writeable = False
        return x, y


def build_grid(n: int) -> Grid:
    """
    Build the grid with n subdivisions per side.

    Args:
        n: Subdivisions per side, at least 2

    Returns:
        Grid with h = 1/n and (n-1)^2 interior nodes
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise InvalidResolutionError(f"resolution must be an integer, got {n!r}")
    if n < 2:
        raise InvalidResolutionError(f"resolution must be ≥ 2, got {n}")
    return Grid(n=int(n))

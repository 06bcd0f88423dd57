"""
Problem definitions.

Unconstrained:  minimize 1/2|u - ubar|^2 + mu/2|v|^2 + lam/2|grad w|^2
Constrained:    minimize 1/2|u - ubar|^2 + lam/2|grad w|^2
                over u <= 0, v_lower <= v <= v_upper

with w the defect of (u, v): -div(grad u + grad w) + phi(u) = v, w = 0 on the boundary.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from defect_control.errors import InvalidProblemError
from defect_control.model.nonlinearity import Nonlinearity
from defect_control.numerics.fields import ScalarField
from defect_control.numerics.grid import Grid


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Grid, target, reaction term, weights and optional pointwise bounds."""

    grid: Grid
    target: ScalarField
    phi: Nonlinearity
    mu: float
    lam: float
    constrained: bool = False
    lower: ScalarField | None = None
    upper: ScalarField | None = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.lam) or self.lam <= 0:
            raise InvalidProblemError(f"lambda must be positive, got {self.lam}")
        if not np.isfinite(self.mu) or self.mu < 0:
            raise InvalidProblemError(f"mu must be non-negative, got {self.mu}")
        if self.target.grid != self.grid:
            raise InvalidProblemError("target field is not defined on the problem grid")

        if not self.constrained:
            if self.lower is not None or self.upper is not None:
                raise InvalidProblemError("control bounds are only allowed for constrained problems")
            return

        if self.lower is None or self.upper is None:
            raise InvalidProblemError("constrained problems need both control bounds")
        if self.lower.grid != self.grid or self.upper.grid != self.grid:
            raise InvalidProblemError("control bounds are not defined on the problem grid")
        crossing = np.flatnonzero(self.lower.values > self.upper.values)
        if crossing.size:
            raise InvalidProblemError(
                f"lower bound exceeds upper bound at {crossing.size} node(s), first at index {crossing[0]}"
            )

    @property
    def h(self) -> float:
        return self.grid.h

    def with_lambda(self, lam: float) -> "ProblemSpec":
        return dataclasses.replace(self, lam=lam)

    def bounds(self) -> tuple[ScalarField, ScalarField]:
        """(v_lower, v_upper); raises for unconstrained problems."""
        if self.lower is None or self.upper is None:
            raise InvalidProblemError("problem has no control bounds")
        return self.lower, self.upper

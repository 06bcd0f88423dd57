"""Shared test fixtures."""

import numpy as np
import pytest

from defect_control.model.nonlinearity import Nonlinearity
from defect_control.model.problem import ProblemSpec
from defect_control.model.targets import builtin_field
from defect_control.numerics.fields import ScalarField
from defect_control.numerics.grid import build_grid
from defect_control.numerics.linalg import StiffnessSystem


@pytest.fixture
def make_spec():
    """Factory for small problems; defaults to the linear case phi = -1 with target minx."""

    def _make(
        n: int = 8,
        phi: str = "affine(-1,0)",
        mu: float = 1e-2,
        lam: float = 1.0,
        target: str = "minx",
        lower: str | None = None,
        upper: str | None = None,
    ) -> ProblemSpec:
        grid = build_grid(n)
        constrained = lower is not None or upper is not None
        return ProblemSpec(
            grid=grid,
            target=builtin_field(target, grid),
            phi=Nonlinearity.parse(phi),
            mu=mu,
            lam=lam,
            constrained=constrained,
            lower=builtin_field(lower, grid) if lower else None,
            upper=builtin_field(upper, grid) if upper else None,
        )

    return _make


@pytest.fixture
def direct_system():
    """Factory for stiffness systems solved by sparse LU."""

    def _make(grid) -> StiffnessSystem:
        return StiffnessSystem.assemble(grid, method="direct")

    return _make


@pytest.fixture
def random_field():
    """Factory for reproducible random fields."""

    def _make(grid, seed: int, scale: float = 0.1) -> ScalarField:
        rng = np.random.default_rng(seed)
        return ScalarField(grid, scale * rng.standard_normal(grid.m))

    return _make

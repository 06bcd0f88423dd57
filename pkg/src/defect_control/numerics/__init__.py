"""Grid, fields, stiffness matrix and linear solves on the unit square."""

from defect_control.numerics.fields import ScalarField, check_same_grid, l2_inner, l2_norm
from defect_control.numerics.grid import Grid, build_grid
from defect_control.numerics.io import read_field_csv, write_field_csv
from defect_control.numerics.linalg import (
    SparseSpdMatrix,
    StiffnessSystem,
    assemble_stiffness,
    h1_seminorm_sq,
    solve_spd,
)

__all__ = [
    "Grid",
    "ScalarField",
    "SparseSpdMatrix",
    "StiffnessSystem",
    "assemble_stiffness",
    "build_grid",
    "check_same_grid",
    "h1_seminorm_sq",
    "l2_inner",
    "l2_norm",
    "read_field_csv",
    "solve_spd",
    "write_field_csv",
]

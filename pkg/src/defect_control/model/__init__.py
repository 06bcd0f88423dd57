"""Problem definition, defect equation, cost and optimality diagnostics."""

from defect_control.model.defect import (
    KktResidual,
    cost,
    kkt_residual,
    residual_h1,
    solve_defect,
    solve_perturbation,
    state_residual,
)
from defect_control.model.hypotheses import (
    ExistenceReport,
    check_existence_hypothesis,
    check_monotone,
    find_existence_witness,
)
from defect_control.model.nonlinearity import Nonlinearity
from defect_control.model.problem import ProblemSpec
from defect_control.model.targets import builtin_field, resolve_field

__all__ = [
    "ExistenceReport",
    "KktResidual",
    "Nonlinearity",
    "ProblemSpec",
    "builtin_field",
    "check_existence_hypothesis",
    "check_monotone",
    "cost",
    "find_existence_witness",
    "kkt_residual",
    "residual_h1",
    "resolve_field",
    "solve_defect",
    "solve_perturbation",
    "state_residual",
]

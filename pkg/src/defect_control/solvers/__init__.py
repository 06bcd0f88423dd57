"""Steepest descent and the exponential-barrier outer loop."""

from defect_control.solvers.barrier import (
    BarrierMultipliers,
    BarrierOptions,
    CertificateReport,
    bang_bang_control,
    barrier_cost,
    barrier_directions,
    certificates,
    constraint_violation,
    inner_solve,
    run_barrier,
    update_multipliers,
    variational_gap,
)
from defect_control.solvers.descent import (
    DescentOptions,
    DescentState,
    direction_u,
    direction_v,
    directional_derivative,
    gradient_norm_sq,
    run_descent,
    step_size,
)

__all__ = [
    "BarrierMultipliers",
    "BarrierOptions",
    "CertificateReport",
    "DescentOptions",
    "DescentState",
    "bang_bang_control",
    "barrier_cost",
    "barrier_directions",
    "certificates",
    "constraint_violation",
    "direction_u",
    "direction_v",
    "directional_derivative",
    "gradient_norm_sq",
    "inner_solve",
    "run_barrier",
    "run_descent",
    "step_size",
    "update_multipliers",
    "variational_gap",
]

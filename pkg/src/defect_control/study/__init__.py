"""Lambda-continuation study and the classical optimality-system oracle."""

from defect_control.study.continuation import (
    ContinuationPoint,
    ContinuationResult,
    run_continuation,
    validate_lambdas,
    weighted_residual,
)
from defect_control.study.oracle import classical_kkt_solve, oracle_applies

__all__ = [
    "ContinuationPoint",
    "ContinuationResult",
    "classical_kkt_solve",
    "oracle_applies",
    "run_continuation",
    "validate_lambdas",
    "weighted_residual",
]

"""
Lambda-continuation: solve the relaxed problem for an increasing sequence of
lambda values and measure how fast the defect and the distance to the
classical solution shrink.
"""

import concurrent.futures
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from defect_control.config import CSV_FLOAT_FORMAT, DEFAULT_LAMBDA_SWEEP
from defect_control.errors import DefectControlError, InvalidProblemError
from defect_control.model.defect import cost, state_residual
from defect_control.model.problem import ProblemSpec
from defect_control.numerics.fields import ScalarField, l2_norm
from defect_control.numerics.linalg import StiffnessSystem
from defect_control.reporting import STATUS_CONVERGED
from defect_control.solvers.barrier import BarrierOptions, run_barrier
from defect_control.solvers.descent import DescentOptions, DescentState, FieldPair, run_descent
from defect_control.study.oracle import classical_kkt_solve, oracle_applies

logger = logging.getLogger(__name__)

CONTINUATION_COLUMNS = [
    "lambda",
    "cost",
    "residual_h1",
    "weighted_residual",
    "dist_u_oracle",
    "dist_v_oracle",
]

STATUS_FAILED = "failed"


@dataclass(frozen=True)
class ContinuationPoint:
    """Outcome of the solve at one lambda; fields are None when the solve failed."""

    lam: float
    status: str
    iterations: int = 0
    u: ScalarField | None = None
    v: ScalarField | None = None
    cost: float = float("nan")
    residual_h1: float = float("nan")
    weighted_residual: float = float("nan")
    state_residual: float = float("nan")
    dist_u_oracle: float | None = None
    dist_v_oracle: float | None = None
    error: str | None = None

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED


@dataclass
class ContinuationResult:
    points: list[ContinuationPoint] = field(default_factory=list)
    oracle: tuple[ScalarField, ScalarField, ScalarField] | None = None

    @property
    def lambdas(self) -> list[float]:
        return [point.lam for point in self.points]

    @property
    def all_converged(self) -> bool:
        return all(point.converged for point in self.points)

    def column(self, name: str) -> list[float | None]:
        return [getattr(point, name) for point in self.points]

    def successive_u_distances(self) -> list[float | None]:
        """L2 distance between the states of consecutive lambdas; None next to a failed point."""
        distances: list[float | None] = []
        for previous, current in zip(self.points, self.points[1:]):
            if previous.u is None or current.u is None:
                distances.append(None)
            else:
                distances.append(l2_norm(current.u.with_values(current.u.values - previous.u.values)))
        return distances

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "lambda": point.lam,
                "cost": point.cost,
                "residual_h1": point.residual_h1,
                "weighted_residual": point.weighted_residual,
                "dist_u_oracle": point.dist_u_oracle,
                "dist_v_oracle": point.dist_v_oracle,
            }
            for point in self.points
        ]
        return pd.DataFrame(rows, columns=CONTINUATION_COLUMNS)

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, na_rep="")
        return path


def validate_lambdas(lambdas: Sequence[float]) -> tuple[float, ...]:
    """Check that the sweep is non-empty, positive and strictly increasing."""
    values = tuple(float(lam) for lam in lambdas)
    if not values:
        raise InvalidProblemError("lambda sweep is empty")
    if not all(np.isfinite(lam) and lam > 0 for lam in values):
        raise InvalidProblemError(f"lambda values must be positive and finite, got {list(values)}")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidProblemError(f"lambda sweep must be strictly increasing, got {list(values)}")
    return values


def weighted_residual(w: ScalarField, lam: float, K: StiffnessSystem) -> float:
    """lam * (|grad w|^2 + |w|^2), the scaled squared H1 norm of the defect."""
    return lam * (max(0.0, K.energy(w.values)) + K.h**2 * float(np.dot(w.values, w.values)))


def _solve_one(
    spec: ProblemSpec,
    opts: DescentOptions,
    barrier_opts: BarrierOptions,
    init: FieldPair | None,
    K: StiffnessSystem,
) -> DescentState:
    if spec.constrained:
        state, _, _, _ = run_barrier(spec, barrier_opts, init, K)
    else:
        state, _ = run_descent(spec, opts, init, K)
    return state


def _point(
    spec: ProblemSpec,
    state: DescentState,
    K: StiffnessSystem,
    oracle: tuple[ScalarField, ScalarField, ScalarField] | None,
) -> ContinuationPoint:
    dist_u = dist_v = None
    if oracle is not None:
        u_oracle, v_oracle, _ = oracle
        dist_u = l2_norm(state.u.with_values(state.u.values - u_oracle.values))
        dist_v = l2_norm(state.v.with_values(state.v.values - v_oracle.values))
    return ContinuationPoint(
        lam=spec.lam,
        status=state.status,
        iterations=state.iter,
        u=state.u,
        v=state.v,
        cost=cost(state.u, state.v, state.w, spec, K),
        residual_h1=state.residual_h1,
        weighted_residual=weighted_residual(state.w, spec.lam, K),
        state_residual=state_residual(state.u, state.v, spec, K),
        dist_u_oracle=dist_u,
        dist_v_oracle=dist_v,
    )


def _guarded(
    spec: ProblemSpec,
    opts: DescentOptions,
    barrier_opts: BarrierOptions,
    init: FieldPair | None,
    K: StiffnessSystem,
    oracle: tuple[ScalarField, ScalarField, ScalarField] | None,
) -> ContinuationPoint:
    try:
        state = _solve_one(spec, opts, barrier_opts, init, K)
    except DefectControlError as e:
        logger.warning(f"lambda={spec.lam:g}: solve failed: {e}")
        return ContinuationPoint(lam=spec.lam, status=STATUS_FAILED, error=str(e))
    point = _point(spec, state, K, oracle)
    logger.info(
        f"lambda={spec.lam:g}: {point.status} after {point.iterations} iterations, "
        f"|grad w|={point.residual_h1:.4e} weighted={point.weighted_residual:.4e}"
    )
    return point


def run_continuation(
    spec: ProblemSpec,
    lambdas: Sequence[float] = DEFAULT_LAMBDA_SWEEP,
    opts: DescentOptions | None = None,
    *,
    barrier_opts: BarrierOptions | None = None,
    independent: bool = False,
    workers: int | None = None,
    K: StiffnessSystem | None = None,
) -> ContinuationResult:
    """
    Solve ``spec`` for each lambda of the sweep.

    Args:
        spec: Problem; its own lambda is replaced by each sweep value
        lambdas: Strictly increasing positive values
        opts: Descent settings (inner settings for constrained problems
            unless ``barrier_opts`` is given)
        barrier_opts: Outer settings for constrained problems
        independent: Cold-start every lambda and run them in a thread pool
        workers: Pool size for independent mode
        K: Stiffness system; independent mode gives each task its own copy

    Returns:
        ContinuationResult ordered by lambda. A failed solve is recorded with
        status "failed" and the sweep goes on from the last good solution.
    """
    sweep = validate_lambdas(lambdas)
    opts = opts or DescentOptions()
    barrier_opts = barrier_opts or BarrierOptions(inner=opts)
    K = K or StiffnessSystem.assemble(spec.grid)

    oracle = None
    if oracle_applies(spec):
        oracle = classical_kkt_solve(spec)
    else:
        logger.info(f"oracle comparison skipped for phi={spec.phi.describe()} mu={spec.mu:g}")

    result = ContinuationResult(oracle=oracle)

    if independent:
        specs = [spec.with_lambda(lam) for lam in sweep]
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    _guarded,
                    task_spec,
                    opts,
                    barrier_opts,
                    None,
                    StiffnessSystem.assemble(spec.grid, K.method, K.tol, K.max_iter),
                    oracle,
                )
                for task_spec in specs
            ]
            result.points = [future.result() for future in futures]
        return result

    init: FieldPair | None = None
    for lam in sweep:
        point = _guarded(spec.with_lambda(lam), opts, barrier_opts, init, K, oracle)
        result.points.append(point)
        if point.u is not None and point.v is not None:
            init = (point.u, point.v)

    residuals = [p.residual_h1 for p in result.points if p.u is not None]
    if any(b >= a for a, b in zip(residuals, residuals[1:])):
        logger.warning("defect residual is not strictly decreasing along the sweep")
    return result

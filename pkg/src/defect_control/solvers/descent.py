"""
Steepest descent for the unconstrained defect-regularized problem.

Each iteration solves two stiffness systems for the direction (U, V) and the
linearized defect W, takes the step that minimizes the quadratic model of the
cost along (U, V), and re-solves the defect at the new pair. For affine phi
the model is exact.
"""

import dataclasses
import logging
from dataclasses import dataclass

import numpy as np

from defect_control.config import BACKTRACK_FACTOR, GRAD_TOL, MAX_ITERS, MIN_STEP
from defect_control.errors import DegenerateDirectionError, InvalidProblemError
from defect_control.model.defect import cost, residual_h1, solve_defect, solve_perturbation
from defect_control.model.problem import ProblemSpec
from defect_control.numerics.fields import ScalarField, check_same_grid
from defect_control.numerics.linalg import StiffnessSystem
from defect_control.reporting import (
    STATUS_CONVERGED,
    STATUS_ITERATION_LIMIT,
    STATUS_RUNNING,
    STATUS_STALLED,
    IterationRecord,
    RunReport,
)

logger = logging.getLogger(__name__)

FieldPair = tuple[ScalarField, ScalarField]


@dataclass
class DescentOptions:
    """Stopping and safeguard settings shared by both descent loops."""

    grad_tol: float = GRAD_TOL
    max_iters: int = MAX_ITERS
    safeguard: bool = True
    backtrack_factor: float = BACKTRACK_FACTOR
    min_step: float = MIN_STEP

    def __post_init__(self) -> None:
        if not self.grad_tol > 0:
            raise ValueError(f"grad_tol must be positive, got {self.grad_tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError(f"backtrack_factor must lie in (0, 1), got {self.backtrack_factor}")
        if not self.min_step > 0:
            raise ValueError(f"min_step must be positive, got {self.min_step}")


@dataclass(frozen=True)
class DescentState:
    """An iterate (u, v) with its defect w and the quantities logged for it."""

    iter: int
    u: ScalarField
    v: ScalarField
    w: ScalarField
    cost: float
    grad_norm_sq: float
    eps: float
    residual_h1: float
    status: str = STATUS_RUNNING

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED

    @property
    def grad_norm(self) -> float:
        return float(np.sqrt(self.grad_norm_sq))

    def record(self) -> IterationRecord:
        return IterationRecord(
            iter=self.iter,
            cost=self.cost,
            grad_norm=self.grad_norm,
            eps=self.eps,
            residual_h1=self.residual_h1,
        )


def _control_weight(spec: ProblemSpec) -> float:
    return 0.0 if spec.constrained else spec.mu


def direction_u(u: ScalarField, w: ScalarField, spec: ProblemSpec, K: StiffnessSystem) -> ScalarField:
    """U with K U = lam K w - h^2 (u - ubar) + lam h^2 phi'(u) w."""
    check_same_grid(spec.target, u, w)
    h2 = spec.h**2
    rhs = (
        spec.lam * K.apply(w.values)
        - h2 * (u.values - spec.target.values)
        + spec.lam * h2 * spec.phi.deriv(u.values) * w.values
    )
    return u.with_values(K.solve(rhs))


def direction_v(v: ScalarField, w: ScalarField, spec: ProblemSpec) -> ScalarField:
    """V = -(mu v + lam w)."""
    check_same_grid(v, w)
    return v.with_values(-(spec.mu * v.values + spec.lam * w.values))


def gradient_norm_sq(U: ScalarField, V: ScalarField, K: StiffnessSystem) -> float:
    """||(U, V)||^2 = |grad U|^2 + |V|^2 in the discrete norms."""
    return max(0.0, K.energy(U.values)) + K.h**2 * float(np.dot(V.values, V.values))


def directional_derivative(
    u: ScalarField,
    v: ScalarField,
    w: ScalarField,
    U: ScalarField,
    V: ScalarField,
    W: ScalarField,
    spec: ProblemSpec,
    K: StiffnessSystem,
) -> float:
    """Derivative of the cost at (u, v) along (U, V); W is the linearized defect."""
    check_same_grid(spec.target, u, v, w, U, V, W)
    h2 = spec.h**2
    tracking = h2 * float(np.dot(u.values - spec.target.values, U.values))
    control = _control_weight(spec) * h2 * float(np.dot(v.values, V.values))
    return tracking + control + spec.lam * K.energy(w.values, W.values)


def step_size(
    u: ScalarField,
    v: ScalarField,
    w: ScalarField,
    U: ScalarField,
    V: ScalarField,
    W: ScalarField,
    spec: ProblemSpec,
    K: StiffnessSystem,
) -> float:
    """
    Minimizer of the quadratic model of the cost along (U, V).

    eps = -[(u - ubar).U + mu v.V + lam grad w . grad W] / [U.U + mu V.V + lam |grad W|^2],
    all integrals in the lumped-mass discretization.

    Raises:
        DegenerateDirectionError: If the denominator is not a positive finite number
    """
    h2 = spec.h**2
    numerator = directional_derivative(u, v, w, U, V, W, spec, K)
    denominator = (
        h2 * float(np.dot(U.values, U.values))
        + _control_weight(spec) * h2 * float(np.dot(V.values, V.values))
        + spec.lam * K.energy(W.values)
    )
    if not np.isfinite(denominator) or denominator <= 0.0:
        raise DegenerateDirectionError(
            f"step-size denominator is {denominator!r}; the direction (U, V) is degenerate"
        )
    return -numerator / denominator


def _initial_pair(spec: ProblemSpec, init: FieldPair | None) -> FieldPair:
    if init is None:
        return ScalarField.zeros(spec.grid), ScalarField.zeros(spec.grid)
    u0, v0 = init
    check_same_grid(spec.target, u0, v0)
    return u0, v0


def _take_step(
    u: ScalarField,
    v: ScalarField,
    U: ScalarField,
    V: ScalarField,
    eps: float,
    current_cost: float,
    spec: ProblemSpec,
    opts: DescentOptions,
    K: StiffnessSystem,
) -> tuple[ScalarField, ScalarField, ScalarField, float, float] | None:
    """Move along (U, V); with the safeguard on, shrink eps until the cost does not increase."""
    while True:
        u_next = u.with_values(u.values + eps * U.values)
        v_next = v.with_values(v.values + eps * V.values)
        w_next = solve_defect(u_next, v_next, spec, K)
        next_cost = cost(u_next, v_next, w_next, spec, K)
        if not opts.safeguard or next_cost <= current_cost:
            return u_next, v_next, w_next, next_cost, eps
        eps *= opts.backtrack_factor
        if eps < opts.min_step:
            return None


def run_descent(
    spec: ProblemSpec,
    opts: DescentOptions | None = None,
    init: FieldPair | None = None,
    K: StiffnessSystem | None = None,
) -> tuple[DescentState, RunReport[IterationRecord]]:
    """
    Run steepest descent from ``init`` (zero fields by default).

    Args:
        spec: Unconstrained problem
        opts: Stopping and safeguard settings
        init: Starting pair (u0, v0)
        K: Stiffness system of ``spec.grid``; assembled with CG solves if omitted

    Returns:
        The final state and the per-iteration log. Row j of the log is
        iterate j together with the step that produced it.

    Raises:
        InvalidProblemError: If ``spec`` is constrained
        DegenerateDirectionError: If a step-size denominator vanishes
        SolverIterationLimitError: If a linear solve fails
    """
    if spec.constrained:
        raise InvalidProblemError("run_descent handles unconstrained problems; use run_barrier")
    opts = opts or DescentOptions()
    K = K or StiffnessSystem.assemble(spec.grid)
    h2 = spec.h**2

    u, v = _initial_pair(spec, init)
    w = solve_defect(u, v, spec, K)
    current_cost = cost(u, v, w, spec, K)
    eps = 0.0
    report: RunReport[IterationRecord] = RunReport()
    logger.info(
        f"descent: n={spec.grid.n} phi={spec.phi.describe()} mu={spec.mu:g} lambda={spec.lam:g}"
    )

    iteration = 0
    while True:
        U = direction_u(u, w, spec, K)
        V = direction_v(v, w, spec)
        grad_sq = gradient_norm_sq(U, V, K)
        state = DescentState(
            iter=iteration,
            u=u,
            v=v,
            w=w,
            cost=current_cost,
            grad_norm_sq=grad_sq,
            eps=eps,
            residual_h1=residual_h1(w, K),
        )
        report.append(state.record())
        logger.debug(
            f"iter {iteration}: cost={current_cost:.10g} |grad|={state.grad_norm:.3e} "
            f"eps={eps:.3e} |grad w|={state.residual_h1:.3e}"
        )

        if grad_sq <= opts.grad_tol**2:
            report.status = STATUS_CONVERGED
            break
        if iteration >= opts.max_iters:
            report.status = STATUS_ITERATION_LIMIT
            logger.warning(f"descent stopped at the iteration limit ({opts.max_iters})")
            break

        W = solve_perturbation(u, U, V, spec, K)
        eps = step_size(u, v, w, U, V, W, spec, K)
        if not eps > 0.0:
            report.status = STATUS_STALLED
            logger.warning(f"non-positive step {eps:.3e} at iteration {iteration}; stopping")
            break

        accepted = _take_step(u, v, U, V, eps, current_cost, spec, opts, K)
        if accepted is None:
            report.status = STATUS_STALLED
            logger.warning(
                f"line search stalled at iteration {iteration}: "
                f"no decrease for steps down to {opts.min_step:g}"
            )
            break

        u, v, w, current_cost, eps = accepted
        iteration += 1

    final = dataclasses.replace(state, status=report.status)
    logger.info(
        f"descent {report.status} after {final.iter} iterations: cost={final.cost:.10g} "
        f"|grad w|={final.residual_h1:.6g}"
    )
    return final, report

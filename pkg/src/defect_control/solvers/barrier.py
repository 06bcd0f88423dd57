"""
Exponential-barrier method for the constrained problem u <= 0, v_lower <= v <= v_upper.

Outer iteration j minimizes

    1/2|u - ubar|^2 + lam/2|grad w|^2
        + sum over nodes of exp(a u) + exp(b_lower (v_lower - v)) + exp(b_upper (v - v_upper))

with the multipliers of iteration j - 1, then rescales each multiplier by the
exponential of its own barrier argument. The products a u, b_lower (v_lower - v)
and b_upper (v - v_upper) vanish in the limit and serve as convergence
certificates.
"""

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np

from defect_control.config import (
    ARMIJO_C1,
    BARRIER_INIT,
    CERTIFICATE_MODES,
    EXP_CLAMP,
    MAX_OUTER,
    MULTIPLIER_CEILING,
    MULTIPLIER_FLOOR,
    OUTER_TOL,
)
from defect_control.errors import DegenerateDirectionError, InvalidProblemError
from defect_control.model.defect import cost, residual_h1, solve_defect, solve_perturbation
from defect_control.model.problem import ProblemSpec
from defect_control.numerics.fields import ScalarField, check_same_grid
from defect_control.numerics.grid import Grid
from defect_control.numerics.linalg import StiffnessSystem
from defect_control.reporting import (
    STATUS_CONVERGED,
    STATUS_ITERATION_LIMIT,
    STATUS_RUNNING,
    STATUS_STALLED,
    IterationRecord,
    OuterRecord,
    RunReport,
)
from defect_control.solvers.descent import DescentOptions, DescentState, FieldPair, gradient_norm_sq

logger = logging.getLogger(__name__)


def clamped_exp(argument: np.ndarray) -> np.ndarray:
    """exp with its argument clipped to [-EXP_CLAMP, EXP_CLAMP]."""
    return np.exp(np.clip(argument, -EXP_CLAMP, EXP_CLAMP))


def clamped_exp_slope(argument: np.ndarray) -> np.ndarray:
    """Derivative of clamped_exp: exp inside the clamp, zero where the argument is clipped."""
    inside = np.abs(argument) <= EXP_CLAMP
    return np.where(inside, clamped_exp(argument), 0.0)


@dataclass(frozen=True)
class BarrierMultipliers:
    """Pointwise multipliers of the state constraint and the two control bounds."""

    a: ScalarField
    b_lower: ScalarField
    b_upper: ScalarField

    def __post_init__(self) -> None:
        check_same_grid(self.a, self.b_lower, self.b_upper)
        for name in ("a", "b_lower", "b_upper"):
            values = getattr(self, name).values
            if not np.all(values > 0.0):
                raise InvalidProblemError(f"multiplier {name} must be strictly positive everywhere")

    @classmethod
    def constant(cls, grid: Grid, value: float = BARRIER_INIT) -> "BarrierMultipliers":
        field_ = ScalarField.constant(grid, value)
        return cls(a=field_, b_lower=field_, b_upper=field_)


@dataclass(frozen=True)
class CertificateReport:
    """The three certificate products of an outer iteration and their sup-norms."""

    state: ScalarField
    lower: ScalarField
    upper: ScalarField

    @staticmethod
    def _positive_sup(product: ScalarField) -> float:
        return max(0.0, float(np.max(product.values)))

    @property
    def p_state(self) -> float:
        return self._positive_sup(self.state)

    @property
    def p_lower(self) -> float:
        return self._positive_sup(self.lower)

    @property
    def p_upper(self) -> float:
        return self._positive_sup(self.upper)

    @property
    def abs_state(self) -> float:
        return self.state.sup_norm()

    @property
    def abs_lower(self) -> float:
        return self.lower.sup_norm()

    @property
    def abs_upper(self) -> float:
        return self.upper.sup_norm()

    def measure(self, mode: str = "positive") -> float:
        """Largest certificate sup-norm under ``mode`` (positive, absolute or both)."""
        positive = max(self.p_state, self.p_lower, self.p_upper)
        absolute = max(self.abs_state, self.abs_lower, self.abs_upper)
        if mode == "positive":
            return positive
        if mode == "absolute":
            return absolute
        if mode == "both":
            return max(positive, absolute)
        raise ValueError(f"unknown certificate mode {mode!r}")


@dataclass
class BarrierOptions:
    """Outer-loop settings; ``inner`` drives each inner descent."""

    inner: DescentOptions = field(default_factory=DescentOptions)
    outer_tol: float = OUTER_TOL
    max_outer: int = MAX_OUTER
    barrier_init: float = BARRIER_INIT
    certificate_mode: str = "both"
    armijo_c1: float = ARMIJO_C1

    def __post_init__(self) -> None:
        if not self.outer_tol > 0:
            raise ValueError(f"outer_tol must be positive, got {self.outer_tol}")
        if self.max_outer < 1:
            raise ValueError(f"max_outer must be at least 1, got {self.max_outer}")
        if not self.barrier_init > 0:
            raise ValueError(f"barrier_init must be positive, got {self.barrier_init}")
        if self.certificate_mode not in CERTIFICATE_MODES:
            raise ValueError(
                f"certificate_mode must be one of {sorted(CERTIFICATE_MODES)}, got {self.certificate_mode!r}"
            )
        if not 0 < self.armijo_c1 < 1:
            raise ValueError(f"armijo_c1 must lie in (0, 1), got {self.armijo_c1}")

    def satisfied(self, cert: CertificateReport, violation_u: float, violation_v: float) -> bool:
        """Outer stop test: certificates under ``certificate_mode`` and both violations within outer_tol."""
        return (
            cert.measure(self.certificate_mode) <= self.outer_tol
            and violation_u <= self.outer_tol
            and violation_v <= self.outer_tol
        )


def _require_constrained(spec: ProblemSpec) -> tuple[np.ndarray, np.ndarray]:
    if not spec.constrained:
        raise InvalidProblemError("barrier operations need a constrained problem")
    lower, upper = spec.bounds()
    return lower.values, upper.values


def _barrier_arguments(
    u: ScalarField, v: ScalarField, mult: BarrierMultipliers, spec: ProblemSpec
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lower, upper = _require_constrained(spec)
    check_same_grid(spec.target, u, v, mult.a)
    return (
        mult.a.values * u.values,
        mult.b_lower.values * (lower - v.values),
        mult.b_upper.values * (v.values - upper),
    )


def barrier_cost(
    u: ScalarField,
    v: ScalarField,
    w: ScalarField,
    mult: BarrierMultipliers,
    spec: ProblemSpec,
    K: StiffnessSystem,
) -> float:
    """Constrained cost plus h^2 * sum of the three clamped exponentials."""
    s_state, s_lower, s_upper = _barrier_arguments(u, v, mult, spec)
    penalty = float(np.sum(clamped_exp(s_state) + clamped_exp(s_lower) + clamped_exp(s_upper)))
    return cost(u, v, w, spec, K) + spec.h**2 * penalty


def barrier_directions(
    u: ScalarField,
    v: ScalarField,
    w: ScalarField,
    mult: BarrierMultipliers,
    spec: ProblemSpec,
    K: StiffnessSystem,
) -> tuple[ScalarField, ScalarField]:
    """
    Steepest-descent direction of the barrier cost.

    K U = lam K w - h^2 (u - ubar) + lam h^2 phi'(u) w - h^2 a exp(a u)
    V   = -(lam w - b_lower exp(b_lower (v_lower - v)) + b_upper exp(b_upper (v - v_upper)))
    """
    s_state, s_lower, s_upper = _barrier_arguments(u, v, mult, spec)
    check_same_grid(u, w)
    h2 = spec.h**2
    rhs = (
        spec.lam * K.apply(w.values)
        - h2 * (u.values - spec.target.values)
        + spec.lam * h2 * spec.phi.deriv(u.values) * w.values
        - h2 * mult.a.values * clamped_exp_slope(s_state)
    )
    U = u.with_values(K.solve(rhs))
    V = v.with_values(
        -(
            spec.lam * w.values
            - mult.b_lower.values * clamped_exp_slope(s_lower)
            + mult.b_upper.values * clamped_exp_slope(s_upper)
        )
    )
    return U, V


def _model_curvature(
    u: ScalarField,
    v: ScalarField,
    U: ScalarField,
    V: ScalarField,
    W: ScalarField,
    mult: BarrierMultipliers,
    spec: ProblemSpec,
    K: StiffnessSystem,
) -> float:
    """Second derivative of the barrier cost along (U, V) at step zero."""
    s_state, s_lower, s_upper = _barrier_arguments(u, v, mult, spec)
    h2 = spec.h**2
    quadratic = h2 * float(np.dot(U.values, U.values)) + spec.lam * K.energy(W.values)
    exponential = h2 * float(
        np.sum(
            mult.a.values**2 * clamped_exp_slope(s_state) * U.values**2
            + (
                mult.b_lower.values**2 * clamped_exp_slope(s_lower)
                + mult.b_upper.values**2 * clamped_exp_slope(s_upper)
            )
            * V.values**2
        )
    )
    return quadratic + exponential


def inner_solve(
    spec: ProblemSpec,
    mult: BarrierMultipliers,
    opts: DescentOptions,
    init: FieldPair,
    K: StiffnessSystem,
    armijo_c1: float = ARMIJO_C1,
    report: RunReport[IterationRecord] | None = None,
) -> DescentState:
    """
    Minimize the barrier cost for fixed multipliers by Armijo descent.

    The first trial step minimizes the quadratic model of the barrier cost
    along (U, V); it is shrunk by ``opts.backtrack_factor`` until the
    sufficient-decrease test holds. When ``report`` is given, every accepted
    iterate is appended to it with its barrier cost.

    Returns:
        The last accepted state; ``iter`` counts the accepted steps and
        ``status`` is converged, iteration_limit or stalled
    """
    _require_constrained(spec)
    u, v = init
    check_same_grid(spec.target, u, v)
    w = solve_defect(u, v, spec, K)
    current = barrier_cost(u, v, w, mult, spec, K)
    alpha = 0.0
    status = STATUS_RUNNING
    iteration = 0

    while True:
        U, V = barrier_directions(u, v, w, mult, spec, K)
        grad_sq = gradient_norm_sq(U, V, K)
        logger.debug(
            f"inner {iteration}: barrier cost={current:.10g} |grad|={np.sqrt(grad_sq):.3e} step={alpha:.3e}"
        )
        if report is not None:
            report.append(
                IterationRecord(
                    iter=iteration,
                    cost=current,
                    grad_norm=float(np.sqrt(grad_sq)),
                    eps=alpha,
                    residual_h1=residual_h1(w, K),
                )
            )
        if grad_sq <= opts.grad_tol**2:
            status = STATUS_CONVERGED
            break
        if iteration >= opts.max_iters:
            status = STATUS_ITERATION_LIMIT
            break

        W = solve_perturbation(u, U, V, spec, K)
        slope = -grad_sq
        curvature = _model_curvature(u, v, U, V, W, mult, spec, K)
        if not np.isfinite(curvature) or curvature <= 0.0:
            raise DegenerateDirectionError(f"barrier model curvature is {curvature!r}")
        alpha = -slope / curvature

        while True:
            u_trial = u.with_values(u.values + alpha * U.values)
            v_trial = v.with_values(v.values + alpha * V.values)
            w_trial = solve_defect(u_trial, v_trial, spec, K)
            trial = barrier_cost(u_trial, v_trial, w_trial, mult, spec, K)
            if trial <= current + armijo_c1 * alpha * slope:
                break
            alpha *= opts.backtrack_factor
            if alpha < opts.min_step:
                status = STATUS_STALLED
                break
        if status == STATUS_STALLED:
            break

        u, v, w, current = u_trial, v_trial, w_trial, trial
        iteration += 1

    if report is not None:
        report.status = status
    return DescentState(
        iter=iteration,
        u=u,
        v=v,
        w=w,
        cost=current,
        grad_norm_sq=grad_sq,
        eps=alpha,
        residual_h1=residual_h1(w, K),
        status=status,
    )


def update_multipliers(
    mult: BarrierMultipliers, u: ScalarField, v: ScalarField, spec: ProblemSpec
) -> BarrierMultipliers:
    """Rescale every multiplier by the exponential of its barrier argument.

    Results are clipped to [MULTIPLIER_FLOOR, MULTIPLIER_CEILING] so they stay
    positive and finite.
    """
    s_state, s_lower, s_upper = _barrier_arguments(u, v, mult, spec)

    def rescale(current: ScalarField, argument: np.ndarray) -> ScalarField:
        updated = current.values * clamped_exp(argument)
        return current.with_values(np.clip(updated, MULTIPLIER_FLOOR, MULTIPLIER_CEILING))

    return BarrierMultipliers(
        a=rescale(mult.a, s_state),
        b_lower=rescale(mult.b_lower, s_lower),
        b_upper=rescale(mult.b_upper, s_upper),
    )


def certificates(
    mult: BarrierMultipliers, u: ScalarField, v: ScalarField, spec: ProblemSpec
) -> CertificateReport:
    """Products a u, b_lower (v_lower - v), b_upper (v - v_upper) for the multipliers that produced (u, v)."""
    s_state, s_lower, s_upper = _barrier_arguments(u, v, mult, spec)
    return CertificateReport(
        state=u.with_values(s_state),
        lower=v.with_values(s_lower),
        upper=v.with_values(s_upper),
    )


def constraint_violation(u: ScalarField, v: ScalarField, spec: ProblemSpec) -> tuple[float, float]:
    """(max positive part of u, max violation of the control box)."""
    lower, upper = _require_constrained(spec)
    violation_u = max(0.0, float(np.max(u.values)))
    violation_v = max(0.0, float(np.max(lower - v.values)), float(np.max(v.values - upper)))
    return violation_u, violation_v


def bang_bang_control(w: ScalarField, spec: ProblemSpec) -> ScalarField:
    """
    Box control minimizing lam * integral of V w over v_lower <= V <= v_upper.

    V = v_lower where w > 0, v_upper where w < 0 and the midpoint where w = 0.
    """
    lower, upper = _require_constrained(spec)
    check_same_grid(spec.target, w)
    midpoint = 0.5 * (upper + lower)
    half_width = 0.5 * (upper - lower)
    return w.with_values(midpoint - np.sign(w.values) * half_width)


def variational_gap(v: ScalarField, w: ScalarField, spec: ProblemSpec) -> float:
    """
    h^2 * sum lam w (v - V) with V the bang-bang control of w.

    Non-negative for feasible v; zero exactly when v is optimal for the fixed state.
    """
    check_same_grid(v, w)
    V = bang_bang_control(w, spec)
    return float(spec.h**2 * spec.lam * np.dot(w.values, v.values - V.values))


def run_barrier(
    spec: ProblemSpec,
    opts: BarrierOptions | None = None,
    init: FieldPair | None = None,
    K: StiffnessSystem | None = None,
) -> tuple[DescentState, BarrierMultipliers, CertificateReport, RunReport[OuterRecord]]:
    """
    Alternate inner solves and multiplier updates until the certificates and
    the constraint violations are all within ``opts.outer_tol``.

    On inactive nodes the products shrink only like 1/j under the
    multiplicative update, so reaching outer_tol = 1e-3 in both certificate
    modes takes on the order of a thousand outer iterations.

    Args:
        spec: Constrained problem
        opts: Outer and inner settings
        init: Starting pair, zero fields by default
        K: Stiffness system of ``spec.grid``

    Returns:
        (final inner state, multipliers used for it, its certificates, outer log)
    """
    _require_constrained(spec)
    opts = opts or BarrierOptions()
    K = K or StiffnessSystem.assemble(spec.grid)
    if init is None:
        u, v = ScalarField.zeros(spec.grid), ScalarField.zeros(spec.grid)
    else:
        u, v = init
    mult = BarrierMultipliers.constant(spec.grid, opts.barrier_init)
    report: RunReport[OuterRecord] = RunReport()
    logger.info(
        f"barrier: n={spec.grid.n} lambda={spec.lam:g} init={opts.barrier_init:g} "
        f"outer_tol={opts.outer_tol:g} mode={opts.certificate_mode}"
    )

    for outer in range(1, opts.max_outer + 1):
        state = inner_solve(spec, mult, opts.inner, (u, v), K, opts.armijo_c1)
        if not state.converged:
            logger.warning(f"outer {outer}: inner solve ended with status {state.status}")

        report_cert = certificates(mult, state.u, state.v, spec)
        violation_u, violation_v = constraint_violation(state.u, state.v, spec)
        record = OuterRecord(
            outer_iter=outer,
            inner_iters=state.iter,
            cost=cost(state.u, state.v, state.w, spec, K),
            cert_state=report_cert.abs_state,
            cert_lower=report_cert.abs_lower,
            cert_upper=report_cert.abs_upper,
            max_violation_u=violation_u,
            max_violation_v=violation_v,
        )
        report.append(record)
        measure = report_cert.measure(opts.certificate_mode)
        logger.info(
            f"outer {outer}: inner={state.iter} cost={record.cost:.8g} certificate={measure:.3e} "
            f"violation u={violation_u:.2e} v={violation_v:.2e}"
        )

        if opts.satisfied(report_cert, violation_u, violation_v):
            report.status = STATUS_CONVERGED
            break
        if outer == opts.max_outer:
            report.status = STATUS_ITERATION_LIMIT
            logger.warning(f"barrier stopped at the outer iteration limit ({opts.max_outer})")
            break

        mult = update_multipliers(mult, state.u, state.v, spec)
        u, v = state.u, state.v

    final = dataclasses.replace(state, status=report.status)
    return final, mult, report_cert, report

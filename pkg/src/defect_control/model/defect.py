"""
Defect solves, cost evaluation and optimality diagnostics.

Discrete conventions: fields are nodal vectors, integrals use the lumped mass
h^2 * sum, and -laplacian maps to K / h^2 with K the unscaled stiffness
matrix. The defect equation becomes K(u + w) + h^2 (phi(u) - v) = 0.
"""

import logging
from dataclasses import dataclass

import numpy as np

from defect_control.model.problem import ProblemSpec
from defect_control.numerics.fields import ScalarField, check_same_grid
from defect_control.numerics.linalg import StiffnessSystem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KktResidual:
    """L2-type norms of the two stationarity conditions of the relaxed problem."""

    stationarity_u: float
    stationarity_v: float

    @property
    def worst(self) -> float:
        return max(self.stationarity_u, self.stationarity_v)


def _check(spec: ProblemSpec, *fields: ScalarField) -> None:
    check_same_grid(spec.target, *fields)


def solve_defect(
    u: ScalarField, v: ScalarField, spec: ProblemSpec, K: StiffnessSystem
) -> ScalarField:
    """w with K w = h^2 (v - phi(u)) - K u."""
    _check(spec, u, v)
    h2 = spec.h**2
    rhs = h2 * (v.values - spec.phi(u.values)) - K.apply(u.values)
    return u.with_values(K.solve(rhs))


def solve_perturbation(
    u: ScalarField, U: ScalarField, V: ScalarField, spec: ProblemSpec, K: StiffnessSystem
) -> ScalarField:
    """Linearized defect W with K W = h^2 (V - phi'(u) U) - K U."""
    _check(spec, u, U, V)
    h2 = spec.h**2
    rhs = h2 * (V.values - spec.phi.deriv(u.values) * U.values) - K.apply(U.values)
    return U.with_values(K.solve(rhs))


def cost(
    u: ScalarField, v: ScalarField, w: ScalarField, spec: ProblemSpec, K: StiffnessSystem
) -> float:
    """
    Relaxed cost 1/2|u - ubar|^2 + mu/2|v|^2 + lam/2 w^T K w.

    The constrained problem carries no control cost, so the mu term is dropped
    when ``spec.constrained`` is set.
    """
    _check(spec, u, v, w)
    h2 = spec.h**2
    tracking = 0.5 * h2 * float(np.sum((u.values - spec.target.values) ** 2))
    control = 0.0 if spec.constrained else 0.5 * spec.mu * h2 * float(np.sum(v.values**2))
    defect = 0.5 * spec.lam * K.energy(w.values)
    return tracking + control + defect


def residual_h1(w: ScalarField, K: StiffnessSystem) -> float:
    """sqrt(w^T K w), the L2 norm of grad w."""
    return float(np.sqrt(max(0.0, K.energy(w.values))))


def kkt_residual(
    u: ScalarField, v: ScalarField, w: ScalarField, spec: ProblemSpec, K: StiffnessSystem
) -> KktResidual:
    """
    Residuals of u - lam phi'(u) w = ubar - lam laplacian(w) and mu v + lam w = 0.

    The first condition reads h^2 (u - ubar - lam phi'(u) w) - lam K w = 0 at
    the discrete level; its vector residual is divided by h so both numbers
    are L2-type and comparable across resolutions.
    """
    _check(spec, u, v, w)
    h = spec.h
    r_u = h**2 * (u.values - spec.target.values - spec.lam * spec.phi.deriv(u.values) * w.values)
    r_u -= spec.lam * K.apply(w.values)
    r_v = spec.mu * v.values + spec.lam * w.values
    return KktResidual(
        stationarity_u=float(np.linalg.norm(r_u) / h),
        stationarity_v=float(h * np.linalg.norm(r_v)),
    )


def state_residual(
    u: ScalarField, v: ScalarField, spec: ProblemSpec, K: StiffnessSystem
) -> float:
    """L2 norm of the exact-law residual -laplacian(u) + phi(u) - v (no defect)."""
    _check(spec, u, v)
    h = spec.h
    pointwise = K.apply(u.values) / h**2 + spec.phi(u.values) - v.values
    return float(h * np.linalg.norm(pointwise))

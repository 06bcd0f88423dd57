"""
Classical optimality system for affine phi, solved without the defect machinery.

With phi(u) = c0 + c1 u and A = K + c1 h^2 I the discrete classical problem is

    minimize 1/2 h^2 |u - ubar|^2 + mu/2 h^2 |v|^2   subject to   A u = h^2 (v - c0)

Eliminating v = A u / h^2 + c0 leaves the SPD system
(mu A^2 + h^4 I) u = h^4 ubar - mu h^2 c0 A 1. The adjoint solves
A p = -h^2 (u - ubar), and the gradient condition is mu v - p = 0.
"""

import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from defect_control.errors import InvalidProblemError
from defect_control.model.problem import ProblemSpec
from defect_control.numerics.fields import ScalarField
from defect_control.numerics.linalg import assemble_stiffness

logger = logging.getLogger(__name__)


def oracle_applies(spec: ProblemSpec) -> bool:
    """Whether classical_kkt_solve accepts ``spec``."""
    if spec.constrained or spec.mu <= 0 or not spec.phi.is_affine:
        return False
    return spec.phi.affine_coefficients[1] >= 0


def classical_kkt_solve(spec: ProblemSpec) -> tuple[ScalarField, ScalarField, ScalarField]:
    """
    Optimal state, control and adjoint of the classical problem.

    Raises:
        InvalidProblemError: Unless phi is affine with c1 >= 0, mu > 0 and the
            problem is unconstrained
    """
    if not oracle_applies(spec):
        raise InvalidProblemError(
            "the classical oracle needs an unconstrained problem with mu > 0 "
            f"and affine non-decreasing phi, got phi={spec.phi.describe()} mu={spec.mu:g}"
        )
    c0, c1 = spec.phi.affine_coefficients
    grid = spec.grid
    h2 = spec.h**2
    identity = sp.identity(grid.m, format="csr")
    A = (assemble_stiffness(grid) + c1 * h2 * identity).tocsr()

    system = (spec.mu * (A @ A) + h2**2 * identity).tocsc()
    rhs = h2**2 * spec.target.values - spec.mu * h2 * c0 * (A @ np.ones(grid.m))
    u = np.asarray(spsolve(system, rhs), dtype=np.float64)
    v = A @ u / h2 + c0
    p = np.asarray(spsolve(A.tocsc(), -h2 * (u - spec.target.values)), dtype=np.float64)

    logger.debug(
        f"oracle: n={grid.n} phi={spec.phi.describe()} mu={spec.mu:g} "
        f"|mu v - p|={np.linalg.norm(spec.mu * v - p):.3e}"
    )
    return (
        ScalarField(grid, u),
        ScalarField(grid, v),
        ScalarField(grid, p),
    )

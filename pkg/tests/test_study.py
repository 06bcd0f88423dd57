"""Tests for the classical oracle and the lambda-continuation study."""

import numpy as np
import pytest

from defect_control.errors import InvalidProblemError
from defect_control.numerics.fields import ScalarField
from defect_control.numerics.grid import build_grid
from defect_control.numerics.linalg import StiffnessSystem, assemble_stiffness
from defect_control.solvers.barrier import BarrierOptions
from defect_control.solvers.descent import DescentOptions, run_descent
from defect_control.study.continuation import (
    CONTINUATION_COLUMNS,
    STATUS_FAILED,
    run_continuation,
    validate_lambdas,
    weighted_residual,
)
from defect_control.study.oracle import classical_kkt_solve, oracle_applies


class TestOracle:
    """Tests for classical_kkt_solve."""

    def test_zero_problem(self, make_spec):
        """phi = 0 with zero target gives the zero solution."""
        spec = make_spec(phi="affine(0,0)", target="zero")
        u, v, p = classical_kkt_solve(spec)
        for field in (u, v, p):
            np.testing.assert_allclose(field.values, 0.0, atol=1e-14)

    @pytest.mark.parametrize("phi", ["affine(-1,0)", "affine(0,1)", "affine(0.5,2)"])
    def test_optimality_system(self, make_spec, phi):
        """State equation, adjoint equation and mu v = p all hold."""
        spec = make_spec(phi=phi, mu=1e-2)
        u, v, p = classical_kkt_solve(spec)
        c0, c1 = spec.phi.affine_coefficients
        h2 = spec.h**2
        A = assemble_stiffness(spec.grid).toarray() + c1 * h2 * np.eye(spec.grid.m)

        np.testing.assert_allclose(A @ u.values, h2 * (v.values - c0), atol=1e-10)
        np.testing.assert_allclose(A @ p.values, -h2 * (u.values - spec.target.values), atol=1e-10)
        assert np.linalg.norm(spec.mu * v.values - p.values) <= 1e-8

    def test_matches_reduced_problem(self, make_spec):
        """On n = 4 the control solves the dense reduced normal equations."""
        spec = make_spec(n=4, phi="affine(-1,0)", mu=1.0)
        _, v, _ = classical_kkt_solve(spec)
        h2 = spec.h**2
        A = assemble_stiffness(spec.grid).toarray()
        B = h2 * np.linalg.inv(A)
        d = B @ np.ones(spec.grid.m)
        expected = np.linalg.solve(B.T @ B + spec.mu * np.eye(spec.grid.m), B.T @ (spec.target.values - d))
        np.testing.assert_allclose(v.values, expected, atol=1e-12)

    def test_reduced_cost_is_stationary(self, make_spec):
        """Perturbing the optimal control changes the reduced cost only to second order."""
        spec = make_spec(n=4, phi="affine(-1,0)", mu=1.0)
        _, v, _ = classical_kkt_solve(spec)
        h2 = spec.h**2
        A = assemble_stiffness(spec.grid).toarray()

        def reduced(values):
            u = np.linalg.solve(A, h2 * (values + 1.0))
            return 0.5 * h2 * np.sum((u - spec.target.values) ** 2) + 0.5 * spec.mu * h2 * np.sum(values**2)

        rng = np.random.default_rng(0)
        direction = rng.standard_normal(spec.grid.m)
        delta = 1e-4
        slope = (reduced(v.values + delta * direction) - reduced(v.values - delta * direction)) / (2 * delta)
        assert abs(slope) < 1e-9

    def test_applicability(self, make_spec):
        """Non-affine, decreasing, mu = 0 and constrained problems are refused."""
        assert oracle_applies(make_spec())
        for spec in (
            make_spec(phi="shifted_cubic"),
            make_spec(phi="affine(0,-1)"),
            make_spec(mu=0.0),
            make_spec(lower="constant:-3", upper="constant:5"),
        ):
            assert not oracle_applies(spec)
            with pytest.raises(InvalidProblemError):
                classical_kkt_solve(spec)


class TestContinuationHelpers:
    """Tests for validate_lambdas and weighted_residual."""

    @pytest.mark.parametrize("lambdas", [[], [1.0, 1.0], [10.0, 1.0], [0.0, 1.0], [-1.0], [1.0, float("inf")]])
    def test_invalid_sweeps(self, lambdas):
        """Empty, non-increasing or non-positive sweeps are rejected."""
        with pytest.raises(InvalidProblemError):
            validate_lambdas(lambdas)

    def test_valid_sweep(self):
        """A strictly increasing sweep is returned as floats."""
        assert validate_lambdas([1, 10, 100]) == (1.0, 10.0, 100.0)

    def test_weighted_residual(self, direct_system):
        """lam (w^T K w + h^2 |w|^2) for the constant field on n = 4."""
        grid = build_grid(4)
        one = ScalarField.constant(grid, 1.0)
        assert weighted_residual(one, 2.0, direct_system(grid)) == pytest.approx(2.0 * (12.0 + 9 / 16))


class TestRunContinuation:
    """Tests for run_continuation."""

    @pytest.fixture
    def descent_opts(self):
        return DescentOptions(grad_tol=1e-9, max_iters=50000)

    def test_defect_and_distance_shrink(self, make_spec, direct_system, descent_opts):
        """Warm-started sweep: residuals and the state distance to the oracle decrease with lambda."""
        spec = make_spec(n=8, phi="affine(-1,0)", mu=0.1)
        result = run_continuation(spec, [1.0, 10.0, 100.0], descent_opts, K=direct_system(spec.grid))

        assert result.lambdas == [1.0, 10.0, 100.0]
        assert result.oracle is not None
        for name in ("residual_h1", "weighted_residual", "state_residual", "dist_u_oracle"):
            values = result.column(name)
            assert all(b < a for a, b in zip(values, values[1:])), name

        frame = result.to_frame()
        assert list(frame.columns) == CONTINUATION_COLUMNS
        assert len(frame) == 3

    def test_cubic_sweep_settles(self, make_spec, direct_system, descent_opts):
        """For phi = (u - 2)^3 consecutive states move less as lambda grows, and the exact-law residual shrinks."""
        spec = make_spec(n=8, phi="shifted_cubic", mu=0.1)
        result = run_continuation(spec, [1.0, 10.0, 100.0], descent_opts, K=direct_system(spec.grid))

        assert result.oracle is None
        distances = result.successive_u_distances()
        assert len(distances) == 2
        assert distances[1] < distances[0]
        residuals = result.column("state_residual")
        assert all(b < a for a, b in zip(residuals, residuals[1:]))

    def test_independent_matches_cold_starts(self, make_spec, direct_system, descent_opts):
        """Independent mode reproduces separate cold-started runs."""
        spec = make_spec(n=4, mu=0.1)
        lambdas = [1.0, 10.0]
        result = run_continuation(
            spec, lambdas, descent_opts, independent=True, workers=2, K=direct_system(spec.grid)
        )
        for point, lam in zip(result.points, lambdas):
            state, _ = run_descent(spec.with_lambda(lam), descent_opts, K=direct_system(spec.grid))
            assert point.lam == lam
            np.testing.assert_allclose(point.u.values, state.u.values, atol=1e-12)
            np.testing.assert_allclose(point.v.values, state.v.values, atol=1e-12)

    def test_failed_lambda_is_recorded(self, make_spec):
        """A solver failure marks the point failed and the sweep continues."""
        spec = make_spec(n=8)
        K = StiffnessSystem.assemble(spec.grid, method="cg", tol=1e-14, max_iter=1)
        result = run_continuation(spec, [1.0, 10.0], K=K)
        assert [point.status for point in result.points] == [STATUS_FAILED, STATUS_FAILED]
        assert all(point.error for point in result.points)
        assert not result.all_converged

    def test_constrained_sweep_has_no_oracle(self, make_spec, direct_system, tmp_path):
        """Constrained problems use the barrier method and leave the distance columns empty."""
        spec = make_spec(
            n=4, phi="affine(0,0)", mu=0.0, target="scaled_minx", lower="constant:-3", upper="constant:5"
        )
        barrier_opts = BarrierOptions(inner=DescentOptions(max_iters=200), max_outer=2)
        result = run_continuation(
            spec, [0.1, 1.0], barrier_opts=barrier_opts, K=direct_system(spec.grid)
        )
        assert result.oracle is None
        assert result.column("dist_u_oracle") == [None, None]

        path = result.write_csv(tmp_path / "continuation.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(CONTINUATION_COLUMNS)
        assert lines[1].endswith(",,")

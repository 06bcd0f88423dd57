"""Tests for the defect-control command line."""

import json
import re

import pytest
from typer.testing import CliRunner

from defect_control import __version__
from defect_control.cli import app
from defect_control.numerics.fields import ScalarField
from defect_control.numerics.grid import build_grid
from defect_control.numerics.io import write_field_csv

runner = CliRunner()

SMALL_CONSTRAINED = [
    "--resolution", "4",
    "--target", "scaled_minx",
    "--lower-bound", "constant:-3",
    "--upper-bound", "constant:5",
    "--lambda", "0.1",
    "--mu", "0",
    "--linear-solver", "direct",
]


def _strip_ansi(text: str) -> str:
    """Remove ANSI escape codes from text."""
    return re.sub(r"\x1b\[[0-9;]*m", "", text)


def _json(result) -> dict:
    """Decode the JSON document printed by a command, skipping any log lines before it."""
    text = _strip_ansi(result.stdout)
    start = text.index("{")
    document, _ = json.JSONDecoder().raw_decode(text, start)
    return document


class TestCheckCommand:
    """Tests for the check command."""

    def test_constant_phi(self):
        """phi = -1 holds with witness l(u) = -1."""
        result = runner.invoke(app, ["check", "--phi", "affine(-1,0)", "-f", "json"])
        assert result.exit_code == 0
        output = _json(result)
        assert output["status"] == "success"
        assert output["existence_holds"] is True
        assert output["witness_slope"] == 0.0
        assert output["witness_intercept"] == -1.0

    def test_shifted_cubic(self):
        """The cubic example satisfies both hypotheses."""
        result = runner.invoke(app, ["check", "--phi", "shifted_cubic", "-f", "json"])
        assert result.exit_code == 0
        output = _json(result)
        assert output["existence_holds"] is True
        assert output["monotone"] is True

    def test_failing_hypothesis_is_advisory(self):
        """phi = -u^3 exits with the advisory code."""
        result = runner.invoke(app, ["check", "--phi", "polynomial(0,0,0,-1)"])
        assert result.exit_code == 3
        assert "fails" in _strip_ansi(result.stdout)

    def test_malformed_phi(self):
        """Unparseable phi is invalid input."""
        result = runner.invoke(app, ["check", "--phi", "exp(1)", "-f", "json"])
        assert result.exit_code == 1
        output = _json(result)
        assert output["status"] == "error"
        assert "phi" in output["message"]


class TestSolveCommand:
    """Tests for the solve command."""

    def test_resolution_too_small(self, tmp_path):
        """resolution 1 is rejected with the minimum in the message."""
        result = runner.invoke(app, ["solve", "--resolution", "1", "--out", str(tmp_path)])
        assert result.exit_code == 1
        assert "resolution must be ≥ 2" in _strip_ansi(result.stdout)

    def test_unknown_key(self, tmp_path):
        """Unknown override keys are invalid input."""
        result = runner.invoke(app, ["solve", "--colour", "blue", "--out", str(tmp_path), "-f", "json"])
        assert result.exit_code == 1
        assert "colour" in _json(result)["message"]

    def test_trivial_problem(self, tmp_path):
        """Zero target with phi = 0 stops at iteration 0 with zero cost."""
        args = ["solve", "--resolution", "4", "--phi", "affine(0,0)", "--target", "zero"]
        result = runner.invoke(app, args + ["--out", str(tmp_path), "-f", "json"])
        assert result.exit_code == 0
        output = _json(result)
        assert output["run_status"] == "converged"
        assert output["iterations"] == 0
        assert output["cost"] == 0.0
        for name in ("u", "v", "w", "log", "summary"):
            assert name in output["files"]

        assert (tmp_path / "log.csv").read_text().splitlines()[0] == "iter,cost,grad_norm,eps,residual_h1"
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["config"]["lambda"] == 1.0
        assert len((tmp_path / "u.csv").read_text().splitlines()) == 1 + 9

    def test_iteration_limit_exit_code(self, tmp_path):
        """Hitting max_iters exits with 2 and still writes the fields."""
        args = ["solve", "--resolution", "4", "--phi", "affine(-1,0)", "--max-iters", "2", "--grad-tol", "1e-14"]
        result = runner.invoke(app, args + ["--out", str(tmp_path)])
        assert result.exit_code == 2
        assert (tmp_path / "u.csv").exists()
        assert len((tmp_path / "log.csv").read_text().splitlines()) == 1 + 3

    def test_deterministic_output(self, tmp_path):
        """Two identical runs write identical fields."""
        args = ["solve", "--resolution", "6", "--phi", "affine(-1,0)", "--mu", "1e-2", "--max-iters", "50"]
        for name in ("first", "second"):
            runner.invoke(app, args + ["--out", str(tmp_path / name)])
        assert (tmp_path / "first" / "u.csv").read_bytes() == (tmp_path / "second" / "u.csv").read_bytes()

    def test_config_file_with_relative_target(self, tmp_path):
        """A target CSV next to the config file is found."""
        grid = build_grid(4)
        write_field_csv(tmp_path / "target.csv", ScalarField.zeros(grid))
        config = tmp_path / "run.conf"
        config.write_text("resolution = 4\nphi = affine(0,0)\ntarget = target.csv\n")
        result = runner.invoke(app, ["solve", "-c", str(config), "-o", str(tmp_path / "out"), "-f", "json"])
        assert result.exit_code == 0
        assert _json(result)["iterations"] == 0

    def test_text_output(self, tmp_path):
        """Text output shows the result table."""
        args = ["solve", "--resolution", "4", "--phi", "affine(0,0)", "--target", "zero"]
        result = runner.invoke(app, args + ["--out", str(tmp_path)])
        assert result.exit_code == 0
        assert "Descent result" in _strip_ansi(result.stdout)


class TestSolveConstrainedCommand:
    """Tests for the solve-constrained command."""

    def test_missing_bounds(self, tmp_path):
        """Constrained runs need both bounds."""
        result = runner.invoke(app, ["solve-constrained", "--resolution", "4", "--out", str(tmp_path), "-f", "json"])
        assert result.exit_code == 1
        assert "lower_bound" in _json(result)["message"]

    def test_crossing_bounds(self, tmp_path):
        """lower_bound above upper_bound is invalid input."""
        args = ["solve-constrained", "--resolution", "4", "--lower-bound", "constant:1", "--upper-bound", "constant:0"]
        result = runner.invoke(app, args + ["--out", str(tmp_path)])
        assert result.exit_code == 1

    def test_small_run_writes_all_files(self, tmp_path):
        """Fields, certificates, log and summary are written."""
        args = ["solve-constrained", *SMALL_CONSTRAINED, "--max-outer", "2", "--max-iters", "200"]
        result = runner.invoke(app, args + ["--out", str(tmp_path), "-f", "json"])
        assert result.exit_code in (0, 2)
        output = _json(result)
        assert output["outer_iterations"] <= 2
        assert len(output["certificates_positive"]) == 3
        assert output["multiplier_range"][0] > 0
        for name in ("u", "v", "w", "cert_a", "cert_bm", "cert_bp", "log"):
            assert (tmp_path / f"{name}.csv").exists()
        assert (tmp_path / "summary.json").exists()
        header = (tmp_path / "log.csv").read_text().splitlines()[0]
        assert header.startswith("outer_iter,inner_iters,cost,cert_state")


class TestContinuationCommand:
    """Tests for the continuation command."""

    def test_descending_sweep(self, tmp_path):
        """A non-increasing sweep is invalid input."""
        result = runner.invoke(app, ["continuation", "--lambda-sweep", "10,1", "--out", str(tmp_path)])
        assert result.exit_code == 1

    def test_single_lambda(self, tmp_path):
        """One lambda gives one CSV row with oracle distances."""
        args = [
            "continuation",
            "--resolution", "4",
            "--phi", "affine(-1,0)",
            "--mu", "0.1",
            "--lambda-sweep", "1",
            "--linear-solver", "direct",
            "--max-iters", "20000",
        ]
        result = runner.invoke(app, args + ["--out", str(tmp_path), "-f", "json"])
        assert result.exit_code in (0, 2)
        output = _json(result)
        assert output["lambdas"] == [1.0]
        assert output["dist_u_oracle"][0] is not None

        lines = (tmp_path / "continuation.csv").read_text().splitlines()
        assert lines[0] == "lambda,cost,residual_h1,weighted_residual,dist_u_oracle,dist_v_oracle"
        assert len(lines) == 2


class TestVersionCommand:
    """Tests for the version command."""

    def test_version(self):
        """version prints the package version."""
        result = runner.invoke(app, ["version"])
        assert result.exit_code == 0
        assert __version__ in result.stdout


@pytest.mark.parametrize("command", ["solve", "solve-constrained", "continuation", "check"])
def test_help(command):
    """Every command documents itself."""
    result = runner.invoke(app, [command, "--help"])
    assert result.exit_code == 0
    assert "--config" in _strip_ansi(result.stdout)

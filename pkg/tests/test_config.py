"""Tests for run configuration files and command-line overrides."""

import numpy as np
import pytest

from defect_control.config import (
    DEFAULT_LAMBDA_SWEEP,
    RunConfig,
    load_run_config,
    parse_config_text,
    parse_overrides,
)
from defect_control.errors import ConfigError, InvalidProblemError
from defect_control.numerics.fields import ScalarField
from defect_control.numerics.grid import build_grid
from defect_control.numerics.io import write_field_csv


class TestParseConfigText:
    """Tests for the key = value format."""

    def test_comments_and_blank_lines(self):
        """Comments and blank lines are ignored; keys are normalised."""
        text = "# linear case\n\nresolution = 16\nLinear-Solver = direct  # sparse LU\n"
        assert parse_config_text(text) == {"resolution": "16", "linear_solver": "direct"}

    def test_missing_equals(self):
        """A line without '=' names its line number."""
        with pytest.raises(ConfigError, match=":2:"):
            parse_config_text("mu = 1\nresolution 16\n", "run.conf")

    def test_duplicate_key(self):
        """Repeating a key is an error."""
        with pytest.raises(ConfigError, match="duplicate key 'mu'") as excinfo:
            parse_config_text("mu = 1\nmu = 2\n")
        assert excinfo.value.key == "mu"


class TestParseOverrides:
    """Tests for --key value overrides."""

    def test_both_spellings(self):
        """--key value and --key=value are accepted."""
        assert parse_overrides(["--mu", "1e-3", "--max-iters=50"]) == {"mu": "1e-3", "max_iters": "50"}

    def test_stray_value(self):
        """Values without a flag are rejected."""
        with pytest.raises(ConfigError, match="unexpected argument"):
            parse_overrides(["1e-3"])

    def test_missing_value(self):
        """A trailing flag without value is rejected."""
        with pytest.raises(ConfigError, match="missing value"):
            parse_overrides(["--mu"])


class TestLoadRunConfig:
    """Tests for load_run_config."""

    def test_defaults(self):
        """Without a file every field has its default."""
        config = load_run_config()
        assert config.resolution == 64
        assert config.phi == "affine(0,0)"
        assert config.lambda_sweep == list(DEFAULT_LAMBDA_SWEEP)
        assert config.base_dir is None

    def test_file_and_overrides(self, tmp_path):
        """Overrides win over the file, and lambda is accepted by its own name."""
        path = tmp_path / "run.conf"
        path.write_text("resolution = 16\nlambda = 10\nmu = 1e-2\nsafeguard = false\n")
        config = load_run_config(path, {"mu": "1e-3"})
        assert config.resolution == 16
        assert config.lambda_ == 10.0
        assert config.mu == 1e-3
        assert config.safeguard is False
        assert config.base_dir == tmp_path.resolve()

    def test_unknown_key(self):
        """Unknown keys are named in the error."""
        with pytest.raises(ConfigError, match="unknown configuration key 'colour'") as excinfo:
            load_run_config(overrides={"colour": "blue"})
        assert excinfo.value.key == "colour"

    def test_resolution_message(self):
        """resolution 1 reports the minimum."""
        with pytest.raises(ConfigError, match="resolution must be ≥ 2") as excinfo:
            load_run_config(overrides={"resolution": "1"})
        assert excinfo.value.key == "resolution"

    def test_lambda_error_uses_public_name(self):
        """Errors on lambda name 'lambda', not the attribute."""
        with pytest.raises(ConfigError, match="'lambda'") as excinfo:
            load_run_config(overrides={"lambda": "-1"})
        assert excinfo.value.key == "lambda"

    def test_bad_phi(self):
        """Malformed reaction terms are rejected at load time."""
        with pytest.raises(ConfigError) as excinfo:
            load_run_config(overrides={"phi": "exp(1)"})
        assert excinfo.value.key == "phi"

    def test_phi_is_normalised(self):
        """phi is stored in its canonical spelling."""
        assert load_run_config(overrides={"phi": "affine( -1 , 0 )"}).phi == "affine(-1,0)"

    def test_sweep_from_string(self):
        """A comma-separated sweep is split into floats."""
        config = load_run_config(overrides={"lambda_sweep": "1, 10,100"})
        assert config.lambda_sweep == [1.0, 10.0, 100.0]

    @pytest.mark.parametrize("sweep", ["10,1", "1,1", "0,1", ""])
    def test_bad_sweep(self, sweep):
        """Sweeps must be non-empty, positive and strictly increasing."""
        with pytest.raises(ConfigError) as excinfo:
            load_run_config(overrides={"lambda_sweep": sweep})
        assert excinfo.value.key == "lambda_sweep"

    def test_none_bound(self):
        """'none' clears an optional field."""
        assert load_run_config(overrides={"lower_bound": "none"}).lower_bound is None

    def test_missing_file(self, tmp_path):
        """An unreadable file is a ConfigError."""
        with pytest.raises(ConfigError, match="cannot read config file"):
            load_run_config(tmp_path / "missing.conf")


class TestRunConfigProblems:
    """Tests for building problems and solver settings from a RunConfig."""

    def test_unconstrained_problem(self):
        """The problem carries the configured weights and grid."""
        config = RunConfig(resolution=8, phi="affine(-1,0)", mu=1e-2, **{"lambda": 5.0})
        spec = config.to_problem()
        assert spec.grid.n == 8
        assert (spec.mu, spec.lam) == (1e-2, 5.0)
        assert not spec.constrained

    def test_constrained_needs_bounds(self):
        """A constrained run without lower_bound names the key."""
        config = RunConfig(resolution=8, upper_bound="constant:5")
        with pytest.raises(ConfigError) as excinfo:
            config.to_problem(constrained=True)
        assert excinfo.value.key == "lower_bound"

    def test_constrained_needs_affine_law(self):
        """Constrained runs refuse a cubic reaction term."""
        config = RunConfig(
            resolution=8, phi="shifted_cubic", lower_bound="constant:-3", upper_bound="constant:5"
        )
        with pytest.raises(ConfigError) as excinfo:
            config.to_problem(constrained=True)
        assert excinfo.value.key == "phi"

    def test_crossing_bounds(self):
        """lower_bound > upper_bound is an invalid problem."""
        config = RunConfig(resolution=8, lower_bound="constant:1", upper_bound="constant:0")
        with pytest.raises(InvalidProblemError):
            config.to_problem(constrained=True)

    def test_relative_target_path(self, tmp_path):
        """CSV references in a config file resolve against its directory."""
        grid = build_grid(4)
        write_field_csv(tmp_path / "data" / "target.csv", ScalarField.constant(grid, 0.25))
        path = tmp_path / "run.conf"
        path.write_text("resolution = 4\ntarget = data/target.csv\n")
        spec = load_run_config(path).to_problem()
        np.testing.assert_allclose(spec.target.values, 0.25)

    def test_unresolvable_target(self, tmp_path):
        """A missing target file names the key."""
        config = RunConfig(resolution=4, target="missing.csv").with_base_dir(tmp_path)
        with pytest.raises(ConfigError) as excinfo:
            config.to_problem()
        assert excinfo.value.key == "target"

    def test_initial_pair(self, tmp_path):
        """Only init_v given: u starts at zero."""
        grid = build_grid(4)
        write_field_csv(tmp_path / "v.csv", ScalarField.constant(grid, 2.0))
        config = RunConfig(resolution=4, init_v="v.csv").with_base_dir(tmp_path)
        u, v = config.initial_pair(grid)
        np.testing.assert_array_equal(u.values, 0.0)
        np.testing.assert_allclose(v.values, 2.0)
        assert RunConfig(resolution=4).initial_pair(grid) is None

    def test_solver_settings(self):
        """Descent, barrier and stiffness settings follow the config."""
        config = RunConfig(
            resolution=4, grad_tol=1e-5, max_iters=7, max_outer=3, certificate_mode="both", linear_solver="direct"
        )
        assert config.descent_options().max_iters == 7
        barrier = config.barrier_options()
        assert barrier.max_outer == 3
        assert barrier.inner.grad_tol == 1e-5
        assert barrier.certificate_mode == "both"
        assert config.stiffness(build_grid(4)).method == "direct"

"""Numerical defaults shared by the solvers, and the validated run configuration of the CLI."""

from pathlib import Path
from typing import TYPE_CHECKING, Any, Literal

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, field_validator

from defect_control.errors import ConfigError

if TYPE_CHECKING:
    from defect_control.model.problem import ProblemSpec
    from defect_control.numerics.fields import ScalarField
    from defect_control.numerics.grid import Grid
    from defect_control.numerics.linalg import StiffnessSystem
    from defect_control.solvers.barrier import BarrierOptions
    from defect_control.solvers.descent import DescentOptions

# Linear algebra
LINEAR_TOL: float = 1e-10
LINEAR_MAX_ITER_FACTOR: int = 10  # CG iteration cap = factor * number of unknowns
LINEAR_SOLVERS: frozenset[str] = frozenset({"cg", "direct"})

# Steepest descent (unconstrained problem)
GRAD_TOL: float = 1e-6
MAX_ITERS: int = 5000
BACKTRACK_FACTOR: float = 0.5
MIN_STEP: float = 1e-12

# Exponential barrier
EXP_CLAMP: float = 30.0
ARMIJO_C1: float = 1e-4
OUTER_TOL: float = 1e-3
MAX_OUTER: int = 2000
BARRIER_INIT: float = 0.1
MULTIPLIER_FLOOR: float = 1e-300
MULTIPLIER_CEILING: float = 1e100
CERTIFICATE_MODES: frozenset[str] = frozenset({"positive", "absolute", "both"})

# Continuation
DEFAULT_LAMBDA_SWEEP: tuple[float, ...] = (1.0, 10.0, 100.0, 1000.0, 10000.0)

# Hypothesis checks
HYPOTHESIS_RANGE: tuple[float, float] = (-10.0, 10.0)
HYPOTHESIS_SAMPLES: int = 2001
WITNESS_SLOPES: tuple[float, ...] = (-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0)
WITNESS_INTERCEPTS: tuple[float, ...] = (-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0)

# CSV output
CSV_FLOAT_FORMAT: str = "%.17g"


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------

DEFAULT_RESOLUTION: int = 64
DEFAULT_OUTPUT_DIR: str = "out"


class RunConfig(BaseModel):
    """Validated settings of one CLI run.

    Built from a flat ``key = value`` file and ``--key value`` overrides;
    unknown keys are rejected.
    """

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    resolution: int = Field(DEFAULT_RESOLUTION, description="Subdivisions per side, n >= 2")
    phi: str = Field("affine(0,0)", description="Reaction term")
    mu: float = Field(1e-4, ge=0, description="Tikhonov weight of the control")
    lambda_: float = Field(1.0, alias="lambda", gt=0, description="Weight of the defect penalty")
    target: str = Field("minx", description="Target state: built-in name or CSV path")
    lower_bound: str | None = Field(None, description="Lower control bound")
    upper_bound: str | None = Field(None, description="Upper control bound")

    grad_tol: float = Field(GRAD_TOL, gt=0)
    outer_tol: float = Field(OUTER_TOL, gt=0)
    linear_tol: float = Field(LINEAR_TOL, gt=0)
    linear_solver: Literal["cg", "direct"] = "cg"
    max_iters: int = Field(MAX_ITERS, ge=1)
    max_outer: int = Field(MAX_OUTER, ge=1)
    safeguard: bool = True
    backtrack_factor: float = Field(BACKTRACK_FACTOR, gt=0, lt=1)
    min_step: float = Field(MIN_STEP, gt=0)
    barrier_init: float = Field(BARRIER_INIT, gt=0)
    certificate_mode: Literal["positive", "absolute", "both"] = "both"

    lambda_sweep: list[float] = Field(default_factory=lambda: list(DEFAULT_LAMBDA_SWEEP))
    independent: bool = False
    workers: int | None = Field(None, ge=1)

    init_u: str | None = None
    init_v: str | None = None
    output_dir: str = DEFAULT_OUTPUT_DIR
    seed: int = 0

    _base_dir: Path | None = PrivateAttr(default=None)

    @field_validator("resolution")
    @classmethod
    def _check_resolution(cls, value: int) -> int:
        if value < 2:
            raise ValueError(f"resolution must be ≥ 2, got {value}")
        return value

    @field_validator("phi")
    @classmethod
    def _check_phi(cls, value: str) -> str:
        from defect_control.model.nonlinearity import Nonlinearity

        return Nonlinearity.parse(value).describe()

    @field_validator("lambda_sweep", mode="before")
    @classmethod
    def _split_sweep(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [part.strip() for part in value.strip("[] ").split(",") if part.strip()]
        return value

    @field_validator("lambda_sweep")
    @classmethod
    def _check_sweep(cls, value: list[float]) -> list[float]:
        if not value:
            raise ValueError("lambda_sweep is empty")
        if any(lam <= 0 for lam in value):
            raise ValueError(f"lambda_sweep values must be positive, got {value}")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError(f"lambda_sweep must be strictly increasing, got {value}")
        return value

    @field_validator("lower_bound", "upper_bound", "init_u", "init_v", mode="before")
    @classmethod
    def _none_string(cls, value: Any) -> Any:
        if isinstance(value, str) and value.strip().lower() in ("", "none"):
            return None
        return value

    @property
    def base_dir(self) -> Path | None:
        return self._base_dir

    def with_base_dir(self, base_dir: Path | None) -> "RunConfig":
        self._base_dir = base_dir
        return self

    def descent_options(self) -> "DescentOptions":
        from defect_control.solvers.descent import DescentOptions

        return DescentOptions(
            grad_tol=self.grad_tol,
            max_iters=self.max_iters,
            safeguard=self.safeguard,
            backtrack_factor=self.backtrack_factor,
            min_step=self.min_step,
        )

    def barrier_options(self) -> "BarrierOptions":
        from defect_control.solvers.barrier import BarrierOptions

        return BarrierOptions(
            inner=self.descent_options(),
            outer_tol=self.outer_tol,
            max_outer=self.max_outer,
            barrier_init=self.barrier_init,
            certificate_mode=self.certificate_mode,
        )

    def stiffness(self, grid: "Grid") -> "StiffnessSystem":
        from defect_control.numerics.linalg import StiffnessSystem

        return StiffnessSystem.assemble(grid, method=self.linear_solver, tol=self.linear_tol)

    def _field(self, key: str, reference: str, grid: "Grid") -> "ScalarField":
        from defect_control.model.targets import resolve_field

        try:
            return resolve_field(reference, grid, self._base_dir)
        except (OSError, ValueError) as e:
            raise ConfigError(f"invalid value for '{key}': {e}", key=key) from e

    def to_problem(self, constrained: bool = False) -> "ProblemSpec":
        """
        Build the problem described by this configuration.

        Raises:
            ConfigError: If a field reference cannot be resolved, or a
                constrained problem lacks bounds or has a non-affine law
            InvalidProblemError: If the assembled problem is inconsistent
        """
        from defect_control.model.nonlinearity import Nonlinearity
        from defect_control.model.problem import ProblemSpec
        from defect_control.numerics.grid import build_grid

        grid = build_grid(self.resolution)
        phi = Nonlinearity.parse(self.phi)
        target = self._field("target", self.target, grid)
        if not constrained:
            return ProblemSpec(grid=grid, target=target, phi=phi, mu=self.mu, lam=self.lambda_)

        if self.lower_bound is None:
            raise ConfigError("constrained runs need 'lower_bound'", key="lower_bound")
        if self.upper_bound is None:
            raise ConfigError("constrained runs need 'upper_bound'", key="upper_bound")
        if not phi.is_affine:
            raise ConfigError(
                f"constrained runs need an affine state law, got {phi.describe()}", key="phi"
            )
        return ProblemSpec(
            grid=grid,
            target=target,
            phi=phi,
            mu=self.mu,
            lam=self.lambda_,
            constrained=True,
            lower=self._field("lower_bound", self.lower_bound, grid),
            upper=self._field("upper_bound", self.upper_bound, grid),
        )

    def initial_pair(self, grid: "Grid") -> "tuple[ScalarField, ScalarField] | None":
        """Warm start from init_u / init_v; a missing one defaults to zero."""
        if self.init_u is None and self.init_v is None:
            return None
        from defect_control.numerics.fields import ScalarField

        u = self._field("init_u", self.init_u, grid) if self.init_u else ScalarField.zeros(grid)
        v = self._field("init_v", self.init_v, grid) if self.init_v else ScalarField.zeros(grid)
        return u, v


def _normalize_key(key: str) -> str:
    return key.strip().lstrip("-").strip().lower().replace("-", "_")


def _known_keys() -> set[str]:
    return {info.alias or name for name, info in RunConfig.model_fields.items()}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """
    Parse flat ``key = value`` lines. ``#`` starts a comment; blank lines are skipped.

    Raises:
        ConfigError: On a line without ``=`` or a repeated key
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = _normalize_key(key)
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'", key=key)
        values[key] = value.strip()
    return values


def parse_overrides(args: list[str]) -> dict[str, str]:
    """
    Turn ``["--key", "value", "--other=value"]`` into a mapping.

    Raises:
        ConfigError: On a stray value or a flag without a value
    """
    overrides: dict[str, str] = {}
    index = 0
    while index < len(args):
        token = args[index]
        if not token.startswith("--"):
            raise ConfigError(f"unexpected argument {token!r}; overrides are written --key value")
        if "=" in token:
            key, value = token.split("=", 1)
            index += 1
        else:
            if index + 1 >= len(args):
                raise ConfigError(f"missing value for {token}", key=_normalize_key(token))
            key, value = token, args[index + 1]
            index += 2
        overrides[_normalize_key(key)] = value
    return overrides


def _validation_message(error: ValidationError) -> tuple[str, str | None]:
    first = error.errors()[0]
    key = str(first["loc"][0]) if first.get("loc") else None
    if key == "lambda_":
        key = "lambda"
    message = str(first.get("msg", "invalid value")).removeprefix("Value error, ")
    return f"invalid value for '{key}': {message}", key


def load_run_config(
    path: str | Path | None = None, overrides: dict[str, str] | None = None
) -> RunConfig:
    """
    Read a config file, apply overrides and validate.

    Args:
        path: Config file; relative field paths inside it resolve against its directory
        overrides: Values applied after the file

    Raises:
        ConfigError: Naming the offending key
    """
    values: dict[str, str] = {}
    base_dir: Path | None = None
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from e
        values.update(parse_config_text(text, str(path)))
        base_dir = path.resolve().parent
    values.update({_normalize_key(k): v for k, v in (overrides or {}).items()})

    known = _known_keys()
    for key in values:
        if key not in known:
            raise ConfigError(f"unknown configuration key '{key}'", key=key)

    try:
        config = RunConfig.model_validate(values)
    except ValidationError as e:
        message, key = _validation_message(e)
        raise ConfigError(message, key=key) from e
    except ValueError as e:
        raise ConfigError(str(e)) from e
    return config.with_base_dir(base_dir)

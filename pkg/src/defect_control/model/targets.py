"""Built-in target and bound fields, and resolution of field references."""

from collections.abc import Callable
from pathlib import Path

import numpy as np

from defect_control.numerics.fields import ScalarField
from defect_control.numerics.grid import Grid
from defect_control.numerics.io import read_field_csv

FieldFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _minx(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.minimum(x, 1.0 - x)


def _scaled_minx(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return 0.25 * (np.minimum(x, 1.0 - x) - 0.25)


def _zero(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.zeros_like(x)


BUILTIN_FIELDS: dict[str, FieldFunction] = {
    "minx": _minx,
    "scaled_minx": _scaled_minx,
    "zero": _zero,
}


def is_builtin(reference: str) -> bool:
    name = reference.strip().lower()
    return name in BUILTIN_FIELDS or name.startswith("constant:")


def builtin_field(name: str, grid: Grid) -> ScalarField:
    """
    Sample a named built-in field.

    Args:
        name: ``minx``, ``scaled_minx``, ``zero`` or ``constant:<value>``
        grid: Grid to sample on

    Returns:
        The sampled field
    """
    key = name.strip().lower()
    if key.startswith("constant:"):
        try:
            value = float(key.split(":", 1)[1])
        except ValueError as e:
            raise ValueError(f"bad constant field {name!r}") from e
        return ScalarField.constant(grid, value)
    if key not in BUILTIN_FIELDS:
        raise ValueError(
            f"unknown built-in field {name!r}; expected one of {', '.join(sorted(BUILTIN_FIELDS))} or constant:<value>"
        )
    return ScalarField.from_function(grid, BUILTIN_FIELDS[key])


def resolve_field(reference: str, grid: Grid, base_dir: Path | None = None) -> ScalarField:
    """A built-in name, or a path to a ScalarField CSV (relative to ``base_dir``)."""
    if is_builtin(reference):
        return builtin_field(reference, grid)
    path = Path(reference).expanduser()
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    if not path.exists():
        raise FileNotFoundError(f"field file not found: {path}")
    return read_field_csv(path, grid)

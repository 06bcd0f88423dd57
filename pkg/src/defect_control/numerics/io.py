"""ScalarField CSV format: header ``x,y,value``, one row per interior node."""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from defect_control.config import CSV_FLOAT_FORMAT
from defect_control.errors import DimensionError
from defect_control.numerics.fields import ScalarField
from defect_control.numerics.grid import Grid, build_grid

logger = logging.getLogger(__name__)

FIELD_COLUMNS = ["x", "y", "value"]
COORDINATE_TOL = 1e-9


def field_frame(field: ScalarField) -> pd.DataFrame:
    x, y = field.grid.coordinates
    return pd.DataFrame({"x": x, "y": y, "value": field.values}, columns=FIELD_COLUMNS)


def write_field_csv(path: str | Path, field: ScalarField) -> Path:
    """Write ``field`` in row-major node order with 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    field_frame(field).to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    logger.debug(f"wrote field ({field.grid.m} nodes) to {path}")
    return path


def read_field_csv(path: str | Path, grid: Grid | None = None) -> ScalarField:
    """
    Read a ScalarField CSV.

    Args:
        path: CSV file with header x,y,value
        grid: Expected grid; inferred from the row count when omitted

    Returns:
        The field, after checking the node coordinates against the grid
    """
    frame = pd.read_csv(path)
    if list(frame.columns) != FIELD_COLUMNS:
        raise DimensionError(f"{path}: expected header {','.join(FIELD_COLUMNS)}, got {','.join(map(str, frame.columns))}")

    if grid is None:
        side = int(round(np.sqrt(len(frame))))
        if side * side != len(frame) or side < 1:
            raise DimensionError(f"{path}: {len(frame)} rows is not a square number of nodes")
        grid = build_grid(side + 1)
    elif len(frame) != grid.m:
        raise DimensionError(f"{path}: {len(frame)} rows, grid n={grid.n} has {grid.m} nodes")

    x, y = grid.coordinates
    if not (
        np.allclose(frame["x"].to_numpy(), x, atol=COORDINATE_TOL, rtol=0.0)
        and np.allclose(frame["y"].to_numpy(), y, atol=COORDINATE_TOL, rtol=0.0)
    ):
        raise DimensionError(f"{path}: node coordinates do not match grid n={grid.n}")

    return ScalarField(grid, frame["value"].to_numpy(dtype=np.float64))

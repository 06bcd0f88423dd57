"""Per-iteration run logs and their CSV / JSON outputs."""

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Generic, TypeVar

import pandas as pd

from defect_control.config import CSV_FLOAT_FORMAT

logger = logging.getLogger(__name__)

STATUS_RUNNING = "running"
STATUS_CONVERGED = "converged"
STATUS_ITERATION_LIMIT = "iteration_limit"
STATUS_STALLED = "stalled"


@dataclass(frozen=True)
class IterationRecord:
    """One descent iterate; ``eps`` is the step that produced it (0 for the start)."""

    iter: int
    cost: float
    grad_norm: float
    eps: float
    residual_h1: float


@dataclass(frozen=True)
class OuterRecord:
    """One outer barrier iteration; the cert_* columns are sup-norms of the absolute products."""

    outer_iter: int
    inner_iters: int
    cost: float
    cert_state: float
    cert_lower: float
    cert_upper: float
    max_violation_u: float
    max_violation_v: float


RecordT = TypeVar("RecordT")


@dataclass
class RunReport(Generic[RecordT]):
    """Ordered log of a run plus its final status."""

    records: list[RecordT] = field(default_factory=list)
    status: str = STATUS_RUNNING

    def append(self, record: RecordT) -> None:
        self.records.append(record)

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED

    def column(self, name: str) -> list[Any]:
        return [getattr(record, name) for record in self.records]

    def to_frame(self) -> pd.DataFrame:
        if not self.records:
            return pd.DataFrame()
        return pd.DataFrame([dataclasses.asdict(record) for record in self.records])  # type: ignore[call-overload]

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, na_rep="")
        logger.debug(f"wrote {len(self.records)} log rows to {path}")
        return path


def write_summary(path: str | Path, summary: dict[str, Any]) -> Path:
    """Write a run summary as indented JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(summary, f, indent=2)
    return path

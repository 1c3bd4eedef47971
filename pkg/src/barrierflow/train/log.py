import logging
from pathlib import Path
from typing import List, Optional, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict

logger = logging.getLogger(__name__)


class TrainRecord(BaseModel):
    """Results of one completed outer iteration."""

    model_config = ConfigDict(extra="forbid")

    iteration: int
    total: float
    syn: float
    salad: float
    salad_safe: float
    salad_unsafe: float
    salad_consistency: float
    perf: float
    lmi_loss: float
    lmi_logdet: float
    lmi_feasible: bool
    lmi_satisfied: bool
    epsilon_bar: float
    delta: float
    psi: float
    eta: float
    q1_violations: int
    q2_violations: int
    q3_violations: int
    n_records: int
    rollout_unsafe_entries: int
    lr: float
    candidate: bool
    converged: bool
    wall_time: float = 0.0


# wall_time is kept out of the CSV so seeded runs produce identical files
TRAINLOG_COLUMNS = [name for name in TrainRecord.model_fields if name != "wall_time"]


class TrainLog:
    """Append-only per-iteration history of a run."""

    def __init__(self, records: Optional[List[TrainRecord]] = None) -> None:
        self.records: List[TrainRecord] = list(records or [])

    def __len__(self) -> int:
        return len(self.records)

    @property
    def last(self) -> TrainRecord:
        return self.records[-1]

    def append(self, record: TrainRecord) -> None:
        if self.records and record.iteration <= self.records[-1].iteration:
            raise ValueError(
                f"iteration {record.iteration} does not follow {self.records[-1].iteration}"
            )
        self.records.append(record)

    def to_frame(self) -> pd.DataFrame:
        rows = [record.model_dump() for record in self.records]
        return pd.DataFrame(rows, columns=TRAINLOG_COLUMNS)

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        logger.info("Wrote %d training records to %s", len(self), path)
        return path

    def write_timings(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(
            [{"iteration": r.iteration, "wall_time": r.wall_time} for r in self.records],
            columns=["iteration", "wall_time"],
        )
        frame.to_csv(path, index=False)
        return path

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> "TrainLog":
        frame = pd.read_csv(path)
        return cls([TrainRecord(**row) for row in frame.to_dict(orient="records")])

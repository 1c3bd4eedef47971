import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from ..envs.buffer import DataBuffer
from .verify import CertificateReport, ConditionSlacks

logger = logging.getLogger(__name__)

SLACK_COLUMNS = ["condition", "record", "label", "slack"]


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _flatten(prefix: str, values: Dict[str, Any], lines: List[str]) -> None:
    for key, value in values.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            _flatten(f"{name}.", value, lines)
        else:
            lines.append(f"{name} = {_format(value)}")


def report_lines(report: CertificateReport) -> List[str]:
    """``key = value`` lines; nested sections use dotted keys."""
    lines: List[str] = []
    _flatten("", report.model_dump(), lines)
    lines.append(f"condition_violations = {report.condition_violations}")
    lines.append(f"certified = {_format(report.certified)}")
    return lines


def write_report(report: CertificateReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(report_lines(report)) + "\n")
    logger.info("Wrote certificate report to %s", path)
    return path


def slack_frame(slacks: ConditionSlacks, buffer: Optional[DataBuffer] = None) -> pd.DataFrame:
    """One row per (condition, record) with the record's label when known."""
    frames = []
    for name, values in slacks.slacks.items():
        records = slacks.indices[name]
        labels = buffer.labels[records].astype(int) if buffer is not None else np.full(len(records), -1)
        frames.append(
            pd.DataFrame(
                {"condition": name, "record": records, "label": labels, "slack": values},
                columns=SLACK_COLUMNS,
            )
        )
    if not frames:
        return pd.DataFrame(columns=SLACK_COLUMNS)
    return pd.concat(frames, ignore_index=True)


def write_slacks(
    slacks: ConditionSlacks, path: Union[str, Path], buffer: Optional[DataBuffer] = None
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    slack_frame(slacks, buffer).to_csv(path, index=False, float_format="%.17g")
    logger.info("Wrote per-record slacks to %s", path)
    return path

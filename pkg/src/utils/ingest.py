"""Sample-file ingestion and trace export.

CSV traces hold one record per line, either ``latency_ms`` or
``index,latency_ms``; a header is recognised when its last field reads
``latency_ms``. JSONL traces hold one object per line with a ``latency_ms``
field. Values are milliseconds and must be positive and finite.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import IO, List, Literal, Sequence, Union

import numpy as np
import pandas as pd

from src.errors import SampleFormatError

logger = logging.getLogger(__name__)

SampleFormat = Literal["csv", "jsonl"]
LATENCY_FIELD = "latency_ms"


def _check_latency(raw: object, line_number: int, content: str) -> float:
    try:
        value = float(raw)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise SampleFormatError("not a number", line_number, content) from None
    if not math.isfinite(value) or value <= 0.0:
        raise SampleFormatError("latency must be positive and finite", line_number, content)
    return value


def _parse_csv(lines: List[str]) -> List[float]:
    values: List[float] = []
    for line_number, fields in enumerate(csv.reader(lines), start=1):
        content = lines[line_number - 1].rstrip("\r\n")
        fields = [field.strip() for field in fields]
        if not fields or fields == [""]:
            # Blank lines only tolerated at the end of a file.
            if any(rest.strip() for rest in lines[line_number:]):
                raise SampleFormatError("blank record", line_number, content)
            break
        if len(fields) > 2:
            raise SampleFormatError("expected `latency_ms` or `index,latency_ms`", line_number, content)
        if line_number == 1 and fields[-1].lower() == LATENCY_FIELD:
            continue
        values.append(_check_latency(fields[-1], line_number, content))
    return values


def _parse_jsonl(lines: List[str]) -> List[float]:
    values: List[float] = []
    for line_number, line in enumerate(lines, start=1):
        content = line.rstrip("\r\n")
        if not content.strip():
            continue
        try:
            record = json.loads(content)
        except json.JSONDecodeError:
            raise SampleFormatError("invalid JSON", line_number, content) from None
        if not isinstance(record, dict) or LATENCY_FIELD not in record:
            raise SampleFormatError(f"missing `{LATENCY_FIELD}`", line_number, content)
        if isinstance(record[LATENCY_FIELD], bool):
            raise SampleFormatError("not a number", line_number, content)
        values.append(_check_latency(record[LATENCY_FIELD], line_number, content))
    return values


def parse_samples(path: Union[str, Path], fmt: SampleFormat = "csv") -> np.ndarray:
    """Read a latency trace, preserving file order.

    Raises:
        FileNotFoundError: the file does not exist
        SampleFormatError: a malformed record, or no records at all
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Sample file not found at {path}")
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()

    if fmt == "csv":
        values = _parse_csv(lines)
    elif fmt == "jsonl":
        values = _parse_jsonl(lines)
    else:
        raise ValueError(f"Unknown sample format: {fmt}")

    if not values:
        raise SampleFormatError(f"{path} holds no samples")
    logger.debug("parsed %d samples from %s", len(values), path)
    return np.asarray(values, dtype=np.float64)


def write_samples(
    values: Sequence[float], target: Union[str, Path, IO[str]], fmt: SampleFormat = "csv"
) -> None:
    """Write a trace `parse_samples` can read; csv keeps full float precision.

    `target` is a path or an open text stream such as stdout.
    """
    if isinstance(target, (str, Path)):
        Path(target).parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame({"index": range(len(values)), LATENCY_FIELD: np.asarray(values, dtype=np.float64)})
    if fmt == "csv":
        df.to_csv(target, index=False, float_format="%.17g")
    else:
        df[[LATENCY_FIELD]].to_json(target, orient="records", lines=True, double_precision=15)


class FileSource:
    """Serves a recorded trace batch by batch; exhausted at end of file."""

    def __init__(self, path: Union[str, Path], fmt: SampleFormat = "csv"):
        self.path = Path(path)
        self._values = parse_samples(self.path, fmt)
        self._position = 0

    def __len__(self) -> int:
        return int(self._values.size)

    def next_batch(self, size: int) -> List[float]:
        batch = self._values[self._position : self._position + size]
        self._position += batch.size
        return batch.tolist()

"""Tensor and trace file formats.

The interchange format is a JSON object ``{"dims": [..], "elems": [..]}``
with elements in flatten (row-major) order; booleans are legal elements
since eval emits boolean tensors. Order-2 traces can also be ingested from
CSV, one time step per row, one feature per column, with an optional
non-numeric header row.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .errors import DataError
from .semantics import TraceBatch
from .tensor import Tensor


def tensor_to_json(t: Tensor) -> dict:
    return {"dims": list(t.dims), "elems": list(t.elems)}


def dumps_tensor(t: Tensor) -> str:
    return json.dumps(tensor_to_json(t))


def tensor_from_json(obj: object) -> Tensor:
    if not isinstance(obj, dict) or set(obj) != {"dims", "elems"}:
        raise DataError('a tensor is a JSON object {"dims": [..], "elems": [..]}')
    dims, elems = obj["dims"], obj["elems"]
    if not isinstance(dims, list) or not all(
        isinstance(d, int) and not isinstance(d, bool) for d in dims
    ):
        raise DataError(f"dims must be a list of integers, got {dims!r}")
    if not isinstance(elems, list):
        raise DataError("elems must be a list")
    values = []
    for e in elems:
        if isinstance(e, bool):
            values.append(e)
        elif isinstance(e, (int, float)):
            values.append(float(e))
        else:
            raise DataError(f"elements must be numbers or booleans, got {e!r}")
    return Tensor(tuple(dims), tuple(values))


def loads_tensor(text: str) -> Tensor:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid tensor JSON: {exc}") from None
    return tensor_from_json(obj)


def parse_csv_trace(text: str) -> TraceBatch:
    """Order-2 trace from CSV; a non-numeric first row is taken as a header."""
    rows = [row for row in csv.reader(io.StringIO(text)) if row]
    if not rows:
        raise DataError("empty CSV trace")

    def numeric(row: list[str]) -> list[float] | None:
        try:
            return [float(cell) for cell in row]
        except ValueError:
            return None

    if numeric(rows[0]) is None:
        rows = rows[1:]
        if not rows:
            raise DataError("CSV trace has a header but no data rows")
    parsed = []
    for i, row in enumerate(rows):
        values = numeric(row)
        if values is None:
            raise DataError(f"non-numeric cell in CSV row {i}: {row!r}")
        parsed.append(values)
    return TraceBatch.from_rows(parsed)


def load_trace(path: str | Path) -> TraceBatch:
    """Trace from a .json tensor file or a .csv table."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read trace file {path}: {exc}") from None
    if path.suffix.lower() == ".csv":
        return parse_csv_trace(text)
    return TraceBatch(loads_tensor(text))

"""Ordered sweep records serializable to CSV/JSON.

Output is byte-stable across runs for identical inputs: floats are written
with repr precision in JSON and 12 significant digits in CSV, and the only
run-dependent content (a timestamp) lives in a header comment that can be
suppressed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def _jsonable(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


@dataclass
class SweepTable:
    """Named columns of equal length plus provenance.

    Complex quantities must be added through add_complex_column, which
    splits them into <name>_re / <name>_im.
    """

    swept: str
    params: dict = field(default_factory=dict)
    columns: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def add_column(self, name: str, values) -> None:
        values = list(values)
        self._check_length(len(values))
        self.columns[name] = values

    def add_complex_column(self, name: str, values) -> None:
        values = list(values)
        self._check_length(len(values))
        self.columns[name + "_re"] = [float(np.real(v)) for v in values]
        self.columns[name + "_im"] = [float(np.imag(v)) for v in values]

    def _check_length(self, n: int) -> None:
        for existing in self.columns.values():
            if len(existing) != n:
                raise ValueError("all columns must have equal length")

    @property
    def n_rows(self) -> int:
        for values in self.columns.values():
            return len(values)
        return 0

    def header_lines(self, no_timestamp: bool = False) -> list[str]:
        lines = [
            f"# swept: {self.swept}",
            f"# params: {json.dumps(self.params, sort_keys=True)}",
        ]
        for key in sorted(self.meta):
            lines.append(f"# {key}: {self.meta[key]}")
        if not no_timestamp:
            lines.append(f"# generated: {datetime.now(timezone.utc).isoformat()}")
        return lines

    def to_csv(self, no_timestamp: bool = False) -> str:
        lines = self.header_lines(no_timestamp=no_timestamp)
        names = list(self.columns)
        lines.append(",".join(names))
        for i in range(self.n_rows):
            lines.append(",".join(_fmt(self.columns[name][i]) for name in names))
        return "\n".join(lines) + "\n"

    def to_json(self, no_timestamp: bool = False) -> str:
        obj = {
            "swept": self.swept,
            "params": {k: _jsonable(v) for k, v in sorted(self.params.items())},
            "meta": {k: _jsonable(v) for k, v in sorted(self.meta.items())},
            "columns": {
                name: [_jsonable(v) for v in values]
                for name, values in self.columns.items()
            },
        }
        if not no_timestamp:
            obj["generated"] = datetime.now(timezone.utc).isoformat()
        return json.dumps(obj, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SweepTable":
        obj = json.loads(text)
        table = cls(swept=obj["swept"], params=obj.get("params", {}),
                    meta=obj.get("meta", {}))
        for name, values in obj["columns"].items():
            table.columns[name] = values
        return table

    def equals(self, other: "SweepTable") -> bool:
        return (
            self.swept == other.swept
            and {k: _jsonable(v) for k, v in self.params.items()}
            == {k: _jsonable(v) for k, v in other.params.items()}
            and list(self.columns) == list(other.columns)
            and all(
                len(a) == len(b) and all(_jsonable(x) == _jsonable(y) for x, y in zip(a, b))
                for a, b in ((self.columns[n], other.columns[n]) for n in self.columns)
            )
        )


def write_table(table: SweepTable, path: str, fmt: str, no_timestamp: bool = False) -> None:
    """Emit a table to path as csv or json."""
    if fmt == "csv":
        text = table.to_csv(no_timestamp=no_timestamp)
    elif fmt == "json":
        text = table.to_json(no_timestamp=no_timestamp)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)

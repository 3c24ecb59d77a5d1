"""CSV tables with a ``# key=value`` metadata preamble."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field


def format_value(value) -> str:
    """Full-precision text: 17 significant digits for floats."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    if hasattr(value, "item"):  # numpy scalar
        return format_value(value.item())
    return str(value)


@dataclass
class CsvTable:
    columns: list
    rows: list = field(default_factory=list)
    meta: list = field(default_factory=list)  # ordered (key, value) pairs

    def add(self, row: dict) -> None:
        missing = set(self.columns) - set(row)
        if missing:
            raise KeyError(f"row lacks columns {sorted(missing)}")
        self.rows.append([row[c] for c in self.columns])

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def records(self):
        for r in self.rows:
            yield dict(zip(self.columns, r))

    def meta_dict(self) -> dict:
        return dict(self.meta)

    def extend(self, other: "CsvTable") -> None:
        if other.columns != self.columns:
            raise ValueError("column mismatch")
        self.rows.extend(other.rows)

    def to_text(self) -> str:
        buf = io.StringIO()
        for key, value in self.meta:
            buf.write(f"# {key}={format_value(value)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for r in self.rows:
            writer.writerow([format_value(v) for v in r])
        return buf.getvalue()

    def write(self, path) -> None:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(self.to_text())
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc

    @classmethod
    def from_text(cls, text: str) -> "CsvTable":
        meta, body = [], []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta.append((key, value))
            elif line.strip():
                body.append(line)
        reader = csv.reader(body)
        columns = next(reader, [])
        rows = [[_parse_cell(c) for c in r] for r in reader]
        return cls(columns, rows, meta)

    @classmethod
    def read(cls, path) -> "CsvTable":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def _parse_cell(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text

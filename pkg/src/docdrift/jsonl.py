"""Minimal JSON-lines reading and writing helpers."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator


def dump_line(record: dict[str, Any]) -> str:
    """Serialize one record as a single JSON line (no trailing newline)."""
    return json.dumps(record, ensure_ascii=False)


def write_records(path: str | Path, records: Iterable[dict[str, Any]]) -> int:
    """Write records to `path`, one JSON object per line. Returns the line count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(dump_line(record))
            fh.write("\n")
            count += 1
    return count


def read_records(path: str | Path) -> Iterator[dict[str, Any]]:
    """Yield one dict per non-blank line of `path`."""
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def load_records(path: str | Path, factory: Callable[[dict[str, Any]], Any] | None = None) -> list:
    """Read the whole file, optionally mapping each record through `factory`."""
    records = read_records(path)
    if factory is None:
        return list(records)
    return [factory(r) for r in records]

"""
TSV report writing. Every report opens with '#' provenance lines so a
result file can be traced back to the exact invocation.
"""

from __future__ import annotations

import math
from typing import IO, Any, Iterable, Mapping, Sequence

NA = "NA"


def format_value(value: Any) -> str:
    if value is None:
        return NA
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            return NA
        return format(value, ".6g")
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def provenance_lines(tool: str, version: str, command: str, options: Mapping[str, Any]) -> list[str]:
    """No timestamps or hostnames: identical invocations give identical headers."""
    flags = " ".join(f"{k}={format_value(options[k])}" for k in sorted(options))
    lines = [f"# {tool} {version} {command}"]
    if "seed" in options:
        lines.append(f"# seed={format_value(options['seed'])}")
    lines.append(f"# flags: {flags}")
    return lines


def write_provenance(sink: IO[str], provenance: Sequence[str]) -> None:
    for line in provenance:
        sink.write(line if line.startswith("#") else f"# {line}")
        sink.write("\n")


def write_tsv(sink: IO[str], columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    sink.write("\t".join(columns))
    sink.write("\n")
    n = 0
    for row in rows:
        sink.write("\t".join(format_value(v) for v in row))
        sink.write("\n")
        n += 1
    return n


def read_tsv(lines: Iterable[str]) -> tuple[list[str], list[list[str]]]:
    """Inverse of write_tsv for tests and downstream tools; '#' lines are skipped."""
    columns: list[str] = []
    rows: list[list[str]] = []
    for line in lines:
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        if not columns:
            columns = line.split("\t")
        else:
            rows.append(line.split("\t"))
    return columns, rows

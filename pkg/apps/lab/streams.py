from __future__ import annotations

from pathlib import Path
from typing import IO, Iterable, Iterator, Union

from .exceptions import FormatError

# byte stream, text stream, or already-split lines
Source = Union[IO[bytes], IO[str], Iterable[str], Iterable[bytes]]


def iter_lines(source: Source) -> Iterator[str]:
    """Yield decoded lines without their trailing newline (UTF-8; BOM tolerated)."""
    first = True
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, (bytes, bytearray)):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise FormatError(f"invalid UTF-8 (byte 0x{raw[exc.start]:02x} at column {exc.start + 1})", lineno) from None
        else:
            line = raw
        if first:
            line = line.lstrip("\ufeff")
            first = False
        yield line.rstrip("\r\n")


def open_text(path: str | Path) -> IO[bytes]:
    """Input file for iter_lines. Opened binary: lines are decoded one by one so a bad byte reports its line."""
    return Path(path).open("rb")


def open_output(path: str | Path) -> IO[str]:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    # '\n' 고정: 윈도우에서도 byte-identical 결과를 보장
    return out.open("w", encoding="utf-8", newline="\n")

"""
Domain errors raised by the lab library modules.

Management commands map these to exit code 1 (runtime/data error);
value-object validation uses django's ValidationError instead (exit code 2).
"""

from __future__ import annotations


class LabError(Exception):
    """Base class for every data/runtime error in apps.lab."""


class CorpusError(LabError):
    pass


class DivergenceError(LabError):
    # training workers send it back through a process pool
    def __init__(self, epoch: int, position: int):
        self.epoch = epoch
        self.position = position
        super().__init__(f"divergence: non-finite loss at epoch {epoch}, position {position}")

    def __reduce__(self):
        return type(self), (self.epoch, self.position)


class FormatError(LabError):
    """Unparseable input file. line_number is 1-based (None when not line-specific)."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        self.detail = message
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)

    def __reduce__(self):
        return type(self), (self.detail, self.line_number)


class OOVError(LabError, KeyError):
    def __init__(self, word: str):
        self.word = word
        super().__init__(f"out-of-vocabulary word: {word!r}")

    def __reduce__(self):
        return type(self), (self.word,)

    def __str__(self) -> str:
        # KeyError.__str__ would repr() the whole message
        return self.args[0]


class StatisticsError(LabError):
    pass


class BenchmarkError(LabError):
    pass


class LexiconError(LabError):
    pass


class AnalysisError(LabError):
    pass

from __future__ import annotations

from pathlib import Path
from typing import Any

from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from apps.lab.benchmarks import Benchmark, load_benchmark
from apps.lab.exceptions import LabError
from apps.lab.ledger import RunHandle, record_run
from apps.lab.lexicon import load_mft_lexicon
from apps.lab.pipeline import load_model_file
from apps.lab.reports import provenance_lines
from apps.lab.streams import open_text

TOOL = "windowlens"

# BaseCommand가 자동으로 붙이는 옵션: provenance/ledger 에서 제외
_DJANGO_OPTIONS = {
    "verbosity", "settings", "pythonpath", "traceback", "no_color", "force_color", "skip_checks", "stdout", "stderr",
}

USAGE_ERROR = 2
RUNTIME_ERROR = 1


def _jsonable(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return str(value)


def validation_message(exc: ValidationError) -> str:
    return "; ".join(exc.messages)


class LabCommand(BaseCommand):
    """
    handle() → run() with the error contract every lab command shares:
      ValidationError          → exit 2 (bad flag value)
      LabError / OSError       → exit 1 (runtime / data error)
    and an ExperimentRun row around the whole thing.
    """

    record = True

    @property
    def command_name(self) -> str:
        return self.__module__.rsplit(".", 1)[-1]

    @property
    def lab(self) -> dict:
        return settings.WINDOWLENS

    def handle(self, *args, **options):
        self.flags = {k: _jsonable(v) for k, v in options.items() if k not in _DJANGO_OPTIONS}
        self.verbosity = int(options.get("verbosity", 1))
        if not self.record:
            return self._guarded(options)
        with record_run(self.command_name, self.flags) as run:
            self.ledger_run: RunHandle = run
            return self._guarded(options)

    def _guarded(self, options):
        try:
            self.run(**options)
        except ValidationError as exc:
            raise CommandError(validation_message(exc), returncode=USAGE_ERROR) from exc
        except (LabError, OSError) as exc:
            raise CommandError(str(exc), returncode=RUNTIME_ERROR) from exc

    def run(self, **options):
        raise NotImplementedError

    # -------------------------
    # helpers
    # -------------------------
    def provenance(self) -> list[str]:
        return provenance_lines(TOOL, self.lab["VERSION"], self.command_name, self.flags)

    def output(self, path: str | Path) -> None:
        if getattr(self, "ledger_run", None) is not None:
            self.ledger_run.add_output(path)

    def info(self, msg: str) -> None:
        if self.verbosity >= 1:
            self.stderr.write(msg)

    def warn(self, msg: str) -> None:
        self.stderr.write(self.style.WARNING(msg))

    def positive(self, name: str, value: int | None, minimum: int = 1) -> None:
        if value is not None and value < minimum:
            raise ValidationError(f"--{name.replace('_', '-')} must be ≥ {minimum}")

    def load_model(self, path: str | Path, *, algorithm: str = "", window: int | None = None):
        try:
            model = load_model_file(path, algorithm=algorithm, window=window)
        except LabError as exc:
            raise LabError(f"{path}: {exc}") from exc
        report = model.load_report
        if report.duplicates:
            self.warn(f"{path}: {report.duplicates} duplicate word(s) ignored")
        if report.zero_vectors:
            self.warn(f"{path}: {report.zero_vectors} zero vector(s) skipped")
        return model

    def load_benchmark(self, path: str | Path) -> Benchmark:
        path = Path(path)
        try:
            with open_text(path) as fh:
                return load_benchmark(fh, path.stem)
        except LabError as exc:
            raise LabError(f"{path}: {exc}") from exc

    def load_mft(self, path: str | Path) -> dict:
        try:
            with open_text(path) as fh:
                loaded = load_mft_lexicon(fh)
        except LabError as exc:
            raise LabError(f"{path}: {exc}") from exc
        if loaded.duplicates:
            self.warn(f"{path}: {loaded.duplicates} duplicate lexicon entr{'y' if loaded.duplicates == 1 else 'ies'} (last one wins)")
        return loaded.mapping

from __future__ import annotations

from pathlib import Path

from apps.lab.benchmarks import LAYOUTS, import_benchmark, write_canonical
from apps.lab.exceptions import LabError
from apps.lab.streams import open_output, open_text

from ._base import LabCommand


class Command(LabCommand):
    help = "Convert a third-party benchmark file into canonical word1<TAB>word2<TAB>score TSV."

    def add_arguments(self, parser):
        parser.add_argument("--input", required=True)
        parser.add_argument("--layout", required=True, choices=LAYOUTS)
        parser.add_argument(
            "--score-column", type=int, default=3,
            help="1-based score column for --layout tsv-columns (default: 3).",
        )
        parser.add_argument("--out", required=True)

    def run(self, **options):
        self.positive("score_column", options["score_column"], minimum=3)
        try:
            with open_text(options["input"]) as fh:
                rows = import_benchmark(fh, options["layout"], options["score_column"])
        except LabError as exc:
            raise LabError(f"{options['input']}: {exc}") from exc

        out = Path(options["out"])
        with open_output(out) as sink:
            n = write_canonical(rows, sink)
        self.output(out)
        self.stdout.write(self.style.SUCCESS(f"Wrote {n} pair(s) → {out}"))

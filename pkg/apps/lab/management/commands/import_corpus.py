from __future__ import annotations

from pathlib import Path

from apps.lab.streams import iter_lines, open_output, open_text
from apps.lab.trainer import preprocess_text

from ._base import LabCommand


class Command(LabCommand):
    help = "Normalize raw text into a training corpus: lowercase, digits spelled out, punctuation removed."

    def add_arguments(self, parser):
        parser.add_argument("--input", required=True)
        parser.add_argument("--out", required=True)
        parser.add_argument("--keep-empty", action="store_true", help="Keep lines that end up empty.")

    def run(self, **options):
        out = Path(options["out"])
        lines = tokens = 0
        with open_text(options["input"]) as src, open_output(out) as sink:
            for raw in iter_lines(src):
                text = preprocess_text(raw)
                if not text and not options["keep_empty"]:
                    continue
                sink.write(text + "\n")
                lines += 1
                tokens += len(text.split())
        self.output(out)
        self.info(f"lines: {lines}, tokens: {tokens}")
        self.stdout.write(self.style.SUCCESS(f"Wrote corpus → {out}"))

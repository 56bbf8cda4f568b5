from __future__ import annotations

from collections import Counter
from pathlib import Path

from apps.lab.exceptions import LabError
from apps.lab.lexicon import derive_mft_lexicon, write_mft_lexicon
from apps.lab.streams import open_output, open_text

from ._base import LabCommand


class Command(LabCommand):
    help = "Derive a most-frequent-tag lexicon (word<TAB>TAG) from a POS-tagged corpus."

    def add_arguments(self, parser):
        parser.add_argument("--tagged", required=True, help='"word/TAG" tokens, or word<TAB>TAG lines.')
        parser.add_argument("--out", required=True)

    def run(self, **options):
        try:
            with open_text(options["tagged"]) as fh:
                mapping = derive_mft_lexicon(fh)
        except LabError as exc:
            raise LabError(f"{options['tagged']}: {exc}") from exc

        out = Path(options["out"])
        with open_output(out) as sink:
            n = write_mft_lexicon(mapping, sink)
        self.output(out)
        for tag, count in sorted(Counter(str(t) for t in mapping.values()).items()):
            self.stdout.write(f"- {tag}: {count}")
        self.stdout.write(self.style.SUCCESS(f"Wrote {n} word(s) → {out}"))

from __future__ import annotations

from pathlib import Path

from django.core.exceptions import ValidationError

from apps.lab.exceptions import LabError
from apps.lab.lexicon import read_pivots
from apps.lab.reports import write_provenance
from apps.lab.streams import open_output, open_text
from apps.lab.vecstore import batch_nearest_neighbors, write_neighbor_dump

from ._base import LabCommand


class Command(LabCommand):
    help = "Dump exact nearest neighbors (pivot<TAB>rank<TAB>neighbor<TAB>cosine) for pivot words."

    def add_arguments(self, parser):
        parser.add_argument("--model", required=True)
        parser.add_argument("--pivots", help="Pivot TSV (word<TAB>POS).")
        parser.add_argument("--words", help="Comma-separated pivot words.")
        parser.add_argument("--k", type=int, default=self.lab["K_KEEP"])
        parser.add_argument("--filter-lexicon", help="Keep only neighbors listed in this MFT lexicon.")
        parser.add_argument("--out", required=True)
        parser.add_argument("--jobs", type=int, default=self.lab["JOBS"])

    def run(self, **options):
        self.positive("k", options["k"])
        self.positive("jobs", options["jobs"])
        if not options["pivots"] and not options["words"]:
            raise ValidationError("one of --pivots or --words is required")

        words: list[str] = []
        if options["pivots"]:
            with open_text(options["pivots"]) as fh:
                words.extend(w for _, ws in read_pivots(fh).items() for w in ws)
        if options["words"]:
            words.extend(w.strip().lower() for w in options["words"].split(",") if w.strip())

        model = self.load_model(options["model"])
        present = [w for w in words if w in model]
        missing = len(words) - len(present)
        if missing:
            self.warn(f"{missing} pivot(s) not in the model vocabulary skipped")
        if not present:
            raise LabError("no pivot word is in the model vocabulary")

        keep = frozenset(self.load_mft(options["filter_lexicon"])) if options["filter_lexicon"] else None
        lists = batch_nearest_neighbors(model, present, options["k"], filter=keep, jobs=options["jobs"])

        out = Path(options["out"])
        with open_output(out) as sink:
            write_provenance(sink, self.provenance())
            n = write_neighbor_dump(lists, sink)
        self.output(out)
        self.stdout.write(self.style.SUCCESS(f"Wrote {n} neighbor row(s) for {len(present)} pivot(s) → {out}"))

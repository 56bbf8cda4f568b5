from __future__ import annotations

from pathlib import Path

from apps.lab.lexicon import PosLexicon, build_pivots, load_wordnet_dir, write_pivots
from apps.lab.streams import open_output

from ._base import LabCommand


class Command(LabCommand):
    help = "Build purified NOUN/ADJ/VERB pivot lists (single lexical-database POS, confirmed by the MFT lexicon)."

    def add_arguments(self, parser):
        parser.add_argument("--wordnet-dir", required=True, help="Directory with index.noun/verb/adj/adv.")
        parser.add_argument("--mft-lexicon", required=True)
        parser.add_argument("--out", required=True)

    def run(self, **options):
        lex = PosLexicon(
            wordnet_pos=load_wordnet_dir(options["wordnet_dir"]),
            mft_pos=self.load_mft(options["mft_lexicon"]),
        )
        pivots = build_pivots(lex)

        out = Path(options["out"])
        with open_output(out) as sink:
            write_pivots(pivots, sink)
        self.output(out)
        for pos, n in pivots.counts().items():
            self.stdout.write(f"- {pos}: {n}")
        self.stdout.write(self.style.SUCCESS(f"Wrote pivots → {out}"))

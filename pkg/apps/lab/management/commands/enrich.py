from __future__ import annotations

from pathlib import Path

from django.core.exceptions import ValidationError

from apps.lab.analysis import enrichment, read_enrichment_counts, write_enrichment_report
from apps.lab.benchmarks import band_partition
from apps.lab.exceptions import LabError
from apps.lab.lexicon import PosLexicon, load_wordnet_dir
from apps.lab.reports import write_provenance
from apps.lab.streams import open_output, open_text

from ._base import LabCommand


class Command(LabCommand):
    help = "Same-POS enrichment within related benchmark pairs (hypergeometric upper tail), one row per benchmark."

    def add_arguments(self, parser):
        parser.add_argument("--benchmark", action="append", default=[], help="Canonical benchmark TSV (repeatable).")
        parser.add_argument("--mft-lexicon", help="word<TAB>TAG most-frequent-tag lexicon.")
        parser.add_argument(
            "--wordnet-dir",
            help="Lexical-database index directory. Optional: only the MFT tag decides same-POS; "
            "when given, the index files are validated and coverage is reported.",
        )
        parser.add_argument("--counts", help="Precomputed band counts TSV (skips tagging entirely).")
        parser.add_argument("--out", required=True)

    def run(self, **options):
        if options["counts"]:
            with open_text(options["counts"]) as fh:
                results = read_enrichment_counts(fh)
        else:
            if not options["benchmark"] or not options["mft_lexicon"]:
                raise ValidationError("--benchmark and --mft-lexicon are required unless --counts is given")
            lex = PosLexicon(mft_pos=self.load_mft(options["mft_lexicon"]))
            if options["wordnet_dir"]:
                wordnet = load_wordnet_dir(options["wordnet_dir"])
                covered = sum(1 for w in lex.mft_pos if w in wordnet)
                self.info(f"lexical-database coverage: {covered}/{len(lex.mft_pos)} lexicon words")

            results = []
            for path in options["benchmark"]:
                bench = self.load_benchmark(path)
                try:
                    result = enrichment(bench, band_partition(bench), lex)
                except LabError as exc:
                    raise LabError(f"{path}: {exc}") from exc
                if result.n_skipped:
                    self.warn(f"{bench.name}: {result.n_skipped} pair(s) with a word missing from the lexicon skipped")
                results.append(result)

        out = Path(options["out"])
        with open_output(out) as sink:
            write_provenance(sink, self.provenance())
            n = write_enrichment_report(results, sink)
        self.output(out)
        for r in results:
            self.stdout.write(f"- {r.benchmark_name}: related {r.n_related}/{r.n_related_same_pos}, "
                              f"unrelated {r.n_unrelated}/{r.n_unrelated_same_pos}, p={r.p_value:.3g}")
        self.stdout.write(self.style.SUCCESS(f"Wrote {n} row(s) → {out}"))

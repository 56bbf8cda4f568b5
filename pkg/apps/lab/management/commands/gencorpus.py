from __future__ import annotations

from dataclasses import replace
from pathlib import Path

from apps.lab.corpusgen import generate, parse_grammar, write_corpus
from apps.lab.exceptions import LabError
from apps.lab.lexicon import write_mft_lexicon
from apps.lab.streams import open_output, open_text

from ._base import LabCommand


class Command(LabCommand):
    help = "Generate a synthetic corpus + gold MFT lexicon from a grammar file."

    def add_arguments(self, parser):
        parser.add_argument("--grammar", required=True)
        parser.add_argument("--out-corpus", required=True)
        parser.add_argument("--out-lexicon", required=True)
        parser.add_argument("--seed", type=int, help="Override the grammar's seed.")
        parser.add_argument("--sentences", type=int, help="Override the grammar's sentence count.")

    def run(self, **options):
        try:
            with open_text(options["grammar"]) as fh:
                grammar = parse_grammar(fh)
        except LabError as exc:
            raise LabError(f"{options['grammar']}: {exc}") from exc

        overrides = {}
        if options["seed"] is not None:
            overrides["seed"] = options["seed"]
        if options["sentences"] is not None:
            overrides["sentence_count"] = options["sentences"]
        if overrides:
            grammar = replace(grammar, **overrides)

        sentences, gold = generate(grammar)

        corpus_path, lexicon_path = Path(options["out_corpus"]), Path(options["out_lexicon"])
        with open_output(corpus_path) as sink:
            tokens = write_corpus(sentences, sink)
        with open_output(lexicon_path) as sink:
            write_mft_lexicon(gold, sink)
        self.output(corpus_path)
        self.output(lexicon_path)

        self.info(f"sentences: {len(sentences)}, tokens: {tokens}, lexicon: {len(gold)} words")
        self.stdout.write(self.style.SUCCESS(f"Wrote {corpus_path} + {lexicon_path}"))

from __future__ import annotations

import shutil
from pathlib import Path

from apps.lab.pipeline import TrainJob, run_training
from apps.lab.trainer import Algorithm, TrainConfig

from ._base import LabCommand


class Command(LabCommand):
    help = "Train one CBOW/SGNS model and write it in word2vec text format."

    def add_arguments(self, parser):
        lab = self.lab
        parser.add_argument("--corpus", required=True, help="Whitespace-tokenized UTF-8 text.")
        parser.add_argument("--out", required=True, help="Output model path (word2vec text format).")
        parser.add_argument("--algo", default=Algorithm.SGNS, type=str.upper, choices=Algorithm.values)
        parser.add_argument("--dim", type=int, default=lab["DIM"])
        parser.add_argument("--window", type=int, default=5)
        parser.add_argument("--min-count", type=int, default=lab["MIN_COUNT"])
        parser.add_argument("--epochs", type=int, default=lab["EPOCHS"])
        parser.add_argument("--negatives", type=int, default=lab["NEGATIVES"])
        parser.add_argument("--lr", type=float, default=lab["LEARNING_RATE"], help="Initial learning rate.")
        parser.add_argument("--subsample", type=float, default=lab["SUBSAMPLE"], help="0 disables subsampling.")
        parser.add_argument("--seed", type=int, default=1)
        parser.add_argument(
            "--workers", type=int, default=1,
            help="Training threads. >1 is faster but not reproducible.",
        )
        parser.add_argument("--respect-lines", action="store_true", help="Windows do not cross line breaks.")
        parser.add_argument(
            "--reuse", action="store_true",
            help="Skip training when the ledger holds an intact model for the same corpus + config.",
        )

    def run(self, **options):
        config = TrainConfig(
            algorithm=options["algo"],
            dim=options["dim"],
            window=options["window"],
            negatives=options["negatives"],
            epochs=options["epochs"],
            learning_rate=options["lr"],
            min_count=options["min_count"],
            subsample_threshold=options["subsample"],
            seed=options["seed"],
            workers=options["workers"],
            respect_lines=options["respect_lines"],
        )
        config.clean()

        out = Path(options["out"])
        (outcome,) = run_training(options["corpus"], [TrainJob(config, out)], reuse=options["reuse"])

        if outcome.reused:
            if outcome.path.resolve() != out.resolve():
                out.parent.mkdir(parents=True, exist_ok=True)
                shutil.copyfile(outcome.path, out)
            self.stdout.write(self.style.SUCCESS(f"Training skipped: same corpus + config already trained ({outcome.path})."))

        self.output(out)
        self.info(f"vocabulary: {outcome.vocab_size} words, tokens: {outcome.total_tokens}")
        self.stdout.write(self.style.SUCCESS(f"Wrote {config.algorithm} model (window={config.window}, dim={config.dim}) → {out}"))

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from django.core.exceptions import ValidationError

from apps.lab.benchmarks import EvalRow, count_oov_pairs, safe_evaluate, write_eval_report
from apps.lab.reports import write_provenance
from apps.lab.streams import open_output
from apps.lab.trainer import Algorithm

from ._base import LabCommand

MODEL_SPEC_RE = re.compile(r"^(?:(?P<algo>[A-Za-z]+):)?(?P<window>\d+)=(?P<path>.+)$")


def parse_model_spec(raw: str, default_algo: str) -> tuple[str, int, str]:
    """'[ALGO:]window=path' → (algorithm, window, path)."""
    m = MODEL_SPEC_RE.match(raw.strip())
    if not m:
        raise ValidationError(f"--model expects [ALGO:]window=path, got {raw!r}")
    algo = (m.group("algo") or default_algo).upper()
    if algo not in Algorithm.values and algo != "-":
        raise ValidationError(f"unknown algorithm in --model {raw!r}")
    return algo, int(m.group("window")), m.group("path")


class Command(LabCommand):
    help = "Spearman evaluation of models on word-similarity benchmarks (one TSV row per benchmark × model)."

    def add_arguments(self, parser):
        parser.add_argument("--model", action="append", required=True, help="[ALGO:]window=path (repeatable).")
        parser.add_argument("--benchmark", action="append", required=True, help="Canonical benchmark TSV (repeatable).")
        parser.add_argument("--out", required=True)
        parser.add_argument("--algo", default="-", help="Algorithm label for --model values without a prefix.")
        parser.add_argument("--jobs", type=int, default=self.lab["JOBS"])

    def run(self, **options):
        self.positive("jobs", options["jobs"])
        specs = [parse_model_spec(m, options["algo"]) for m in options["model"]]

        models = [(algo, window, self.load_model(path, algorithm=algo, window=window)) for algo, window, path in specs]
        benchmarks = [self.load_benchmark(p) for p in options["benchmark"]]

        combos = [(b, algo, window, model) for b in benchmarks for algo, window, model in models]

        def score(combo):
            bench, algo, window, model = combo
            result = safe_evaluate(model, bench)
            return EvalRow(bench.name, algo, window, result, count_oov_pairs(model, bench))

        if options["jobs"] > 1:
            with ThreadPoolExecutor(max_workers=options["jobs"]) as pool:
                rows = list(pool.map(score, combos))
        else:
            rows = [score(c) for c in combos]

        for row in rows:
            if row.result is None:
                self.warn(f"{row.benchmark} / {row.algorithm} w={row.window}: insufficient coverage, rho=NA")

        out = Path(options["out"])
        with open_output(out) as sink:
            write_provenance(sink, self.provenance())
            n = write_eval_report(rows, sink)
        self.output(out)
        self.stdout.write(self.style.SUCCESS(f"Wrote {n} row(s) → {out}"))

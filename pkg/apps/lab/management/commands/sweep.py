from __future__ import annotations

from pathlib import Path

from django.core.exceptions import ValidationError

from apps.lab.analysis import (
    MIN_SWEEP_POINTS,
    SweepResult,
    parameter_sweep,
    write_histogram_report,
    write_summary_report,
)
from apps.lab.benchmarks import EvalRow, count_oov_pairs, safe_evaluate, write_eval_report
from apps.lab.exceptions import AnalysisError, LabError
from apps.lab.lexicon import PosLexicon, build_pivots, load_wordnet_dir, read_pivots
from apps.lab.pipeline import TrainJob, model_filename, run_training
from apps.lab.reports import write_provenance
from apps.lab.streams import open_output, open_text
from apps.lab.sweepspec import SweepSpec, parse_int_list, parse_sweep_spec

from ._base import LabCommand


class Command(LabCommand):
    help = (
        "Same-POS neighbor ratio vs. window (or dim) sweep: trains or loads one model per "
        "(algorithm, value), writes histogram + summary TSVs (and an evaluation TSV when benchmarks are given)."
    )

    def add_arguments(self, parser):
        lab = self.lab
        parser.add_argument("--spec", help="key=value sweep spec file. When given, the grid flags below are ignored.")
        parser.add_argument("--corpus")
        parser.add_argument("--algos", default="CBOW,SGNS")
        parser.add_argument("--windows", help="e.g. 1-15 or 1,3,7")
        parser.add_argument("--dims", default="", help="Values for --vary dim.")
        parser.add_argument("--vary", default="window", choices=["window", "dim"])
        parser.add_argument("--dim", type=int, default=lab["DIM"])
        parser.add_argument("--min-count", type=int, default=lab["MIN_COUNT"])
        parser.add_argument("--epochs", type=int, default=lab["EPOCHS"])
        parser.add_argument("--negatives", type=int, default=lab["NEGATIVES"])
        parser.add_argument("--lr", type=float, default=lab["LEARNING_RATE"])
        parser.add_argument("--subsample", type=float, default=lab["SUBSAMPLE"])
        parser.add_argument("--seed", type=int, default=1)
        parser.add_argument("--benchmark", action="append", default=[])
        parser.add_argument("--mft-lexicon")
        parser.add_argument("--wordnet-dir", help="Without it the MFT lexicon is treated as gold (synthetic runs).")
        parser.add_argument("--pivots", help="Precomputed pivot TSV (word<TAB>POS).")
        parser.add_argument("--output-dir", default=lab["OUTPUT_DIR"])
        parser.add_argument("--k-search", type=int, default=lab["K_SEARCH"])
        parser.add_argument("--k-keep", type=int, default=lab["K_KEEP"])
        parser.add_argument("--respect-lines", action="store_true")
        parser.add_argument("--jobs", type=int, default=lab["JOBS"], help="Concurrent training jobs (processes).")
        parser.add_argument("--reuse", action="store_true", help="Reuse intact ledger models for identical configs.")

    # -------------------------
    # spec
    # -------------------------
    def _spec_from_flags(self, o) -> SweepSpec:
        try:
            windows = parse_int_list(o["windows"] or "")
            dims = parse_int_list(o["dims"] or "")
        except ValueError as exc:
            raise ValidationError(f"invalid list value: {exc}") from None
        return SweepSpec(
            corpus=Path(o["corpus"]) if o["corpus"] else None,
            algorithms=tuple(a.strip().upper() for a in o["algos"].split(",") if a.strip()),
            windows=windows,
            dims=dims,
            vary=o["vary"],
            mft_lexicon=Path(o["mft_lexicon"]) if o["mft_lexicon"] else None,
            output_dir=Path(o["output_dir"]),
            dim=o["dim"],
            min_count=o["min_count"],
            epochs=o["epochs"],
            seed=o["seed"],
            negatives=o["negatives"],
            learning_rate=o["lr"],
            subsample=o["subsample"],
            k_search=o["k_search"],
            k_keep=o["k_keep"],
            respect_lines=o["respect_lines"],
            benchmarks=tuple(Path(b) for b in o["benchmark"]),
            wordnet_dir=Path(o["wordnet_dir"]) if o["wordnet_dir"] else None,
            pivots=Path(o["pivots"]) if o["pivots"] else None,
        )

    def _load_spec(self, o) -> SweepSpec:
        if not o["spec"]:
            return self._spec_from_flags(o)
        lab = self.lab
        defaults = {
            "dim": lab["DIM"], "min_count": lab["MIN_COUNT"], "epochs": lab["EPOCHS"],
            "negatives": lab["NEGATIVES"], "learning_rate": lab["LEARNING_RATE"], "subsample": lab["SUBSAMPLE"],
            "k_search": lab["K_SEARCH"], "k_keep": lab["K_KEEP"], "output_dir": lab["OUTPUT_DIR"],
        }
        spec_path = Path(o["spec"])
        with open_text(spec_path) as fh:
            return parse_sweep_spec(fh, base_dir=spec_path.parent, defaults=defaults)

    # -------------------------
    # run
    # -------------------------
    def run(self, **options):
        self.positive("jobs", options["jobs"])
        spec = self._load_spec(options)
        spec.clean()
        if len(spec.values) < MIN_SWEEP_POINTS:
            raise AnalysisError(f"sweep needs ≥ {MIN_SWEEP_POINTS} {spec.vary}s (got {len(spec.values)})")

        lex, pivots = self._lexicon(spec)
        self.info("pivots: " + ", ".join(f"{pos}={n}" for pos, n in pivots.counts().items()))

        paths, failed = self._models(spec, options)
        models = {}
        for key, path in paths.items():
            try:
                models[key] = self.load_model(path, algorithm=key[0], window=self._window(spec, key[1]))
            except (LabError, OSError) as exc:
                failed[key] = str(exc)

        failures: list[str] = []
        for (algo, value), reason in sorted(failed.items()):
            failures.append(f"{algo} {spec.vary}={value}: {reason}")
            self.stderr.write(self.style.ERROR(f"[FAILED] {algo} {spec.vary}={value}: {reason}"))

        results: list[SweepResult] = []
        for algo in spec.algorithms:
            grid = {v: models[(algo, v)] for v in spec.values if (algo, v) in models}
            try:
                results.append(
                    parameter_sweep(
                        grid, pivots, lex, spec.vary,
                        algorithm=algo, k_search=spec.k_search, k_keep=spec.k_keep, jobs=options["jobs"],
                    )
                )
            except LabError as exc:
                failures.append(f"{algo}: {exc}")
                self.stderr.write(self.style.ERROR(f"[FAILED] {algo}: {exc}"))

        out_dir = spec.output_dir
        if results:
            combined = SweepResult.combine(results)
            self._write(out_dir / "sweep_histogram.tsv", write_histogram_report, combined)
            self._write(out_dir / "sweep_summary.tsv", write_summary_report, combined)
            self._print_summary(combined)

        if spec.benchmarks:
            rows = self._evaluate(spec, models)
            self._write(out_dir / "evaluation.tsv", write_eval_report, rows)

        if failures:
            raise AnalysisError("sweep incomplete: " + " | ".join(failures))
        self.stdout.write(self.style.SUCCESS(f"Sweep done → {out_dir}"))

    def _window(self, spec: SweepSpec, value: int) -> int:
        return value if spec.vary == "window" else spec.windows[0]

    def _lexicon(self, spec: SweepSpec):
        mft = self.load_mft(spec.mft_lexicon)
        if spec.wordnet_dir is not None:
            lex = PosLexicon(wordnet_pos=load_wordnet_dir(spec.wordnet_dir), mft_pos=mft)
        else:
            lex = PosLexicon.from_gold(mft)
        if spec.pivots is not None:
            with open_text(spec.pivots) as fh:
                return lex, read_pivots(fh)
        return lex, build_pivots(lex)

    def _models(self, spec: SweepSpec, options) -> tuple[dict[tuple[str, int], Path], dict[tuple[str, int], str]]:
        """Model path per (algorithm, value), plus the cells whose training failed."""
        paths: dict[tuple[str, int], Path] = {}
        failed: dict[tuple[str, int], str] = {}
        jobs: list[tuple[tuple[str, int], TrainJob]] = []
        for algo in spec.algorithms:
            for value in spec.values:
                key = (algo, value)
                if key in spec.models:
                    paths[key] = spec.models[key]
                    continue
                config = spec.train_config(algo, value)
                jobs.append((key, TrainJob(config, spec.output_dir / "models" / model_filename(config))))

        if jobs:
            self.info(f"training {len(jobs)} model(s) on {spec.corpus} (jobs={options['jobs']})")
            outcomes = run_training(
                spec.corpus, [job for _, job in jobs],
                max_workers=options["jobs"], reuse=options["reuse"], keep_going=True,
            )
            for (key, _), outcome in zip(jobs, outcomes):
                if outcome.failed:
                    failed[key] = outcome.error
                    continue
                paths[key] = outcome.path
                self.output(outcome.path)
                verb = "reused" if outcome.reused else "trained"
                self.info(f"- {key[0]} {spec.vary}={key[1]}: {verb}, vocabulary {outcome.vocab_size}, tokens {outcome.total_tokens}")
        ordered = {(a, v): paths[(a, v)] for a in spec.algorithms for v in spec.values if (a, v) in paths}
        return ordered, failed

    def _evaluate(self, spec: SweepSpec, models) -> list[EvalRow]:
        rows = []
        for path in spec.benchmarks:
            bench = self.load_benchmark(path)
            for (algo, value), model in models.items():
                window = self._window(spec, value)
                rows.append(EvalRow(bench.name, algo, window, safe_evaluate(model, bench), count_oov_pairs(model, bench)))
        return rows

    def _write(self, path: Path, writer, payload) -> None:
        with open_output(path) as sink:
            write_provenance(sink, self.provenance())
            writer(payload, sink)
        self.output(path)

    def _print_summary(self, result: SweepResult) -> None:
        self.stdout.write(self.style.MIGRATE_HEADING(f"same-POS ratio vs {result.parameter}"))
        for s in result.series:
            (v0, r0), (v1, r1) = s.points[0], s.points[-1]
            self.stdout.write(
                f"- {s.algorithm:<4} {str(s.pivot_pos):<4} {result.parameter}={v0}: {r0:.0%}  "
                f"{result.parameter}={v1}: {r1:.0%}  r={s.pearson_r:+.2f}  p={s.p_value:.2g}"
            )

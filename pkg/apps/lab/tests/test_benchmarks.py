import io
import math

import numpy as np
from django.test import SimpleTestCase

from apps.lab.benchmarks import (
    Benchmark,
    EvalResult,
    EvalRow,
    ScoredPair,
    band_partition,
    count_oov_pairs,
    delta_win,
    evaluate,
    import_benchmark,
    load_benchmark,
    safe_evaluate,
    write_canonical,
    write_eval_report,
)
from apps.lab.exceptions import BenchmarkError, FormatError
from apps.lab.reports import read_tsv
from apps.lab.vecstore import EmbeddingModel


def _bench(scores, name="toy"):
    return Benchmark(name, tuple(ScoredPair(f"x{i}", f"y{i}", float(s)) for i, s in enumerate(scores)))


def _angle_model(cosines):
    """w0 = (1, 0); w(i+1) at an angle whose cosine with w0 is cosines[i]."""
    rows = [[1.0, 0.0]] + [[c, math.sqrt(1.0 - c * c)] for c in cosines]
    return EmbeddingModel([f"w{i}" for i in range(len(rows))], rows)


class LoadBenchmarkTests(SimpleTestCase):
    def test_parses_and_lowercases(self):
        bench = load_benchmark(["# comment", "Tiger\tcat\t7.35", "", "book\tPaper\t7.46"], "ws")
        self.assertEqual(len(bench), 2)
        self.assertEqual(bench.pairs[0], ScoredPair("tiger", "cat", 7.35))
        self.assertEqual(bench.pairs[1].word2, "paper")
        self.assertEqual((bench.score_min, bench.score_max), (7.35, 7.46))

    def test_unparseable_score_names_line(self):
        lines = ["a\tb\t1"] * 6 + ["a\tb\tabc"]
        with self.assertRaises(FormatError) as ctx:
            load_benchmark(lines, "bad")
        self.assertEqual(ctx.exception.line_number, 7)
        self.assertIn("unparseable score", str(ctx.exception))

    def test_invalid_utf8_names_line(self):
        with self.assertRaises(FormatError) as ctx:
            load_benchmark(io.BytesIO(b"tiger\tcat\t7.35\ncaf\xe9\tbar\t5\n"), "latin1")
        self.assertEqual(ctx.exception.line_number, 2)
        self.assertIn("invalid UTF-8 (byte 0xe9 at column 4)", str(ctx.exception))

    def test_wrong_field_count(self):
        with self.assertRaises(FormatError):
            load_benchmark(["a b 1"], "bad")

    def test_empty(self):
        with self.assertRaisesMessage(BenchmarkError, "has no pairs"):
            load_benchmark(["# nothing"], "empty")

    def test_size_is_line_count(self):
        rng = np.random.default_rng(0)
        lines = [f"a{i}\tb{i}\t{rng.uniform(0, 10):.2f}" for i in range(353)]
        self.assertEqual(len(load_benchmark(lines, "ws353")), 353)


class EvaluateTests(SimpleTestCase):
    COSINES = [0.95, 0.7, 0.3, -0.2, 0.5]

    def _bench(self, scores):
        return Benchmark("b", tuple(ScoredPair("w0", f"w{i + 1}", s) for i, s in enumerate(scores)))

    def test_perfect_agreement(self):
        result = evaluate(_angle_model(self.COSINES), self._bench(self.COSINES))
        self.assertAlmostEqual(result.rho, 1.0, places=12)
        self.assertEqual((result.n_used, result.n_oov_pairs), (5, 0))

    def test_perfect_disagreement(self):
        result = evaluate(_angle_model(self.COSINES), self._bench([-c for c in self.COSINES]))
        self.assertAlmostEqual(result.rho, -1.0, places=12)

    def test_monotone_score_transform_keeps_rho(self):
        model = _angle_model(self.COSINES)
        scores = [3.0, 1.0, 4.0, 1.5, 9.0]
        base = evaluate(model, self._bench(scores)).rho
        self.assertAlmostEqual(evaluate(model, self._bench([math.exp(s) for s in scores])).rho, base, places=12)

    def test_oov_pairs_are_counted(self):
        bench = Benchmark("b", (
            ScoredPair("w0", "w1", 1.0), ScoredPair("w0", "w2", 2.0),
            ScoredPair("w0", "zebra", 3.0), ScoredPair("w2", "w3", 4.0),
        ))
        result = evaluate(_angle_model(self.COSINES), bench)
        self.assertEqual(result.n_oov_pairs, 1)
        self.assertEqual(result.n_used + result.n_oov_pairs, len(bench))
        self.assertEqual(count_oov_pairs(_angle_model(self.COSINES), bench), 1)

    def test_insufficient_coverage(self):
        bench = Benchmark("b", (ScoredPair("w0", "w1", 1.0), ScoredPair("q", "r", 2.0)))
        with self.assertRaisesMessage(BenchmarkError, "insufficient coverage"):
            evaluate(_angle_model(self.COSINES), bench)
        self.assertIsNone(safe_evaluate(_angle_model(self.COSINES), bench))


class BandPartitionTests(SimpleTestCase):
    def test_ten_point_scale(self):
        bench = _bench([0.0, 10.0, 9.5, 2.0, 5.0, 7.0, 3.0])
        bands = band_partition(bench)
        low, high = bands.thresholds
        self.assertAlmostEqual(low, 3.0, places=12)
        self.assertAlmostEqual(high, 7.0, places=12)
        self.assertEqual(bands.related, {1, 2, 5})
        self.assertEqual(bands.unrelated, {0, 3, 6})
        self.assertEqual(bands.ignored, {4})

    def test_bands_partition_every_pair(self):
        bench = _bench(np.random.default_rng(1).uniform(0, 5, size=200))
        bands = band_partition(bench)
        self.assertEqual(len(bands.related | bands.unrelated | bands.ignored), 200)
        self.assertFalse(bands.related & bands.unrelated)
        self.assertFalse(bands.related & bands.ignored)
        self.assertFalse(bands.unrelated & bands.ignored)

    def test_affine_rescaling_keeps_membership(self):
        scores = list(np.random.default_rng(2).uniform(0, 10, size=100)) + [0.0, 10.0, 3.0, 7.0]
        base = band_partition(_bench(scores))
        for a, b in ((3.0, 5.0), (0.1, -2.0), (100.0, 0.0)):
            bands = band_partition(_bench([a * s + b for s in scores]))
            self.assertEqual(bands.related, base.related)
            self.assertEqual(bands.unrelated, base.unrelated)

    def test_constant_scores(self):
        with self.assertRaisesMessage(BenchmarkError, "degenerate score range"):
            band_partition(_bench([4.0, 4.0, 4.0]))


class DeltaWinTests(SimpleTestCase):
    def test_signed_percent(self):
        self.assertAlmostEqual(delta_win(0.50, 0.62), 24.0, places=9)
        self.assertAlmostEqual(delta_win(0.40, 0.28), -30.0, places=9)

    def test_zero_base(self):
        with self.assertRaisesMessage(BenchmarkError, "undefined relative change"):
            delta_win(0.0, 0.3)


class ImportBenchmarkTests(SimpleTestCase):
    def test_csv_with_header(self):
        rows = import_benchmark(["Word 1,Word 2,Human (mean)", "Love,sex,6.77", "tiger,cat,7.35"], "csv")
        self.assertEqual(rows, [ScoredPair("love", "sex", 6.77), ScoredPair("tiger", "cat", 7.35)])

    def test_tsv_columns(self):
        lines = ["word1\tword2\tPOS\tSimLex999", "old\tnew\tA\t1.58", "smart\tintelligent\tA\t9.2"]
        rows = import_benchmark(lines, "tsv-columns", score_column=4)
        self.assertEqual([r.score for r in rows], [1.58, 9.2])

    def test_canonical_output_reloads(self):
        buf = io.StringIO()
        write_canonical(import_benchmark(["a,b,1.5", "c,d,2"], "csv"), buf)
        self.assertEqual(buf.getvalue(), "a\tb\t1.5\nc\td\t2\n")
        self.assertEqual(len(load_benchmark(io.StringIO(buf.getvalue()), "x")), 2)

    def test_unknown_layout_and_bad_column(self):
        with self.assertRaises(BenchmarkError):
            import_benchmark(["a,b,1"], "xml")
        with self.assertRaises(BenchmarkError):
            import_benchmark(["a\tb\t1"], "tsv-columns", score_column=2)


class EvalReportTests(SimpleTestCase):
    def test_rows_then_delta_rows(self):
        rows = [
            EvalRow("ws", "SGNS", 2, EvalResult(0.5, 10, 1), 1),
            EvalRow("ws", "SGNS", 15, EvalResult(0.62, 10, 1), 1),
            EvalRow("rw", "SGNS", 2, None, 40),
            EvalRow("rw", "SGNS", 15, EvalResult(0.3, 5, 36), 36),
        ]
        buf = io.StringIO()
        self.assertEqual(write_eval_report(rows, buf), 5)
        columns, body = read_tsv(buf.getvalue().splitlines())
        self.assertEqual(columns, ["benchmark", "algorithm", "window", "rho", "n_used", "n_oov"])
        self.assertEqual(body[2], ["rw", "SGNS", "2", "NA", "0", "40"])
        self.assertEqual(body[4], ["ws", "SGNS", "2->15", "24", "-", "-"])

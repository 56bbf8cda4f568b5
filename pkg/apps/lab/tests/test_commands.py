import json
import math
import pickle
import shutil
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from apps.lab.exceptions import DivergenceError, FormatError, OOVError
from apps.lab.models import ExperimentRun, ModelArtifact
from apps.lab.pipeline import TrainJob, run_training
from apps.lab.reports import read_tsv
from apps.lab.trainer import TrainConfig

GRAMMAR = """\
# 3-class toy grammar
seed=5
sentences=400
zipf=1.0
class=NOUN,12
class=VERB,6
class=ADJ,6
template=3,ADJ NOUN VERB NOUN
template=2,NOUN VERB ADJ NOUN
template=1,VERB NOUN
"""

# n1 / v1 / a1 pivots; each window moves their two nearest neighbors off-class
LAYOUTS = {
    1: {"n1": 0, "n2": 4, "n3": 8, "v1": 120, "v2": 124, "v3": 128, "a1": 240, "a2": 244, "a3": 248},
    5: {"n1": 0, "n2": 4, "v2": 8, "v1": 120, "v3": 124, "a2": 128, "a1": 240, "a3": 244, "n3": 248},
    15: {"n1": 0, "v2": 4, "a2": 8, "v1": 120, "a3": 124, "n2": 128, "a1": 240, "n3": 244, "v3": 248},
}

LEXICON = "".join(f"{w}\t{tag}\n" for tag, prefix in (("NOUN", "n"), ("VERB", "v"), ("ADJ", "a")) for w in (f"{prefix}1", f"{prefix}2", f"{prefix}3"))

TRAIN_FLAGS = ["--dim", "8", "--min-count", "1", "--epochs", "1", "--subsample", "0"]


def _circle_model_text(angles):
    rows = [f"{w} {math.cos(math.radians(a))!r} {math.sin(math.radians(a))!r}" for w, a in angles.items()]
    return f"{len(rows)} 2\n" + "\n".join(rows) + "\n"


class CommandTestCase(TestCase):
    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)

    def write(self, name, text):
        path = self.tmp / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return path

    def write_bytes(self, name, data):
        path = self.tmp / name
        path.write_bytes(data)
        return path

    def call(self, *args):
        out, err = StringIO(), StringIO()
        call_command(*args, stdout=out, stderr=err)
        return out.getvalue(), err.getvalue()

    def rows(self, path):
        return read_tsv(Path(path).read_text(encoding="utf-8").splitlines())

    def corpus(self):
        grammar = self.write("grammar.txt", GRAMMAR)
        corpus, lexicon = self.tmp / "corpus.txt", self.tmp / "gold.tsv"
        self.call("gencorpus", "--grammar", str(grammar), "--out-corpus", str(corpus), "--out-lexicon", str(lexicon))
        return corpus, lexicon


class GencorpusCommandTests(CommandTestCase):
    def test_writes_corpus_and_gold_lexicon(self):
        corpus, lexicon = self.corpus()
        lines = corpus.read_text(encoding="utf-8").splitlines()
        self.assertEqual(len(lines), 400)
        gold = dict(line.split("\t") for line in lexicon.read_text(encoding="utf-8").splitlines())
        self.assertEqual(len(gold), 24)
        self.assertTrue(all(w in gold for line in lines for w in line.split()))

    def test_overrides(self):
        grammar = self.write("grammar.txt", GRAMMAR)
        corpus = self.tmp / "c.txt"
        self.call("gencorpus", "--grammar", str(grammar), "--out-corpus", str(corpus),
                  "--out-lexicon", str(self.tmp / "l.tsv"), "--sentences", "10", "--seed", "9")
        self.assertEqual(len(corpus.read_text(encoding="utf-8").splitlines()), 10)

    def test_invalid_grammar_is_usage_error(self):
        grammar = self.write("bad.txt", "class=NOUN,0\ntemplate=1,NOUN\n")
        with self.assertRaises(CommandError) as ctx:
            self.call("gencorpus", "--grammar", str(grammar), "--out-corpus", str(self.tmp / "c"),
                      "--out-lexicon", str(self.tmp / "l"))
        self.assertEqual(ctx.exception.returncode, 2)


class TrainCommandTests(CommandTestCase):
    def test_trains_and_records(self):
        corpus, _ = self.corpus()
        model = self.tmp / "m.txt"
        self.call("train", "--corpus", str(corpus), "--out", str(model), "--window", "2", *TRAIN_FLAGS)
        header = model.read_text(encoding="utf-8").splitlines()[0].split()
        self.assertEqual(header, ["24", "8"])

        run = ExperimentRun.objects.get(command="train")
        self.assertEqual((run.command, run.status, run.seed), ("train", ExperimentRun.Status.OK, 1))
        self.assertEqual(run.outputs, [str(model)])
        self.assertEqual(ModelArtifact.objects.count(), 1)

    def test_same_seed_same_bytes(self):
        corpus, _ = self.corpus()
        a, b = self.tmp / "a.txt", self.tmp / "b.txt"
        for out in (a, b):
            self.call("train", "--corpus", str(corpus), "--out", str(out), "--algo", "cbow", *TRAIN_FLAGS)
        self.assertEqual(a.read_bytes(), b.read_bytes())

    def test_reuse_skips_training(self):
        corpus, _ = self.corpus()
        first, second = self.tmp / "first.txt", self.tmp / "second.txt"
        self.call("train", "--corpus", str(corpus), "--out", str(first), *TRAIN_FLAGS)
        out, _ = self.call("train", "--corpus", str(corpus), "--out", str(second), "--reuse", *TRAIN_FLAGS)
        self.assertIn("Training skipped", out)
        self.assertEqual(first.read_bytes(), second.read_bytes())
        self.assertEqual(ModelArtifact.objects.count(), 1)

    def test_missing_required_flag(self):
        with self.assertRaisesMessage(CommandError, "--corpus"):
            self.call("train", "--out", str(self.tmp / "m.txt"))

    def test_bad_window_is_usage_error(self):
        corpus, _ = self.corpus()
        with self.assertRaises(CommandError) as ctx:
            self.call("train", "--corpus", str(corpus), "--out", str(self.tmp / "m.txt"), "--window", "0")
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("window must be ≥ 1", str(ctx.exception))
        self.assertEqual(ExperimentRun.objects.get(command="train").status, ExperimentRun.Status.FAILED)

    def test_missing_corpus_is_runtime_error(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("train", "--corpus", str(self.tmp / "nope.txt"), "--out", str(self.tmp / "m.txt"))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_invalid_utf8_corpus_names_file_and_line(self):
        corpus = self.write_bytes("latin.txt", b"a b c\nd \xff\xfe e\n")
        with self.assertRaises(CommandError) as ctx:
            self.call("train", "--corpus", str(corpus), "--out", str(self.tmp / "m.txt"), *TRAIN_FLAGS)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("latin.txt: line 2: invalid UTF-8", str(ctx.exception))
        self.assertFalse((self.tmp / "m.txt").exists())


class EvalCommandTests(CommandTestCase):
    def setUp(self):
        super().setUp()
        self.m2 = self.write("m2.txt", _circle_model_text(LAYOUTS[1]))
        self.m15 = self.write("m15.txt", _circle_model_text(LAYOUTS[15]))
        self.benchmarks = [
            self.write(f"b{i}.tsv", "".join(f"n1\t{w}\t{s}\n" for w, s in pairs))
            for i, pairs in enumerate((
                (("n2", 9.0), ("n3", 7.5), ("v1", 2.0), ("a1", 1.0)),
                (("v2", 8.0), ("a2", 6.0), ("n3", 3.0), ("zebra", 5.0)),
                (("a3", 1.0), ("v3", 4.0), ("n2", 6.0), ("a2", 2.5)),
            ))
        ]

    def _eval(self, out):
        args = ["eval", "--model", f"SGNS:2={self.m2}", "--model", f"SGNS:15={self.m15}", "--out", str(out)]
        for b in self.benchmarks:
            args += ["--benchmark", str(b)]
        return self.call(*args)

    def test_rows_per_benchmark_and_model(self):
        out = self.tmp / "eval.tsv"
        self._eval(out)
        columns, rows = self.rows(out)
        self.assertEqual(columns, ["benchmark", "algorithm", "window", "rho", "n_used", "n_oov"])
        data = [r for r in rows if r[2] != "2->15"]
        self.assertEqual(len(data), 6)
        self.assertEqual([(r[0], r[2]) for r in data[:2]], [("b0", "2"), ("b0", "15")])
        self.assertEqual(data[2][5], "1")
        self.assertEqual(len([r for r in rows if r[2] == "2->15"]), 3)

    def test_provenance_and_byte_identical_reruns(self):
        a = self.tmp / "a.tsv"
        self._eval(a)
        text_a = a.read_text(encoding="utf-8")
        self._eval(a)
        self.assertEqual(a.read_text(encoding="utf-8"), text_a)
        self.assertTrue(text_a.startswith("# windowlens 1.0.0 eval\n# flags: "))

    def test_unreadable_model(self):
        bad = self.write("bad.txt", "2 2\nx 1 0\ny 1\n")
        with self.assertRaises(CommandError) as ctx:
            self.call("eval", "--model", f"5={bad}", "--benchmark", str(self.benchmarks[0]), "--out", str(self.tmp / "e.tsv"))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("bad.txt", str(ctx.exception))

    def test_malformed_model_spec(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("eval", "--model", "nowindow.txt", "--benchmark", str(self.benchmarks[0]), "--out", str(self.tmp / "e.tsv"))
        self.assertEqual(ctx.exception.returncode, 2)


class EnrichCommandTests(CommandTestCase):
    def test_counts_fixture(self):
        counts = self.write("counts.tsv", "WordSim353\t122\t107\t53\t40\nMEN\t791\t564\t781\t439\n")
        out = self.tmp / "enrich.tsv"
        self.call("enrich", "--counts", str(counts), "--out", str(out))
        _, rows = self.rows(out)
        self.assertEqual([r[0] for r in rows], ["WordSim353", "MEN"])
        self.assertAlmostEqual(float(rows[0][5]), 0.038, delta=0.001)
        self.assertLess(float(rows[1][5]), 1e-8)

    def test_benchmarks_in_order(self):
        lexicon = self.write("mft.tsv", LEXICON)
        benches = [
            self.write(f"{name}.tsv", "n1\tn2\t9\nn1\tv1\t8\nv1\tv2\t1\na1\tn3\t0\nzz\tn1\t0.5\n")
            for name in ("zeta", "alpha", "mid")
        ]
        out = self.tmp / "enrich.tsv"
        args = ["enrich", "--mft-lexicon", str(lexicon), "--out", str(out)]
        for b in benches:
            args += ["--benchmark", str(b)]
        _, err = self.call(*args)
        _, rows = self.rows(out)
        self.assertEqual([r[0] for r in rows], ["zeta", "alpha", "mid"])
        self.assertEqual(rows[0][1:5], ["2", "1", "2", "1"])
        self.assertEqual(rows[0][6], "1")
        self.assertIn("skipped", err)

    def test_constant_scores(self):
        lexicon = self.write("mft.tsv", LEXICON)
        flat = self.write("flat.tsv", "n1\tn2\t5\nv1\tv2\t5\n")
        with self.assertRaises(CommandError) as ctx:
            self.call("enrich", "--benchmark", str(flat), "--mft-lexicon", str(lexicon), "--out", str(self.tmp / "e.tsv"))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("degenerate score range", str(ctx.exception))

    def test_needs_inputs(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("enrich", "--out", str(self.tmp / "e.tsv"))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_invalid_utf8_benchmark(self):
        lexicon = self.write("mft.tsv", LEXICON)
        bench = self.write_bytes("cafe.tsv", b"n1\tn2\t9\ncaf\xe9\tn1\t3\n")
        with self.assertRaises(CommandError) as ctx:
            self.call("enrich", "--benchmark", str(bench), "--mft-lexicon", str(lexicon), "--out", str(self.tmp / "e.tsv"))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("cafe.tsv: line 2: invalid UTF-8 (byte 0xe9", str(ctx.exception))


class SweepCommandTests(CommandTestCase):
    def _spec(self, windows=(1, 5, 15), extra="", missing=()):
        self.write("mft.tsv", LEXICON)
        self.write("pivots.tsv", "n1\tNOUN\na1\tADJ\nv1\tVERB\n")
        lines = [
            "mft_lexicon=mft.tsv",
            "pivots=pivots.tsv",
            "algorithms=CBOW,SGNS",
            "windows=" + ",".join(str(w) for w in windows),
            "k_search=2",
            "k_keep=2",
            "output_dir=out",
        ]
        for w in windows:
            if w not in missing:
                self.write(f"w{w}.txt", _circle_model_text(LAYOUTS[w]))
            lines += [f"models.CBOW.{w}=w{w}.txt", f"models.SGNS.{w}=w{w}.txt"]
        return self.write("sweep.spec", "\n".join(lines) + "\n" + extra)

    def test_histogram_and_summary(self):
        spec = self._spec()
        out, _ = self.call("sweep", "--spec", str(spec))
        self.assertIn("Sweep done", out)

        columns, summary = self.rows(self.tmp / "out" / "sweep_summary.tsv")
        self.assertEqual(columns[:2], ["algorithm", "pivot_pos"])
        self.assertEqual(len(summary), 6)
        self.assertEqual({(r[0], r[1]) for r in summary},
                         {(a, p) for a in ("CBOW", "SGNS") for p in ("NOUN", "ADJ", "VERB")})
        for r in summary:
            self.assertEqual((r[3], r[5]), ("1", "0"))
            self.assertLess(float(r[6]), 0)

        _, hist = self.rows(self.tmp / "out" / "sweep_histogram.tsv")
        self.assertEqual(len(hist), 6 * (3 * 5 + 1))

    def test_reruns_are_byte_identical(self):
        spec = self._spec()
        self.call("sweep", "--spec", str(spec))
        first = (self.tmp / "out" / "sweep_histogram.tsv").read_bytes()
        self.call("sweep", "--spec", str(spec))
        self.assertEqual((self.tmp / "out" / "sweep_histogram.tsv").read_bytes(), first)

    def test_failed_window_keeps_the_others(self):
        spec = self._spec(windows=(1, 5, 15, 30), missing=(30,))
        out, err = StringIO(), StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command("sweep", "--spec", str(spec), stdout=out, stderr=err)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("sweep incomplete", str(ctx.exception))
        self.assertIn("[FAILED] CBOW window=30", err.getvalue())
        self.assertIn("[FAILED] SGNS window=30", err.getvalue())

        _, summary = self.rows(self.tmp / "out" / "sweep_summary.tsv")
        self.assertEqual(len(summary), 6)
        for r in summary:
            self.assertEqual((r[2], r[4], r[8]), ("1", "15", "3"))
        self.assertEqual(ExperimentRun.objects.get(command="sweep").status, ExperimentRun.Status.FAILED)

    def test_too_few_windows_left(self):
        spec = self._spec(windows=(1, 5, 15), missing=(15,))
        with self.assertRaises(CommandError) as ctx:
            self.call("sweep", "--spec", str(spec))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("sweep needs ≥ 3 windows (got 2)", str(ctx.exception))
        self.assertFalse((self.tmp / "out" / "sweep_summary.tsv").exists())

    def test_single_window(self):
        spec = self._spec(windows=(5,))
        with self.assertRaises(CommandError) as ctx:
            self.call("sweep", "--spec", str(spec))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("sweep needs ≥ 3", str(ctx.exception))
        self.assertFalse((self.tmp / "out").exists())

    def test_evaluation_alongside(self):
        self.write("ws.tsv", "n1\tn2\t9\nn1\tv2\t4\nn1\ta3\t1\nv1\tv3\t7\n")
        spec = self._spec(extra="benchmarks=ws.tsv\n")
        self.call("sweep", "--spec", str(spec))
        _, rows = self.rows(self.tmp / "out" / "evaluation.tsv")
        self.assertEqual(len(rows), 6)

    def test_trains_missing_models(self):
        corpus, lexicon = self.corpus()
        out_dir = self.tmp / "trained"
        args = [
            "sweep", "--corpus", str(corpus), "--mft-lexicon", str(lexicon), "--algos", "SGNS",
            "--windows", "1,2,3", "--dim", "8", "--min-count", "1", "--epochs", "1", "--subsample", "0",
            "--k-search", "10", "--k-keep", "5", "--output-dir", str(out_dir),
        ]
        try:
            self.call(*args)
        except CommandError as exc:
            # 작은 corpus에서는 ratio가 window마다 같을 수 있다
            self.assertIn("degenerate sweep", str(exc))
        self.assertEqual(sorted(p.name for p in (out_dir / "models").iterdir()),
                         ["sgns_w1_d8_s1.txt", "sgns_w2_d8_s1.txt", "sgns_w3_d8_s1.txt"])
        self.assertEqual(ModelArtifact.objects.count(), 3)


class ToolCommandTests(CommandTestCase):
    def test_import_corpus(self):
        raw = self.write("raw.txt", "Hello, World 42!\n\n...\nSecond line\n")
        out = self.tmp / "corpus.txt"
        self.call("import_corpus", "--input", str(raw), "--out", str(out))
        self.assertEqual(out.read_text(encoding="utf-8"), "hello world four two\nsecond line\n")

    def test_import_benchmark(self):
        raw = self.write("ws.csv", "Word 1,Word 2,Human (mean)\nLove,sex,6.77\ntiger,cat,7.35\n")
        out = self.tmp / "ws.tsv"
        self.call("import_benchmark", "--input", str(raw), "--layout", "csv", "--out", str(out))
        self.assertEqual(out.read_text(encoding="utf-8"), "love\tsex\t6.77\ntiger\tcat\t7.35\n")

    def test_import_benchmark_score_column(self):
        raw = self.write("x.tsv", "a\tb\t1\n")
        with self.assertRaises(CommandError) as ctx:
            self.call("import_benchmark", "--input", str(raw), "--layout", "tsv-columns",
                      "--score-column", "2", "--out", str(self.tmp / "o.tsv"))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_mft_lexicon_and_pivots(self):
        tagged = self.write("tagged.txt", "the/DT dog/NN runs/VBZ\nred/JJ run/VB run/VB run/NN\n")
        mft = self.tmp / "mft.tsv"
        self.call("mft_lexicon", "--tagged", str(tagged), "--out", str(mft))
        self.assertIn("run\tVERB\n", mft.read_text(encoding="utf-8"))

        wn = self.tmp / "dict"
        for name, lemmas in (("index.noun", ["dog", "run"]), ("index.verb", ["run", "runs"]),
                             ("index.adj", ["red"]), ("index.adv", ["quickly"])):
            self.write(f"dict/{name}", "  1 header\n" + "".join(f"{w} x 1 1 @ 1 0 00000001\n" for w in lemmas))
        out = self.tmp / "pivots.tsv"
        self.call("pivots", "--wordnet-dir", str(wn), "--mft-lexicon", str(mft), "--out", str(out))
        self.assertEqual(out.read_text(encoding="utf-8"), "dog\tNOUN\nred\tADJ\nruns\tVERB\n")

    def test_pivots_missing_index(self):
        mft = self.write("mft.tsv", LEXICON)
        with self.assertRaises(CommandError) as ctx:
            self.call("pivots", "--wordnet-dir", str(self.tmp / "nowhere"), "--mft-lexicon", str(mft),
                      "--out", str(self.tmp / "p.tsv"))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_neighbors(self):
        model = self.write("m.txt", _circle_model_text(LAYOUTS[5]))
        out = self.tmp / "nn.tsv"
        self.call("neighbors", "--model", str(model), "--words", "n1,ghost", "--k", "2", "--out", str(out))
        text = out.read_text(encoding="utf-8")
        self.assertTrue(text.startswith("# windowlens 1.0.0 neighbors\n"))
        columns, rows = self.rows(out)
        self.assertEqual(columns, ["pivot", "rank", "neighbor", "cosine"])
        self.assertEqual([r[2] for r in rows], ["n2", "v2"])

    def test_runs_json(self):
        corpus, _ = self.corpus()
        with self.assertRaises(CommandError):
            self.call("train", "--corpus", str(corpus), "--out", str(self.tmp / "m.txt"), "--epochs", "0")
        out, _ = self.call("runs", "--json")
        payload = json.loads(out)
        self.assertEqual(payload["summary"]["runs"], 2)
        self.assertEqual([i["command"] for i in payload["items"]], ["train", "gencorpus"])
        self.assertEqual(payload["items"][0]["status"], "FAILED")
        self.assertIn("epochs", payload["items"][0]["message"])


class RunTrainingTests(CommandTestCase):
    def _jobs(self, *windows):
        return [
            TrainJob(TrainConfig(dim=8, window=w, epochs=1, min_count=1, subsample_threshold=0.0), self.tmp / f"w{w}.txt")
            for w in windows
        ]

    def test_keep_going_returns_failed_outcomes(self):
        corpus, _ = self.corpus()
        with mock.patch("apps.lab.trainer._sgns_update", return_value=float("nan")):
            outcomes = run_training(corpus, self._jobs(1, 2), keep_going=True)
        self.assertEqual([o.failed for o in outcomes], [True, True])
        self.assertIn("divergence", outcomes[0].error)
        self.assertEqual(ModelArtifact.objects.count(), 0)

    def test_failure_raises_without_keep_going(self):
        corpus, _ = self.corpus()
        with mock.patch("apps.lab.trainer._sgns_update", return_value=float("nan")):
            with self.assertRaises(DivergenceError):
                run_training(corpus, self._jobs(1))

    def test_errors_survive_the_process_pool(self):
        for exc in (DivergenceError(2, 17), FormatError("invalid UTF-8", 4), OOVError("zebra")):
            clone = pickle.loads(pickle.dumps(exc))
            self.assertIs(type(clone), type(exc))
            self.assertEqual(str(clone), str(exc))

import json
import subprocess
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

from earlyrisk.cli import cli
from earlyrisk.config import load_config
from earlyrisk.errors import ConfigurationError, ValidationError
from earlyrisk.synthetic import make_corpus


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "corpus.jsonl"
    make_corpus(path, n_subjects=12, posts_per_subject=4, seed=3)
    return path


@pytest.fixture
def runner():
    return CliRunner()


class TestConfigLoading:
    def test_defaults_with_overrides(self, corpus):
        cfg = load_config(None, {"path": str(corpus), "id": 2, "task": 1, "seed": 9})
        assert cfg.run_id == 2
        assert cfg.seed == 9
        assert cfg.train.seed == 9
        assert cfg.out_dim == 2
        assert cfg.preprocess == "none"

    def test_run1_implies_strip_urls(self, corpus):
        cfg = load_config(None, {"path": str(corpus), "id": 1, "task": 1})
        assert cfg.preprocess == "strip_urls"

    def test_toml_sections(self, corpus, tmp_path):
        config_file = tmp_path / "experiment.toml"
        config_file.write_text(
            f"""
[corpus]
path = "{corpus}"
format = "jsonl"

[run]
task = 1
id = 0
seed = 4

[train]
epochs = 2
batch_size = 4

[metrics]
erde_o = [5, 50]

[edeq]
window_days = 28
""",
            encoding="utf-8",
        )
        cfg = load_config(config_file)
        assert cfg.train.epochs == 2
        assert cfg.train.batch_size == 4
        assert cfg.seed == 4

    def test_missing_corpus_path_rejected(self):
        with pytest.raises(ValidationError):
            load_config(None, {})

    def test_nonexistent_corpus_rejected(self):
        with pytest.raises(ValidationError, match="does not exist"):
            load_config(None, {"path": "/nowhere/corpus.jsonl"})

    def test_bad_run_id_rejected(self, corpus):
        with pytest.raises(ConfigurationError):
            load_config(None, {"path": str(corpus), "task": 1, "id": 7})

    def test_unknown_override_rejected(self, corpus):
        with pytest.raises(ConfigurationError):
            load_config(None, {"path": str(corpus), "bogus": 1})

    def test_config_hash_stable(self, corpus):
        a = load_config(None, {"path": str(corpus)})
        b = load_config(None, {"path": str(corpus)})
        assert a.config_hash() == b.config_hash()
        c = load_config(None, {"path": str(corpus), "seed": 1})
        assert c.config_hash() != a.config_hash()


class TestSubcommands:
    def test_ingest_normalizes(self, runner, corpus, tmp_path):
        out = tmp_path / "normalized.jsonl"
        result = runner.invoke(cli, ["ingest", "--corpus", str(corpus), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert out.exists()

    def test_featurize_writes_matrix(self, runner, corpus, tmp_path):
        out_dir = tmp_path / "feat"
        result = runner.invoke(cli, [
            "featurize", "--corpus", str(corpus), "--out-dir", str(out_dir),
        ])
        assert result.exit_code == 0, result.output
        header = (out_dir / "features.csv").read_text().splitlines()[0]
        assert len(header.split(",")) == 80  # subject_id + 79 features
        assert (out_dir / "scaler.json").exists()

    def test_report_task1_all_artifacts(self, runner, corpus, tmp_path):
        out_dir = tmp_path / "t1"
        result = runner.invoke(cli, [
            "report", "--task", "1", "--corpus", str(corpus),
            "--out-dir", str(out_dir), "--run", "2", "--seed", "5",
        ])
        assert result.exit_code == 0, result.output
        for name in ("features.csv", "scaler.json", "model.json", "decisions.csv",
                     "metrics.json", "manifest.json"):
            assert (out_dir / name).exists(), name
        metrics = json.loads((out_dir / "metrics.json").read_text())
        for key in ("f1", "erde_5", "erde_50", "latency_tp", "speed", "f_latency"):
            assert key in metrics

    def test_report_task3_with_gold(self, runner, corpus, tmp_path):
        out_dir = tmp_path / "t3"
        result = runner.invoke(cli, [
            "report", "--task", "3", "--corpus", str(corpus),
            "--out-dir", str(out_dir), "--run", "1", "--seed", "5",
        ])
        assert result.exit_code == 0, result.output
        answers = out_dir / "answers.txt"
        assert answers.exists()
        # feed the produced answers back as gold: metrics must be all zero
        result2 = runner.invoke(cli, [
            "edeq-score", "--answers", str(answers), "--gold", str(answers),
        ])
        assert result2.exit_code == 0, result2.output
        assert "mzoe" in result2.output

    def test_evaluate_from_files(self, runner, corpus, tmp_path):
        out_dir = tmp_path / "sim"
        result = runner.invoke(cli, [
            "report", "--task", "1", "--corpus", str(corpus),
            "--out-dir", str(out_dir), "--run", "0", "--seed", "2",
        ])
        assert result.exit_code == 0, result.output
        golden = tmp_path / "golden.txt"
        rows = []
        for line in Path(corpus).read_text().splitlines():
            record = json.loads(line)
            rows.append(f"{record['subject']} {record['label']}")
        golden.write_text("\n".join(rows) + "\n", encoding="utf-8")
        metrics_out = tmp_path / "metrics.json"
        result = runner.invoke(cli, [
            "evaluate", "--decisions", str(out_dir / "decisions.csv"),
            "--golden", str(golden), "--out", str(metrics_out),
        ])
        assert result.exit_code == 0, result.output
        assert "f_latency" in json.loads(metrics_out.read_text())

    def test_report_from_file_cache(self, runner, corpus, tmp_path):
        """featurize --docs-out, embed the docs into a cache, rerun from it."""
        import numpy  # noqa: F401  (ensures provider deps present)

        from earlyrisk.embed import HashingProvider

        out_dir = tmp_path / "feat"
        docs_path = tmp_path / "docs.jsonl"
        result = runner.invoke(cli, [
            "featurize", "--corpus", str(corpus), "--out-dir", str(out_dir),
            "--docs-out", str(docs_path),
        ])
        assert result.exit_code == 0, result.output

        provider = HashingProvider(encoder_dim=1024)
        cache_path = tmp_path / "cache.jsonl"
        with cache_path.open("w", encoding="utf-8") as handle:
            for line in docs_path.read_text(encoding="utf-8").splitlines():
                record = json.loads(line)
                vector = provider.embed(record["text"]).vector
                handle.write(json.dumps(
                    {"doc_id": record["doc_id"], "vector": vector.tolist()}
                ) + "\n")

        cached_dir = tmp_path / "from-cache"
        result = runner.invoke(cli, [
            "report", "--task", "1", "--corpus", str(corpus),
            "--out-dir", str(cached_dir), "--run", "2", "--seed", "5",
            "--provider", f"file_cache:{cache_path}",
        ])
        assert result.exit_code == 0, result.output
        # hash provider and hash-filled cache must produce identical decisions
        live_dir = tmp_path / "live"
        result = runner.invoke(cli, [
            "report", "--task", "1", "--corpus", str(corpus),
            "--out-dir", str(live_dir), "--run", "2", "--seed", "5",
        ])
        assert result.exit_code == 0, result.output
        assert (cached_dir / "decisions.csv").read_bytes() == (live_dir / "decisions.csv").read_bytes()

    def test_simulate_from_saved_artifacts(self, runner, corpus, tmp_path):
        train_dir = tmp_path / "trained"
        result = runner.invoke(cli, [
            "train", "--corpus", str(corpus), "--out-dir", str(train_dir), "--run", "0",
        ])
        assert result.exit_code == 0, result.output
        sim_dir = tmp_path / "sim"
        result = runner.invoke(cli, [
            "simulate", "--corpus", str(corpus), "--out-dir", str(sim_dir), "--run", "0",
            "--model", str(train_dir / "model.json"),
            "--scaler", str(train_dir / "scaler.json"),
        ])
        assert result.exit_code == 0, result.output
        assert (sim_dir / "decisions.csv").exists()

    def test_simulate_requires_model_and_scaler(self, runner, corpus, tmp_path):
        result = runner.invoke(cli, [
            "simulate", "--corpus", str(corpus), "--out-dir", str(tmp_path / "x"),
        ], catch_exceptions=True)
        assert result.exit_code != 0

    def test_edeq_fill_run_threshold(self, runner, corpus, tmp_path):
        out_dir = tmp_path / "fill"
        result = runner.invoke(cli, [
            "edeq-fill", "--corpus", str(corpus), "--out-dir", str(out_dir), "--run", "2",
        ])
        assert result.exit_code == 0, result.output
        assert (out_dir / "answers.txt").exists()


class TestExitCodes:
    def run_cli(self, *args):
        return subprocess.run(
            [sys.executable, "-m", "earlyrisk.cli", *args],
            capture_output=True, text=True,
        )

    def test_validation_error_exits_2(self, tmp_path):
        result = self.run_cli("report", "--task", "1", "--corpus", "/nowhere.jsonl",
                              "--out-dir", str(tmp_path))
        assert result.returncode == 2

    def test_success_exits_0(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        make_corpus(corpus, n_subjects=4, posts_per_subject=2, seed=0)
        result = self.run_cli("ingest", "--corpus", str(corpus), "--out", str(tmp_path / "o.jsonl"))
        assert result.returncode == 0

"""CLI pipeline behavior and artifact determinism."""

import json

import pytest

from paracite.cli import main as cli_main
from paracite.corpus import load_queries
from paracite.encoder import load_checkpoint
from tests.conftest import ENCODER_FLAGS, run_cli


def read(path):
    return path.read_bytes()


class TestPipelineArtifacts:
    def test_ingest_wrote_queries(self, pipeline_dir):
        queries = load_queries(pipeline_dir / "queries.jsonl")
        assert queries
        for q in queries:
            assert q.text.count("[TS]") == 1
            assert q.relevant_ids

    def test_split_partition(self, pipeline_dir):
        full = load_queries(pipeline_dir / "queries.jsonl")
        parts = [
            load_queries(pipeline_dir / f"{name}_queries.jsonl")
            for name in ("train", "val", "test")
        ]
        assert sum(len(p) for p in parts) == len(full)
        assert all(q.year < 2017 for q in parts[0])
        assert all(q.year == 2017 for q in parts[1])
        assert all(q.year > 2017 for q in parts[2])

    def test_quadruplet_file_header(self, pipeline_dir):
        first = (pipeline_dir / "quads.jsonl").read_text().splitlines()[0]
        assert json.loads(first) == {"seed": 5, "quota": [3, 3, 4]}

    def test_training_log_layout(self, pipeline_dir):
        lines = (pipeline_dir / "train.log").read_text().splitlines()
        assert lines[0].split("\t") == [
            "epoch", "mean_train_loss", "val_r_precision", "val_r_at_5", "val_r_at_10", "val_mrr",
        ]
        assert len(lines) == 3  # header + two epochs
        for row in lines[1:]:
            assert len(row.split("\t")) == 6

    def test_checkpoint_loads(self, pipeline_dir):
        params = load_checkpoint(pipeline_dir / "model.ckpt")
        assert params.config.hash_buckets == 1024


class TestDeterminism:
    def test_sample_reruns_byte_identical(self, pipeline_dir, tmp_path):
        outs = []
        for name in ("a.jsonl", "b.jsonl"):
            out = tmp_path / name
            run_cli(
                ["sample", "--articles", pipeline_dir / "articles.jsonl",
                 "--paragraphs", pipeline_dir / "paragraphs.jsonl",
                 "--queries", pipeline_dir / "train_queries.jsonl",
                 "--seed", 5, "--out", out]
            )
            outs.append(read(out))
        assert outs[0] == outs[1]
        assert outs[0] == read(pipeline_dir / "quads.jsonl")

    def test_sample_seed_changes_output(self, pipeline_dir, tmp_path):
        out = tmp_path / "other_seed.jsonl"
        run_cli(
            ["sample", "--articles", pipeline_dir / "articles.jsonl",
             "--paragraphs", pipeline_dir / "paragraphs.jsonl",
             "--queries", pipeline_dir / "train_queries.jsonl",
             "--seed", 6, "--out", out]
        )
        assert read(out) != read(pipeline_dir / "quads.jsonl")

    def test_train_reruns_byte_identical(self, pipeline_dir, tmp_path):
        artifacts = []
        for tag in ("a", "b"):
            ckpt = tmp_path / f"{tag}.ckpt"
            log = tmp_path / f"{tag}.log"
            run_cli(
                ["train", "--articles", pipeline_dir / "articles.jsonl",
                 "--queries", pipeline_dir / "train_queries.jsonl",
                 "--val-queries", pipeline_dir / "val_queries.jsonl",
                 "--quadruplets", pipeline_dir / "quads.jsonl",
                 "--checkpoint-out", ckpt, "--log-out", log,
                 "--epochs", 2, "--lr", "1e-3", "--batch-size", 16, "--seeds", 3]
                + ENCODER_FLAGS
            )
            artifacts.append((read(ckpt), read(log)))
        assert artifacts[0] == artifacts[1]
        assert artifacts[0][0] == read(pipeline_dir / "model.ckpt")
        assert artifacts[0][1] == read(pipeline_dir / "train.log")

    def test_index_reruns_byte_identical(self, pipeline_dir, tmp_path):
        outs = []
        for name in ("a.idx", "b.idx"):
            out = tmp_path / name
            run_cli(
                ["index", "--articles", pipeline_dir / "articles.jsonl",
                 "--checkpoint", pipeline_dir / "model.ckpt", "--out", out]
            )
            outs.append(read(out))
        assert outs[0] == outs[1]
        assert outs[0] == read(pipeline_dir / "pool.idx")

    def test_eval_reruns_byte_identical(self, pipeline_dir, tmp_path, capsys):
        outputs = []
        for name in ("a", "b"):
            run_out = tmp_path / f"{name}.run"
            report_out = tmp_path / f"{name}.json"
            run_cli(
                ["eval", "--checkpoint", pipeline_dir / "model.ckpt",
                 "--index", pipeline_dir / "pool.idx",
                 "--queries", pipeline_dir / "test_queries.jsonl",
                 "--run-out", run_out, "--report-out", report_out]
            )
            outputs.append((read(run_out), read(report_out), capsys.readouterr().out))
        assert outputs[0] == outputs[1]


class TestEval:
    def test_run_file_mode_matches_direct_mode(self, pipeline_dir, tmp_path, capsys):
        run_out = tmp_path / "test.run"
        run_cli(
            ["eval", "--checkpoint", pipeline_dir / "model.ckpt",
             "--index", pipeline_dir / "pool.idx",
             "--queries", pipeline_dir / "test_queries.jsonl",
             "--run-out", run_out]
        )
        direct = capsys.readouterr().out
        run_cli(["eval", "--run", run_out, "--gold", pipeline_dir / "test_queries.jsonl"])
        from_file = capsys.readouterr().out
        assert direct == from_file

    def test_metrics_scaled_to_hundred(self, pipeline_dir, capsys):
        run_cli(
            ["eval", "--checkpoint", pipeline_dir / "model.ckpt",
             "--index", pipeline_dir / "pool.idx",
             "--queries", pipeline_dir / "test_queries.jsonl"]
        )
        out = capsys.readouterr().out
        values = dict(line.split("=") for line in out.strip().splitlines())
        assert set(values) == {
            "r_precision", "r_at_5", "r_at_10", "mrr", "n_queries", "pool_coverage",
        }
        assert 0.0 <= float(values["r_precision"]) <= 100.0
        assert 0.0 <= float(values["mrr"]) <= 100.0

    def test_eval_requires_inputs(self, tmp_path):
        with pytest.raises(SystemExit):
            cli_main(["eval", "--run", str(tmp_path / "missing.run")])


class TestAnalyze:
    def test_writes_tsv_and_figures(self, pipeline_dir, tmp_path):
        out_dir = tmp_path / "reports"
        run_cli(
            ["analyze", "--checkpoint", pipeline_dir / "model.ckpt",
             "--index", pipeline_dir / "pool.idx",
             "--queries", pipeline_dir / "test_queries.jsonl",
             "--articles", pipeline_dir / "articles.jsonl",
             "--out-dir", out_dir]
        )
        for name in (
            "rank_by_year.tsv", "rank_by_year.png", "year_gap.tsv",
            "correlations.tsv", "delta_t_vs_rank.png", "delta_t_vs_jaccard.png",
        ):
            assert (out_dir / name).exists(), name
        header = (out_dir / "year_gap.tsv").read_text().splitlines()[0]
        assert header.split("\t") == ["query_id", "candidate_id", "delta_t", "rank", "jaccard"]

    def test_rank_by_year_matches_library(self, pipeline_dir, tmp_path):
        from paracite.corpus import load_queries as load_q
        from paracite.encoder import load_checkpoint as load_c
        from paracite.evaluate import rank_by_year, rank_queries
        from paracite.index import load_index

        out_dir = tmp_path / "reports"
        run_cli(
            ["analyze", "--checkpoint", pipeline_dir / "model.ckpt",
             "--index", pipeline_dir / "pool.idx",
             "--queries", pipeline_dir / "test_queries.jsonl",
             "--articles", pipeline_dir / "articles.jsonl",
             "--out-dir", out_dir]
        )
        run = rank_queries(
            load_index(pipeline_dir / "pool.idx"),
            load_c(pipeline_dir / "model.ckpt"),
            load_q(pipeline_dir / "test_queries.jsonl"),
        )
        expected = rank_by_year(run)
        got = {}
        for row in (out_dir / "rank_by_year.tsv").read_text().splitlines()[1:]:
            year, mean_rank, _ = row.split("\t")
            got[int(year)] = float(mean_rank)
        assert got == pytest.approx(expected, abs=1e-4)


class TestTrainEdgeCases:
    def test_epochs_zero_emits_initial_checkpoint(self, pipeline_dir, tmp_path, capsys):
        ckpt = tmp_path / "init.ckpt"
        run_cli(
            ["train", "--articles", pipeline_dir / "articles.jsonl",
             "--queries", pipeline_dir / "train_queries.jsonl",
             "--val-queries", pipeline_dir / "val_queries.jsonl",
             "--quadruplets", pipeline_dir / "quads.jsonl",
             "--checkpoint-out", ckpt, "--epochs", 0, "--seeds", 3]
            + ENCODER_FLAGS
        )
        out = capsys.readouterr().out
        assert "warning" in out.lower()
        from paracite.encoder import init_params
        import numpy as np

        loaded = load_checkpoint(ckpt)
        fresh = init_params(loaded.config)
        np.testing.assert_array_equal(
            loaded.W1, fresh.W1.astype(np.float32).astype(np.float64)
        )

    def test_multi_seed_writes_per_seed_checkpoints(self, pipeline_dir, tmp_path, capsys):
        ckpt = tmp_path / "multi.ckpt"
        run_cli(
            ["train", "--articles", pipeline_dir / "articles.jsonl",
             "--queries", pipeline_dir / "train_queries.jsonl",
             "--val-queries", pipeline_dir / "val_queries.jsonl",
             "--quadruplets", pipeline_dir / "quads.jsonl",
             "--checkpoint-out", ckpt, "--epochs", 1, "--lr", "1e-3",
             "--seeds", 3, 4]
            + ENCODER_FLAGS
        )
        out = capsys.readouterr().out
        assert (tmp_path / "multi.seed3.ckpt").exists()
        assert (tmp_path / "multi.seed4.ckpt").exists()
        assert "mean over 2 seeds" in out


class TestCliErrors:
    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as excinfo:
            cli_main(["frobnicate"])
        assert excinfo.value.code == 2

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as excinfo:
            cli_main(["ingest", "--bogus"])
        assert excinfo.value.code == 2

    def test_missing_file_is_diagnosed(self, tmp_path, capsys):
        code = cli_main(
            ["ingest", "--articles", str(tmp_path / "nope.jsonl"),
             "--paragraphs", str(tmp_path / "nope2.jsonl"),
             "--out", str(tmp_path / "out.jsonl")]
        )
        assert code == 1
        assert "error:" in capsys.readouterr().err

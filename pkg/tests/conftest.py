"""Shared fixtures: a small clustered corpus run through the full CLI pipeline."""

import pytest

from paracite.cli import main as cli_main
from paracite.synthetic import (
    SyntheticSpec,
    generate_clustered_corpus,
    write_articles_jsonl,
    write_paragraphs_jsonl,
)

SMALL_SPEC = SyntheticSpec(
    n_clusters=4,
    subtopics_per_cluster=3,
    n_candidates=72,
    n_train_citing=10,
    n_val_citing=3,
    n_test_citing=4,
)

ENCODER_FLAGS = [
    "--hash-buckets", "1024",
    "--embed-dim", "24",
    "--hidden-dim", "16",
    "--out-dim", "16",
]


def run_cli(argv):
    code = cli_main([str(a) for a in argv])
    assert code == 0, f"cli {argv[0]} failed with exit code {code}"


@pytest.fixture(scope="session")
def pipeline_dir(tmp_path_factory):
    """Corpus files plus every pipeline artifact, built once per session."""
    root = tmp_path_factory.mktemp("pipeline")
    corpus = generate_clustered_corpus(7, SMALL_SPEC)
    write_articles_jsonl(corpus.articles, root / "articles.jsonl")
    write_paragraphs_jsonl(corpus.paragraphs, root / "paragraphs.jsonl")

    run_cli(
        ["ingest", "--articles", root / "articles.jsonl", "--paragraphs",
         root / "paragraphs.jsonl", "--out", root / "queries.jsonl"]
    )
    run_cli(["split", "--queries", root / "queries.jsonl", "--out-dir", root])
    run_cli(
        ["sample", "--articles", root / "articles.jsonl", "--paragraphs",
         root / "paragraphs.jsonl", "--queries", root / "train_queries.jsonl",
         "--seed", 5, "--out", root / "quads.jsonl"]
    )
    run_cli(
        ["train", "--articles", root / "articles.jsonl",
         "--queries", root / "train_queries.jsonl",
         "--val-queries", root / "val_queries.jsonl",
         "--quadruplets", root / "quads.jsonl",
         "--checkpoint-out", root / "model.ckpt",
         "--log-out", root / "train.log",
         "--epochs", 2, "--lr", "1e-3", "--batch-size", 16, "--seeds", 3]
        + ENCODER_FLAGS
    )
    run_cli(
        ["index", "--articles", root / "articles.jsonl",
         "--checkpoint", root / "model.ckpt", "--out", root / "pool.idx"]
    )
    return root

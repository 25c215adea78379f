"""Command-line pipeline: ingest, split, sample, train, index, eval, analyze, serve.

Hyperparameter defaults mirror the reference setup (five epochs, lr
1e-5, betas 0.99/0.999, weight decay 0.01, margin 0.5, 10% warmup,
negative quota 3/3/4, pivot year 2017). All randomness is seeded
through flags; nothing is derived from the clock.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import evaluate as evaluate_mod
from . import report as report_mod
from .encoder import (
    EncoderConfig,
    article_text,
    encode_query,
    init_params,
    load_checkpoint,
    save_checkpoint,
    tokenize,
)
from .index import build_index, load_index, save_index
from .sampling import DEFAULT_QUOTA, sample_corpus, write_quadruplets, load_quadruplets
from .trainer import LOG_HEADER, TrainConfig, TrainingData, train

logger = logging.getLogger("paracite")


def _add_encoder_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--hash-buckets", type=int, default=2**18)
    parser.add_argument("--embed-dim", type=int, default=64)
    parser.add_argument("--hidden-dim", type=int, default=64)
    parser.add_argument("--out-dim", type=int, default=64)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paracite",
        description="Paragraph-level citation recommendation pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build queries from articles and paragraphs")
    p.add_argument("--articles", type=Path, required=True)
    p.add_argument("--paragraphs", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("split", help="split queries by publication year")
    p.add_argument("--queries", type=Path, required=True)
    p.add_argument("--pivot", type=int, default=2017)
    p.add_argument("--out-dir", type=Path, required=True)

    p = sub.add_parser("sample", help="sample training quadruplets")
    p.add_argument("--articles", type=Path, required=True)
    p.add_argument("--paragraphs", type=Path, required=True)
    p.add_argument("--queries", type=Path, required=True, help="training split queries")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--per-paragraph", type=int, default=10)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("train", help="fine-tune the encoder on quadruplets")
    p.add_argument("--articles", type=Path, required=True)
    p.add_argument("--queries", type=Path, required=True, help="training split queries")
    p.add_argument("--val-queries", type=Path, required=True)
    p.add_argument("--quadruplets", type=Path, required=True)
    p.add_argument("--checkpoint-out", type=Path, required=True)
    p.add_argument("--log-out", type=Path, default=None)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=1e-5)
    p.add_argument("--beta1", type=float, default=0.99)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--warmup", type=float, default=0.10)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--margin", type=float, default=0.5)
    p.add_argument("--loss", choices=("quadruplet", "triplet"), default="quadruplet")
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    _add_encoder_flags(p)

    p = sub.add_parser("index", help="embed the candidate pool")
    p.add_argument("--articles", type=Path, required=True)
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("eval", help="score rankings with R-precision, R@k and MRR")
    p.add_argument("--run", type=Path, default=None, help="existing run file to score")
    p.add_argument("--gold", type=Path, default=None, help="queries JSONL with relevant ids")
    p.add_argument("--checkpoint", type=Path, default=None)
    p.add_argument("--index", type=Path, default=None)
    p.add_argument("--queries", type=Path, default=None)
    p.add_argument("--run-out", type=Path, default=None)
    p.add_argument("--report-out", type=Path, default=None)

    p = sub.add_parser("analyze", help="rank-by-year and year-gap diagnostics")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--index", type=Path, required=True)
    p.add_argument("--queries", type=Path, required=True)
    p.add_argument("--articles", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)

    p = sub.add_parser("serve", help="run the HTTP recommendation service")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--index", type=Path, required=True)
    p.add_argument("--articles", type=Path, required=True)
    p.add_argument("--queries", type=Path, default=None)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui-dir", type=Path, default=None)

    return parser


def cmd_ingest(args) -> int:
    articles = corpus_mod.load_articles(args.articles)
    by_id = {a.id: a for a in articles}
    paragraphs = corpus_mod.load_paragraphs(args.paragraphs, articles)
    eligible = corpus_mod.eligible_paragraphs(paragraphs)
    queries = [corpus_mod.build_query(p, by_id[p.citing_id]) for p in eligible]
    corpus_mod.write_queries(queries, args.out)
    print(
        f"articles={len(articles)} paragraphs={len(paragraphs)} "
        f"eligible={len(eligible)} queries={len(queries)} -> {args.out}"
    )
    return 0


def cmd_split(args) -> int:
    queries = corpus_mod.load_queries(args.queries)
    train_q, val_q, test_q = corpus_mod.split_by_year(queries, pivot=args.pivot)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", train_q), ("val", val_q), ("test", test_q)):
        corpus_mod.write_queries(part, args.out_dir / f"{name}_queries.jsonl")
    print(f"train={len(train_q)} val={len(val_q)} test={len(test_q)} -> {args.out_dir}")
    return 0


def _quota_for(per_paragraph: int) -> tuple[int, int, int]:
    if per_paragraph == 10:
        return DEFAULT_QUOTA
    q1 = int(0.3 * per_paragraph)
    q2 = int(0.3 * per_paragraph)
    return (q1, q2, per_paragraph - q1 - q2)


def cmd_sample(args) -> int:
    articles = corpus_mod.load_articles(args.articles)
    by_id = {a.id: a for a in articles}
    paragraphs = corpus_mod.load_paragraphs(args.paragraphs, articles)
    queries = corpus_mod.load_queries(args.queries)
    wanted = {q.paragraph_id for q in queries}
    selected = [p for p in paragraphs if p.id in wanted]
    known = set(by_id)
    usable, skipped = [], 0
    for p in selected:
        if p.relevant_ids() <= known:
            usable.append(p)
        else:
            skipped += 1
    if skipped:
        logger.info("skipped %d paragraph(s) citing articles without records", skipped)
    lookup = {a.id: a.all_citations for a in articles}
    quota = _quota_for(args.per_paragraph)
    quadruplets = sample_corpus(usable, by_id, paragraphs, lookup, seed=args.seed, quota=quota)
    # Articles must be encodable during training; pools were built from
    # citation sets, so drop the rare negative without a record.
    kept = [q for q in quadruplets if q.neg in known]
    if len(kept) != len(quadruplets):
        logger.info("dropped %d quadruplet(s) with unknown negatives", len(quadruplets) - len(kept))
    write_quadruplets(kept, args.out, seed=args.seed, quota=quota)
    print(f"paragraphs={len(usable)} quadruplets={len(kept)} seed={args.seed} -> {args.out}")
    return 0


def _encoder_config(args, seed: int) -> EncoderConfig:
    return EncoderConfig(
        hash_buckets=args.hash_buckets,
        embed_dim=args.embed_dim,
        hidden_dim=args.hidden_dim,
        out_dim=args.out_dim,
        seed=seed,
    )


def _seed_path(path: Path, seed: int, multi: bool) -> Path:
    if not multi:
        return path
    return path.with_name(f"{path.stem}.seed{seed}{path.suffix}")


def cmd_train(args) -> int:
    articles = corpus_mod.load_articles(args.articles)
    train_queries = corpus_mod.load_queries(args.queries)
    val_queries = corpus_mod.load_queries(args.val_queries)
    _, quadruplets = load_quadruplets(args.quadruplets)
    pool = corpus_mod.build_candidate_pool(articles)
    data = TrainingData(
        query_texts={q.paragraph_id: q.text for q in train_queries},
        article_texts={a.id: article_text(a.title, a.abstract) for a in articles},
        pool=pool,
        val_queries=val_queries,
    )
    multi = len(args.seeds) > 1
    summaries = []
    for seed in args.seeds:
        cfg = TrainConfig(
            epochs=args.epochs,
            lr=args.lr,
            beta1=args.beta1,
            beta2=args.beta2,
            weight_decay=args.weight_decay,
            warmup_fraction=args.warmup,
            batch_size=args.batch_size,
            margin=args.margin,
            seed=seed,
            loss=args.loss,
        )
        params = init_params(_encoder_config(args, seed))
        if args.epochs == 0:
            print("warning: epochs=0, writing the initial checkpoint unchanged")
        result = train(data, quadruplets, params, cfg)
        ckpt_path = _seed_path(args.checkpoint_out, seed, multi)
        save_checkpoint(result.best_params, ckpt_path)
        if args.log_out is not None:
            log_path = _seed_path(args.log_out, seed, multi)
            log_path.write_text(
                "\n".join([LOG_HEADER] + result.log_lines) + "\n", encoding="utf-8"
            )
        if result.best_val is not None:
            summaries.append(result.best_val)
            print(
                f"seed={seed} best_epoch={result.best_epoch} "
                f"val_r_precision={result.best_val.r_precision:.6f} -> {ckpt_path}"
            )
        else:
            print(f"seed={seed} epochs=0 -> {ckpt_path}")
    if multi and summaries:
        means = {
            name: float(np.mean([getattr(s, name) for s in summaries]))
            for name in ("r_precision", "r_at_5", "r_at_10", "mrr")
        }
        formatted = " ".join(f"val_{name}={value:.6f}" for name, value in means.items())
        print(f"mean over {len(summaries)} seeds: {formatted}")
    return 0


def cmd_index(args) -> int:
    articles = corpus_mod.load_articles(args.articles)
    params = load_checkpoint(args.checkpoint)
    pool = corpus_mod.build_candidate_pool(articles)
    index = build_index(pool, params)
    save_index(index, args.out)
    print(f"indexed {len(index)} articles (dim {index.dim}) -> {args.out}")
    return 0


def _print_report(report) -> None:
    for line in report_mod.metric_lines(report):
        print(line)


def cmd_eval(args) -> int:
    if args.run is not None:
        if args.gold is None:
            raise SystemExit("eval --run requires --gold")
        gold_queries = corpus_mod.load_queries(args.gold)
        gold = {q.paragraph_id: q.relevant_ids for q in gold_queries}
        years = {q.paragraph_id: q.year for q in gold_queries}
        run = evaluate_mod.load_run(args.run, gold, years=years)
    else:
        if not (args.checkpoint and args.index and args.queries):
            raise SystemExit("eval needs either --run/--gold or --checkpoint/--index/--queries")
        params = load_checkpoint(args.checkpoint)
        index = load_index(args.index)
        queries = corpus_mod.load_queries(args.queries)
        run = evaluate_mod.rank_queries(index, params, queries)
        if args.run_out is not None:
            evaluate_mod.write_run(run, args.run_out)
    report = evaluate_mod.evaluate_run(run)
    _print_report(report)
    if args.report_out is not None:
        report_mod.write_metric_report(report, args.report_out)
    return 0


def cmd_analyze(args) -> int:
    params = load_checkpoint(args.checkpoint)
    index = load_index(args.index)
    queries = corpus_mod.load_queries(args.queries)
    articles = {a.id: a for a in corpus_mod.load_articles(args.articles)}
    run = evaluate_mod.rank_queries(index, params, queries)
    args.out_dir.mkdir(parents=True, exist_ok=True)

    mean_ranks = evaluate_mod.rank_by_year(run)
    counts: dict[int, int] = {}
    for rq in run.queries:
        for cid in rq.relevant:
            year = run.year_of.get(cid)
            if year is not None:
                counts[year] = counts.get(year, 0) + 1
    report_mod.write_rank_by_year(mean_ranks, counts, args.out_dir)

    query_text = {q.paragraph_id: q.text for q in queries}
    rows = []
    for rq in sorted(run.queries, key=lambda r: r.query_id):
        positions = {cid: i + 1 for i, cid in enumerate(rq.ranking)}
        q_tokens = set(tokenize(query_text[rq.query_id]))
        for cid in sorted(rq.relevant):
            art = articles.get(cid)
            if art is None or rq.year is None:
                continue
            overlap = evaluate_mod.jaccard(
                q_tokens, tokenize(article_text(art.title, art.abstract))
            )
            rows.append(
                {
                    "query_id": rq.query_id,
                    "candidate_id": cid,
                    "delta_t": rq.year - art.year,
                    "rank": positions[cid],
                    "jaccard": overlap,
                }
            )
    report_mod.write_year_gap_table(rows, args.out_dir)

    gaps = [r["delta_t"] for r in rows]
    correlations = {}
    if len(rows) >= 2:
        try:
            correlations["delta_t_vs_rank"] = (
                evaluate_mod.pearson(gaps, [r["rank"] for r in rows]),
                len(rows),
            )
            correlations["delta_t_vs_jaccard"] = (
                evaluate_mod.pearson(gaps, [r["jaccard"] for r in rows]),
                len(rows),
            )
        except ValueError as exc:
            logger.info("correlations unavailable: %s", exc)
    report_mod.write_correlations(correlations, args.out_dir)
    report_mod.write_year_gap_scatter(
        gaps, [float(r["rank"]) for r in rows], "delta_t_vs_rank", "rank of cited article", args.out_dir
    )
    report_mod.write_year_gap_scatter(
        gaps, [r["jaccard"] for r in rows], "delta_t_vs_jaccard", "token overlap", args.out_dir
    )
    for name, (r, n) in sorted(correlations.items()):
        print(f"{name}: r={r:.4f} (n={n})")
    print(f"wrote diagnostics to {args.out_dir}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_state

    state = load_state(args.checkpoint, args.index, args.articles, args.queries)
    app = create_app(state, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "split": cmd_split,
    "sample": cmd_sample,
    "train": cmd_train,
    "index": cmd_index,
    "eval": cmd_eval,
    "analyze": cmd_analyze,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except SystemExit:
        raise
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

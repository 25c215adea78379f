"""Ranking metrics and diagnostic analyses.

R-precision, recall at k and MRR over full rankings, plus the
rank-by-publication-year breakdown, Pearson correlation and Jaccard
token overlap used to study why older articles rank worse.

Gold ids that the year-filtered pool cannot contain are stripped from
each query's relevant set and surfaced as a coverage fraction instead
of being scored as misses; queries left without any in-pool gold are
excluded from the averages. All metrics stay in [0, 1] here; scaling to
the 0-100 reporting range happens at the CLI boundary.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Query
from .encoder import EncoderParams, encode_query
from .index import VectorIndex, full_ranking

logger = logging.getLogger(__name__)


def r_precision(ranking: Sequence[str], relevant: Iterable[str]) -> float:
    """Fraction of the top-R ranks that are relevant, R = |relevant|."""
    relevant = set(relevant)
    if not relevant:
        raise ValueError("relevant set is empty")
    r = len(relevant)
    return len(relevant.intersection(ranking[:r])) / r


def recall_at_k(ranking: Sequence[str], relevant: Iterable[str], k: int) -> float:
    """Fraction of relevant items found in the top k."""
    relevant = set(relevant)
    if not relevant:
        raise ValueError("relevant set is empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    return len(relevant.intersection(ranking[:k])) / len(relevant)


def mrr(ranking: Sequence[str], relevant: Iterable[str]) -> float:
    """Reciprocal rank of the first relevant item; 0 if none appears."""
    relevant = set(relevant)
    if not relevant:
        raise ValueError("relevant set is empty")
    for position, candidate in enumerate(ranking, start=1):
        if candidate in relevant:
            return 1.0 / position
    return 0.0


@dataclass(frozen=True)
class RankedQuery:
    """One query's full ranking with its in-pool gold set.

    ``relevant`` holds only gold ids present in the ranking;
    ``n_gold_total`` remembers the original gold size so coverage can be
    reported.
    """

    query_id: str
    ranking: tuple[str, ...]
    relevant: frozenset[str]
    year: int | None
    n_gold_total: int

    def __post_init__(self):
        if len(set(self.ranking)) != len(self.ranking):
            raise ValueError(f"query {self.query_id!r}: ranking contains duplicates")
        if not self.relevant <= set(self.ranking):
            raise ValueError(f"query {self.query_id!r}: relevant ids missing from ranking")


def make_ranked_query(
    query_id: str, ranking: Sequence[str], gold: Iterable[str], year: int | None = None
) -> RankedQuery:
    """Split gold into the in-pool part and the unreachable remainder."""
    gold = set(gold)
    in_pool = frozenset(gold & set(ranking))
    return RankedQuery(
        query_id=query_id,
        ranking=tuple(ranking),
        relevant=in_pool,
        year=year,
        n_gold_total=len(gold),
    )


@dataclass
class RankedRun:
    """A set of ranked queries plus candidate publication years."""

    queries: list[RankedQuery]
    year_of: dict[str, int]


@dataclass(frozen=True)
class MetricReport:
    r_precision: float
    r_at_5: float
    r_at_10: float
    mrr: float
    n_queries: int
    pool_coverage: float


def query_metrics(query: RankedQuery) -> dict[str, float]:
    return {
        "r_precision": r_precision(query.ranking, query.relevant),
        "r_at_5": recall_at_k(query.ranking, query.relevant, 5),
        "r_at_10": recall_at_k(query.ranking, query.relevant, 10),
        "mrr": mrr(query.ranking, query.relevant),
    }


def evaluate_run(run: RankedRun) -> MetricReport:
    """Unweighted mean of per-query metrics, aggregated by query id order."""
    scored = sorted(
        (q for q in run.queries if q.relevant), key=lambda q: q.query_id
    )
    skipped = len(run.queries) - len(scored)
    if skipped:
        logger.info("excluded %d query(ies) with no in-pool relevant articles", skipped)
    if not scored:
        raise ValueError("no query has an in-pool relevant article")
    totals = {"r_precision": 0.0, "r_at_5": 0.0, "r_at_10": 0.0, "mrr": 0.0}
    for query in scored:
        for name, value in query_metrics(query).items():
            totals[name] += value
    n_gold = sum(q.n_gold_total for q in run.queries)
    n_in_pool = sum(len(q.relevant) for q in run.queries)
    return MetricReport(
        r_precision=totals["r_precision"] / len(scored),
        r_at_5=totals["r_at_5"] / len(scored),
        r_at_10=totals["r_at_10"] / len(scored),
        mrr=totals["mrr"] / len(scored),
        n_queries=len(scored),
        pool_coverage=n_in_pool / n_gold if n_gold else 0.0,
    )


def rank_of(query: RankedQuery, candidate_id: str) -> int:
    """1-based rank of a candidate within one query's ranking."""
    return query.ranking.index(candidate_id) + 1


def rank_by_year(run: RankedRun) -> dict[int, float]:
    """Mean rank of gold articles, grouped by their publication year."""
    ranks: dict[int, list[int]] = {}
    for query in run.queries:
        positions = {cid: i + 1 for i, cid in enumerate(query.ranking)}
        for cited in query.relevant:
            year = run.year_of.get(cited)
            if year is None:
                continue
            ranks.setdefault(year, []).append(positions[cited])
    return {year: sum(values) / len(values) for year, values in sorted(ranks.items())}


def year_gap_rank_pairs(run: RankedRun) -> tuple[list[int], list[int]]:
    """(citing year - cited year, rank) pairs over all gold citations."""
    gaps: list[int] = []
    ranks: list[int] = []
    for query in run.queries:
        if query.year is None:
            continue
        positions = {cid: i + 1 for i, cid in enumerate(query.ranking)}
        for cited in sorted(query.relevant):
            year = run.year_of.get(cited)
            if year is None:
                continue
            gaps.append(query.year - year)
            ranks.append(positions[cited])
    return gaps, ranks


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape:
        raise ValueError("series lengths differ")
    if xs.size < 2:
        raise ValueError("need at least two points")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    var_x = float(dx @ dx)
    var_y = float(dy @ dy)
    if var_x == 0.0 or var_y == 0.0:
        raise ValueError("zero variance")
    return float((dx @ dy) / np.sqrt(var_x * var_y))


def jaccard(tokens_a: Iterable[str], tokens_b: Iterable[str]) -> float:
    """Set overlap |a & b| / |a | b|."""
    a, b = set(tokens_a), set(tokens_b)
    if not a and not b:
        raise ValueError("both token sets are empty")
    return len(a & b) / len(a | b)


# --- Building runs ------------------------------------------------------


def rank_queries(
    index: VectorIndex, params: EncoderParams, queries: Sequence[Query]
) -> RankedRun:
    """Full rankings for a set of queries over a year-filtered index."""
    ranked = []
    for query in queries:
        vec = encode_query(params, query)
        ranking = [
            cid for cid in full_ranking(index, vec, max_year=query.year)
            if cid != query.citing_id
        ]
        ranked.append(
            make_ranked_query(query.paragraph_id, ranking, query.relevant_ids, query.year)
        )
    year_of = {str(cid): int(year) for cid, year in zip(index.ids, index.years)}
    return RankedRun(queries=ranked, year_of=year_of)


# --- Run file interop ---------------------------------------------------


def write_run(run: RankedRun, path) -> None:
    """query_id <TAB> comma-separated ranked ids, one query per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for query in run.queries:
            for cid in query.ranking + (query.query_id,):
                if "," in cid or "\t" in cid or "\n" in cid:
                    raise ValueError(f"id {cid!r} cannot appear in a run file")
            fh.write(query.query_id + "\t" + ",".join(query.ranking) + "\n")


def load_run(
    path,
    gold: Mapping[str, Iterable[str]],
    years: Mapping[str, int] | None = None,
    year_of: Mapping[str, int] | None = None,
) -> RankedRun:
    """Rebuild a RankedRun from a run file plus gold relevant sets.

    ``years`` maps query ids to citing years, ``year_of`` maps candidate
    ids to publication years; both are optional and only needed for the
    year-based analyses.
    """
    queries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                query_id, id_list = line.split("\t")
            except ValueError:
                raise ValueError(f"{path}:{line_no}: expected 'query_id<TAB>ids'") from None
            if query_id not in gold:
                raise ValueError(f"{path}:{line_no}: no gold entry for query {query_id!r}")
            ranking = id_list.split(",") if id_list else []
            queries.append(
                make_ranked_query(
                    query_id,
                    ranking,
                    gold[query_id],
                    years.get(query_id) if years else None,
                )
            )
    return RankedRun(queries=queries, year_of=dict(year_of) if year_of else {})

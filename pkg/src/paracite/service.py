"""HTTP recommendation service.

Serves one checkpoint + index pair, loaded once at startup and treated
as immutable; restart to swap models. Responses are JSON; errors carry
a structured code and message. The bundled web UI is mounted under /ui
when a built frontend directory is supplied.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .corpus import Article, Query, load_articles, load_queries
from .encoder import (
    EncoderParams,
    article_text,
    checkpoint_digest,
    compose_query_text,
    encode,
    load_checkpoint,
    tokenize,
)
from .evaluate import jaccard
from .index import VectorIndex, full_ranking, load_index, search
from .objective import l2


@dataclass
class ServiceState:
    params: EncoderParams
    index: VectorIndex
    articles: dict[str, Article]
    model_version: str
    queries: dict[str, Query]


def load_state(
    checkpoint_path, index_path, articles_path, queries_path=None
) -> ServiceState:
    params = load_checkpoint(checkpoint_path)
    index = load_index(index_path)
    articles = {a.id: a for a in load_articles(articles_path)}
    queries = (
        {q.paragraph_id: q for q in load_queries(queries_path)} if queries_path else {}
    )
    return ServiceState(
        params=params,
        index=index,
        articles=articles,
        model_version=checkpoint_digest(checkpoint_path),
        queries=queries,
    )


class RecommendRequest(BaseModel):
    title: str = ""
    abstract: str = ""
    topic_sentence: str = ""
    k: int = 10
    max_year: int | None = None


class ExplainRequest(BaseModel):
    candidate_id: str
    query_id: str | None = None
    title: str = ""
    abstract: str = ""
    topic_sentence: str = ""
    max_year: int | None = None


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def _validate_query_fields(req) -> JSONResponse | None:
    if not req.topic_sentence.strip():
        return _error(400, "empty_topic_sentence", "topic_sentence must be non-empty")
    if not req.title.strip() and not req.abstract.strip():
        return _error(400, "empty_article_text", "title or abstract must be non-empty")
    return None


def create_app(state: ServiceState | None, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="paracite", docs_url=None, redoc_url=None)

    def unavailable() -> JSONResponse:
        return _error(503, "not_ready", "service state is not initialized")

    @app.get("/api/v1/health")
    def health():
        if state is None:
            return unavailable()
        return {
            "status": "ok",
            "model_version": state.model_version,
            "pool_size": len(state.index),
        }

    @app.get("/api/v1/article/{article_id}")
    def article(article_id: str):
        if state is None:
            return unavailable()
        art = state.articles.get(article_id)
        if art is None:
            return _error(404, "unknown_article", f"no article with id {article_id!r}")
        return {
            "id": art.id,
            "title": art.title,
            "abstract": art.abstract,
            "year": art.year,
            "is_acl": art.is_acl,
        }

    @app.post("/api/v1/recommend")
    def recommend(req: RecommendRequest):
        if state is None:
            return unavailable()
        invalid = _validate_query_fields(req)
        if invalid is not None:
            return invalid
        if req.k < 1:
            return _error(400, "bad_k", "k must be >= 1")
        started = time.perf_counter()
        text = compose_query_text(req.title, req.abstract, req.topic_sentence)
        vec = encode(state.params, text)
        hits = search(state.index, vec, req.k, max_year=req.max_year)
        results = []
        for rank, (article_id, distance) in enumerate(hits, start=1):
            art = state.articles.get(article_id)
            results.append(
                {
                    "article_id": article_id,
                    "title": art.title if art else "",
                    "year": art.year if art else None,
                    "distance": distance,
                    "rank": rank,
                }
            )
        return {
            "results": results,
            "model_version": state.model_version,
            "latency_ms": (time.perf_counter() - started) * 1000.0,
        }

    @app.post("/api/v1/explain")
    def explain(req: ExplainRequest):
        if state is None:
            return unavailable()
        candidate = state.articles.get(req.candidate_id)
        if candidate is None:
            return _error(404, "unknown_candidate", f"no article with id {req.candidate_id!r}")
        if req.candidate_id not in set(str(i) for i in state.index.ids):
            return _error(404, "not_in_pool", f"article {req.candidate_id!r} is not in the pool")

        exclude_id = None
        if req.query_id is not None:
            query = state.queries.get(req.query_id)
            if query is None:
                return _error(404, "unknown_query", f"no stored query with id {req.query_id!r}")
            text = query.text
            query_year = query.year
            exclude_id = query.citing_id
        else:
            invalid = _validate_query_fields(req)
            if invalid is not None:
                return invalid
            text = compose_query_text(req.title, req.abstract, req.topic_sentence)
            query_year = req.max_year

        vec = encode(state.params, text)
        row = int((state.index.ids == req.candidate_id).nonzero()[0][0])
        distance = l2(vec, state.index.matrix[row].astype(float))
        overlap = jaccard(
            tokenize(text), tokenize(article_text(candidate.title, candidate.abstract))
        )
        outside = query_year is not None and candidate.year >= query_year
        rank = None
        if not outside:
            ranking = [
                cid
                for cid in full_ranking(state.index, vec, max_year=query_year)
                if cid != exclude_id
            ]
            rank = ranking.index(req.candidate_id) + 1
        return {
            "candidate_id": req.candidate_id,
            "candidate_year": candidate.year,
            "query_year": query_year,
            "delta_t": (query_year - candidate.year) if query_year is not None else None,
            "jaccard": overlap,
            "distance": distance,
            "rank": rank,
            "outside_year_filter": outside,
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app

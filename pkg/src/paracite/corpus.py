"""Articles, discourse-labeled paragraphs, queries and the candidate pool.

Ingests article and paragraph JSONL files, selects the paragraphs whose
first sentence is a topic sentence, builds ranking queries from them,
splits by publication year, and assembles the year-indexed pool of
rankable articles. All types are immutable after construction.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass
from functools import cached_property

from .encoder import TS_TOKEN, compose_query_text

logger = logging.getLogger(__name__)


class CorpusError(ValueError):
    """Malformed or inconsistent corpus input."""


class DiscourseLabel(enum.Enum):
    TRANSITION = "Transition"
    OTHER = "Other"


@dataclass(frozen=True)
class Article:
    """One article: the unit of recommendation.

    Citation sets never contain the article's own id; both may share
    members (an article can be cited inside and outside related work).
    """

    id: str
    title: str
    abstract: str
    year: int
    is_acl: bool
    rw_citations: frozenset[str] = frozenset()
    other_citations: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.id in self.rw_citations or self.id in self.other_citations:
            raise CorpusError(f"article {self.id!r} cites itself")

    @property
    def all_citations(self) -> frozenset[str]:
        return self.rw_citations | self.other_citations


@dataclass(frozen=True)
class Sentence:
    text: str
    label: DiscourseLabel
    cited_ids: frozenset[str] = frozenset()


@dataclass(frozen=True)
class ParagraphRecord:
    """Sentences of one related-work paragraph, in order."""

    id: str
    citing_id: str
    sentences: tuple[Sentence, ...]

    def __post_init__(self):
        if not self.sentences:
            raise CorpusError(f"paragraph {self.id!r} has no sentences")

    def relevant_ids(self) -> frozenset[str]:
        """Articles cited after the first sentence; the gold set."""
        out: set[str] = set()
        for sentence in self.sentences[1:]:
            out |= sentence.cited_ids
        return frozenset(out)


@dataclass(frozen=True)
class Query:
    """Ranking query: citing article text plus one topic sentence."""

    paragraph_id: str
    citing_id: str
    text: str
    year: int
    relevant_ids: frozenset[str]


@dataclass
class CandidatePool:
    """Rankable articles with a year index for per-query filtering.

    Treated as immutable once built; safe for concurrent reads.
    """

    articles: tuple[Article, ...]
    by_year: dict[int, tuple[str, ...]]

    def __len__(self) -> int:
        return len(self.articles)

    def get(self, article_id: str) -> Article | None:
        return self.by_id.get(article_id)

    @cached_property
    def by_id(self) -> dict[str, Article]:
        return {a.id: a for a in self.articles}


# --- JSONL ingestion ----------------------------------------------------

_ARTICLE_FIELDS = {
    "id": str,
    "title": str,
    "abstract": str,
    "year": int,
    "is_acl": bool,
    "rw_citations": list,
    "other_citations": list,
}


def _required(record: dict, name: str, typ, line_no: int, path):
    if name not in record:
        raise CorpusError(f"{path}:{line_no}: missing required field {name!r}")
    value = record[name]
    if typ is int and isinstance(value, bool) or not isinstance(value, typ):
        raise CorpusError(
            f"{path}:{line_no}: field {name!r} has type {type(value).__name__}, expected {typ.__name__}"
        )
    return value


def _iter_jsonl(path):
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{line_no}: malformed JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path}:{line_no}: expected a JSON object")
            yield line_no, record


def load_articles(path) -> list[Article]:
    """Load the article JSONL file.

    Records with an empty title or abstract are dropped and the drop
    count logged. Unknown fields are ignored. Malformed lines and
    duplicate ids raise CorpusError.
    """
    articles: list[Article] = []
    seen: dict[str, int] = {}
    dropped = 0
    for line_no, record in _iter_jsonl(path):
        values = {
            name: _required(record, name, typ, line_no, path)
            for name, typ in _ARTICLE_FIELDS.items()
        }
        if values["id"] in seen:
            raise CorpusError(
                f"{path}:{line_no}: duplicate article id {values['id']!r} "
                f"(first seen on line {seen[values['id']]})"
            )
        seen[values["id"]] = line_no
        if not values["title"].strip() or not values["abstract"].strip():
            dropped += 1
            continue
        own = values["id"]
        articles.append(
            Article(
                id=own,
                title=values["title"],
                abstract=values["abstract"],
                year=values["year"],
                is_acl=values["is_acl"],
                rw_citations=frozenset(values["rw_citations"]) - {own},
                other_citations=frozenset(values["other_citations"]) - {own},
            )
        )
    if dropped:
        logger.info("dropped %d article(s) with empty title or abstract", dropped)
    return articles


def load_paragraphs(path, articles: list[Article] | None = None) -> list[ParagraphRecord]:
    """Load the paragraph JSONL file.

    When ``articles`` is given, every paragraph is checked against it:
    the citing article must exist and every cited id must appear in its
    related-work citations.
    """
    by_id = {a.id: a for a in articles} if articles is not None else None
    paragraphs: list[ParagraphRecord] = []
    seen: dict[str, int] = {}
    for line_no, record in _iter_jsonl(path):
        pid = _required(record, "id", str, line_no, path)
        citing_id = _required(record, "citing_id", str, line_no, path)
        raw_sentences = _required(record, "sentences", list, line_no, path)
        if pid in seen:
            raise CorpusError(
                f"{path}:{line_no}: duplicate paragraph id {pid!r} "
                f"(first seen on line {seen[pid]})"
            )
        seen[pid] = line_no
        if not raw_sentences:
            raise CorpusError(f"{path}:{line_no}: paragraph {pid!r} has no sentences")
        sentences = []
        for raw in raw_sentences:
            if not isinstance(raw, dict):
                raise CorpusError(f"{path}:{line_no}: sentence entries must be objects")
            text = _required(raw, "text", str, line_no, path)
            label_raw = _required(raw, "label", str, line_no, path)
            try:
                label = DiscourseLabel(label_raw)
            except ValueError:
                raise CorpusError(
                    f"{path}:{line_no}: unknown discourse label {label_raw!r}"
                ) from None
            cited = _required(raw, "cited_ids", list, line_no, path)
            sentences.append(
                Sentence(text=text, label=label, cited_ids=frozenset(cited))
            )
        paragraph = ParagraphRecord(id=pid, citing_id=citing_id, sentences=tuple(sentences))
        if by_id is not None:
            citing = by_id.get(citing_id)
            if citing is None:
                raise CorpusError(
                    f"{path}:{line_no}: paragraph {pid!r} cites unknown article {citing_id!r}"
                )
            stray = frozenset().union(*(s.cited_ids for s in sentences)) - citing.rw_citations
            if stray:
                raise CorpusError(
                    f"{path}:{line_no}: paragraph {pid!r} cites {sorted(stray)} "
                    f"not in rw_citations of {citing_id!r}"
                )
        paragraphs.append(paragraph)
    return paragraphs


# --- Query construction -------------------------------------------------


def eligible_paragraphs(paragraphs: list[ParagraphRecord]) -> list[ParagraphRecord]:
    """Paragraphs usable as queries, in input order.

    Keeps exactly those whose first sentence carries the Transition
    label and whose remaining sentences cite at least one article.
    """
    return [
        p
        for p in paragraphs
        if p.sentences[0].label is DiscourseLabel.TRANSITION and p.relevant_ids()
    ]


def build_query(paragraph: ParagraphRecord, article: Article) -> Query:
    """Build a query from an eligible paragraph and its citing article."""
    if article.id != paragraph.citing_id:
        raise CorpusError(
            f"article {article.id!r} does not match paragraph citing_id {paragraph.citing_id!r}"
        )
    if not article.title.strip() or not article.abstract.strip():
        raise CorpusError(
            f"article {article.id!r} has an empty title or abstract; "
            "such articles are rejected at load time"
        )
    if paragraph.sentences[0].label is not DiscourseLabel.TRANSITION:
        raise CorpusError(f"paragraph {paragraph.id!r} does not start with a topic sentence")
    relevant = paragraph.relevant_ids()
    if not relevant:
        raise CorpusError(f"paragraph {paragraph.id!r} cites nothing after its topic sentence")
    topic_sentence = paragraph.sentences[0].text
    if not topic_sentence.strip():
        raise CorpusError(f"paragraph {paragraph.id!r} has an empty topic sentence")
    for name, value in (
        ("title", article.title),
        ("abstract", article.abstract),
        ("topic sentence", topic_sentence),
    ):
        if TS_TOKEN in value:
            raise CorpusError(f"{name} already contains the {TS_TOKEN!r} separator")
    return Query(
        paragraph_id=paragraph.id,
        citing_id=article.id,
        text=compose_query_text(article.title, article.abstract, topic_sentence),
        year=article.year,
        relevant_ids=relevant,
    )


def split_by_year(
    queries: list[Query], pivot: int = 2017
) -> tuple[list[Query], list[Query], list[Query]]:
    """Partition queries into (before pivot, at pivot, after pivot)."""
    train = [q for q in queries if q.year < pivot]
    validation = [q for q in queries if q.year == pivot]
    test = [q for q in queries if q.year > pivot]
    return train, validation, test


def build_candidate_pool(articles: list[Article]) -> CandidatePool:
    """Pool of rankable articles.

    Members are the ACL articles plus everything cited by any ACL
    article, excluding articles with an empty title or abstract.
    Deterministic: articles are ordered by ascending id.
    """
    cited_by_acl: set[str] = set()
    for article in articles:
        if article.is_acl:
            cited_by_acl |= article.all_citations
    members = sorted(
        (
            a
            for a in articles
            if (a.is_acl or a.id in cited_by_acl) and a.title.strip() and a.abstract.strip()
        ),
        key=lambda a: a.id,
    )
    ids = {a.id for a in members}
    if len(ids) != len(members):
        raise CorpusError("duplicate article ids in pool input")
    by_year: dict[int, list[str]] = {}
    for a in members:
        by_year.setdefault(a.year, []).append(a.id)
    return CandidatePool(
        articles=tuple(members),
        by_year={year: tuple(ids) for year, ids in sorted(by_year.items())},
    )


def filter_pool_for_query(pool: CandidatePool, query: Query) -> list[str]:
    """Candidate ids for one query: strictly older articles, self excluded.

    Returned in ascending id order.
    """
    out = [
        aid
        for year, aids in pool.by_year.items()
        if year < query.year
        for aid in aids
        if aid != query.citing_id
    ]
    return sorted(out)


# --- Query JSONL --------------------------------------------------------


def write_queries(queries: list[Query], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in queries:
            fh.write(
                json.dumps(
                    {
                        "paragraph_id": q.paragraph_id,
                        "citing_id": q.citing_id,
                        "text": q.text,
                        "year": q.year,
                        "relevant_ids": sorted(q.relevant_ids),
                    }
                )
                + "\n"
            )


def load_queries(path) -> list[Query]:
    queries = []
    for line_no, record in _iter_jsonl(path):
        queries.append(
            Query(
                paragraph_id=_required(record, "paragraph_id", str, line_no, path),
                citing_id=_required(record, "citing_id", str, line_no, path),
                text=_required(record, "text", str, line_no, path),
                year=_required(record, "year", int, line_no, path),
                relevant_ids=frozenset(_required(record, "relevant_ids", list, line_no, path)),
            )
        )
    return queries

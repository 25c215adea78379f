"""Corpus ingestion, query construction, year splits and pool filtering."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from paracite.corpus import (
    Article,
    CorpusError,
    DiscourseLabel,
    ParagraphRecord,
    Query,
    Sentence,
    build_candidate_pool,
    build_query,
    eligible_paragraphs,
    filter_pool_for_query,
    load_articles,
    load_paragraphs,
    load_queries,
    split_by_year,
    write_queries,
)

T = DiscourseLabel.TRANSITION
O = DiscourseLabel.OTHER


def sent(text, label, *cited):
    return Sentence(text=text, label=label, cited_ids=frozenset(cited))


def article(aid, year=2015, is_acl=True, rw=(), other=(), title=None, abstract=None):
    return Article(
        id=aid,
        title=title if title is not None else f"Title {aid}",
        abstract=abstract if abstract is not None else f"Abstract {aid}",
        year=year,
        is_acl=is_acl,
        rw_citations=frozenset(rw),
        other_citations=frozenset(other),
    )


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def article_record(aid, **overrides):
    record = {
        "id": aid,
        "title": f"Title {aid}",
        "abstract": f"Abstract {aid}",
        "year": 2015,
        "is_acl": True,
        "rw_citations": [],
        "other_citations": [],
    }
    record.update(overrides)
    return record


class TestLoadArticles:
    def test_loads_valid_records(self, tmp_path):
        path = tmp_path / "articles.jsonl"
        write_jsonl(path, [article_record(f"a{i}") for i in range(3)])
        loaded = load_articles(path)
        assert [a.id for a in loaded] == ["a0", "a1", "a2"]

    def test_drops_empty_abstract(self, tmp_path, caplog):
        path = tmp_path / "articles.jsonl"
        write_jsonl(
            path,
            [article_record("a0"), article_record("a1", abstract=""), article_record("a2")],
        )
        with caplog.at_level("INFO"):
            loaded = load_articles(path)
        assert [a.id for a in loaded] == ["a0", "a2"]
        assert "1" in " ".join(caplog.messages)

    def test_duplicate_id_raises_with_id(self, tmp_path):
        path = tmp_path / "articles.jsonl"
        records = [article_record(f"a{i}") for i in range(7)]
        records[1] = article_record("x")
        records[6] = article_record("x")
        write_jsonl(path, records)
        with pytest.raises(CorpusError, match="'x'"):
            load_articles(path)

    def test_malformed_line_names_line_number(self, tmp_path):
        path = tmp_path / "articles.jsonl"
        path.write_text(json.dumps(article_record("a0")) + "\n{not json\n")
        with pytest.raises(CorpusError, match=":2"):
            load_articles(path)

    def test_missing_field_is_error(self, tmp_path):
        path = tmp_path / "articles.jsonl"
        record = article_record("a0")
        del record["year"]
        write_jsonl(path, [record])
        with pytest.raises(CorpusError, match="year"):
            load_articles(path)

    def test_unknown_fields_ignored(self, tmp_path):
        path = tmp_path / "articles.jsonl"
        write_jsonl(path, [article_record("a0", venue="ACL", extra=1)])
        assert len(load_articles(path)) == 1

    def test_self_citation_stripped(self, tmp_path):
        path = tmp_path / "articles.jsonl"
        write_jsonl(path, [article_record("a0", rw_citations=["a0", "a1"])])
        (loaded,) = load_articles(path)
        assert loaded.rw_citations == frozenset({"a1"})


class TestLoadParagraphs:
    def test_roundtrip_and_validation(self, tmp_path):
        articles = [article("c", rw=("p1", "p2"))]
        path = tmp_path / "paragraphs.jsonl"
        write_jsonl(
            path,
            [
                {
                    "id": "par0",
                    "citing_id": "c",
                    "sentences": [
                        {"text": "Intro.", "label": "Transition", "cited_ids": []},
                        {"text": "Cites.", "label": "Other", "cited_ids": ["p1", "p2"]},
                    ],
                }
            ],
        )
        (p,) = load_paragraphs(path, articles)
        assert p.relevant_ids() == frozenset({"p1", "p2"})

    def test_cited_id_outside_rw_citations_is_error(self, tmp_path):
        articles = [article("c", rw=("p1",))]
        path = tmp_path / "paragraphs.jsonl"
        write_jsonl(
            path,
            [
                {
                    "id": "par0",
                    "citing_id": "c",
                    "sentences": [
                        {"text": "s", "label": "Transition", "cited_ids": []},
                        {"text": "s", "label": "Other", "cited_ids": ["stranger"]},
                    ],
                }
            ],
        )
        with pytest.raises(CorpusError, match="stranger"):
            load_paragraphs(path, articles)

    def test_unknown_label_is_error(self, tmp_path):
        path = tmp_path / "paragraphs.jsonl"
        write_jsonl(
            path,
            [
                {
                    "id": "par0",
                    "citing_id": "c",
                    "sentences": [{"text": "s", "label": "Reflection", "cited_ids": []}],
                }
            ],
        )
        with pytest.raises(CorpusError, match="Reflection"):
            load_paragraphs(path)


def eligibility_oracle(paragraphs):
    """Independent restatement: first sentence Transition, later citations exist."""
    kept = []
    for p in paragraphs:
        first = p.sentences[0]
        later_citations = set()
        for s in p.sentences[1:]:
            later_citations.update(s.cited_ids)
        if first.label is DiscourseLabel.TRANSITION and len(later_citations) > 0:
            kept.append(p)
    return kept


class TestEligibleParagraphs:
    def make(self, pid, sentences):
        return ParagraphRecord(id=pid, citing_id="c", sentences=tuple(sentences))

    def test_first_sentence_other_excluded(self):
        p = self.make("p", [sent("a", O), sent("b", O, "x")])
        assert eligible_paragraphs([p]) == []

    def test_citations_only_in_topic_sentence_excluded(self):
        p = self.make("p", [sent("a", T, "x"), sent("b", O)])
        assert eligible_paragraphs([p]) == eligibility_oracle([p]) == []

    def test_citation_in_third_sentence_included(self):
        p = self.make("p", [sent("a", T), sent("b", O), sent("c", O, "x")])
        assert eligible_paragraphs([p]) == [p]

    def test_matches_oracle_and_is_idempotent(self):
        paragraphs = []
        for i in range(40):
            n = 1 + i % 4
            sentences = [
                sent(f"s{j}", T if (i + j) % 3 else O, *([f"a{i}"] if (i * j) % 2 else []))
                for j in range(n)
            ]
            paragraphs.append(self.make(f"p{i}", sentences))
        once = eligible_paragraphs(paragraphs)
        assert once == eligibility_oracle(paragraphs)
        assert eligible_paragraphs(once) == once


class TestBuildQuery:
    def test_text_layout(self):
        p = ParagraphRecord(
            id="p", citing_id="c", sentences=(sent("S", T), sent("x", O, "r"))
        )
        a = article("c", title="T", abstract="A", rw=("r",))
        q = build_query(p, a)
        assert q.text == "T A [TS] S"
        assert q.text.count("[TS]") == 1
        assert q.year == a.year

    def test_mismatched_citing_id(self):
        p = ParagraphRecord(
            id="p", citing_id="c", sentences=(sent("S", T), sent("x", O, "r"))
        )
        with pytest.raises(CorpusError):
            build_query(p, article("other", rw=("r",)))

    def test_empty_abstract_precondition(self):
        p = ParagraphRecord(
            id="p", citing_id="c", sentences=(sent("S", T), sent("x", O, "r"))
        )
        with pytest.raises(CorpusError):
            build_query(p, article("c", abstract="  ", rw=("r",)))

    def test_empty_topic_sentence_rejected(self):
        p = ParagraphRecord(
            id="p", citing_id="c", sentences=(sent("  ", T), sent("x", O, "r"))
        )
        with pytest.raises(CorpusError, match="topic sentence"):
            build_query(p, article("c", rw=("r",)))

    def test_relevant_ids_union_oracle(self):
        p = ParagraphRecord(
            id="p",
            citing_id="c",
            sentences=(
                sent("S", T, "ignored"),
                sent("x", O, "p1"),
                sent("y", O, "p1", "p2"),
            ),
        )
        union = set()
        for s in p.sentences[1:]:
            union |= s.cited_ids
        q = build_query(p, article("c", rw=("ignored", "p1", "p2")))
        assert q.relevant_ids == frozenset({"p1", "p2"}) == union

    def test_repeated_calls_identical(self):
        p = ParagraphRecord(
            id="p", citing_id="c", sentences=(sent("S", T), sent("x", O, "r"))
        )
        a = article("c", rw=("r",))
        assert build_query(p, a) == build_query(p, a)


def make_query(year=2018, citing="c", relevant=("r",), pid="p"):
    return Query(
        paragraph_id=pid,
        citing_id=citing,
        text="T A [TS] S",
        year=year,
        relevant_ids=frozenset(relevant),
    )


class TestSplitByYear:
    def test_definition_case(self):
        queries = [make_query(year=y, pid=f"p{y}") for y in (2015, 2017, 2019)]
        train, val, test = split_by_year(queries, pivot=2017)
        assert (len(train), len(val), len(test)) == (1, 1, 1)

    def test_all_at_pivot(self):
        queries = [make_query(year=2017, pid=f"p{i}") for i in range(4)]
        train, val, test = split_by_year(queries, pivot=2017)
        assert (len(train), len(val), len(test)) == (0, 4, 0)

    @given(st.lists(st.integers(min_value=1990, max_value=2030), max_size=50))
    def test_partition_property(self, years):
        queries = [make_query(year=y, pid=f"p{i}") for i, y in enumerate(years)]
        train, val, test = split_by_year(queries)
        assert len(train) + len(val) + len(test) == len(queries)
        ids = [q.paragraph_id for part in (train, val, test) for q in part]
        assert len(set(ids)) == len(ids)
        assert all(q.year < 2017 for q in train)
        assert all(q.year == 2017 for q in val)
        assert all(q.year > 2017 for q in test)


class TestCandidatePool:
    def test_acl_and_cited_nonacl_included(self):
        a = article("acl1", is_acl=True, rw=("ext1",))
        b = article("ext1", is_acl=False)
        pool = build_candidate_pool([a, b])
        assert {x.id for x in pool.articles} == {"acl1", "ext1"}

    def test_isolated_nonacl_excluded(self):
        pool = build_candidate_pool([article("acl1"), article("loner", is_acl=False)])
        assert {x.id for x in pool.articles} == {"acl1"}

    def test_build_is_deterministic(self):
        articles = [article(f"a{i}", year=2010 + i % 3) for i in range(10)]
        p1 = build_candidate_pool(articles)
        p2 = build_candidate_pool(list(reversed(articles)))
        assert [a.id for a in p1.articles] == [a.id for a in p2.articles]
        assert p1.by_year == p2.by_year

    def test_filter_by_year_oracle(self):
        articles = [
            article("a2016", year=2016),
            article("a2018", year=2018),
            article("a2019", year=2019),
        ]
        pool = build_candidate_pool(articles)
        query = make_query(year=2018, citing="q")
        got = filter_pool_for_query(pool, query)
        oracle = sorted(
            a.id for a in articles if a.year < query.year and a.id != query.citing_id
        )
        assert got == oracle == ["a2016"]

    def test_filter_same_year_everywhere_empty(self):
        pool = build_candidate_pool([article(f"a{i}", year=2018) for i in range(5)])
        assert filter_pool_for_query(pool, make_query(year=2018)) == []

    def test_filter_excludes_citing_article(self):
        pool = build_candidate_pool([article("self", year=2018), article("old", year=2010)])
        got = filter_pool_for_query(pool, make_query(year=2018, citing="self"))
        assert got == ["old"]

    def test_random_inputs_match_bruteforce(self):
        import random

        rnd = random.Random(5)
        articles = [
            article(f"a{i:03d}", year=rnd.randint(2000, 2020)) for i in range(60)
        ]
        pool = build_candidate_pool(articles)
        for year in (2001, 2010, 2020):
            query = make_query(year=year, citing="a005")
            oracle = sorted(
                a.id for a in articles if a.year < year and a.id != "a005"
            )
            assert filter_pool_for_query(pool, query) == oracle


class TestQueryIO:
    def test_roundtrip(self, tmp_path):
        queries = [make_query(year=2015, pid="p1"), make_query(year=2019, pid="p2")]
        path = tmp_path / "queries.jsonl"
        write_queries(queries, path)
        assert load_queries(path) == queries

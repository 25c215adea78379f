"""Synthetic clustered corpora for experiments and demos.

Articles are grouped into topic clusters, each split into subtopics
with their own vocabularies. Related-work paragraphs cite articles from
one subtopic of the citing article's cluster and open with a topic
sentence built from that subtopic's words, so a useful encoder has to
pick up the topic-sentence signal rather than just the citing article's
overall vocabulary.

Everything is generated from a single seed and is fully deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .corpus import Article, DiscourseLabel, ParagraphRecord, Sentence

_SYLLABLES = [
    "ba", "ce", "di", "fo", "gu", "ha", "ki", "lo", "mu", "ne",
    "pa", "qui", "ro", "sa", "te", "vi", "wo", "xu", "ya", "zo",
    "bra", "cle", "dri", "fro", "gla", "ple", "sta", "tri", "vla", "wre",
]


def _make_words(rng: np.random.Generator, count: int, taken: set[str]) -> list[str]:
    words = []
    while len(words) < count:
        n = int(rng.integers(2, 4))
        word = "".join(rng.choice(_SYLLABLES) for _ in range(n))
        if word not in taken:
            taken.add(word)
            words.append(word)
    return words


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for the clustered corpus generator."""

    n_clusters: int = 10
    subtopics_per_cluster: int = 4
    n_candidates: int = 360
    n_train_citing: int = 100  # two paragraphs per citing article
    n_val_citing: int = 15
    n_test_citing: int = 25
    candidate_year_range: tuple[int, int] = (2008, 2013)
    train_year_range: tuple[int, int] = (2012, 2016)
    val_year: int = 2017
    test_year_range: tuple[int, int] = (2018, 2021)
    cluster_vocab: int = 12
    subtopic_vocab: int = 8
    common_vocab: int = 180
    title_tokens: int = 5
    abstract_tokens: int = 24
    unique_abstract_tokens: int = 5  # article-specific filler words
    topic_sentence_tokens: int = 10
    unique_topic_tokens: int = 1  # paragraph-specific filler words
    cites_per_paragraph: tuple[int, int] = (3, 5)
    n_other_citations: tuple[int, int] = (2, 5)
    n_article_citations: tuple[int, int] = (3, 6)


@dataclass
class SyntheticCorpus:
    articles: list[Article]
    paragraphs: list[ParagraphRecord]
    spec: SyntheticSpec
    seed: int


class _Vocab:
    def __init__(self, rng: np.random.Generator, spec: SyntheticSpec):
        taken: set[str] = set()
        self.common = _make_words(rng, spec.common_vocab, taken)
        self.cluster = [
            _make_words(rng, spec.cluster_vocab, taken) for _ in range(spec.n_clusters)
        ]
        self.subtopic = [
            [
                _make_words(rng, spec.subtopic_vocab, taken)
                for _ in range(spec.subtopics_per_cluster)
            ]
            for _ in range(spec.n_clusters)
        ]

    def sample_mixture(
        self,
        rng: np.random.Generator,
        n: int,
        cluster: int,
        subtopic: int,
        weights: tuple[float, float, float],
    ) -> list[str]:
        """n words drawn from (cluster, subtopic, common) vocabularies."""
        sources = (self.cluster[cluster], self.subtopic[cluster][subtopic], self.common)
        picks = rng.choice(3, size=n, p=np.asarray(weights) / sum(weights))
        return [sources[s][int(rng.integers(len(sources[s])))] for s in picks]


def _article(rng, vocab, spec, aid, cluster, subtopic, year, is_acl=True) -> dict:
    title = " ".join(
        vocab.sample_mixture(rng, spec.title_tokens, cluster, subtopic, (0.35, 0.3, 0.35))
    )
    # Article-specific filler words play the role of idiosyncratic
    # phrasing: noise that overlaps with nothing else in the corpus.
    unique = [f"uq{aid}n{j}" for j in range(spec.unique_abstract_tokens)]
    body = vocab.sample_mixture(rng, spec.abstract_tokens, cluster, subtopic, (0.25, 0.15, 0.6))
    mixed = body + unique
    rng.shuffle(mixed)
    abstract = " ".join(mixed)
    return {
        "id": aid,
        "title": title,
        "abstract": abstract,
        "year": year,
        "is_acl": is_acl,
        "cluster": cluster,
        "subtopic": subtopic,
        "rw": set(),
        "other": set(),
    }


def generate_clustered_corpus(seed: int, spec: SyntheticSpec = SyntheticSpec()) -> SyntheticCorpus:
    """Build the clustered corpus: candidates, citing articles, paragraphs."""
    rng = np.random.default_rng(seed)
    vocab = _Vocab(rng, spec)

    drafts: dict[str, dict] = {}
    by_group: dict[tuple[int, int], list[str]] = {}
    lo, hi = spec.candidate_year_range
    for i in range(spec.n_candidates):
        cluster = i % spec.n_clusters
        subtopic = (i // spec.n_clusters) % spec.subtopics_per_cluster
        aid = f"cand{i:04d}"
        year = int(rng.integers(lo, hi + 1))
        drafts[aid] = _article(rng, vocab, spec, aid, cluster, subtopic, year)
        by_group.setdefault((cluster, subtopic), []).append(aid)

    # Candidates cite older articles; these lists feed the third
    # negative pool (citations of cited articles).
    for aid in sorted(drafts):
        draft = drafts[aid]
        older = [
            o
            for o in sorted(drafts)
            if drafts[o]["year"] < draft["year"] and o != aid
        ]
        if not older:
            continue
        n = min(
            int(rng.integers(spec.n_article_citations[0], spec.n_article_citations[1] + 1)),
            len(older),
        )
        same_group = [
            o for o in older if (drafts[o]["cluster"], drafts[o]["subtopic"])
            == (draft["cluster"], draft["subtopic"])
        ]
        picks: list[str] = []
        if same_group:
            picks.extend(
                str(x) for x in rng.choice(same_group, size=min(2, len(same_group)), replace=False)
            )
        remaining = [o for o in older if o not in picks]
        extra = min(max(n - len(picks), 0), len(remaining))
        if extra:
            picks.extend(str(x) for x in rng.choice(remaining, size=extra, replace=False))
        draft["other"] = set(picks)

    # Citing articles host two paragraphs each, on two subtopics of
    # their own cluster.
    citing_specs: list[tuple[str, int]] = []
    for i in range(spec.n_train_citing):
        citing_specs.append((f"cite_tr{i:03d}", int(rng.integers(*spec.train_year_range)) ))
    for i in range(spec.n_val_citing):
        citing_specs.append((f"cite_va{i:03d}", spec.val_year))
    for i in range(spec.n_test_citing):
        citing_specs.append((f"cite_te{i:03d}", int(rng.integers(spec.test_year_range[0], spec.test_year_range[1] + 1))))

    paragraphs: list[ParagraphRecord] = []
    for order, (aid, year) in enumerate(citing_specs):
        cluster = order % spec.n_clusters
        usable = [
            s
            for s in range(spec.subtopics_per_cluster)
            if sum(1 for cid in by_group[(cluster, s)] if drafts[cid]["year"] < year) >= 2
        ]
        if len(usable) < 2:
            raise RuntimeError(
                f"cluster {cluster} lacks two subtopics with older candidates for year {year}"
            )
        chosen = rng.choice(usable, size=2, replace=False)
        # The citing article is about a different subtopic than either
        # paragraph, so its abstract alone misleads; the topic sentence
        # carries the paragraph's actual subject.
        others = [s for s in range(spec.subtopics_per_cluster) if s not in set(int(c) for c in chosen)]
        own_subtopic = int(others[int(rng.integers(len(others)))]) if others else int(chosen[0])
        draft = _article(rng, vocab, spec, aid, cluster, own_subtopic, year)
        drafts[aid] = draft
        for par_idx, subtopic in enumerate(int(s) for s in chosen):
            candidates = sorted(
                cid for cid in by_group[(cluster, subtopic)] if drafts[cid]["year"] < year
            )
            n_cites = min(
                int(rng.integers(spec.cites_per_paragraph[0], spec.cites_per_paragraph[1] + 1)),
                len(candidates),
            )
            n_cites = max(n_cites, 2)
            cited = [str(x) for x in rng.choice(candidates, size=n_cites, replace=False)]
            draft["rw"].update(cited)
            topic_words = vocab.sample_mixture(
                rng, spec.topic_sentence_tokens, cluster, subtopic, (0.15, 0.7, 0.15)
            ) + [f"uq{aid}p{par_idx}t{j}" for j in range(spec.unique_topic_tokens)]
            body_words = vocab.sample_mixture(rng, 8, cluster, subtopic, (0.3, 0.4, 0.3))
            half = len(cited) // 2
            sentences = (
                Sentence(
                    text=" ".join(topic_words),
                    label=DiscourseLabel.TRANSITION,
                    cited_ids=frozenset(),
                ),
                Sentence(
                    text=" ".join(body_words[:4]),
                    label=DiscourseLabel.OTHER,
                    cited_ids=frozenset(cited[:half] if half else cited[:1]),
                ),
                Sentence(
                    text=" ".join(body_words[4:]),
                    label=DiscourseLabel.OTHER,
                    cited_ids=frozenset(cited[half:] if half else cited[1:]),
                ),
            )
            paragraphs.append(
                ParagraphRecord(id=f"{aid}_p{par_idx}", citing_id=aid, sentences=sentences)
            )

        pool_for_other = [
            cid for cid in sorted(drafts)
            if cid.startswith("cand") and cid not in draft["rw"]
        ]
        n_other = min(
            int(rng.integers(spec.n_other_citations[0], spec.n_other_citations[1] + 1)),
            len(pool_for_other),
        )
        draft["other"] = {str(x) for x in rng.choice(pool_for_other, size=n_other, replace=False)}

    articles = [
        Article(
            id=d["id"],
            title=d["title"],
            abstract=d["abstract"],
            year=d["year"],
            is_acl=d["is_acl"],
            rw_citations=frozenset(d["rw"]),
            other_citations=frozenset(d["other"]) - frozenset(d["rw"]),
        )
        for d in (drafts[aid] for aid in sorted(drafts))
    ]
    return SyntheticCorpus(articles=articles, paragraphs=paragraphs, spec=spec, seed=seed)


def generate_abundant_corpus(seed: int = 0) -> SyntheticCorpus:
    """Small corpus where every paragraph's three pools hold >= 10 members.

    Five citing articles with six paragraphs each; every paragraph cites
    three dedicated positives, so the sibling-paragraph pool has 15
    members, the non-RW pool 12, and each positive cites 5 dedicated
    distant articles, putting 15 in the citations-of-citations pool.
    """
    rng = np.random.default_rng(seed)
    spec = SyntheticSpec()
    vocab = _Vocab(rng, spec)
    articles: list[Article] = []
    paragraphs: list[ParagraphRecord] = []

    def words(n, cluster=0, subtopic=0):
        return " ".join(vocab.sample_mixture(rng, n, cluster, subtopic, (0.3, 0.3, 0.4)))

    for ci in range(5):
        citing_id = f"cite{ci}"
        rw: set[str] = set()
        other: set[str] = set()
        for pj in range(6):
            positives = []
            for pk in range(3):
                pos_id = f"c{ci}_p{pj}_pos{pk}"
                distant = [f"{pos_id}_far{m}" for m in range(5)]
                for did in distant:
                    articles.append(
                        Article(
                            id=did,
                            title=words(4),
                            abstract=words(12),
                            year=2005,
                            is_acl=False,
                        )
                    )
                articles.append(
                    Article(
                        id=pos_id,
                        title=words(4, cluster=ci % 10),
                        abstract=words(12, cluster=ci % 10),
                        year=2010,
                        is_acl=True,
                        other_citations=frozenset(distant),
                    )
                )
                positives.append(pos_id)
            rw.update(positives)
            paragraphs.append(
                ParagraphRecord(
                    id=f"cite{ci}_par{pj}",
                    citing_id=citing_id,
                    sentences=(
                        Sentence(
                            text=words(6, cluster=ci % 10),
                            label=DiscourseLabel.TRANSITION,
                            cited_ids=frozenset(),
                        ),
                        Sentence(
                            text=words(5),
                            label=DiscourseLabel.OTHER,
                            cited_ids=frozenset(positives),
                        ),
                    ),
                )
            )
        for oj in range(12):
            oid = f"c{ci}_other{oj}"
            articles.append(
                Article(id=oid, title=words(4), abstract=words(10), year=2011, is_acl=True)
            )
            other.add(oid)
        articles.append(
            Article(
                id=citing_id,
                title=words(5, cluster=ci % 10),
                abstract=words(14, cluster=ci % 10),
                year=2015,
                is_acl=True,
                rw_citations=frozenset(rw),
                other_citations=frozenset(other),
            )
        )
    return SyntheticCorpus(articles=articles, paragraphs=paragraphs, spec=spec, seed=seed)


# --- JSONL writers ------------------------------------------------------


def write_articles_jsonl(articles: list[Article], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in articles:
            fh.write(
                json.dumps(
                    {
                        "id": a.id,
                        "title": a.title,
                        "abstract": a.abstract,
                        "year": a.year,
                        "is_acl": a.is_acl,
                        "rw_citations": sorted(a.rw_citations),
                        "other_citations": sorted(a.other_citations),
                    }
                )
                + "\n"
            )


def write_paragraphs_jsonl(paragraphs: list[ParagraphRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in paragraphs:
            fh.write(
                json.dumps(
                    {
                        "id": p.id,
                        "citing_id": p.citing_id,
                        "sentences": [
                            {
                                "text": s.text,
                                "label": s.label.value,
                                "cited_ids": sorted(s.cited_ids),
                            }
                            for s in p.sentences
                        ],
                    }
                )
                + "\n"
            )


def main(argv=None) -> int:
    import argparse
    from pathlib import Path

    parser = argparse.ArgumentParser(
        prog="python -m paracite.synthetic",
        description="Generate a synthetic clustered corpus (articles + paragraphs JSONL).",
    )
    parser.add_argument("--out-dir", type=Path, required=True)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    corpus = generate_clustered_corpus(args.seed)
    write_articles_jsonl(corpus.articles, args.out_dir / "articles.jsonl")
    write_paragraphs_jsonl(corpus.paragraphs, args.out_dir / "paragraphs.jsonl")
    print(
        f"wrote {len(corpus.articles)} articles and {len(corpus.paragraphs)} paragraphs "
        f"to {args.out_dir}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

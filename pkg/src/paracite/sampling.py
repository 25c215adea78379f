"""Hard negative pools and quadruplet sampling.

Each training paragraph gets three negative pools: articles cited in
other related-work paragraphs of the same citing article, articles the
citing article cites outside related work, and articles cited by the
paragraph's cited articles but not by the citing article. Quadruplets
are drawn against a fixed per-pool quota, backfilling deficits from the
remaining pools.

Sampling is deterministic: every paragraph uses its own generator
seeded with ``seed XOR fnv1a64(paragraph_id)``, so results do not
depend on paragraph order and corpora can be sampled in parallel.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .corpus import Article, ParagraphRecord
from .encoder import fnv1a64

logger = logging.getLogger(__name__)

#: Per-paragraph negative quota (pool1, pool2, pool3).
DEFAULT_QUOTA = (3, 3, 4)

#: Pool order used when a pool cannot fill its own quota.
BACKFILL_ORDER = ("P3", "P1", "P2")


class NegPool(enum.Enum):
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"


@dataclass(frozen=True)
class NegativePools:
    """The three negative-candidate sets for one paragraph."""

    pool1: frozenset[str]
    pool2: frozenset[str]
    pool3: frozenset[str]

    def by_tag(self) -> dict[NegPool, frozenset[str]]:
        return {NegPool.P1: self.pool1, NegPool.P2: self.pool2, NegPool.P3: self.pool3}


@dataclass(frozen=True)
class Quadruplet:
    """One training unit: a paragraph query, two positives, one negative."""

    paragraph_id: str
    pos1: str
    pos2: str
    neg: str
    neg_pool: NegPool

    def __post_init__(self):
        if self.pos1 == self.pos2:
            raise ValueError("positives must be distinct")
        if self.neg in (self.pos1, self.pos2):
            raise ValueError("negative collides with a positive")


def build_negative_pools(
    paragraph: ParagraphRecord,
    citing: Article,
    all_paragraphs: Iterable[ParagraphRecord],
    citation_lookup: Mapping[str, frozenset[str]],
) -> NegativePools:
    """Construct the three pools for one paragraph.

    ``citation_lookup`` maps an article id to everything that article
    cites; ids without an entry contribute nothing to pool3.
    """
    if citing.id != paragraph.citing_id:
        raise ValueError(
            f"article {citing.id!r} does not match paragraph citing_id {paragraph.citing_id!r}"
        )
    positives = paragraph.relevant_ids()
    excluded = positives | {citing.id}

    sibling_citations: set[str] = set()
    for other in all_paragraphs:
        if other.citing_id == citing.id and other.id != paragraph.id:
            for sentence in other.sentences:
                sibling_citations |= sentence.cited_ids
    pool1 = frozenset(sibling_citations) - excluded

    pool2 = citing.other_citations - excluded

    cited_by_positives: set[str] = set()
    for pos in positives:
        cited_by_positives |= set(citation_lookup.get(pos, frozenset()))
    pool3 = frozenset(cited_by_positives) - citing.all_citations - {citing.id}

    return NegativePools(pool1=pool1, pool2=pool2, pool3=pool3)


def quota_counts(pool_sizes: tuple[int, int, int], quota: tuple[int, int, int]) -> dict[str, int]:
    """Per-pool draw counts: quota capped by pool size, deficits backfilled.

    Backfill follows BACKFILL_ORDER, each pool absorbing as much of the
    remaining deficit as its spare capacity allows.
    """
    sizes = {"P1": pool_sizes[0], "P2": pool_sizes[1], "P3": pool_sizes[2]}
    targets = {"P1": quota[0], "P2": quota[1], "P3": quota[2]}
    counts = {tag: min(targets[tag], sizes[tag]) for tag in ("P1", "P2", "P3")}
    deficit = sum(targets.values()) - sum(counts.values())
    for tag in BACKFILL_ORDER:
        if deficit <= 0:
            break
        extra = min(deficit, sizes[tag] - counts[tag])
        counts[tag] += extra
        deficit -= extra
    return counts


def sample_quadruplets(
    paragraph: ParagraphRecord,
    pools: NegativePools,
    rng_seed: int,
    quota: tuple[int, int, int] = DEFAULT_QUOTA,
) -> list[Quadruplet]:
    """Sample quadruplets for one paragraph, deterministically in the seed.

    Positives are drawn uniformly without replacement within a
    quadruplet (pairs may repeat across quadruplets); negatives are
    drawn without replacement within each pool. Paragraphs with fewer
    than two distinct relevant articles, or all pools empty, yield an
    empty list.
    """
    relevant = sorted(paragraph.relevant_ids())
    if len(relevant) < 2:
        logger.info(
            "skipping paragraph %s: %d relevant article(s), need 2",
            paragraph.id,
            len(relevant),
        )
        return []
    tagged = pools.by_tag()
    if not any(tagged.values()):
        logger.info("skipping paragraph %s: all negative pools empty", paragraph.id)
        return []

    rng = np.random.default_rng(rng_seed)
    counts = quota_counts(
        (len(pools.pool1), len(pools.pool2), len(pools.pool3)), quota
    )
    quadruplets: list[Quadruplet] = []
    for tag in (NegPool.P1, NegPool.P2, NegPool.P3):
        n = counts[tag.value]
        if n == 0:
            continue
        members = sorted(tagged[tag])
        negatives = rng.choice(len(members), size=n, replace=False)
        for idx in negatives:
            pos_pair = rng.choice(len(relevant), size=2, replace=False)
            quadruplets.append(
                Quadruplet(
                    paragraph_id=paragraph.id,
                    pos1=relevant[pos_pair[0]],
                    pos2=relevant[pos_pair[1]],
                    neg=members[idx],
                    neg_pool=tag,
                )
            )
    return quadruplets


def paragraph_seed(seed: int, paragraph_id: str) -> int:
    """Independent per-paragraph sub-seed."""
    return (seed ^ fnv1a64(paragraph_id)) & 0xFFFFFFFFFFFFFFFF


def sample_corpus(
    paragraphs: Iterable[ParagraphRecord],
    citing_articles: Mapping[str, Article],
    all_paragraphs: list[ParagraphRecord],
    citation_lookup: Mapping[str, frozenset[str]],
    seed: int,
    quota: tuple[int, int, int] = DEFAULT_QUOTA,
) -> list[Quadruplet]:
    """Build pools and sample quadruplets for every paragraph."""
    out: list[Quadruplet] = []
    for paragraph in paragraphs:
        citing = citing_articles[paragraph.citing_id]
        pools = build_negative_pools(paragraph, citing, all_paragraphs, citation_lookup)
        out.extend(
            sample_quadruplets(paragraph, pools, paragraph_seed(seed, paragraph.id), quota)
        )
    return out


# --- Quadruplet JSONL ---------------------------------------------------
#
# First line is a header recording the seed and quota; every following
# line is one quadruplet.


def write_quadruplets(
    quadruplets: list[Quadruplet], path, seed: int, quota: tuple[int, int, int] = DEFAULT_QUOTA
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"seed": seed, "quota": list(quota)}) + "\n")
        for q in quadruplets:
            fh.write(
                json.dumps(
                    {
                        "paragraph_id": q.paragraph_id,
                        "pos1": q.pos1,
                        "pos2": q.pos2,
                        "neg": q.neg,
                        "neg_pool": q.neg_pool.value,
                    }
                )
                + "\n"
            )


def load_quadruplets(path) -> tuple[dict, list[Quadruplet]]:
    """Read a quadruplet file; returns (header, quadruplets)."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise ValueError(f"{path}: missing quadruplet header line")
        header = json.loads(first)
        if "seed" not in header or "quota" not in header:
            raise ValueError(f"{path}: header must record seed and quota")
        quadruplets = []
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            record = json.loads(line)
            quadruplets.append(
                Quadruplet(
                    paragraph_id=record["paragraph_id"],
                    pos1=record["pos1"],
                    pos2=record["pos2"],
                    neg=record["neg"],
                    neg_pool=NegPool(record["neg_pool"]),
                )
            )
    return header, quadruplets

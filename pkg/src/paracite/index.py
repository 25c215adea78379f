"""Exact nearest-neighbor retrieval over pool embeddings.

A full scan over an N x d float32 matrix, with distances accumulated in
float64. Approximate indices are deliberately out of scope: pools at
this scale scan in milliseconds and exactness keeps ranking checks
simple. Ties break by ascending article id.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .corpus import CandidatePool
from .encoder import EncoderParams, encode_article

INDEX_FORMAT_VERSION = 1


@dataclass
class VectorIndex:
    """Embeddings for the candidate pool, row-aligned with ids and years.

    Immutable after build; concurrent searches are safe.
    """

    ids: np.ndarray  # article ids, unicode
    matrix: np.ndarray  # (N, d) float32 embeddings
    years: np.ndarray  # int64 publication years

    def __post_init__(self):
        if not (len(self.ids) == self.matrix.shape[0] == len(self.years)):
            raise ValueError("ids, matrix rows and years must align")
        if len(np.unique(self.ids)) != len(self.ids):
            raise ValueError("duplicate ids in index")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("index matrix contains non-finite entries")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def build_index(pool: CandidatePool, params: EncoderParams) -> VectorIndex:
    """Embed every pool article; rows ordered by ascending id."""
    if len(pool) == 0:
        raise ValueError("candidate pool is empty")
    articles = sorted(pool.articles, key=lambda a: a.id)
    matrix = np.empty((len(articles), params.config.out_dim), dtype=np.float32)
    for row, article in enumerate(articles):
        matrix[row] = encode_article(params, article)
    return VectorIndex(
        ids=np.array([a.id for a in articles]),
        matrix=matrix,
        years=np.array([a.year for a in articles], dtype=np.int64),
    )


def _ranked_order(index: VectorIndex, query_vec: np.ndarray, max_year: int | None) -> tuple[np.ndarray, np.ndarray]:
    """Candidate row order (distance asc, id asc) and their distances."""
    query = np.asarray(query_vec, dtype=np.float64)
    if query.shape != (index.dim,):
        raise ValueError(f"query vector has shape {query.shape}, index dim is {index.dim}")
    if max_year is not None:
        candidate_rows = np.nonzero(index.years < max_year)[0]
    else:
        candidate_rows = np.arange(len(index))
    if candidate_rows.size == 0:
        return candidate_rows, np.empty(0)
    diffs = index.matrix[candidate_rows].astype(np.float64) - query
    distances = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
    # Primary key distance, secondary key id (lexsort: last key is primary).
    order = np.lexsort((index.ids[candidate_rows], distances))
    return candidate_rows[order], distances[order]


def search(
    index: VectorIndex, query_vec: np.ndarray, k: int, max_year: int | None = None
) -> list[tuple[str, float]]:
    """Top-k (id, distance) pairs by ascending L2 distance, exact."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rows, distances = _ranked_order(index, query_vec, max_year)
    n = min(k, rows.size)
    return [(str(index.ids[rows[i]]), float(distances[i])) for i in range(n)]


def full_ranking(
    index: VectorIndex, query_vec: np.ndarray, max_year: int | None = None
) -> list[str]:
    """Every candidate id, best first; same order rule as search."""
    rows, _ = _ranked_order(index, query_vec, max_year)
    return [str(i) for i in index.ids[rows]]


# --- Index file ---------------------------------------------------------
#
# JSON header line (format version, N, d), a JSON line of ids, a JSON
# line of years, then the row-major little-endian float32 matrix.


def save_index(index: VectorIndex, path) -> None:
    header = {"format_version": INDEX_FORMAT_VERSION, "n": len(index), "d": index.dim}
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(json.dumps([str(i) for i in index.ids]).encode("utf-8") + b"\n")
        fh.write(json.dumps([int(y) for y in index.years]).encode("utf-8") + b"\n")
        fh.write(np.ascontiguousarray(index.matrix, dtype="<f4").tobytes())


def load_index(path) -> VectorIndex:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        if header.get("format_version") != INDEX_FORMAT_VERSION:
            raise ValueError(f"unsupported index format version {header.get('format_version')!r}")
        ids = json.loads(fh.readline().decode("utf-8"))
        years = json.loads(fh.readline().decode("utf-8"))
        n, d = header["n"], header["d"]
        data = np.frombuffer(fh.read(4 * n * d), dtype="<f4")
        if data.size != n * d:
            raise ValueError("index file truncated")
    return VectorIndex(
        ids=np.array(ids),
        matrix=data.reshape(n, d).copy(),
        years=np.array(years, dtype=np.int64),
    )

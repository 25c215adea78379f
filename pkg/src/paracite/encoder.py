"""Hashed-feature text encoder with a small trainable head.

Maps arbitrary text to a fixed-dimension embedding: tokens are hashed
into a fixed number of buckets (no vocabulary file), bucket embeddings
are mean-pooled, and a two-layer tanh head produces the output vector.
The embedding table is frozen by default so that only the head is
fine-tuned; all matrices carry an explicit frozen flag.

The token hash is FNV-1a 64-bit with the standard constants, so
checkpoints are portable across implementations.
"""

from __future__ import annotations

import hashlib
import io
import json
import re
import struct
from dataclasses import dataclass, field

import numpy as np

# FNV-1a 64-bit constants.
FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_FNV64_MASK = 0xFFFFFFFFFFFFFFFF

#: Separator between the title+abstract segment and the topic sentence.
TS_TOKEN = "[TS]"

# Tokens are maximal alphanumeric runs; the separator survives as-is.
_TOKEN_RE = re.compile(r"\[ts\]|[^\W_]+", re.UNICODE)

CHECKPOINT_FORMAT_VERSION = 1

#: Matrix serialization / iteration order. Fixed: changing it would
#: break checkpoint compatibility.
MATRIX_NAMES = ("E", "W1", "b1", "W2", "b2")


def fnv1a64(data: str | bytes) -> int:
    """FNV-1a 64-bit hash of a string (UTF-8) or byte sequence."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = FNV64_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV64_PRIME) & _FNV64_MASK
    return h


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters.

    The literal separator ``[TS]`` (any case) is preserved as the single
    token ``[ts]``. Empty input yields an empty list.
    """
    return _TOKEN_RE.findall(text.lower())


def hash_token(token: str, buckets: int) -> int:
    """Deterministic bucket for a token: fnv1a64(token) mod buckets."""
    return fnv1a64(token) % buckets


@dataclass(frozen=True)
class EncoderConfig:
    """Architecture sizes and the initialization seed."""

    hash_buckets: int = 2**18
    embed_dim: int = 64
    hidden_dim: int = 64
    out_dim: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.hash_buckets < 2:
            raise ValueError("hash_buckets must be >= 2")
        if min(self.embed_dim, self.hidden_dim, self.out_dim) < 1:
            raise ValueError("all dimensions must be >= 1")


def default_frozen() -> dict[str, bool]:
    """Embedding table frozen, head trainable."""
    return {"E": True, "W1": False, "b1": False, "W2": False, "b2": False}


@dataclass
class EncoderParams:
    """All learnable matrices plus per-matrix frozen flags.

    Arrays are float64 in memory; checkpoints store float32.
    """

    config: EncoderConfig
    E: np.ndarray  # (hash_buckets, embed_dim) token embedding table
    W1: np.ndarray  # (hidden_dim, embed_dim)
    b1: np.ndarray  # (hidden_dim,)
    W2: np.ndarray  # (out_dim, hidden_dim)
    b2: np.ndarray  # (out_dim,)
    frozen: dict[str, bool] = field(default_factory=default_frozen)

    def matrices(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in MATRIX_NAMES}

    def trainable_names(self) -> list[str]:
        return [n for n in MATRIX_NAMES if not self.frozen[n]]

    def validate(self) -> None:
        cfg = self.config
        expected = {
            "E": (cfg.hash_buckets, cfg.embed_dim),
            "W1": (cfg.hidden_dim, cfg.embed_dim),
            "b1": (cfg.hidden_dim,),
            "W2": (cfg.out_dim, cfg.hidden_dim),
            "b2": (cfg.out_dim,),
        }
        for name, shape in expected.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")

    def copy(self) -> "EncoderParams":
        return EncoderParams(
            config=self.config,
            E=self.E.copy(),
            W1=self.W1.copy(),
            b1=self.b1.copy(),
            W2=self.W2.copy(),
            b2=self.b2.copy(),
            frozen=dict(self.frozen),
        )


def init_params(config: EncoderConfig, frozen: dict[str, bool] | None = None) -> EncoderParams:
    """Initialize parameters: uniform +-1/sqrt(fan_in) weights, zero biases.

    Fan-in is embed_dim for E and W1, hidden_dim for W2. Draw order is
    E, W1, W2 from a generator seeded with config.seed, so the same
    config always yields the same parameters.
    """
    rng = np.random.default_rng(config.seed)
    bound_e = 1.0 / np.sqrt(config.embed_dim)
    bound_h = 1.0 / np.sqrt(config.hidden_dim)
    params = EncoderParams(
        config=config,
        E=rng.uniform(-bound_e, bound_e, size=(config.hash_buckets, config.embed_dim)),
        W1=rng.uniform(-bound_e, bound_e, size=(config.hidden_dim, config.embed_dim)),
        b1=np.zeros(config.hidden_dim),
        W2=rng.uniform(-bound_h, bound_h, size=(config.out_dim, config.hidden_dim)),
        b2=np.zeros(config.out_dim),
        frozen=dict(frozen) if frozen is not None else default_frozen(),
    )
    params.validate()
    return params


@dataclass(frozen=True)
class TextFeatures:
    """Hashed bag-of-buckets for one text: buckets, counts, token total."""

    buckets: np.ndarray  # unique bucket ids, int64, sorted
    counts: np.ndarray  # per-bucket token counts, float64
    n_tokens: int


def text_features(text: str, hash_buckets: int) -> TextFeatures:
    """Tokenize and hash a text into its bucket-count representation."""
    tokens = tokenize(text)
    if not tokens:
        return TextFeatures(
            buckets=np.empty(0, dtype=np.int64), counts=np.empty(0), n_tokens=0
        )
    raw = np.fromiter(
        (hash_token(t, hash_buckets) for t in tokens), dtype=np.int64, count=len(tokens)
    )
    buckets, counts = np.unique(raw, return_counts=True)
    return TextFeatures(buckets=buckets, counts=counts.astype(np.float64), n_tokens=len(tokens))


def pooled_vector(params: EncoderParams, feats: TextFeatures) -> np.ndarray:
    """Mean of embedding-table rows over all tokens; zeros for no tokens."""
    if feats.n_tokens == 0:
        return np.zeros(params.config.embed_dim)
    return (params.E[feats.buckets] * feats.counts[:, None]).sum(axis=0) / feats.n_tokens


def head_forward(params: EncoderParams, pooled: np.ndarray) -> np.ndarray:
    """out = W2 . tanh(W1 . pooled + b1) + b2"""
    hidden = np.tanh(params.W1 @ pooled + params.b1)
    return params.W2 @ hidden + params.b2


def encode(params: EncoderParams, text: str) -> np.ndarray:
    """Embed a text. Deterministic in (params, text).

    Raises ValueError on non-finite parameters. The embedding table is
    checked through the pooled vector, which covers exactly the rows the
    input touches; full-table validation happens at init and load time.
    """
    for name in ("W1", "b1", "W2", "b2"):
        if not np.all(np.isfinite(getattr(params, name))):
            raise ValueError(f"encoder parameter {name} contains non-finite entries")
    pooled = pooled_vector(params, text_features(text, params.config.hash_buckets))
    if not np.all(np.isfinite(pooled)):
        raise ValueError("embedding table produced a non-finite pooled vector")
    return head_forward(params, pooled)


def article_text(title: str, abstract: str) -> str:
    """Input text for a pool article: title and abstract, space-joined."""
    return f"{title} {abstract}"


def compose_query_text(title: str, abstract: str, topic_sentence: str) -> str:
    """Query text: title, abstract, separator token, topic sentence."""
    return f"{title} {abstract} {TS_TOKEN} {topic_sentence}"


def encode_article(params: EncoderParams, article) -> np.ndarray:
    """Embed an article from its title and abstract."""
    return encode(params, article_text(article.title, article.abstract))


def encode_query(params: EncoderParams, query) -> np.ndarray:
    """Embed a query built by the corpus module.

    The query text must contain the separator exactly once, followed by
    a non-empty topic sentence; both are guaranteed by query
    construction and re-checked here.
    """
    text = query.text
    if text.count(TS_TOKEN) != 1:
        raise ValueError(
            f"query text must contain exactly one {TS_TOKEN!r} separator"
        )
    suffix = text.split(TS_TOKEN, 1)[1]
    if not suffix.strip():
        raise ValueError("query has an empty topic sentence")
    return encode(params, text)


# --- Checkpoint format -------------------------------------------------
#
# One JSON header line (format version, config, frozen flags), then for
# each matrix in MATRIX_NAMES order: uint32 ndim, ndim x uint32 dims,
# then row-major little-endian float32 data.


def _write_array(buf: io.BufferedIOBase, arr: np.ndarray) -> None:
    buf.write(struct.pack("<I", arr.ndim))
    for dim in arr.shape:
        buf.write(struct.pack("<I", dim))
    buf.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def _read_array(buf: io.BufferedIOBase) -> np.ndarray:
    (ndim,) = struct.unpack("<I", buf.read(4))
    shape = struct.unpack(f"<{ndim}I", buf.read(4 * ndim))
    n = int(np.prod(shape)) if shape else 1
    data = np.frombuffer(buf.read(4 * n), dtype="<f4")
    if data.size != n:
        raise ValueError("checkpoint truncated")
    return data.reshape(shape).astype(np.float64)


def save_checkpoint(params: EncoderParams, path) -> None:
    params.validate()
    header = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": {
            "hash_buckets": params.config.hash_buckets,
            "embed_dim": params.config.embed_dim,
            "hidden_dim": params.config.hidden_dim,
            "out_dim": params.config.out_dim,
            "seed": params.config.seed,
        },
        "frozen": {name: params.frozen[name] for name in MATRIX_NAMES},
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        for name in MATRIX_NAMES:
            _write_array(fh, getattr(params, name))


def load_checkpoint(path) -> EncoderParams:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        if header.get("format_version") != CHECKPOINT_FORMAT_VERSION:
            raise ValueError(
                f"unsupported checkpoint format version {header.get('format_version')!r}"
            )
        config = EncoderConfig(**header["config"])
        arrays = {name: _read_array(fh) for name in MATRIX_NAMES}
    params = EncoderParams(config=config, frozen=dict(header["frozen"]), **arrays)
    params.validate()
    return params


def checkpoint_digest(path) -> str:
    """SHA-256 of the checkpoint file; used as the served model version."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()

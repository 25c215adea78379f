"""Fine-tuning loop: AdamW with linear warmup over quadruplet batches.

Each step encodes the four texts of every quadruplet in a mini-batch,
averages the quadruplet losses, backpropagates through the encoder head
(and the embedding table when unfrozen) and applies one AdamW update.
After every epoch the validation queries are ranked against the
year-filtered pool and the checkpoint with the best validation
R-precision is retained, earlier epoch winning ties.

Everything is deterministic for a fixed seed: shuffling uses an
epoch-derived generator and gradient contributions accumulate in
quadruplet order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import CandidatePool, Query
from .encoder import EncoderParams, TextFeatures, article_text, text_features
from .evaluate import MetricReport, evaluate_run, rank_queries
from .index import build_index
from .objective import LossConfig, quadruplet_grad, quadruplet_loss, triplet_grad, triplet_loss
from .sampling import Quadruplet

logger = logging.getLogger(__name__)

LOG_HEADER = "epoch\tmean_train_loss\tval_r_precision\tval_r_at_5\tval_r_at_10\tval_mrr"


@dataclass(frozen=True)
class TrainConfig:
    """Optimization hyperparameters; defaults follow the reference setup."""

    epochs: int = 5
    lr: float = 1e-5
    beta1: float = 0.99
    beta2: float = 0.999
    weight_decay: float = 0.01
    warmup_fraction: float = 0.10
    batch_size: int = 32
    margin: float = 0.5
    seed: int = 0
    loss: str = "quadruplet"  # or "triplet" (query, pos1, neg)
    validate_every: str = "epoch"
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.validate_every != "epoch":
            raise ValueError("only per-epoch validation is supported")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("betas must lie in (0, 1)")
        if self.lr <= 0.0:
            raise ValueError("lr must be > 0")
        if not 0.0 <= self.warmup_fraction <= 1.0:
            raise ValueError("warmup_fraction must lie in [0, 1]")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.loss not in ("quadruplet", "triplet"):
            raise ValueError("loss must be 'quadruplet' or 'triplet'")


@dataclass
class OptState:
    """AdamW accumulators for every trainable matrix."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0


def init_opt_state(params: EncoderParams) -> OptState:
    names = params.trainable_names()
    return OptState(
        m={n: np.zeros_like(getattr(params, n)) for n in names},
        v={n: np.zeros_like(getattr(params, n)) for n in names},
    )


def lr_at(step: int, total_steps: int, cfg: TrainConfig) -> float:
    """Linear warmup to cfg.lr over the first warmup steps, then constant."""
    if total_steps < 1:
        raise ValueError("total_steps must be >= 1")
    if not 0 <= step <= total_steps:
        raise ValueError(f"step {step} outside [0, {total_steps}]")
    warmup_steps = math.ceil(cfg.warmup_fraction * total_steps)
    if step >= warmup_steps:
        return cfg.lr
    return cfg.lr * step / warmup_steps


def adamw_step(
    params: EncoderParams,
    opt: OptState,
    grads: dict[str, np.ndarray],
    lr_now: float,
    cfg: TrainConfig,
) -> None:
    """One decoupled-weight-decay Adam update, in place.

    Frozen matrices are never touched; passing a gradient for one is an
    error, as is any non-finite gradient.
    """
    trainable = params.trainable_names()
    for name in grads:
        if name not in trainable:
            raise ValueError(f"gradient supplied for frozen or unknown matrix {name!r}")
        if not np.all(np.isfinite(grads[name])):
            raise ValueError(f"non-finite gradient for matrix {name!r}")
    opt.t += 1
    bias1 = 1.0 - cfg.beta1**opt.t
    bias2 = 1.0 - cfg.beta2**opt.t
    for name in trainable:
        grad = grads.get(name)
        if grad is None:
            grad = np.zeros_like(getattr(params, name))
        m = opt.m[name]
        v = opt.v[name]
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * grad
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * grad * grad
        update = (m / bias1) / (np.sqrt(v / bias2) + cfg.adam_eps)
        matrix = getattr(params, name)
        # Decay is decoupled: both terms use the pre-step value.
        matrix -= lr_now * (update + cfg.weight_decay * matrix)


# --- Batched forward/backward over the encoder head ---------------------


@dataclass
class TrainingData:
    """Texts and evaluation assets the loop needs.

    query_texts maps paragraph id to query text; article_texts maps
    article id to its title+abstract input.
    """

    query_texts: dict[str, str]
    article_texts: dict[str, str]
    pool: CandidatePool
    val_queries: list[Query]
    features: dict[str, TextFeatures] = field(default_factory=dict)

    def features_for(self, key: str, text: str, hash_buckets: int) -> TextFeatures:
        feats = self.features.get(key)
        if feats is None:
            feats = text_features(text, hash_buckets)
            self.features[key] = feats
        return feats


@dataclass
class EpochStats:
    epoch: int
    mean_train_loss: float
    val: MetricReport


def _quadruplet_texts(data: TrainingData, quad: Quadruplet) -> list[tuple[str, str]]:
    """(cache key, text) for the query, positives and negative."""
    try:
        query_text = data.query_texts[quad.paragraph_id]
    except KeyError:
        raise KeyError(f"no query text for paragraph {quad.paragraph_id!r}") from None
    out = [("q:" + quad.paragraph_id, query_text)]
    for aid in (quad.pos1, quad.pos2, quad.neg):
        try:
            out.append(("a:" + aid, data.article_texts[aid]))
        except KeyError:
            raise KeyError(f"no article text for id {aid!r}") from None
    return out


def _batch_step(
    params: EncoderParams,
    data: TrainingData,
    batch: list[Quadruplet],
    loss_cfg: LossConfig,
    loss_kind: str,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean loss over the batch and its gradients w.r.t. trainable matrices."""
    h_buckets = params.config.hash_buckets
    feats: list[TextFeatures] = []
    for quad in batch:
        for key, text in _quadruplet_texts(data, quad):
            feats.append(data.features_for(key, text, h_buckets))

    n_texts = len(feats)
    pooled = np.zeros((n_texts, params.config.embed_dim))
    for i, f in enumerate(feats):
        if f.n_tokens:
            pooled[i] = (params.E[f.buckets] * f.counts[:, None]).sum(axis=0) / f.n_tokens
    z = pooled @ params.W1.T + params.b1
    hidden = np.tanh(z)
    out = hidden @ params.W2.T + params.b2

    # Per-quadruplet embedding gradients, accumulated in batch order.
    g_out = np.zeros_like(out)
    total_loss = 0.0
    for qi in range(len(batch)):
        eq, ep1, ep2, en = out[4 * qi : 4 * qi + 4]
        if loss_kind == "quadruplet":
            total_loss += quadruplet_loss(eq, ep1, ep2, en, loss_cfg)
            grads4 = quadruplet_grad(eq, ep1, ep2, en, loss_cfg)
            rows = (4 * qi, 4 * qi + 1, 4 * qi + 2, 4 * qi + 3)
        else:
            total_loss += triplet_loss(eq, ep1, en, loss_cfg)
            grads4 = triplet_grad(eq, ep1, en, loss_cfg)
            rows = (4 * qi, 4 * qi + 1, 4 * qi + 3)
        for row, g in zip(rows, grads4):
            g_out[row] += g
    scale = 1.0 / len(batch)
    mean_loss = total_loss * scale
    g_out *= scale

    grads: dict[str, np.ndarray] = {}
    g_hidden = g_out @ params.W2
    g_z = g_hidden * (1.0 - hidden * hidden)
    if not params.frozen["W2"]:
        grads["W2"] = g_out.T @ hidden
    if not params.frozen["b2"]:
        grads["b2"] = g_out.sum(axis=0)
    if not params.frozen["W1"]:
        grads["W1"] = g_z.T @ pooled
    if not params.frozen["b1"]:
        grads["b1"] = g_z.sum(axis=0)
    if not params.frozen["E"]:
        g_pooled = g_z @ params.W1
        g_e = np.zeros_like(params.E)
        for i, f in enumerate(feats):
            if f.n_tokens:
                np.add.at(g_e, f.buckets, np.outer(f.counts / f.n_tokens, g_pooled[i]))
        grads["E"] = g_e
    return mean_loss, grads


def _validation_report(params: EncoderParams, data: TrainingData) -> MetricReport:
    index = build_index(data.pool, params)
    return evaluate_run(rank_queries(index, params, data.val_queries))


def format_log_line(stats: EpochStats) -> str:
    return (
        f"{stats.epoch}\t{stats.mean_train_loss:.6f}\t{stats.val.r_precision:.6f}"
        f"\t{stats.val.r_at_5:.6f}\t{stats.val.r_at_10:.6f}\t{stats.val.mrr:.6f}"
    )


@dataclass
class TrainResult:
    best_params: EncoderParams
    best_epoch: int
    best_val: MetricReport | None
    initial_val: MetricReport | None
    history: list[EpochStats]

    @property
    def log_lines(self) -> list[str]:
        return [format_log_line(s) for s in self.history]


def train(
    data: TrainingData,
    quadruplets: list[Quadruplet],
    params: EncoderParams,
    cfg: TrainConfig,
) -> TrainResult:
    """Run the fine-tuning loop; returns the best checkpoint and the log.

    ``params`` is left untouched; the result holds copies. With zero
    epochs the initial parameters come back with an empty log.
    """
    if not quadruplets:
        raise ValueError("no quadruplets to train on")
    if cfg.epochs == 0:
        logger.warning("epochs=0: returning initial parameters unchanged")
        return TrainResult(
            best_params=params.copy(), best_epoch=0, best_val=None, initial_val=None, history=[]
        )
    if not data.val_queries:
        raise ValueError("validation queries are required when epochs >= 1")

    loss_cfg = LossConfig(margin=cfg.margin)
    work = params.copy()
    frozen_before = {
        name: getattr(work, name).copy() for name in work.frozen if work.frozen[name]
    }
    opt = init_opt_state(work)
    batches_per_epoch = math.ceil(len(quadruplets) / cfg.batch_size)
    total_steps = cfg.epochs * batches_per_epoch

    initial_val = _validation_report(work, data)
    best_params = work.copy()
    best_epoch = -1
    best_val: MetricReport | None = None
    history: list[EpochStats] = []

    step = 0
    for epoch in range(1, cfg.epochs + 1):
        rng = np.random.default_rng([cfg.seed, epoch])
        order = rng.permutation(len(quadruplets))
        loss_sum = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = [quadruplets[i] for i in order[start : start + cfg.batch_size]]
            step += 1
            loss, grads = _batch_step(work, data, batch, loss_cfg, cfg.loss)
            if not math.isfinite(loss):
                raise RuntimeError(
                    f"non-finite training loss at epoch {epoch}, step {step}"
                )
            adamw_step(work, opt, grads, lr_at(step, total_steps, cfg), cfg)
            loss_sum += loss * len(batch)
        mean_loss = loss_sum / len(quadruplets)
        val = _validation_report(work, data)
        history.append(EpochStats(epoch=epoch, mean_train_loss=mean_loss, val=val))
        logger.info("%s", format_log_line(history[-1]))
        if best_val is None or val.r_precision > best_val.r_precision:
            best_val = val
            best_epoch = epoch
            best_params = work.copy()

    for name, before in frozen_before.items():
        if not np.array_equal(getattr(work, name), before):
            raise RuntimeError(f"frozen matrix {name!r} changed during training")

    return TrainResult(
        best_params=best_params,
        best_epoch=best_epoch,
        best_val=best_val,
        initial_val=initial_val,
        history=history,
    )

"""Triplet and quadruplet hinge losses over L2 distances.

All arithmetic runs in float64 regardless of input dtype. Gradients use
the standard hinge subgradient convention: zero at the kink, and the
distance gradient (a - b) / max(||a - b||, epsilon) so coincident points
contribute a zero direction instead of dividing by zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LossConfig:
    """Shared margin for every hinge term, plus the distance-gradient guard."""

    margin: float = 0.5
    epsilon: float = 1e-12

    def __post_init__(self):
        if self.margin < 0:
            raise ValueError("margin must be >= 0")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")


def _as_vectors(*embeddings: np.ndarray) -> list[np.ndarray]:
    vecs = [np.asarray(e, dtype=np.float64) for e in embeddings]
    dim = vecs[0].shape
    for v in vecs[1:]:
        if v.shape != dim:
            raise ValueError(f"embedding dimensions differ: {v.shape} vs {dim}")
    return vecs


def l2(a: np.ndarray, b: np.ndarray) -> float:
    a, b = _as_vectors(a, b)
    return float(np.linalg.norm(a - b))


def _unit(a: np.ndarray, b: np.ndarray, epsilon: float) -> np.ndarray:
    """d||a - b|| / da, guarded at coincident points."""
    diff = a - b
    return diff / max(float(np.linalg.norm(diff)), epsilon)


def triplet_loss(eq: np.ndarray, ep: np.ndarray, en: np.ndarray, cfg: LossConfig = LossConfig()) -> float:
    """max(0, ||eq - ep|| - ||eq - en|| + margin)"""
    eq, ep, en = _as_vectors(eq, ep, en)
    return max(0.0, l2(eq, ep) - l2(eq, en) + cfg.margin)


def triplet_grad(
    eq: np.ndarray, ep: np.ndarray, en: np.ndarray, cfg: LossConfig = LossConfig()
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of the triplet loss w.r.t. (eq, ep, en)."""
    eq, ep, en = _as_vectors(eq, ep, en)
    g_q = np.zeros_like(eq)
    g_p = np.zeros_like(ep)
    g_n = np.zeros_like(en)
    if l2(eq, ep) - l2(eq, en) + cfg.margin > 0.0:
        g_q += _unit(eq, ep, cfg.epsilon) - _unit(eq, en, cfg.epsilon)
        g_p += _unit(ep, eq, cfg.epsilon)
        g_n += -_unit(en, eq, cfg.epsilon)
    return g_q, g_p, g_n


def quadruplet_loss(
    eq: np.ndarray,
    ep1: np.ndarray,
    ep2: np.ndarray,
    en: np.ndarray,
    cfg: LossConfig = LossConfig(),
) -> float:
    """Four hinge terms over a (query, positive, positive, negative) tuple.

    Two terms pull each positive toward the query and away from the
    negative; two more pull the positives toward each other and away
    from the negative. Symmetric under swapping the positives.
    """
    eq, ep1, ep2, en = _as_vectors(eq, ep1, ep2, en)
    m = cfg.margin
    d_qn = l2(eq, en)
    d_pp = l2(ep1, ep2)
    query_terms = [max(0.0, l2(eq, ep) - d_qn + m) for ep in (ep1, ep2)]
    pair_terms = [max(0.0, d_pp - l2(ep, en) + m) for ep in (ep1, ep2)]
    # Sum each pair first: float addition commutes, so swapping the
    # positives permutes within the pairs and the total is bit-identical.
    return (query_terms[0] + query_terms[1]) + (pair_terms[0] + pair_terms[1])


def quadruplet_grad(
    eq: np.ndarray,
    ep1: np.ndarray,
    ep2: np.ndarray,
    en: np.ndarray,
    cfg: LossConfig = LossConfig(),
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of the quadruplet loss w.r.t. each of the four embeddings.

    A hinge term contributes only while its argument is strictly
    positive; at the kink the subgradient is zero.
    """
    eq, ep1, ep2, en = _as_vectors(eq, ep1, ep2, en)
    m = cfg.margin
    eps = cfg.epsilon
    d_qn = l2(eq, en)
    d_pp = l2(ep1, ep2)
    active_a = [l2(eq, ep) - d_qn + m > 0.0 for ep in (ep1, ep2)]
    active_b = [d_pp - l2(ep, en) + m > 0.0 for ep in (ep1, ep2)]

    g_q = np.zeros_like(eq)
    g_p1 = np.zeros_like(ep1)
    g_p2 = np.zeros_like(ep2)
    g_n = np.zeros_like(en)

    # First sum: ||q - p_i|| - ||q - n|| + m
    for active, ep, g_p in zip(active_a, (ep1, ep2), (g_p1, g_p2)):
        if active:
            g_q += _unit(eq, ep, eps) - _unit(eq, en, eps)
            g_p += _unit(ep, eq, eps)
            g_n += -_unit(en, eq, eps)

    # Second sum: ||p1 - p2|| - ||p_i - n|| + m
    for active, ep, g_p in zip(active_b, (ep1, ep2), (g_p1, g_p2)):
        if active:
            g_p1 += _unit(ep1, ep2, eps)
            g_p2 += _unit(ep2, ep1, eps)
            g_p += -_unit(ep, en, eps)
            g_n += -_unit(en, ep, eps)

    return g_q, g_p1, g_p2, g_n

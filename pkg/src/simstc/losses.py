"""Contrastive, cross-entropy, and total losses, plus the mutual-information
lower-bound diagnostic.

The pairwise contrastive loss treats the same text under two views as the
positive pair; negatives are all other texts in both the anchor's own view
(excluding itself) and the opposite view. Everything is computed full-batch
in log space with max subtraction, so temperature-scaled exponentials can
never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .tensor import Tensor

VIEW_RANK = {"word": 0, "tag": 1, "entity": 2}
PAIR_LABELS = {
    ("word", "tag"): "wp",
    ("word", "entity"): "we",
    ("tag", "entity"): "pe",
}
ALL_PAIRS = tuple(PAIR_LABELS)


def canonical_pair(a, b):
    if a == b or a not in VIEW_RANK or b not in VIEW_RANK:
        raise ValueError(f"invalid view pair ({a!r}, {b!r})")
    return (a, b) if VIEW_RANK[a] < VIEW_RANK[b] else (b, a)


@dataclass(frozen=True)
class ContrastiveConfig:
    tau: float = 0.5
    pair_set: tuple = ALL_PAIRS
    count_ordered_pairs: bool = False       # Sum each pair twice (ordered form)

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        normalized = tuple(canonical_pair(*p) for p in self.pair_set)
        if len(set(normalized)) != len(normalized):
            raise ValueError("duplicate pair in pair_set")
        object.__setattr__(self, "pair_set", normalized)


def _direction_loss(P_anchor: Tensor, P_other: Tensor, tau: float) -> Tensor:
    """Sum over anchors of -log( exp(pos/tau) / S ) for one direction.

    S sums exp(sim/tau) over same-view texts (self excluded) and all
    opposite-view texts (the positive included).
    """
    n = P_anchor.shape[0]
    intra = T.scale(T.dot_products_all_pairs(P_anchor, P_anchor), 1.0 / tau)
    cross = T.scale(T.dot_products_all_pairs(P_anchor, P_other), 1.0 / tau)
    pos = T.take_diagonal(cross)
    exclude = np.concatenate(
        [np.eye(n, dtype=bool), np.zeros((n, n), dtype=bool)], axis=1)
    lse = T.logsumexp_rows(T.concat_cols(intra, cross), exclude=exclude)
    return T.sum_all(T.sub(lse, pos))


def pair_contrastive_loss(P_a: Tensor, P_b: Tensor, tau: float) -> Tensor:
    """Direction-symmetric contrastive loss between two views,
    averaged as (sum of both directions) / 2N."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    n = P_a.shape[0]
    if n == 0:
        raise ValueError("contrastive loss needs at least one text")
    if P_a.shape != P_b.shape:
        raise ValueError(f"projection shape mismatch: {P_a.shape} vs {P_b.shape}")
    both = T.add(_direction_loss(P_a, P_b, tau), _direction_loss(P_b, P_a, tau))
    return T.scale(both, 1.0 / (2 * n))


def multiview_contrastive_loss(P, cfg: ContrastiveConfig):
    """Sum of pairwise losses over the configured unordered view pairs.

    Returns (loss tensor, {pair label: float value}); an empty pair set
    gives exactly zero (the no-contrastive ablation baseline).
    """
    per_pair = {}
    total = None
    for a, b in cfg.pair_set:
        term = pair_contrastive_loss(P[a], P[b], cfg.tau)
        if cfg.count_ordered_pairs:
            term = T.scale(term, 2.0)       # L(a,b) == L(b,a), so x2 per pair
        per_pair[PAIR_LABELS[(a, b)]] = term.item()
        total = term if total is None else T.add(total, term)
    if total is None:
        total = Tensor(np.zeros((1, 1)))
    return total, per_pair


def cross_entropy(log_probs: Tensor, labels, mask, reduction="mean") -> Tensor:
    """Negative true-class log-probability over masked documents."""
    if reduction not in ("mean", "sum"):
        raise ValueError(f"unknown reduction {reduction!r}")
    labels = np.asarray(labels, dtype=np.int64)
    mask = np.asarray(mask, dtype=bool)
    n, c = log_probs.shape
    if labels.shape != (n,) or mask.shape != (n,):
        raise ValueError("labels/mask length must match rows of log_probs")
    count = int(mask.sum())
    if count == 0:
        raise ValueError("cross-entropy mask selects no documents")
    if labels[mask].min() < 0 or labels[mask].max() >= c:
        raise ValueError("label index out of range")
    pick = np.zeros((n, c))
    pick[mask, labels[mask]] = 1.0
    total = T.sum_all(T.mul(log_probs, Tensor(pick)))
    return T.scale(total, -1.0 / count if reduction == "mean" else -1.0)


def total_loss(l_ce: Tensor, l_cl: Tensor) -> Tensor:
    """Unweighted sum of the supervised and contrastive terms."""
    for t in (l_ce, l_cl):
        if not np.isfinite(t.data).all():
            raise ValueError("non-finite loss component")
    return T.add(l_ce, l_cl)


def mi_lower_bound(l_cl: float, N: int) -> float:
    """Lower bound on summed pairwise view mutual information:
    3 ln N minus the multi-view contrastive loss."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return 3.0 * math.log(N) - float(l_cl)


@dataclass
class LossReport:
    l_ce: float
    l_cl: float
    l_total: float
    pair_losses: dict = field(default_factory=dict)
    mi_lower_bound: float = 0.0
    zero_row_count: int = 0

    def to_dict(self):
        out = {"l_ce": self.l_ce, "l_cl": self.l_cl, "l_total": self.l_total}
        for label in ("wp", "we", "pe"):
            out[f"l_{label}"] = self.pair_losses.get(label)
        out["mi_lower_bound"] = self.mi_lower_bound
        out["zero_row_count"] = self.zero_row_count
        return out

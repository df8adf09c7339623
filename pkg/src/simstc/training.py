"""Full-batch training loop: Adam, patience-based early stopping,
evaluation metrics, and the ablation harness over view-pair subsets."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .losses import (ALL_PAIRS, PAIR_LABELS, ContrastiveConfig, LossReport,
                     cross_entropy, mi_lower_bound, multiview_contrastive_loss,
                     total_loss)
from .model import VIEW_ORDER, ModelParams, full_forward
from .tensor import Tensor, backward

MIN_IMPROVE = 1e-6                          # validation loss must drop by more


@dataclass
class TrainConfig:
    learning_rate: float = 0.001
    max_epochs: int = 500
    patience: int = 10
    tau: float = 0.5
    hidden_dim: int = 128
    proj_dim: int = 128
    window_size: int = 5
    seed: int = 0
    pair_set: tuple = ALL_PAIRS
    count_ordered_pairs: bool = False
    ce_reduction: str = "mean"
    early_stop_metric: str = "val_ce"           # or "val_total"
    gcn_final_activation: str = "linear"
    per_view_projection: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.patience < 1 or self.max_epochs < 1:
            raise ValueError("patience and max_epochs must be >= 1")
        if self.early_stop_metric not in ("val_ce", "val_total"):
            raise ValueError(f"unknown early_stop_metric {self.early_stop_metric!r}")

    def contrastive(self):
        return ContrastiveConfig(tau=self.tau, pair_set=self.pair_set,
                                 count_ordered_pairs=self.count_ordered_pairs)

    def to_dict(self):
        d = self.__dict__.copy()
        d["pair_set"] = [PAIR_LABELS[p] for p in
                         ContrastiveConfig(pair_set=self.pair_set).pair_set]
        return d


@dataclass
class LabelIndex:
    """Document labels and split masks, detached from token content."""

    doc_ids: list
    labels: np.ndarray
    splits: list
    label_names: list

    @classmethod
    def from_corpus(cls, corpus):
        return cls(
            doc_ids=[d.id for d in corpus.documents],
            labels=corpus.labels(),
            splits=[d.split for d in corpus.documents],
            label_names=list(corpus.label_names),
        )

    @classmethod
    def from_bundle(cls, bundle):
        return cls(doc_ids=list(bundle.doc_ids), labels=bundle.labels.copy(),
                   splits=list(bundle.splits), label_names=list(bundle.label_names))

    @property
    def N(self):
        return len(self.doc_ids)

    @property
    def num_classes(self):
        return len(self.label_names)

    def mask(self, split):
        return np.array([s == split for s in self.splits], dtype=bool)


def _as_label_index(corpus):
    if isinstance(corpus, LabelIndex):
        return corpus
    if hasattr(corpus, "documents"):
        return LabelIndex.from_corpus(corpus)
    return LabelIndex.from_bundle(corpus)


# -- optimizer ---------------------------------------------------------------


@dataclass
class AdamState:
    m: list
    v: list
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, named_params):
        return cls(m=[np.zeros_like(t.data) for _, t in named_params],
                   v=[np.zeros_like(t.data) for _, t in named_params])


def adam_step(named_params, state: AdamState, lr):
    """One bias-corrected Adam update, in place."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for i, (name, p) in enumerate(named_params):
        g = p.grad
        if g is None:
            g = np.zeros_like(p.data)
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient for {name}")
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g
        m_hat = state.m[i] / c1
        v_hat = state.v[i] / c2
        p.data = p.data - lr * m_hat / (np.sqrt(v_hat) + state.eps)


# -- metrics -----------------------------------------------------------------


def accuracy_and_macro_f1(y_true, y_pred, num_classes):
    """Accuracy, macro-F1, and per-class counts.

    Per-class F1 is 0 when precision + recall is 0; macro-F1 averages
    over all classes, present or not.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    acc = float((y_true == y_pred).mean())
    per_class = []
    f1s = []
    for c in range(num_classes):
        tp = int(((y_pred == c) & (y_true == c)).sum())
        fp = int(((y_pred == c) & (y_true != c)).sum())
        fn = int(((y_pred != c) & (y_true == c)).sum())
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        f1s.append(f1)
        per_class.append({"label": c, "tp": tp, "fp": fp, "fn": fn,
                          "support": int((y_true == c).sum()), "f1": f1})
    return acc, float(np.mean(f1s)), per_class


# -- training loop -----------------------------------------------------------


@dataclass
class EpochRecord:
    epoch: int
    report: LossReport
    val_ce: float
    val_acc: float
    val_f1: float
    seconds: float

    def to_dict(self):
        out = {"epoch": self.epoch}
        out.update(self.report.to_dict())
        out.update({"val_ce": self.val_ce, "val_acc": self.val_acc,
                    "val_f1": self.val_f1, "seconds": self.seconds})
        return out


@dataclass
class TrainResult:
    params: ModelParams
    records: list
    best_epoch: int
    best_val: float


def _masked_ce(log_probs, labels, mask):
    rows = log_probs[mask]
    picked = rows[np.arange(rows.shape[0]), labels[mask]]
    return float(-picked.mean())


def train(corpus, graphs, links, config: TrainConfig, epoch_cb=None) -> TrainResult:
    """Run the full optimization; returns the best-validation snapshot.

    Each epoch does one full-batch forward over all documents, computes
    the supervised loss on the train mask and the contrastive loss over
    the whole corpus, then backpropagates and takes one Adam step.
    Validation metrics come from the same forward, so the returned
    snapshot is exactly the parameter set that produced the best
    recorded validation loss.
    """
    index = _as_label_index(corpus)
    view_dims = {v: graphs[v].features.shape[1] for v in VIEW_ORDER}
    params = ModelParams.init(
        view_dims, index.num_classes,
        hidden_dim=config.hidden_dim, proj_dim=config.proj_dim,
        seed=config.seed, per_view_projection=config.per_view_projection)
    named = params.named_parameters()
    state = AdamState.for_params(named)
    ccfg = config.contrastive()

    train_mask = index.mask("train")
    val_mask = index.mask("val")
    if not train_mask.any():
        raise ValueError("corpus has no training documents")
    if not val_mask.any():
        raise ValueError("corpus has no validation documents")
    features = {v: Tensor(graphs[v].features) for v in VIEW_ORDER}

    records = []
    best_val = math.inf
    best_epoch = 0
    best_snapshot = params.snapshot()
    stale = 0

    for epoch in range(1, config.max_epochs + 1):
        t0 = time.perf_counter()
        fwd = full_forward(params, graphs, links, features=features,
                           final_activation=config.gcn_final_activation)
        l_ce = cross_entropy(fwd.log_probs, index.labels, train_mask,
                             reduction=config.ce_reduction)
        l_cl, per_pair = multiview_contrastive_loss(fwd.P, ccfg)
        loss = total_loss(l_ce, l_cl)
        if not np.isfinite(loss.data).all():
            raise FloatingPointError(f"non-finite loss at epoch {epoch}")

        lp = fwd.log_probs.data
        val_ce = _masked_ce(lp, index.labels, val_mask)
        val_pred = lp[val_mask].argmax(axis=1)
        val_acc, val_f1, _ = accuracy_and_macro_f1(
            index.labels[val_mask], val_pred, index.num_classes)

        report = LossReport(
            l_ce=l_ce.item(), l_cl=l_cl.item(), l_total=loss.item(),
            pair_losses=per_pair,
            mi_lower_bound=mi_lower_bound(l_cl.item(), index.N),
            zero_row_count=fwd.zero_rows)

        stop_metric = val_ce if config.early_stop_metric == "val_ce" \
            else val_ce + l_cl.item()
        if stop_metric < best_val - MIN_IMPROVE:
            best_val = stop_metric
            best_epoch = epoch
            best_snapshot = params.snapshot()
            stale = 0
        else:
            stale += 1

        backward(loss)
        adam_step(named, state, config.learning_rate)

        rec = EpochRecord(epoch=epoch, report=report, val_ce=val_ce,
                          val_acc=val_acc, val_f1=val_f1,
                          seconds=time.perf_counter() - t0)
        records.append(rec)
        if epoch_cb is not None:
            epoch_cb(rec)
        if stale >= config.patience:
            break

    params.load_snapshot(best_snapshot)
    return TrainResult(params=params, records=records,
                       best_epoch=best_epoch, best_val=best_val)


@dataclass
class EvalReport:
    split: str
    accuracy: float
    macro_f1: float
    per_class: list
    count: int

    def to_dict(self):
        return {"split": self.split, "accuracy": self.accuracy,
                "macro_f1": self.macro_f1, "count": self.count,
                "per_class": self.per_class}


def evaluate(params: ModelParams, corpus, graphs, links, split,
             config: TrainConfig | None = None) -> EvalReport:
    """Accuracy and macro-F1 on one split; argmax ties go to the lowest
    class index (numpy argmax convention)."""
    index = _as_label_index(corpus)
    mask = index.mask(split)
    if not mask.any():
        raise ValueError(f"split {split!r} is empty")
    activation = config.gcn_final_activation if config else "linear"
    fwd = full_forward(params, graphs, links, final_activation=activation)
    pred = fwd.log_probs.data[mask].argmax(axis=1)
    acc, f1, per_class = accuracy_and_macro_f1(
        index.labels[mask], pred, index.num_classes)
    return EvalReport(split=split, accuracy=acc, macro_f1=f1,
                      per_class=per_class, count=int(mask.sum()))


# -- ablation harness --------------------------------------------------------

# Row order mirrors the view-combination grid: word-tag, tag-entity,
# word-entity columns, from no contrastive pairs to all three.
ABLATION_ROWS = (
    (),
    (("word", "tag"),),
    (("tag", "entity"),),
    (("word", "entity"),),
    (("word", "tag"), ("tag", "entity")),
    (("word", "tag"), ("word", "entity")),
    (("tag", "entity"), ("word", "entity")),
    (("word", "tag"), ("tag", "entity"), ("word", "entity")),
)


def worker_count(n_tasks):
    cap = int(os.environ.get("SIMSTC_THREADS", "1") or "1")
    return max(1, min(cap, n_tasks))


def run_ablation(corpus, graphs, links, base_config: TrainConfig, seeds):
    """Train every subset of the three view pairs with every seed.

    Returns a list of 8 row dicts in the grid layout: which pairs are
    active, per-seed test accuracy/macro-F1, and their mean/std.
    """
    if not seeds:
        raise ValueError("at least one seed required")
    index = _as_label_index(corpus)

    def run_one(pairs, seed):
        cfg = replace(base_config, pair_set=pairs, seed=seed)
        result = train(index, graphs, links, cfg)
        rep = evaluate(result.params, index, graphs, links, "test", cfg)
        return {"seed": seed, "accuracy": rep.accuracy, "macro_f1": rep.macro_f1,
                "best_epoch": result.best_epoch}

    tasks = [(row, pairs, seed) for row, pairs in enumerate(ABLATION_ROWS)
             for seed in seeds]
    results = {}
    workers = worker_count(len(tasks))
    if workers == 1:
        for row, pairs, seed in tasks:
            results[(row, seed)] = run_one(pairs, seed)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {(row, seed): pool.submit(run_one, pairs, seed)
                       for row, pairs, seed in tasks}
            for key, fut in futures.items():
                results[key] = fut.result()

    table = []
    for row, pairs in enumerate(ABLATION_ROWS):
        runs = [results[(row, s)] for s in seeds]
        accs = np.array([r["accuracy"] for r in runs])
        f1s = np.array([r["macro_f1"] for r in runs])
        labels = {PAIR_LABELS[p]: (p in pairs) for p in ALL_PAIRS}
        table.append({
            "pairs": [PAIR_LABELS[p] for p in pairs],
            "word_tag": labels["wp"],
            "tag_entity": labels["pe"],
            "word_entity": labels["we"],
            "runs": runs,
            "mean_accuracy": float(accs.mean()),
            "std_accuracy": float(accs.std()),
            "mean_macro_f1": float(f1s.mean()),
            "std_macro_f1": float(f1s.std()),
        })
    return table

"""The multi-view network: per-view 2-layer GCN encoders, text aggregation,
a shared projection head, and the concatenation classifier."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .graphs import TextLinkMatrix, ViewGraph
from .tensor import Tensor

VIEW_ORDER = ("word", "tag", "entity")
CHECKPOINT_MAGIC = "SIMSTC-CKPT-1"


@dataclass
class GcnEncoder:
    view: str
    W0: Tensor                              # d_view x hidden
    W1: Tensor                              # hidden x hidden


@dataclass
class ProjectionHead:
    W_in: Tensor
    b_in: Tensor
    W_out: Tensor
    b_out: Tensor


@dataclass
class Classifier:
    W: Tensor                               # (3 * hidden) x num_classes


class ModelParams:
    """All trainable tensors, with a stable enumeration order."""

    def __init__(self, encoders, heads, classifier, hidden_dim, proj_dim):
        self.encoders = encoders            # view -> GcnEncoder
        self.heads = heads                  # view -> ProjectionHead (may share)
        self.classifier = classifier
        self.hidden_dim = hidden_dim
        self.proj_dim = proj_dim

    @classmethod
    def init(cls, view_dims, num_classes, hidden_dim=128, proj_dim=128,
             seed=0, per_view_projection=False):
        """Create parameters from a root seed.

        The root seed is split with numpy's SeedSequence.spawn, one child
        stream per tensor in enumeration order, so any single tensor's
        init is reproducible independently of the others.
        """
        specs = []                          # (path, rows, cols)
        for view in VIEW_ORDER:
            specs.append((f"encoder.{view}.W0", view_dims[view], hidden_dim))
            specs.append((f"encoder.{view}.W1", hidden_dim, hidden_dim))
        head_views = VIEW_ORDER if per_view_projection else ("shared",)
        for hv in head_views:
            specs.append((f"head.{hv}.W_in", hidden_dim, proj_dim))
            specs.append((f"head.{hv}.b_in", 1, proj_dim))
            specs.append((f"head.{hv}.W_out", proj_dim, proj_dim))
            specs.append((f"head.{hv}.b_out", 1, proj_dim))
        specs.append(("classifier.W", 3 * hidden_dim, num_classes))

        streams = np.random.SeedSequence(seed).spawn(len(specs))
        made = {}
        for (name, rows, cols), ss in zip(specs, streams):
            a = np.sqrt(6.0 / (rows + cols))   # uniform(-a, a) for every tensor
            data = np.random.default_rng(ss).uniform(-a, a, size=(rows, cols))
            made[name] = Tensor(data, requires_grad=True, name=name)

        encoders = {
            view: GcnEncoder(view, made[f"encoder.{view}.W0"],
                             made[f"encoder.{view}.W1"])
            for view in VIEW_ORDER
        }
        built = {
            hv: ProjectionHead(
                made[f"head.{hv}.W_in"], made[f"head.{hv}.b_in"],
                made[f"head.{hv}.W_out"], made[f"head.{hv}.b_out"])
            for hv in head_views
        }
        heads = {view: built[view if per_view_projection else "shared"]
                 for view in VIEW_ORDER}
        return cls(encoders, heads, Classifier(made["classifier.W"]),
                   hidden_dim, proj_dim)

    def named_parameters(self):
        """Stable (name, tensor) list; order aligns optimizer state."""
        out = []
        for view in VIEW_ORDER:
            enc = self.encoders[view]
            out.append((f"encoder.{view}.W0", enc.W0))
            out.append((f"encoder.{view}.W1", enc.W1))
        seen = set()
        for view in VIEW_ORDER:
            head = self.heads[view]
            if id(head) in seen:
                continue
            seen.add(id(head))
            prefix = f"head.{view}" if len({id(h) for h in self.heads.values()}) > 1 \
                else "head.shared"
            out.append((f"{prefix}.W_in", head.W_in))
            out.append((f"{prefix}.b_in", head.b_in))
            out.append((f"{prefix}.W_out", head.W_out))
            out.append((f"{prefix}.b_out", head.b_out))
        out.append(("classifier.W", self.classifier.W))
        return out

    def snapshot(self):
        """Copy of the current parameter values, keyed by name."""
        return {name: t.data.copy() for name, t in self.named_parameters()}

    def load_snapshot(self, values):
        for name, t in self.named_parameters():
            t.data = values[name].copy()

    def count(self):
        return sum(t.data.size for _, t in self.named_parameters())


# -- forward pieces ----------------------------------------------------------


def encode_view(graph: ViewGraph, enc: GcnEncoder, features=None,
                final_activation="linear") -> Tensor:
    """Two GCN layers: N (relu(N X W0)) W1, optionally relu after layer 2."""
    X = features if features is not None else Tensor(graph.features)
    h = T.relu(T.matmul_sparse(graph.norm_adj, T.matmul_dense(X, enc.W0)))
    h = T.matmul_sparse(graph.norm_adj, T.matmul_dense(h, enc.W1))
    if final_activation == "relu":
        h = T.relu(h)
    elif final_activation != "linear":
        raise ValueError(f"unknown final activation {final_activation!r}")
    return h


def aggregate_texts(links: TextLinkMatrix, H: Tensor) -> Tensor:
    """Per-text embeddings Z = T H; rows without incident nodes are zero."""
    return T.matmul_sparse(links.matrix, H)


def project(head: ProjectionHead, Z: Tensor, epsilon=1e-12):
    """Map into the contrastive space and L2-normalize rows.

    Returns (P, zero_rows) where zero_rows counts rows whose
    pre-normalization norm is at or below epsilon (they stay near zero
    instead of being blown up to unit length).
    """
    hidden = T.relu(T.add_rowvec(T.matmul_dense(Z, head.W_in), head.b_in))
    out = T.add_rowvec(T.matmul_dense(hidden, head.W_out), head.b_out)
    zero_rows = int((np.linalg.norm(out.data, axis=1) <= epsilon).sum())
    return T.row_normalize_l2(out, epsilon), zero_rows


def classify(clf: Classifier, Z_w: Tensor, Z_p: Tensor, Z_e: Tensor) -> Tensor:
    """Log-probabilities from the concatenated multi-view features."""
    logits = T.matmul_dense(T.concat_cols(Z_w, Z_p, Z_e), clf.W)
    return T.log_softmax_rows(logits)


@dataclass
class ForwardResult:
    Z: dict                                 # view -> N x hidden Tensor
    P: dict                                 # view -> N x proj Tensor
    log_probs: Tensor                       # N x c
    zero_rows: int


def full_forward(params: ModelParams, graphs, links, features=None,
                 final_activation="linear", norm_epsilon=1e-12) -> ForwardResult:
    """One full pass over all documents: encode, aggregate, project, classify."""
    Z, P = {}, {}
    zero_rows = 0
    for view in VIEW_ORDER:
        X = features[view] if features is not None else None
        H = encode_view(graphs[view], params.encoders[view], X, final_activation)
        Z[view] = aggregate_texts(links[view], H)
        P[view], zr = project(params.heads[view], Z[view], norm_epsilon)
        zero_rows += zr
    log_probs = classify(params.classifier, Z["word"], Z["tag"], Z["entity"])
    return ForwardResult(Z=Z, P=P, log_probs=log_probs, zero_rows=zero_rows)


# -- checkpoints -------------------------------------------------------------


def save_checkpoint(path, params: ModelParams, meta):
    """Write a deterministic checkpoint: magic line, sorted-key JSON header,
    then raw little-endian float64 blocks in enumeration order. Identical
    parameters and meta always produce identical bytes."""
    named = params.named_parameters()
    header = {
        "meta": meta,
        "hidden_dim": params.hidden_dim,
        "proj_dim": params.proj_dim,
        "params": [
            {"name": name, "rows": t.shape[0], "cols": t.shape[1]}
            for name, t in named
        ],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":"))
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC.encode("ascii") + b"\n")
        fh.write(blob.encode("utf-8") + b"\n")
        for _, t in named:
            fh.write(np.ascontiguousarray(t.data, dtype="<f8").tobytes())
    os.replace(tmp, path)


def load_checkpoint(path):
    """Read a checkpoint back as ({name: array}, header dict)."""
    with open(path, "rb") as fh:
        magic = fh.readline().rstrip(b"\n").decode("ascii")
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        header = json.loads(fh.readline().decode("utf-8"))
        values = {}
        for spec in header["params"]:
            n = spec["rows"] * spec["cols"]
            buf = fh.read(n * 8)
            if len(buf) != n * 8:
                raise ValueError(f"{path}: truncated checkpoint")
            values[spec["name"]] = np.frombuffer(buf, dtype="<f8").reshape(
                spec["rows"], spec["cols"]).astype(np.float64)
    return values, header


def rebuild_params(values, header, view_dims, num_classes):
    """Reconstruct ModelParams from checkpoint contents."""
    per_view = any(name.startswith("head.word") for name in values)
    params = ModelParams.init(
        view_dims, num_classes,
        hidden_dim=header["hidden_dim"], proj_dim=header["proj_dim"],
        seed=0, per_view_projection=per_view,
    )
    for name, t in params.named_parameters():
        if name not in values:
            raise ValueError(f"checkpoint missing parameter {name}")
        if values[name].shape != t.data.shape:
            raise ValueError(
                f"checkpoint parameter {name} has shape "
                f"{values[name].shape}, expected {t.data.shape}")
        t.data = values[name].copy()
    return params

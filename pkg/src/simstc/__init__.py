"""Multi-view graph contrastive training engine for short-text classification.

Builds word, POS-tag, and entity component graphs from an annotated
corpus, learns per-view text embeddings with 2-layer GCNs on a minimal
reverse-mode autodiff substrate, and jointly optimizes a three-pair
contrastive objective with cross-entropy.
"""

__version__ = "0.1.0"

from .corpus import (AnnotatedCorpus, CorpusError, Document, EmbeddingTable,
                     Vocab, load_corpus, load_embeddings)
from .graphs import (GraphConfig, MultiViewGraphs, SparseMatrix, TextLinkMatrix,
                     ViewGraph, build_view_graphs, count_windows,
                     entity_adjacency, entity_links, load_bundle,
                     normalize_adjacency, pmi_adjacency, save_bundle,
                     tfidf_links)
from .losses import (ContrastiveConfig, LossReport, cross_entropy,
                     mi_lower_bound, multiview_contrastive_loss,
                     pair_contrastive_loss, total_loss)
from .model import (Classifier, GcnEncoder, ModelParams, ProjectionHead,
                    aggregate_texts, classify, encode_view, full_forward,
                    load_checkpoint, project, save_checkpoint)
from .tensor import Tensor, backward
from .training import (AdamState, EpochRecord, EvalReport, LabelIndex,
                       TrainConfig, TrainResult, adam_step, evaluate,
                       run_ablation, train)

__all__ = [
    "AnnotatedCorpus", "CorpusError", "Document", "EmbeddingTable", "Vocab",
    "load_corpus", "load_embeddings",
    "GraphConfig", "MultiViewGraphs", "SparseMatrix", "TextLinkMatrix",
    "ViewGraph", "build_view_graphs", "count_windows", "entity_adjacency",
    "entity_links", "load_bundle", "normalize_adjacency", "pmi_adjacency",
    "save_bundle", "tfidf_links",
    "ContrastiveConfig", "LossReport", "cross_entropy", "mi_lower_bound",
    "multiview_contrastive_loss", "pair_contrastive_loss", "total_loss",
    "Classifier", "GcnEncoder", "ModelParams", "ProjectionHead",
    "aggregate_texts", "classify", "encode_view", "full_forward",
    "load_checkpoint", "project", "save_checkpoint",
    "Tensor", "backward",
    "AdamState", "EpochRecord", "EvalReport", "LabelIndex", "TrainConfig",
    "TrainResult", "adam_step", "evaluate", "run_ablation", "train",
]

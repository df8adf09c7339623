"""Construction of the three per-view component graphs and text-link matrices.

Word and tag adjacencies come from positive PMI over fixed-size sliding
windows; the entity adjacency from positive cosine similarity of entity
embeddings. Texts connect to word/tag nodes with TF-IDF weights and to
entity nodes with binary incidence. All logarithms are natural.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .corpus import Vocab
from .sparse import SparseMatrix, read_coord_text, write_coord_text

VIEWS = ("word", "tag", "entity")


@dataclass
class WindowCounts:
    """Sliding-window co-occurrence statistics for one view."""

    vocab_size: int
    total_windows: int                      # Omega
    node_windows: Counter                   # node index -> Omega(v)
    pair_windows: Counter                   # (i, j), i < j -> Omega(v_i, v_j)


@dataclass
class ViewGraph:
    view: str
    nodes: list
    features: np.ndarray                    # |V| x d, dense
    adjacency: SparseMatrix                 # symmetric, positive entries
    norm_adj: SparseMatrix                  # D^-1/2 (A + I) D^-1/2

    @property
    def node_count(self):
        return len(self.nodes)

    @property
    def feature_dim(self):
        return self.features.shape[1]


@dataclass
class TextLinkMatrix:
    view: str
    matrix: SparseMatrix                    # N x |V|


def _view_sequences(corpus, view, vocab):
    if view == "word":
        return [[vocab.index(t) for t in d.tokens] for d in corpus.documents]
    if view == "tag":
        return [[vocab.index(t) for t in d.tags] for d in corpus.documents]
    raise ValueError(f"windowed counting applies to word/tag, not {view!r}")


def count_windows(corpus, view, window_size, vocab=None):
    """Collect window presence counts for PMI.

    A document with L tokens contributes max(1, L - window_size + 1)
    windows (empty documents contribute none). A window counts a node
    once no matter how often it repeats inside the window.
    """
    if window_size < 1:
        raise ValueError("window_size must be >= 1")
    if vocab is None:
        vocab = corpus.word_vocab if view == "word" else corpus.tag_vocab
    total = 0
    node_w = Counter()
    pair_w = Counter()
    for seq in _view_sequences(corpus, view, vocab):
        L = len(seq)
        if L == 0:
            continue
        n_windows = max(1, L - window_size + 1)
        total += n_windows
        for start in range(n_windows):
            present = sorted(set(seq[start:start + window_size]))
            for a_pos, a in enumerate(present):
                node_w[a] += 1
                for b in present[a_pos + 1:]:
                    pair_w[(a, b)] += 1
    return WindowCounts(
        vocab_size=len(vocab),
        total_windows=total,
        node_windows=node_w,
        pair_windows=pair_w,
    )


def pmi_adjacency(counts: WindowCounts) -> SparseMatrix:
    """Positive-PMI adjacency: ln((p_ij) / (p_i p_j)) clipped at zero.

    Probabilities are window frequencies; entries with PMI <= 0 and the
    diagonal are absent (self-loops are added by normalization).
    """
    if counts.total_windows == 0:
        raise ValueError("no sliding windows: corpus view is empty")
    omega = counts.total_windows
    entries = []
    for (i, j), c_ij in counts.pair_windows.items():
        if c_ij == 0:
            continue
        pmi = math.log(c_ij * omega / (counts.node_windows[i] * counts.node_windows[j]))
        if pmi > 0.0:
            entries.append((i, j, pmi))
            entries.append((j, i, pmi))
    n = counts.vocab_size
    return SparseMatrix.from_entries(n, n, entries)


def entity_adjacency(embeddings, entity_vocab, block=512) -> SparseMatrix:
    """Cosine-similarity adjacency over entity embeddings.

    Keeps strictly positive off-diagonal cosines. Every entity must have
    an embedding; zero-norm vectors are rejected by entity id.
    """
    n = len(entity_vocab)
    if n == 0:
        return SparseMatrix.from_entries(0, 0, [])
    X = np.empty((n, embeddings.dim))
    for i, ent in enumerate(entity_vocab):
        vec = embeddings.get(ent)
        if vec is None:
            raise ValueError(f"entity {ent!r} has no embedding")
        X[i] = vec
    norms = np.linalg.norm(X, axis=1)
    bad = np.nonzero(norms == 0.0)[0]
    if bad.size:
        names = ", ".join(entity_vocab.tokens[i] for i in bad[:5])
        raise ValueError(f"zero-norm embedding for entity: {names}")
    Xn = X / norms[:, None]
    rows, cols, vals = [], [], []
    for start in range(0, n, block):
        stop = min(start + block, n)
        sims = Xn[start:stop] @ Xn.T
        for local, i in enumerate(range(start, stop)):
            sims[local, i] = 0.0            # drop diagonal
        r, c = np.nonzero(sims > 0.0)
        rows.append(r + start)
        cols.append(c)
        vals.append(sims[r, c])
    return SparseMatrix(
        n, n,
        np.concatenate(rows) if rows else [],
        np.concatenate(cols) if cols else [],
        np.concatenate(vals) if vals else [],
    )


def tfidf_links(corpus, view, vocab=None, variant="count") -> TextLinkMatrix:
    """Text-to-node links weighted by TF-IDF.

    T[i][j] = tf(i, j) * ln(N / df(j)) with raw-count tf by default;
    `variant` may be "count", "log" (1 + ln tf), or "binary". Nodes
    present in every document get idf 0 and no edge.
    """
    if view not in ("word", "tag"):
        raise ValueError(f"TF-IDF links apply to word/tag, not {view!r}")
    if vocab is None:
        vocab = corpus.word_vocab if view == "word" else corpus.tag_vocab
    if variant not in ("count", "log", "binary"):
        raise ValueError(f"unknown tfidf variant {variant!r}")
    N = corpus.N
    seqs = _view_sequences(corpus, view, vocab)
    df = Counter()
    for seq in seqs:
        df.update(set(seq))
    entries = []
    for i, seq in enumerate(seqs):
        for j, count in sorted(Counter(seq).items()):
            idf = math.log(N / df[j])
            if idf == 0.0:
                continue
            if variant == "count":
                tf = count
            elif variant == "log":
                tf = 1.0 + math.log(count)
            else:
                tf = 1.0
            entries.append((i, j, tf * idf))
    return TextLinkMatrix(view, SparseMatrix.from_entries(N, len(vocab), entries))


def entity_links(corpus, entity_vocab=None) -> TextLinkMatrix:
    """Binary text-to-entity incidence; rows of entity-free texts are empty."""
    if entity_vocab is None:
        entity_vocab = corpus.entity_vocab
    entries = []
    for i, doc in enumerate(corpus.documents):
        seen = {e for e in doc.entities if e in entity_vocab}
        for e in sorted(seen):
            entries.append((i, entity_vocab.index(e), 1.0))
    return TextLinkMatrix(
        "entity", SparseMatrix.from_entries(corpus.N, len(entity_vocab), entries)
    )


def normalize_adjacency(A: SparseMatrix) -> SparseMatrix:
    """Symmetric normalization D^-1/2 (A + I) D^-1/2 with self-loops."""
    if A.rows != A.cols:
        raise ValueError("adjacency must be square")
    n = A.rows
    deg = A.row_sums() + 1.0                # self-loop contributes 1 per row
    inv_sqrt = 1.0 / np.sqrt(deg)
    on_diag = A.row == A.col
    val = A.val.copy()
    val[on_diag] += 1.0                     # merge loop into existing diagonal
    missing = np.setdiff1d(np.arange(n, dtype=np.int64), A.row[on_diag])
    row = np.concatenate([A.row, missing])
    col = np.concatenate([A.col, missing])
    val = np.concatenate([val, np.ones(missing.size)])
    # inv_sqrt products grouped first so (i, j) and (j, i) stay bit-identical
    return SparseMatrix(n, n, row, col, val * (inv_sqrt[row] * inv_sqrt[col]))


# -- full multi-view build ------------------------------------------------


@dataclass
class GraphConfig:
    window_size: int = 5
    word_dim: int = 200                     # used when no word embeddings given
    tfidf_variant: str = "count"
    seed: int = 0


@dataclass
class MultiViewGraphs:
    graphs: dict                            # view -> ViewGraph
    links: dict                             # view -> TextLinkMatrix
    dropped_entities: list = field(default_factory=list)
    word_coverage: float | None = None


def _word_features(vocab, table, dim, seed):
    # missing tokens draw uniform(-0.01, 0.01) vectors from the build seed,
    # in vocabulary order, so the matrix is a pure function of (vocab, seed)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    d = table.dim if table is not None else dim
    X = np.empty((len(vocab), d))
    for i, tok in enumerate(vocab):
        vec = table.get(tok) if table is not None else None
        X[i] = vec if vec is not None else rng.uniform(-0.01, 0.01, size=d)
    return X


def build_view_graphs(corpus, entity_embeddings, word_embeddings=None,
                      config=None) -> MultiViewGraphs:
    """Build all three ViewGraphs and TextLinkMatrices from a corpus.

    Entities without an embedding are dropped from the entity node set
    (reported in `dropped_entities`); word features fall back to seeded
    random vectors where the word table has no entry.
    """
    cfg = config or GraphConfig()

    word_counts = count_windows(corpus, "word", cfg.window_size)
    tag_counts = count_windows(corpus, "tag", cfg.window_size)

    A_w = pmi_adjacency(word_counts)
    A_p = pmi_adjacency(tag_counts)

    X_w = _word_features(corpus.word_vocab, word_embeddings, cfg.word_dim, cfg.seed)
    X_p = np.eye(len(corpus.tag_vocab))     # tag features are exactly one-hot

    dropped = [e for e in corpus.entity_vocab
               if entity_embeddings is None or e not in entity_embeddings]
    kept = [e for e in corpus.entity_vocab if e not in set(dropped)]
    entity_vocab = Vocab(kept)
    if len(entity_vocab) > 0:
        A_e = entity_adjacency(entity_embeddings, entity_vocab)
        X_e = np.stack([entity_embeddings.get(e) for e in entity_vocab])
    else:
        A_e = SparseMatrix.from_entries(0, 0, [])
        dim_e = entity_embeddings.dim if entity_embeddings is not None else 1
        X_e = np.zeros((0, max(dim_e, 1)))

    graphs = {
        "word": ViewGraph("word", list(corpus.word_vocab), X_w, A_w,
                          normalize_adjacency(A_w)),
        "tag": ViewGraph("tag", list(corpus.tag_vocab), X_p, A_p,
                         normalize_adjacency(A_p)),
        "entity": ViewGraph("entity", list(entity_vocab), X_e, A_e,
                            normalize_adjacency(A_e)),
    }
    links = {
        "word": tfidf_links(corpus, "word", variant=cfg.tfidf_variant),
        "tag": tfidf_links(corpus, "tag", variant=cfg.tfidf_variant),
        "entity": entity_links(corpus, entity_vocab),
    }
    coverage = word_embeddings.coverage if word_embeddings is not None else None
    return MultiViewGraphs(graphs=graphs, links=links,
                           dropped_entities=dropped, word_coverage=coverage)


# -- bundle serialization ---------------------------------------------------

BUNDLE_VERSION = 1


def _atomic_write(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_dense_text(path, X):
    lines = [f"{X.shape[0]} {X.shape[1]}"]
    for row in X:
        lines.append(" ".join(repr(float(v)) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_dense_text(path):
    with open(path, "r", encoding="utf-8") as fh:
        rows, cols = (int(x) for x in fh.readline().split())
        X = np.empty((rows, cols))
        for i in range(rows):
            X[i] = [float(x) for x in fh.readline().split()]
    return X


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config_echo):
    blob = json.dumps(config_echo, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def save_bundle(out_dir, corpus, mv: MultiViewGraphs, config_echo,
                input_digests=None):
    """Write the graph bundle: per-matrix coordinate/dense text files plus
    a manifest with dimensions, vocab files, per-file digests, and the
    config hash. Rewrites are byte-identical for identical inputs."""
    os.makedirs(out_dir, exist_ok=True)
    files = {}

    for view in VIEWS:
        g = mv.graphs[view]
        adj = f"adjacency_{view}.txt"
        feat = f"features_{view}.txt"
        link = f"links_{view}.txt"
        voc = f"vocab_{view}.txt"
        tmp = os.path.join(out_dir, adj + ".tmp")
        write_coord_text(tmp, g.adjacency)
        os.replace(tmp, os.path.join(out_dir, adj))
        write_dense_text(os.path.join(out_dir, feat), g.features)
        tmp = os.path.join(out_dir, link + ".tmp")
        write_coord_text(tmp, mv.links[view].matrix)
        os.replace(tmp, os.path.join(out_dir, link))
        _atomic_write(os.path.join(out_dir, voc),
                      "".join(f"{t}\n" for t in g.nodes))
        files[view] = {"adjacency": adj, "features": feat,
                       "links": link, "vocab": voc,
                       "nodes": g.node_count, "feature_dim": g.feature_dim}

    doc_lines = [
        json.dumps({"id": d.id, "label": corpus.label_names[d.label],
                    "split": d.split}, sort_keys=True)
        for d in corpus.documents
    ]
    _atomic_write(os.path.join(out_dir, "documents.jsonl"),
                  "\n".join(doc_lines) + "\n")

    data_files = ["documents.jsonl"] + [
        files[v][k] for v in VIEWS for k in ("adjacency", "features", "links", "vocab")
    ]
    digests = {name: file_sha256(os.path.join(out_dir, name))
               for name in sorted(data_files)}

    manifest = {
        "format": "simstc-bundle",
        "version": BUNDLE_VERSION,
        "num_docs": corpus.N,
        "num_classes": corpus.num_classes,
        "label_names": corpus.label_names,
        "views": files,
        "documents": "documents.jsonl",
        "config": config_echo,
        "config_hash": config_hash(config_echo),
        "input_digests": input_digests or {},
        "file_sha256": digests,
        "dropped_entities": mv.dropped_entities,
    }
    _atomic_write(os.path.join(out_dir, "manifest.json"),
                  json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


@dataclass
class Bundle:
    graphs: dict
    links: dict
    doc_ids: list
    labels: np.ndarray
    splits: list
    label_names: list
    manifest: dict

    @property
    def N(self):
        return len(self.doc_ids)

    @property
    def num_classes(self):
        return len(self.label_names)


def load_bundle(bundle_dir, verify=True) -> Bundle:
    """Read a bundle back; with verify=True, per-file sha256 digests from
    the manifest are rechecked and a stale bundle is rejected."""
    with open(os.path.join(bundle_dir, "manifest.json"), encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("format") != "simstc-bundle":
        raise ValueError(f"{bundle_dir}: not a graph bundle")
    if verify:
        for name, digest in manifest["file_sha256"].items():
            actual = file_sha256(os.path.join(bundle_dir, name))
            if actual != digest:
                raise ValueError(f"stale bundle: digest mismatch for {name}")

    graphs, links = {}, {}
    for view in VIEWS:
        meta = manifest["views"][view]
        adj = read_coord_text(os.path.join(bundle_dir, meta["adjacency"]))
        feats = read_dense_text(os.path.join(bundle_dir, meta["features"]))
        link = read_coord_text(os.path.join(bundle_dir, meta["links"]))
        with open(os.path.join(bundle_dir, meta["vocab"]), encoding="utf-8") as fh:
            nodes = [line.rstrip("\n") for line in fh]
        graphs[view] = ViewGraph(view, nodes, feats, adj, normalize_adjacency(adj))
        links[view] = TextLinkMatrix(view, link)

    doc_ids, labels, splits = [], [], []
    label_index = {name: i for i, name in enumerate(manifest["label_names"])}
    with open(os.path.join(bundle_dir, manifest["documents"]), encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            doc_ids.append(rec["id"])
            labels.append(label_index[rec["label"]])
            splits.append(rec["split"])

    return Bundle(
        graphs=graphs,
        links=links,
        doc_ids=doc_ids,
        labels=np.array(labels, dtype=np.int64),
        splits=splits,
        label_names=manifest["label_names"],
        manifest=manifest,
    )

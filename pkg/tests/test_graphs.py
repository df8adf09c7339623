"""Graph construction against brute-force oracles.

The oracles deliberately take the dumbest possible route: enumerate every
window as a set and test membership per vocabulary item, or recount
per-document term frequencies from scratch, then apply the defining
formula directly.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from simstc.corpus import EmbeddingTable, Vocab, load_corpus
from simstc.graphs import (GraphConfig, build_view_graphs, count_windows,
                           entity_adjacency, entity_links, load_bundle,
                           normalize_adjacency, pmi_adjacency, save_bundle,
                           tfidf_links)
from simstc.sparse import SparseMatrix

from conftest import (doc, micro_corpus_files, random_micro_corpus,
                      six_doc_corpus, write_jsonl)


# -- oracles -------------------------------------------------------------


def enumerate_windows(token_docs, window_size):
    """Every sliding window in the corpus, as a list of token sets."""
    windows = []
    for tokens in token_docs:
        L = len(tokens)
        if L == 0:
            continue
        if L <= window_size:
            windows.append(set(tokens))
        else:
            for s in range(L - window_size + 1):
                windows.append(set(tokens[s:s + window_size]))
    return windows


def pmi_oracle(token_docs, window_size):
    """Dense positive-PMI matrix over the sorted vocabulary.

    The joint/marginal probability ratio is kept as an exact rational so
    the clip-at-zero boundary (ratio exactly 1) is decided without float
    rounding."""
    vocab = sorted({t for d in token_docs for t in d})
    windows = enumerate_windows(token_docs, window_size)
    omega = len(windows)
    n = len(vocab)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            both = sum(1 for w in windows if vocab[i] in w and vocab[j] in w)
            if both == 0:
                continue
            p_both = Fraction(both, omega)
            p_i = Fraction(sum(1 for w in windows if vocab[i] in w), omega)
            p_j = Fraction(sum(1 for w in windows if vocab[j] in w), omega)
            ratio = p_both / (p_i * p_j)
            if ratio > 1:
                out[i, j] = out[j, i] = math.log(float(ratio))
    return vocab, out


def tfidf_oracle(token_docs):
    """Dense TF-IDF matrix (raw counts) over the sorted vocabulary."""
    vocab = sorted({t for d in token_docs for t in d})
    N = len(token_docs)
    out = np.zeros((N, len(vocab)))
    for j, tok in enumerate(vocab):
        df = sum(1 for d in token_docs if tok in d)
        for i, d in enumerate(token_docs):
            tf = sum(1 for t in d if t == tok)
            if tf:
                out[i, j] = tf * math.log(N / df)
    return vocab, out


# -- window counting -----------------------------------------------------


def _corpus_from_tokens(tmp_path, token_docs):
    return load_corpus(micro_corpus_files(tmp_path, token_docs), min_word_freq=1)


def test_single_short_doc_one_window(tmp_path):
    corpus = _corpus_from_tokens(tmp_path, [["a", "b"]])
    counts = count_windows(corpus, "word", 5)
    voc = corpus.word_vocab
    assert counts.total_windows == 1
    assert counts.node_windows[voc.index("a")] == 1
    assert counts.node_windows[voc.index("b")] == 1
    key = tuple(sorted((voc.index("a"), voc.index("b"))))
    assert counts.pair_windows[key] == 1


def test_three_doc_window_counts(tmp_path):
    corpus = _corpus_from_tokens(tmp_path, [["a", "b"], ["a", "b"], ["c"]])
    counts = count_windows(corpus, "word", 5)
    voc = corpus.word_vocab
    assert counts.total_windows == 3
    assert counts.node_windows[voc.index("a")] == 2
    assert counts.node_windows[voc.index("c")] == 1
    key = tuple(sorted((voc.index("a"), voc.index("b"))))
    assert counts.pair_windows[key] == 2


def test_window_presence_not_multiplicity(tmp_path):
    # [a, a, b] with window 2 gives windows {a,a} and {a,b}
    corpus = _corpus_from_tokens(tmp_path, [["a", "a", "b"]])
    counts = count_windows(corpus, "word", 2)
    voc = corpus.word_vocab
    assert counts.total_windows == 2
    assert counts.node_windows[voc.index("a")] == 2
    assert counts.node_windows[voc.index("b")] == 1


def test_window_size_validated(tmp_path):
    corpus = _corpus_from_tokens(tmp_path, [["a"]])
    with pytest.raises(ValueError):
        count_windows(corpus, "word", 0)


# -- PMI -------------------------------------------------------------------


def test_pmi_hand_value(tmp_path):
    corpus = _corpus_from_tokens(tmp_path, [["a", "b"], ["a", "b"], ["c"]])
    A = pmi_adjacency(count_windows(corpus, "word", 5))
    voc = corpus.word_vocab
    dense = A.to_dense()
    # ln((2/3) / ((2/3)(2/3))) = ln 1.5, frozen from the counting oracle
    assert dense[voc.index("a"), voc.index("b")] == pytest.approx(
        0.4054651081081644, abs=1e-12)
    assert dense[voc.index("a"), voc.index("c")] == 0.0
    assert np.array_equal(dense, dense.T)
    assert np.all(np.diag(dense) == 0.0)


def test_pmi_zero_clipped(tmp_path):
    # both tokens in every window: PMI = ln(1) = 0, entry absent
    corpus = _corpus_from_tokens(tmp_path, [["a", "b"], ["a", "b"]])
    A = pmi_adjacency(count_windows(corpus, "word", 5))
    assert A.nnz == 0


def test_pmi_matches_oracle_randomized(tmp_path):
    rng = np.random.default_rng(42)
    for trial in range(60):
        token_docs = random_micro_corpus(rng)
        sub = tmp_path / f"t{trial}"
        sub.mkdir()
        corpus = _corpus_from_tokens(sub, token_docs)
        window = int(rng.integers(1, 7))
        A = pmi_adjacency(count_windows(corpus, "word", window))
        vocab, expected = pmi_oracle(
            [list(d.tokens) for d in corpus.documents], window)
        assert vocab == corpus.word_vocab.tokens
        got = A.to_dense()
        assert (got != 0).sum() == (expected != 0).sum()
        assert np.array_equal(got != 0, expected != 0)
        assert np.max(np.abs(got - expected), initial=0.0) < 1e-12


# -- TF-IDF ------------------------------------------------------------------


def test_tfidf_ubiquitous_term_dropped(tmp_path):
    corpus = _corpus_from_tokens(tmp_path, [["a", "b"], ["a"]])
    T = tfidf_links(corpus, "word")
    voc = corpus.word_vocab
    dense = T.matrix.to_dense()
    assert np.all(dense[:, voc.index("a")] == 0.0)      # df == N
    assert dense[0, voc.index("b")] == pytest.approx(
        0.6931471805599453, abs=1e-12)                  # 1 * ln 2


def test_tfidf_repeated_term(tmp_path):
    corpus = _corpus_from_tokens(
        tmp_path, [["x", "x", "x", "pad"], ["pad"], ["pad"]])
    T = tfidf_links(corpus, "word")
    voc = corpus.word_vocab
    # 3 occurrences, df=1, N=3: 3 ln 3, from the counting oracle
    assert T.matrix.to_dense()[0, voc.index("x")] == pytest.approx(
        3.295836866004329, abs=1e-12)


def test_tfidf_matches_oracle_randomized(tmp_path):
    rng = np.random.default_rng(43)
    for trial in range(60):
        token_docs = random_micro_corpus(rng)
        sub = tmp_path / f"t{trial}"
        sub.mkdir()
        corpus = _corpus_from_tokens(sub, token_docs)
        T = tfidf_links(corpus, "word")
        vocab, expected = tfidf_oracle([list(d.tokens) for d in corpus.documents])
        got = T.matrix.to_dense()
        assert np.array_equal(got != 0, expected != 0)
        assert np.max(np.abs(got - expected), initial=0.0) < 1e-12


def test_tfidf_variants(tmp_path):
    corpus = _corpus_from_tokens(tmp_path, [["x", "x", "pad"], ["pad"]])
    voc = corpus.word_vocab
    j = voc.index("x")
    raw = tfidf_links(corpus, "word", variant="count").matrix.to_dense()[0, j]
    logv = tfidf_links(corpus, "word", variant="log").matrix.to_dense()[0, j]
    binv = tfidf_links(corpus, "word", variant="binary").matrix.to_dense()[0, j]
    assert raw == pytest.approx(2 * math.log(2))
    assert logv == pytest.approx((1 + math.log(2)) * math.log(2))
    assert binv == pytest.approx(math.log(2))


# -- entity view ---------------------------------------------------------------


def _table(vectors):
    dim = len(next(iter(vectors.values())))
    return EmbeddingTable(dim=dim, vectors={k: np.array(v, dtype=float)
                                            for k, v in vectors.items()},
                          coverage=1.0)


def test_entity_adjacency_values():
    table = _table({"e1": [1.0, 0.0], "e2": [1.0, 0.0], "e3": [0.0, 1.0],
                    "e4": [1.0, 1.0]})
    vocab = Vocab(["e1", "e2", "e3", "e4"])
    A = entity_adjacency(table, vocab).to_dense()
    assert A[0, 1] == pytest.approx(1.0, abs=1e-12)         # identical
    assert A[0, 2] == 0.0                                    # orthogonal: absent
    assert A[0, 3] == pytest.approx(0.7071067811865475, abs=1e-12)
    assert np.array_equal(A, A.T)
    assert np.all(np.diag(A) == 0.0)


def test_entity_adjacency_zero_norm_reported():
    table = _table({"bad": [0.0, 0.0], "ok": [1.0, 0.0]})
    with pytest.raises(ValueError, match="bad"):
        entity_adjacency(table, Vocab(["bad", "ok"]))


def test_entity_links_binary(tmp_path):
    path = tmp_path / "c.jsonl"
    write_jsonl(path, [
        doc(0, ["a"], ["A"], ["e1", "e1"], "x", "train"),
        doc(1, ["a"], ["A"], [], "x", "val"),
        doc(2, ["a"], ["A"], ["e2"], "x", "test"),
    ])
    corpus = load_corpus(path, min_word_freq=1)
    T = entity_links(corpus).matrix.to_dense()
    voc = corpus.entity_vocab
    assert T[0, voc.index("e1")] == 1.0                     # mentioned twice: still 1
    assert np.all(T[1] == 0.0)                               # entity-free row empty
    assert T[2, voc.index("e2")] == 1.0
    assert T.sum() == 2.0


# -- normalization ---------------------------------------------------------------


def normalize_oracle(A_dense):
    A_hat = A_dense + np.eye(A_dense.shape[0])
    d = A_hat.sum(axis=1)
    D = np.diag(1.0 / np.sqrt(d))
    return D @ A_hat @ D


def test_normalize_zero_adjacency_gives_identity():
    A = SparseMatrix.from_entries(3, 3, [])
    assert np.array_equal(normalize_adjacency(A).to_dense(), np.eye(3))


def test_normalize_two_node_example():
    A = SparseMatrix.from_dense(np.array([[0.0, 1.0], [1.0, 0.0]]))
    out = normalize_adjacency(A).to_dense()
    assert np.allclose(out, [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)


def test_normalize_matches_dense_oracle():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(1, 6))
        raw = rng.uniform(0, 2, size=(n, n)) * (rng.uniform(size=(n, n)) > 0.4)
        A_dense = np.triu(raw, 1)
        A_dense = A_dense + A_dense.T
        out = normalize_adjacency(SparseMatrix.from_dense(A_dense)).to_dense()
        assert np.max(np.abs(out - normalize_oracle(A_dense))) < 1e-12
        assert np.array_equal(out, out.T)
        assert np.all(np.diag(out) > 0.0)


def test_normalized_spectrum_bounded():
    rng = np.random.default_rng(6)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        raw = rng.uniform(0, 3, size=(n, n)) * (rng.uniform(size=(n, n)) > 0.3)
        A_dense = np.triu(raw, 1)
        A_dense = A_dense + A_dense.T
        out = normalize_adjacency(SparseMatrix.from_dense(A_dense)).to_dense()
        eigs = np.linalg.eigvalsh(out)
        assert np.max(np.abs(eigs)) <= 1.0 + 1e-9


# -- full build + bundle -------------------------------------------------------


def test_build_all_views(six_docs):
    corpus, entity_table = six_docs
    mv = build_view_graphs(corpus, entity_table, config=GraphConfig(seed=3))
    assert set(mv.graphs) == {"word", "tag", "entity"}
    word = mv.graphs["word"]
    assert word.features.shape == (len(corpus.word_vocab), 200)
    tag = mv.graphs["tag"]
    assert np.array_equal(tag.features, np.eye(len(corpus.tag_vocab)))
    for view, g in mv.graphs.items():
        assert g.adjacency.is_symmetric()
        assert np.all(g.adjacency.val > 0)
        assert mv.links[view].matrix.rows == corpus.N


def test_build_is_deterministic(six_docs):
    corpus, entity_table = six_docs
    cfg = GraphConfig(seed=9)
    a = build_view_graphs(corpus, entity_table, config=cfg)
    b = build_view_graphs(corpus, entity_table, config=cfg)
    for view in a.graphs:
        assert a.graphs[view].adjacency == b.graphs[view].adjacency
        assert np.array_equal(a.graphs[view].features, b.graphs[view].features)
        assert a.links[view].matrix == b.links[view].matrix


def test_entity_without_embedding_dropped(six_docs, tmp_path):
    corpus, _ = six_docs
    partial = _table({"e:anchor": [1.0, 0.0], "e:beacon": [0.0, 1.0]})
    mv = build_view_graphs(corpus, partial)
    assert mv.dropped_entities == ["e:cairn"]
    assert mv.graphs["entity"].nodes == ["e:anchor", "e:beacon"]
    assert mv.links["entity"].matrix.cols == 2


def test_bundle_roundtrip(six_docs, tmp_path):
    corpus, entity_table = six_docs
    mv = build_view_graphs(corpus, entity_table, config=GraphConfig(seed=1))
    out = tmp_path / "bundle"
    manifest = save_bundle(out, corpus, mv, {"seed": 1})
    bundle = load_bundle(out)
    assert bundle.N == corpus.N
    assert bundle.label_names == corpus.label_names
    for view in mv.graphs:
        assert bundle.graphs[view].adjacency == mv.graphs[view].adjacency
        assert np.array_equal(bundle.graphs[view].features,
                              mv.graphs[view].features)
        assert bundle.links[view].matrix == mv.links[view].matrix
        assert bundle.graphs[view].norm_adj == mv.graphs[view].norm_adj
    assert manifest["config_hash"] == bundle.manifest["config_hash"]


def test_bundle_detects_staleness(six_docs, tmp_path):
    corpus, entity_table = six_docs
    mv = build_view_graphs(corpus, entity_table)
    out = tmp_path / "bundle"
    save_bundle(out, corpus, mv, {"seed": 0})
    target = out / "adjacency_word.txt"
    target.write_text(target.read_text() + "\n")
    with pytest.raises(ValueError, match="stale"):
        load_bundle(out)

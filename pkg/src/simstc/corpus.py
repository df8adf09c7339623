"""Loading and indexing of annotated short-text corpora.

A corpus file is UTF-8 JSON-Lines, one document per line:

    {"id": "...", "tokens": [...], "tags": [...], "entities": [...],
     "label": "...", "split": "train"|"val"|"test"}

POS tags are aligned to tokens one-to-one. Loading lowercases tokens,
drops stop-listed and low-frequency words (tags dropped in lockstep),
and builds sorted, dense vocabularies, so the same file always loads to
the same corpus.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

SPLITS = ("train", "val", "test")


class CorpusError(Exception):
    """Raised for malformed or inconsistent corpus/embedding files."""


class Vocab:
    """Bidirectional token <-> dense index map."""

    __slots__ = ("tokens", "_index")

    def __init__(self, tokens):
        self.tokens = list(tokens)
        self._index = {t: i for i, t in enumerate(self.tokens)}
        if len(self._index) != len(self.tokens):
            raise CorpusError("duplicate token in vocabulary")

    def index(self, token):
        return self._index[token]

    def __contains__(self, token):
        return token in self._index

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __eq__(self, other):
        return isinstance(other, Vocab) and self.tokens == other.tokens


@dataclass(frozen=True)
class Document:
    id: str
    tokens: tuple
    tags: tuple
    entities: tuple
    label: int
    split: str


@dataclass
class AnnotatedCorpus:
    documents: list
    word_vocab: Vocab
    tag_vocab: Vocab
    entity_vocab: Vocab
    label_names: list
    num_classes: int = field(init=False)
    N: int = field(init=False)

    def __post_init__(self):
        self.num_classes = len(self.label_names)
        self.N = len(self.documents)

    def split_indices(self, split):
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}")
        return [i for i, d in enumerate(self.documents) if d.split == split]

    def labels(self):
        return np.array([d.label for d in self.documents], dtype=np.int64)


def _parse_line(line, lineno):
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as e:
        raise CorpusError(f"line {lineno}: invalid JSON ({e.msg})") from e
    if not isinstance(rec, dict):
        raise CorpusError(f"line {lineno}: document must be a JSON object")
    for key, typ in (
        ("id", str), ("tokens", list), ("tags", list),
        ("entities", list), ("label", str), ("split", str),
    ):
        if key not in rec:
            raise CorpusError(f"line {lineno}: missing key {key!r}")
        if not isinstance(rec[key], typ):
            raise CorpusError(f"line {lineno}: key {key!r} has wrong type")
    if len(rec["tags"]) != len(rec["tokens"]):
        raise CorpusError(
            f"line {lineno}: tags/tokens length mismatch "
            f"({len(rec['tags'])} vs {len(rec['tokens'])})"
        )
    if rec["split"] not in SPLITS:
        raise CorpusError(f"line {lineno}: unknown split {rec['split']!r}")
    for key in ("tokens", "tags", "entities"):
        if not all(isinstance(x, str) for x in rec[key]):
            raise CorpusError(f"line {lineno}: {key} must be strings")
    return rec


def load_stopwords(path):
    """Read a stop list: one word per line, blank lines ignored."""
    with open(path, "r", encoding="utf-8") as fh:
        return {line.strip().lower() for line in fh if line.strip()}


def load_corpus(path, min_word_freq=5, stopword_path=None):
    """Load, filter, and index a JSON-Lines corpus.

    Words occurring fewer than `min_word_freq` times corpus-wide, and
    stop-listed words, are removed from both the token lists and the word
    vocabulary; the tags aligned with removed words are removed with them.
    Documents left empty in all three views are rejected.
    """
    if min_word_freq < 1:
        raise ValueError("min_word_freq must be >= 1")
    stopwords = load_stopwords(stopword_path) if stopword_path else set()

    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            records.append(_parse_line(line, lineno))
    if not records:
        raise CorpusError(f"{path}: corpus file contains no documents")

    seen_ids = set()
    for rec in records:
        if rec["id"] in seen_ids:
            raise CorpusError(f"duplicate document id {rec['id']!r}")
        seen_ids.add(rec["id"])

    freq = Counter()
    for rec in records:
        freq.update(t.lower() for t in rec["tokens"])

    def keep(word):
        return freq[word] >= min_word_freq and word not in stopwords

    label_names = sorted({rec["label"] for rec in records})
    label_index = {name: i for i, name in enumerate(label_names)}

    documents = []
    empty_ids = []
    words, tags, entities = set(), set(), set()
    for rec in records:
        toks = [t.lower() for t in rec["tokens"]]
        kept = [(t, g) for t, g in zip(toks, rec["tags"]) if keep(t)]
        doc_tokens = tuple(t for t, _ in kept)
        doc_tags = tuple(g for _, g in kept)
        doc_entities = tuple(rec["entities"])
        if not doc_tokens and not doc_entities:
            empty_ids.append(rec["id"])
        words.update(doc_tokens)
        tags.update(doc_tags)
        entities.update(doc_entities)
        documents.append(Document(
            id=rec["id"],
            tokens=doc_tokens,
            tags=doc_tags,
            entities=doc_entities,
            label=label_index[rec["label"]],
            split=rec["split"],
        ))
    if empty_ids:
        raise CorpusError(
            "documents empty in all views after filtering: "
            + ", ".join(empty_ids)
        )

    return AnnotatedCorpus(
        documents=documents,
        word_vocab=Vocab(sorted(words)),
        tag_vocab=Vocab(sorted(tags)),
        entity_vocab=Vocab(sorted(entities)),
        label_names=label_names,
    )


@dataclass
class EmbeddingTable:
    """Token -> vector map loaded from a plain-text embedding file."""

    dim: int
    vectors: dict
    coverage: float

    def __contains__(self, token):
        return token in self.vectors

    def get(self, token):
        return self.vectors.get(token)


def load_embeddings(path, vocab) -> EmbeddingTable:
    """Read "token v1 ... vd" lines, keeping only tokens in `vocab`.

    Coverage is the fraction of vocabulary tokens found in the file; an
    empty vocabulary counts as fully covered. Missing tokens are simply
    absent from the table (the caller chooses the fallback).
    """
    wanted = set(vocab)
    vectors = {}
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2 or parts[0] == "":
                if not line.strip():
                    continue
                raise CorpusError(f"{path}: line {lineno}: malformed embedding line")
            token = parts[0]
            try:
                vec = np.array([float(x) for x in parts[1:] if x != ""])
            except ValueError as e:
                raise CorpusError(f"{path}: line {lineno}: bad float") from e
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise CorpusError(
                    f"{path}: line {lineno}: inconsistent dimension "
                    f"{vec.size} (expected {dim})"
                )
            if not np.all(np.isfinite(vec)):
                raise CorpusError(f"{path}: line {lineno}: non-finite value")
            if token in wanted:
                vectors[token] = vec
    if len(vocab) == 0:
        return EmbeddingTable(dim=dim or 0, vectors={}, coverage=1.0)
    coverage = len(vectors) / len(vocab)
    if coverage == 0.0:
        raise CorpusError(f"{path}: no vocabulary token has an embedding")
    return EmbeddingTable(dim=int(dim), vectors=vectors, coverage=coverage)

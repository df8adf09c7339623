"""Shared corpus builders for the test suite.

The toy datasets are constructed, not sampled from real data: class
membership is carried redundantly by class-exclusive keywords, tag
distributions, and class-exclusive entities, so convergence expectations
in the acceptance suite are guaranteed by construction.
"""

import json

import numpy as np
import pytest

from simstc.corpus import load_corpus, load_embeddings


def write_jsonl(path, docs):
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc) + "\n")


def write_embeddings(path, vectors):
    with open(path, "w", encoding="utf-8") as fh:
        for token, vec in vectors.items():
            fh.write(token + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def doc(i, tokens, tags, entities, label, split):
    return {"id": f"d{i}", "tokens": tokens, "tags": tags,
            "entities": entities, "label": label, "split": split}


# -- fixed 6-document, 3-class corpus (gradient oracle and small e2e) --------

CLASS_WORDS = {
    "c0": ["apple", "amber"],
    "c1": ["basil", "birch"],
    "c2": ["cedar", "clove"],
}
WORD_TAG = {
    "apple": "NN", "amber": "JJ", "basil": "NN", "birch": "VB",
    "cedar": "JJ", "clove": "VB", "stone": "DT", "river": "DT",
}


def six_doc_corpus(dirpath):
    """Three classes, two docs each; all three views populated; one doc
    entity-free to exercise the zero-row path; every split nonempty."""
    docs = []
    ents = {"c0": "e:anchor", "c1": "e:beacon", "c2": "e:cairn"}
    holdout = ("val", "test", "val")
    for i, (label, words) in enumerate(sorted(CLASS_WORDS.items())):
        for j in range(2):
            tokens = [words[j % 2], words[(j + 1) % 2], "stone" if j else "river"]
            tags = [WORD_TAG[t] for t in tokens]
            entities = [] if (i == 0 and j == 1) else [ents[label]]
            split = "train" if j == 0 else holdout[i]
            docs.append(doc(2 * i + j, tokens, tags, entities, label, split))
    corpus_path = dirpath / "six.jsonl"
    write_jsonl(corpus_path, docs)

    emb_path = dirpath / "six_entities.txt"
    write_embeddings(emb_path, {
        "e:anchor": [1.0, 0.2, 0.0],
        "e:beacon": [0.1, 1.0, 0.3],
        "e:cairn": [0.0, 0.25, 1.0],
    })
    return corpus_path, emb_path


@pytest.fixture
def six_docs(tmp_path):
    corpus_path, emb_path = six_doc_corpus(tmp_path)
    corpus = load_corpus(corpus_path, min_word_freq=1)
    entity_table = load_embeddings(emb_path, corpus.entity_vocab)
    return corpus, entity_table


# -- generated 200-document binary corpus (learning acceptance) ---------------

TOY_KEYWORDS = {
    0: ["alpha", "bravo", "copper", "delta", "ember"],
    1: ["zinc", "yarrow", "willow", "vortex", "umber"],
}
TOY_FILLER = ["stone", "river", "cloud", "field"]
TOY_TAGS = {0: ["NN", "VB"], 1: ["JJ", "RB"]}
FILLER_TAG = "DT"
TOY_ENTITIES = {
    0: ["e:forge0", "e:forge1", "e:forge2"],
    1: ["e:grove0", "e:grove1", "e:grove2"],
}


def make_toy_dataset(dirpath, n_docs=200, labeled_per_class=20, seed=7):
    """Class-exclusive keyword/tag/entity toy; labeled docs split half
    train half val, everything else test."""
    rng = np.random.default_rng(seed)
    half = n_docs // 2
    labels = [0] * half + [1] * (n_docs - half)
    docs = []
    for i, label in enumerate(labels):
        n_kw = rng.integers(2, 5)
        n_fill = rng.integers(1, 4)
        kws = list(rng.choice(TOY_KEYWORDS[label], size=n_kw, replace=True))
        fills = list(rng.choice(TOY_FILLER, size=n_fill, replace=True))
        tokens = kws + fills
        tags = [str(rng.choice(TOY_TAGS[label])) for _ in kws] + \
               [FILLER_TAG] * len(fills)
        n_ent = int(rng.integers(0, 3))
        entities = list(rng.choice(TOY_ENTITIES[label], size=n_ent, replace=False)) \
            if n_ent else []
        docs.append(doc(i, [str(t) for t in tokens], tags,
                        [str(e) for e in entities], f"class{label}", "test"))

    # promote the first labeled_per_class docs of each class to train/val
    for label in (0, 1):
        members = [d for d in docs if d["label"] == f"class{label}"]
        chosen = members[:labeled_per_class]
        for k, d_ in enumerate(chosen):
            d_["split"] = "train" if k < labeled_per_class // 2 else "val"

    corpus_path = dirpath / "toy.jsonl"
    write_jsonl(corpus_path, docs)

    emb = {}
    for label, ents in TOY_ENTITIES.items():
        base = np.zeros(8)
        base[label * 4:(label + 1) * 4] = 1.0
        for j, ent in enumerate(ents):
            emb[ent] = base + 0.05 * rng.normal(size=8)
    emb_path = dirpath / "toy_entities.txt"
    write_embeddings(emb_path, emb)
    return corpus_path, emb_path


@pytest.fixture(scope="session")
def toy_dataset(tmp_path_factory):
    dirpath = tmp_path_factory.mktemp("toy")
    return make_toy_dataset(dirpath)


# -- random micro-corpora for graph oracles ----------------------------------

MICRO_VOCAB = ["a", "b", "c", "d", "e", "f", "g", "h"]


def random_micro_corpus(rng, max_docs=6, max_len=8):
    """A random tiny corpus as plain token lists (words only)."""
    n_docs = int(rng.integers(1, max_docs + 1))
    docs = []
    for _ in range(n_docs):
        length = int(rng.integers(1, max_len + 1))
        docs.append([MICRO_VOCAB[k] for k in rng.integers(0, len(MICRO_VOCAB),
                                                          size=length)])
    return docs


def micro_corpus_files(dirpath, token_docs, name="micro"):
    """Wrap token lists into a full corpus file (tags mirror tokens)."""
    docs = []
    for i, tokens in enumerate(token_docs):
        tags = [t.upper() for t in tokens]
        split = ("train", "val", "test")[i % 3]
        docs.append(doc(i, tokens, tags, [], "only", split))
    path = dirpath / f"{name}.jsonl"
    write_jsonl(path, docs)
    return path

"""Seeded synthetic news-like documents for desk-scale experiments and tests.

Each document has a topic. A handful of "salient" sentences pack several of
the topic's central keywords, so they are strongly connected through shared
word nodes; the remaining sentences mostly draw on a large background pool
plus a weaker distractor topic. Salient sentences lean towards the start of
the document, as in news. The reference summary reuses the central keywords.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from .bipartite import BipartiteGraph, graph_from_edges
from .corpus import Corpus, parse_record

_ONSETS = "b c d f g h j k l m n p r s t v w z br ch cl dr fl gr kr pl pr sh st tr".split()
_VOWELS = "a e i o u ai ea io ou".split()
_FUNCTION = "the of and in to a was with for on at by from".split()


def lexicon(size: int, rng: np.random.Generator) -> list[str]:
    words: dict[str, None] = {}
    while len(words) < size:
        n_syl = int(rng.integers(2, 4))
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))] for _ in range(n_syl))
        w += "nrstlmk"[rng.integers(7)]
        words.setdefault(w, None)
    return list(words)


def _sentence(words: list[str], rng: np.random.Generator) -> str:
    words = list(words)
    n_func = max(1, len(words) // 3)
    for _ in range(n_func):
        words.insert(int(rng.integers(len(words) + 1)), _FUNCTION[rng.integers(len(_FUNCTION))])
    order = rng.permutation(len(words))
    text = " ".join(words[i] for i in order)
    return text[0].upper() + text[1:] + "."


def make_records(n_docs: int, seed: int = 0, n_topics: int = 40, keywords_per_topic: int = 12,
                 background_size: int = 1500, min_sentences: int = 10, max_sentences: int = 20,
                 pool_factor: int = 20) -> list[dict]:
    """JSON-ready records ``{"id", "text", "summary"}``."""
    rng = np.random.default_rng(seed)
    lex = lexicon(n_topics * keywords_per_topic + background_size, rng)
    topics = [lex[i * keywords_per_topic : (i + 1) * keywords_per_topic] for i in range(n_topics)]
    background = lex[n_topics * keywords_per_topic :]
    records = []
    for d in range(n_docs):
        t, u = rng.choice(n_topics, size=2, replace=False)
        central = list(rng.choice(topics[t], size=6, replace=False))
        distractor = list(rng.choice(topics[u], size=6, replace=False))
        m = int(rng.integers(min_sentences, max_sentences + 1))
        n_salient = int(rng.integers(3, 6))
        lead = 1.0 / (1.0 + 0.25 * np.arange(m))
        salient = set(rng.choice(m, size=n_salient, replace=False, p=lead / lead.sum()).tolist())
        # document-level pool with Zipfian reuse, so some content words recur across sentences
        pool = list(rng.choice(background, size=pool_factor * m, replace=False))
        zipf = 1.0 / np.arange(1, len(pool) + 1) ** 0.6
        zipf /= zipf.sum()
        sentences = []
        for i in range(m):
            bg = list(rng.choice(pool, size=int(rng.integers(4, 9)), replace=False, p=zipf))
            if i in salient:
                words = list(rng.choice(central, size=int(rng.integers(3, 6)), replace=False)) + bg
            else:
                words = bg + list(rng.choice(distractor, size=int(rng.integers(0, 3)), replace=False))
                if rng.random() < 0.3:
                    words.append(central[rng.integers(len(central))])
            sentences.append(_sentence(words, rng))
        summary = []
        for _ in range(int(rng.integers(2, 4))):
            kw = list(rng.choice(central, size=int(rng.integers(4, 7)), replace=False))
            summary.append(_sentence(kw + list(rng.choice(background, size=2, replace=False)), rng))
        records.append({"id": f"syn-{seed}-{d:04d}", "text": " ".join(sentences), "summary": " ".join(summary)})
    return records


def make_corpus(n_docs: int, seed: int = 0, **kwargs) -> Corpus:
    return Corpus([parse_record(r) for r in make_records(n_docs, seed, **kwargs)])


def write_jsonl(records: list[dict], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    return path


def random_bipartite_graph(rng: np.random.Generator, n_words: int, n_sentences: int, p: float = 0.3,
                           connected: bool = True, doc_id: str = "") -> BipartiteGraph:
    """Random word-sentence graph; with ``connected`` every node gets an edge and one component is forced."""
    a = rng.random((n_words, n_sentences)) < p
    if connected:
        # spanning chain w0-s0-w1-s1-... through every node
        for w in range(n_words):
            a[w, min(w, n_sentences - 1)] = True
        for s in range(n_sentences):
            a[min(s + 1, n_words - 1) if s + 1 < n_words else n_words - 1, s] = True
    edges = [(int(w), int(s)) for w, s in zip(*np.nonzero(a))]
    return graph_from_edges(list(range(n_words)), list(range(n_sentences)), edges, doc_id=doc_id)


def graph_from_matrix(a: np.ndarray, word_ids: Optional[list] = None) -> BipartiteGraph:
    edges = [(int(w), int(s)) for w, s in zip(*np.nonzero(a))]
    word_ids = list(range(a.shape[0])) if word_ids is None else word_ids
    return graph_from_edges(word_ids, list(range(a.shape[1])), edges)

"""Sentence-word bipartite graphs with betweenness edge weights.

Node numbering used throughout: word nodes ``0..n-1`` (ordered by vocab id)
followed by sentence nodes ``n..n+m-1`` (ordered by sentence index).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .corpus import Document, Vocab
from .kernels import edge_betweenness_csr

WEIGHT_FLOOR = 1e-3


class DegenerateGraphError(ValueError):
    pass


@dataclass(frozen=True)
class BipartiteGraph:
    """Word/sentence nodes and weighted word-sentence edges.

    ``edge_word[k]`` and ``edge_sent[k]`` are *positions* into ``word_ids``
    and ``sentence_ids``; ``weight[k]`` is the normalized betweenness.
    """

    word_ids: np.ndarray
    words: tuple[str, ...]
    sentence_ids: np.ndarray
    edge_word: np.ndarray
    edge_sent: np.ndarray
    weight: np.ndarray
    raw_weight: np.ndarray
    doc_id: str = ""
    sentence_tokens: tuple = ()
    _dense: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def n_words(self) -> int:
        return len(self.word_ids)

    @property
    def n_sentences(self) -> int:
        return len(self.sentence_ids)

    @property
    def n_nodes(self) -> int:
        return self.n_words + self.n_sentences

    @property
    def n_edges(self) -> int:
        return len(self.weight)

    def adjacency(self) -> np.ndarray:
        """Dense ``n x m`` word-sentence weight matrix (0 for non-edges)."""
        if self._dense is None:
            a = np.zeros((self.n_words, self.n_sentences))
            a[self.edge_word, self.edge_sent] = self.weight
            object.__setattr__(self, "_dense", a)
        return self._dense

    def degrees(self) -> np.ndarray:
        """Weighted degree with a unit self-loop, words first then sentences."""
        a = self.adjacency()
        return np.concatenate([1.0 + a.sum(axis=1), 1.0 + a.sum(axis=0)])

    def dump(self) -> str:
        return "".join(
            f"w:{self.words[w]}\ts:{int(self.sentence_ids[s])}\t{x:.6f}\n"
            for w, s, x in zip(self.edge_word, self.edge_sent, self.weight)
        )


def _csr(n_nodes: int, us: np.ndarray, vs: np.ndarray):
    """Undirected CSR arrays with per-entry edge ids; neighbors sorted by id."""
    src = np.concatenate([us, vs])
    dst = np.concatenate([vs, us])
    eid = np.concatenate([np.arange(len(us)), np.arange(len(us))])
    order = np.lexsort((dst, src))
    src, dst, eid = src[order], dst[order], eid[order]
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    return np.cumsum(indptr), dst.astype(np.int64), eid.astype(np.int64)


def edge_betweenness_scores(n_nodes: int, edges: Sequence[tuple[int, int]]) -> np.ndarray:
    """Normalized edge betweenness of an unweighted undirected graph.

    Sum over unordered node pairs of the fraction of their shortest paths
    crossing the edge, scaled by ``2 / (N (N - 1))``.
    """
    if not len(edges):
        return np.zeros(0)
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    indptr, indices, eid = _csr(n_nodes, e[:, 0], e[:, 1])
    ordered = edge_betweenness_csr(indptr, indices, eid, len(e))
    # ordered-pair sum counts each unordered pair twice
    return ordered / (n_nodes * (n_nodes - 1)) if n_nodes > 1 else ordered


def edge_betweenness(graph: BipartiteGraph) -> np.ndarray:
    """Raw (normalized-by-pairs) betweenness aligned with the graph's edges."""
    return edge_betweenness_scores(
        graph.n_nodes, list(zip(graph.edge_word.tolist(), (graph.edge_sent + graph.n_words).tolist()))
    )


def normalize_weights(raw: np.ndarray, floor: float = WEIGHT_FLOOR) -> np.ndarray:
    """Min-max map into ``[floor, 1]``; constant input maps to all ones."""
    raw = np.asarray(raw, dtype=np.float64)
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        return np.ones_like(raw)
    return floor + (1.0 - floor) * (raw - lo) / (hi - lo)


def graph_from_edges(
    word_ids: Sequence[int],
    sentence_ids: Sequence[int],
    edges: Sequence[tuple[int, int]],
    words: Optional[Sequence[str]] = None,
    doc_id: str = "",
    floor: float = WEIGHT_FLOOR,
    sentence_tokens: Optional[Sequence[Sequence[int]]] = None,
) -> BipartiteGraph:
    """Build a graph from ``(word_pos, sentence_pos)`` edges and weight it.

    ``sentence_tokens`` holds each sentence's in-vocab token ids in reading
    order (feeds the sentence initializer); by default the sorted ids of the
    sentence's neighbours are used.
    """
    if not len(edges):
        raise DegenerateGraphError(f"degenerate graph: document {doc_id!r} has no word-sentence edges")
    e = np.asarray(sorted(set(map(tuple, edges)), key=lambda x: (x[1], x[0])), dtype=np.int64)
    n = len(word_ids)
    raw = edge_betweenness_scores(n + len(sentence_ids), list(zip(e[:, 0].tolist(), (e[:, 1] + n).tolist())))
    if sentence_tokens is None:
        nbrs: list = [[] for _ in sentence_ids]
        for w, s in e.tolist():
            nbrs[s].append(int(word_ids[w]))
        sentence_tokens = [sorted(x) for x in nbrs]
    return BipartiteGraph(
        word_ids=np.asarray(word_ids, dtype=np.int64),
        words=tuple(words) if words is not None else tuple(str(w) for w in word_ids),
        sentence_ids=np.asarray(sentence_ids, dtype=np.int64),
        edge_word=e[:, 0],
        edge_sent=e[:, 1],
        weight=normalize_weights(raw, floor),
        raw_weight=raw,
        doc_id=doc_id,
        sentence_tokens=tuple(np.asarray(t, dtype=np.int64) for t in sentence_tokens),
    )


def build_graph(document: Document, vocab: Vocab, floor: float = WEIGHT_FLOOR) -> BipartiteGraph:
    """One word node per distinct in-vocab graph token; edge iff the word occurs in the sentence.

    Sentences with no in-vocab token have no edges and are left out of
    ``sentence_ids``.
    """
    per_sentence = []
    sequences = []
    for s in document.sentences:
        seq = vocab.ids(s.graph_tokens)
        if seq:
            per_sentence.append((s.index, sorted(set(seq))))
            sequences.append(seq)
    word_ids = sorted({w for _, ids in per_sentence for w in ids})
    pos = {w: i for i, w in enumerate(word_ids)}
    edges = [(pos[w], j) for j, (_, ids) in enumerate(per_sentence) for w in ids]
    return graph_from_edges(
        word_ids,
        [idx for idx, _ in per_sentence],
        edges,
        words=[vocab.id_to_token[w] for w in word_ids],
        doc_id=document.id,
        floor=floor,
        sentence_tokens=sequences,
    )


def remove_edges(graph: BipartiteGraph, drop: np.ndarray) -> BipartiteGraph:
    """Copy of ``graph`` without the edges flagged in ``drop``, reweighted.

    Node sets are unchanged, so nodes may end up isolated.
    """
    keep = ~np.asarray(drop, dtype=bool)
    edges = list(zip(graph.edge_word[keep].tolist(), graph.edge_sent[keep].tolist()))
    return graph_from_edges(
        graph.word_ids, graph.sentence_ids, edges, graph.words, graph.doc_id, sentence_tokens=graph.sentence_tokens
    )

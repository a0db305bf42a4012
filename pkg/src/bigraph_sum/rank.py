"""Unsupervised sentence ranking over embedding similarity graphs.

Pipeline: embeddings -> raw similarity -> thresholded similarity -> centrality
-> top-k selection. Centralities are PacSum-style directed sums (``pacsum``),
the same with a radius cutoff (``far``), a distance-bucketed variant
(``dasg``), and PageRank (``textrank`` on dot products, ``lexrank`` on
cosine similarities).
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from .corpus import Corpus, Document, TfIdfStats, Vocab, build_vocab, compute_tfidf
from .features import tfidf_sentence_embedding

logger = logging.getLogger(__name__)

METHODS = ("textrank", "lexrank", "pacsum", "far", "dasg")
BACKENDS = ("bigae", "tfidf")


class PageRankError(RuntimeError):
    """Power iteration did not converge; ``scores`` holds the last iterate."""

    def __init__(self, message: str, scores: np.ndarray):
        super().__init__(message)
        self.scores = scores


def similarity_matrix(embeddings, kind: str = "dot") -> np.ndarray:
    v = embeddings.toarray() if hasattr(embeddings, "toarray") else np.asarray(embeddings, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] < 1:
        raise ValueError("embeddings must be a non-empty 2-D matrix")
    if kind == "dot":
        return v @ v.T
    if kind == "cosine":
        norms = np.linalg.norm(v, axis=1)
        safe = np.where(norms > 0, norms, 1.0)
        u = v / safe[:, None]
        return np.clip(u @ u.T, -1.0, 1.0)
    raise ValueError(f"unknown similarity kind {kind!r}")


def _offdiag(e: np.ndarray) -> np.ndarray:
    return e[~np.eye(e.shape[0], dtype=bool)]


def normalize_similarity(raw: np.ndarray, beta: float) -> np.ndarray:
    """Shift by a threshold between the off-diagonal min and max, clip at 0, zero the diagonal."""
    m = raw.shape[0]
    if m < 2:
        return np.zeros((m, m))
    off = _offdiag(raw)
    lo, hi = off.min(), off.max()
    tau = lo + beta * (hi - lo)
    out = np.maximum(raw - tau, 0.0)
    np.fill_diagonal(out, 0.0)
    return out


def pacsum_centrality(e: np.ndarray, lambda1: float, lambda2: float) -> np.ndarray:
    before = np.tril(e, -1).sum(axis=1)
    after = np.triu(e, 1).sum(axis=1)
    return lambda1 * before + lambda2 * after


def far_centrality(e: np.ndarray, lambda1: float, lambda2: float, beta: float) -> np.ndarray:
    if e.shape[0] < 2:
        return np.zeros(e.shape[0])
    off = _offdiag(e)
    eps = beta * (off.max() - off.min())
    clipped = np.maximum(e - eps, 0.0)
    return pacsum_centrality(clipped, lambda1, lambda2)


def dasg_bucket(distance, width: int):
    """Bucket 1..3 for a positive sentence distance."""
    return np.minimum((np.asarray(distance) - 1) // width + 1, 3)


def dasg_centrality(e: np.ndarray, lambda_pos, lambda_neg, width: Optional[int] = None) -> np.ndarray:
    """``lambda_pos`` weights earlier sentences (j < i), ``lambda_neg`` later ones."""
    m = e.shape[0]
    if len(lambda_pos) != 3 or len(lambda_neg) != 3:
        raise ValueError("dasg needs exactly three weights per direction")
    width = default_bucket_width(m) if width is None else int(width)
    if width < 1:
        raise ValueError("bucket width must be >= 1")
    idx = np.arange(m)
    dist = idx[:, None] - idx[None, :]  # i - j
    w = np.zeros((m, m))
    earlier, later = dist > 0, dist < 0
    w[earlier] = np.asarray(lambda_pos, dtype=float)[dasg_bucket(dist[earlier], width) - 1]
    w[later] = np.asarray(lambda_neg, dtype=float)[dasg_bucket(-dist[later], width) - 1]
    return (w * e).sum(axis=1)


def default_bucket_width(m: int) -> int:
    return max(1, math.ceil(m / 3))


def pagerank_centrality(e: np.ndarray, damping: float = 0.85, tol: float = 1e-6, max_iter: int = 200) -> np.ndarray:
    if np.any(e < 0):
        raise ValueError("pagerank needs a non-negative similarity matrix")
    m = e.shape[0]
    rows = e.sum(axis=1)
    p_mat = np.where(rows[:, None] > 0, e / np.where(rows > 0, rows, 1.0)[:, None], 1.0 / m)
    p = np.full(m, 1.0 / m)
    for _ in range(max_iter):
        nxt = (1.0 - damping) / m + damping * (p_mat.T @ p)
        if np.abs(nxt - p).sum() < tol:
            return nxt
        p = nxt
    raise PageRankError(f"pagerank did not converge in {max_iter} iterations", p)


@dataclass(frozen=True)
class Summary:
    doc_id: str
    indices: tuple[int, ...]
    text: str
    scores: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {"id": self.doc_id, "indices": list(self.indices), "summary": self.text, "scores": list(self.scores)}

    @classmethod
    def from_dict(cls, d: dict) -> "Summary":
        return cls(d["id"], tuple(d["indices"]), d["summary"], tuple(d.get("scores", ())))


def render(document: Document, indices) -> str:
    return " ".join(document.sentences[i].raw for i in sorted(indices))


def select_sentences(scores, k: int, document: Optional[Document] = None) -> Summary:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or len(scores) < 1:
        raise ValueError("need at least one score")
    # stable sort on -score keeps the smaller index first on ties
    order = np.argsort(-scores, kind="stable")
    chosen = tuple(sorted(int(i) for i in order[: max(0, k)]))
    if document is None:
        return Summary("", chosen, "", tuple(scores.tolist()))
    return Summary(document.id, chosen, render(document, chosen), tuple(scores.tolist()))


@dataclass(frozen=True)
class RankConfig:
    method: str = "pacsum"
    lambda1: float = -1.0
    lambda2: float = 1.0
    beta_sim: float = 0.6
    beta_far: float = 0.1
    lambda_pos: tuple = (-1.5, -0.5, -1.0)
    lambda_neg: tuple = (1.0, 1.5, 2.0)
    bucket_width: Optional[int] = None
    damping: float = 0.85
    tol: float = 1e-6
    max_iter: int = 200
    k: int = 3
    similarity: Optional[str] = None  # None: per-method default

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0.0 < self.damping < 1.0:
            raise ValueError("damping must be in (0, 1)")
        if len(self.lambda_pos) != 3 or len(self.lambda_neg) != 3:
            raise ValueError("dasg needs exactly three weights per direction")
        if self.method in ("pacsum", "far") and not math.isclose(self.lambda1 + self.lambda2, 1.0):
            warnings.warn(f"lambda1 + lambda2 = {self.lambda1 + self.lambda2:g}, not 1", stacklevel=3)

    @property
    def kind(self) -> str:
        if self.similarity is not None:
            return self.similarity
        return "cosine" if self.method == "lexrank" else "dot"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda_pos"], d["lambda_neg"] = list(self.lambda_pos), list(self.lambda_neg)
        return d


_PRESETS = {
    "cnndm": {
        "k": 3,
        "pacsum": dict(lambda1=-1.0, lambda2=1.0),
        "far": dict(lambda1=-0.5, lambda2=0.9),
        "dasg": dict(beta_sim=0.05, lambda_pos=(-1.5, -0.5, -1.0), lambda_neg=(1.0, 1.5, 2.0)),
    },
    "multinews": {
        "k": 9,
        "pacsum": dict(lambda1=0.3, lambda2=-0.7),
        "far": dict(lambda1=-0.5, lambda2=2.0),
        "dasg": dict(beta_sim=0.8, lambda_pos=(-1.5, -0.5, -1.0), lambda_neg=(1.0, 1.5, 2.0)),
    },
}
PRESETS = tuple(_PRESETS)


def preset(name: str, method: Optional[str] = None) -> RankConfig:
    """``preset("cnndm", "far")`` or the combined form ``preset("far-cnndm")``."""
    if method is None and "-" in name:
        method, name = name.split("-", 1)
    if name not in _PRESETS:
        raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
    method = method or "pacsum"
    p = _PRESETS[name]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return RankConfig(method=method, k=p["k"], **p.get(method, {}))


def centrality(e: np.ndarray, config: RankConfig) -> np.ndarray:
    if config.method == "pacsum":
        return pacsum_centrality(e, config.lambda1, config.lambda2)
    if config.method == "far":
        return far_centrality(e, config.lambda1, config.lambda2, config.beta_far)
    if config.method == "dasg":
        return dasg_centrality(e, config.lambda_pos, config.lambda_neg, config.bucket_width)
    return pagerank_centrality(e, config.damping, config.tol, config.max_iter)


def rank_embeddings(embeddings, config: RankConfig) -> np.ndarray:
    raw = similarity_matrix(embeddings, config.kind)
    return centrality(normalize_similarity(raw, config.beta_sim), config)


@dataclass
class TfIdfBackend:
    stats: TfIdfStats
    vocab: Vocab

    @classmethod
    def fit(cls, corpus: Corpus) -> "TfIdfBackend":
        return cls(compute_tfidf(corpus), build_vocab(corpus, prune_frac=0.0))

    def embed(self, document: Document):
        return tfidf_sentence_embedding(document, self.stats, self.vocab)


def summarize(document: Document, backend: str, config: RankConfig, model=None,
              tfidf: Optional[TfIdfBackend] = None) -> Summary:
    """Rank ``document`` with Bi-GAE (``model``) or TF-IDF sentence vectors.

    A Bi-GAE document with no usable graph falls back to TF-IDF; when no
    ``tfidf`` backend is given, one is fitted on the document itself.
    """
    from .bipartite import DegenerateGraphError

    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {', '.join(BACKENDS)}")
    m = len(document.sentences)
    if m == 0:
        raise ValueError(f"{document.id}: document has no sentences")
    if m == 1:
        return select_sentences([0.0], config.k, document)
    emb = None
    if backend == "bigae":
        if model is None:
            raise ValueError("bigae backend needs a model")
        try:
            emb = model.embed(document)
        except DegenerateGraphError as exc:
            logger.warning("doc=%s falling back to tfidf: %s", document.id, exc)
    if emb is None:
        if tfidf is None:
            tfidf = TfIdfBackend.fit(Corpus([document]))
        emb = tfidf.embed(document)
    return select_sentences(rank_embeddings(emb, config), config.k, document)


def with_k(config: RankConfig, k: int) -> RankConfig:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return replace(config, k=k)

"""Node feature initialization.

Word nodes take frozen pretrained vectors. Sentence nodes take
``[CNN n-gram features ; BiLSTM final states]``: three convolution banks
(kernel widths 3, 4, 5; 30 maps each, ReLU, max over time) give 90 values,
a BiLSTM with 30 hidden units per direction gives 60, for 150 in total.

Forward functions return a cache consumed by the matching ``*_backward``
function, which returns gradients for the initializer parameters.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from .bipartite import BipartiteGraph
from .corpus import Document, TfIdfStats, Vocab

logger = logging.getLogger(__name__)

WORD_DIM = 300
KERNEL_SIZES = (3, 4, 5)
CNN_MAPS = 30
LSTM_HIDDEN = 30
SENT_DIM = len(KERNEL_SIZES) * CNN_MAPS + 2 * LSTM_HIDDEN


class EmbeddingFormatError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingTable:
    """Row ``i`` is the vector of vocab id ``i``; missing tokens are zero rows."""

    vectors: np.ndarray
    coverage: float = 1.0
    source: str = ""
    oov: str = "zeros"

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def lookup(self, ids) -> np.ndarray:
        return self.vectors[np.asarray(ids, dtype=np.int64)]


def load_embeddings(path, vocab: Vocab, dim: int = WORD_DIM) -> EmbeddingTable:
    """Read a word-vector text file (token followed by ``dim`` decimals per line)."""
    vectors = np.zeros((len(vocab), dim))
    found = np.zeros(len(vocab), dtype=bool)
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").rstrip(" ").split(" ")
            if len(parts) == 1 and not parts[0]:
                continue
            if len(parts) != dim + 1:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected {dim} components, got {len(parts) - 1}"
                )
            idx = vocab.token_to_id.get(parts[0])
            if idx is None or found[idx]:
                continue
            try:
                vectors[idx] = np.array(parts[1:], dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(f"{path}:{lineno}: non-numeric component") from None
            found[idx] = True
    coverage = float(found.mean()) if len(vocab) else 0.0
    logger.info("embeddings: %d/%d vocab tokens covered (%.1f%%)", found.sum(), len(vocab), 100 * coverage)
    return EmbeddingTable(vectors, coverage, str(path))


def synthetic_vector(token: str, seed: int, dim: int = WORD_DIM) -> np.ndarray:
    digest = hashlib.blake2b(f"{seed}\x00{token}".encode("utf-8"), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    return rng.normal(0.0, 0.4, dim)


def synthetic_embeddings(vocab: Vocab, seed: int = 0, dim: int = WORD_DIM) -> EmbeddingTable:
    """Deterministic stand-in for pretrained vectors, keyed by token hash."""
    vectors = np.stack([synthetic_vector(t, seed, dim) for t in vocab.id_to_token]) if len(vocab) else np.zeros((0, dim))
    return EmbeddingTable(vectors, 1.0, f"synthetic:{seed}")


def _glorot(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, shape)


def init_initializer_params(rng: np.random.Generator, word_dim: int = WORD_DIM) -> dict[str, np.ndarray]:
    params = {}
    for k in KERNEL_SIZES:
        params[f"cnn.w{k}"] = _glorot(rng, (k, word_dim, CNN_MAPS), k * word_dim, CNN_MAPS)
        params[f"cnn.b{k}"] = np.zeros(CNN_MAPS)
    bound = 1.0 / np.sqrt(LSTM_HIDDEN)
    for d in ("fwd", "bwd"):
        params[f"lstm.{d}.w_ih"] = rng.uniform(-bound, bound, (word_dim, 4 * LSTM_HIDDEN))
        params[f"lstm.{d}.w_hh"] = rng.uniform(-bound, bound, (LSTM_HIDDEN, 4 * LSTM_HIDDEN))
        params[f"lstm.{d}.b"] = np.zeros(4 * LSTM_HIDDEN)
    return params


def pad_sequences(seqs: Sequence[np.ndarray], min_len: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Right-pad ``(L_i, d)`` arrays into ``(B, L, d)`` plus the lengths."""
    lengths = np.array([len(s) for s in seqs], dtype=np.int64)
    d = seqs[0].shape[1]
    out = np.zeros((len(seqs), max(int(lengths.max()), min_len), d))
    for i, s in enumerate(seqs):
        out[i, : len(s)] = s
    return out, lengths


# -- CNN ---------------------------------------------------------------------

def cnn_forward(x: np.ndarray, lengths: np.ndarray, params: dict):
    """Max-pooled convolution features for a padded batch ``x`` of shape ``(B, L, d)``.

    A sequence shorter than the widest kernel is zero-padded up to that width.
    """
    kmax = max(KERNEL_SIZES)
    if x.shape[1] < kmax:
        x = np.concatenate([x, np.zeros((x.shape[0], kmax - x.shape[1], x.shape[2]))], axis=1)
    eff = np.maximum(lengths, kmax)
    rows = np.arange(x.shape[0])
    outs, cache = [], []
    for k in KERNEL_SIZES:
        w, b = params[f"cnn.w{k}"], params[f"cnn.b{k}"]
        n_pos = x.shape[1] - k + 1
        pre = b + sum(x[:, o : o + n_pos] @ w[o] for o in range(k))
        valid = np.arange(n_pos)[None, :] < (eff - k + 1)[:, None]
        masked = np.where(valid[:, :, None], pre, -np.inf)
        arg = masked.argmax(axis=1)  # (B, maps)
        best = np.take_along_axis(pre, arg[:, None, :], axis=1)[:, 0]
        outs.append(np.maximum(best, 0.0))
        cache.append((k, arg, best))
    return np.concatenate(outs, axis=1), (x, rows, cache)


def cnn_backward(grad: np.ndarray, cache, params: dict) -> dict:
    x, rows, banks = cache
    grads = {}
    col = 0
    for k, arg, best in banks:
        g = grad[:, col : col + CNN_MAPS] * (best > 0)
        col += CNN_MAPS
        gw = np.zeros_like(params[f"cnn.w{k}"])
        for o in range(k):
            # window input at offset o for each (batch, map): x[b, arg[b, c] + o, :]
            xo = x[rows[:, None], arg + o]  # (B, maps, d)
            gw[o] = np.einsum("bcd,bc->dc", xo, g)
        grads[f"cnn.w{k}"] = gw
        grads[f"cnn.b{k}"] = g.sum(axis=0)
    return grads


# -- BiLSTM ------------------------------------------------------------------

def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _reverse_padded(x: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    for i, n in enumerate(lengths):
        out[i, :n] = x[i, :n][::-1]
    return out


def lstm_forward(x: np.ndarray, lengths: np.ndarray, w_ih, w_hh, b):
    """Masked LSTM over a padded batch; returns the state after each sequence's last token."""
    bsz, steps, _ = x.shape
    hdim = w_hh.shape[0]
    h = np.zeros((bsz, hdim))
    c = np.zeros((bsz, hdim))
    xw = x @ w_ih + b
    tape = []
    for t in range(steps):
        a = xw[:, t] + h @ w_hh
        i = _sigmoid(a[:, :hdim])
        f = _sigmoid(a[:, hdim : 2 * hdim])
        g = np.tanh(a[:, 2 * hdim : 3 * hdim])
        o = _sigmoid(a[:, 3 * hdim :])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        m = (t < lengths)[:, None].astype(np.float64)
        tape.append((h, c, i, f, g, o, tc, m))
        h = m * h_new + (1.0 - m) * h
        c = m * c_new + (1.0 - m) * c
    return h, tape


def lstm_backward(dh: np.ndarray, x: np.ndarray, tape, w_ih, w_hh):
    hdim = w_hh.shape[0]
    dc = np.zeros_like(dh)
    g_ih = np.zeros_like(w_ih)
    g_hh = np.zeros_like(w_hh)
    g_b = np.zeros(4 * hdim)
    for t in range(len(tape) - 1, -1, -1):
        h_prev, c_prev, i, f, g, o, tc, m = tape[t]
        dh_new = m * dh
        dc_new = m * dc
        do = dh_new * tc
        dc_new = dc_new + dh_new * o * (1.0 - tc * tc)
        da = np.concatenate(
            [
                dc_new * g * i * (1.0 - i),
                dc_new * c_prev * f * (1.0 - f),
                dc_new * i * (1.0 - g * g),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        g_ih += x[:, t].T @ da
        g_hh += h_prev.T @ da
        g_b += da.sum(axis=0)
        dh = (1.0 - m) * dh + da @ w_hh.T
        dc = (1.0 - m) * dc + dc_new * f
    return g_ih, g_hh, g_b


def bilstm_forward(x: np.ndarray, lengths: np.ndarray, params: dict):
    """Concatenated final hidden states of a left-to-right and a right-to-left LSTM."""
    xr = _reverse_padded(x, lengths)
    hf, tf = lstm_forward(x, lengths, params["lstm.fwd.w_ih"], params["lstm.fwd.w_hh"], params["lstm.fwd.b"])
    hb, tb = lstm_forward(xr, lengths, params["lstm.bwd.w_ih"], params["lstm.bwd.w_hh"], params["lstm.bwd.b"])
    return np.concatenate([hf, hb], axis=1), (x, xr, tf, tb)


def bilstm_backward(grad: np.ndarray, cache, params: dict) -> dict:
    x, xr, tf, tb = cache
    grads = {}
    for d, xs, tape, g in (("fwd", x, tf, grad[:, :LSTM_HIDDEN]), ("bwd", xr, tb, grad[:, LSTM_HIDDEN:])):
        gi, gh, gb = lstm_backward(g, xs, tape, params[f"lstm.{d}.w_ih"], params[f"lstm.{d}.w_hh"])
        grads[f"lstm.{d}.w_ih"], grads[f"lstm.{d}.w_hh"], grads[f"lstm.{d}.b"] = gi, gh, gb
    return grads


def cnn_sentence_feature(tokens: np.ndarray, params: dict) -> np.ndarray:
    """CNN features (90 values) of one embedded token sequence ``(L, d)``."""
    tokens = np.atleast_2d(tokens)
    out, _ = cnn_forward(tokens[None], np.array([len(tokens)]), params)
    return out[0]


def bilstm_sentence_feature(tokens: np.ndarray, params: dict) -> np.ndarray:
    """BiLSTM features (60 values) of one embedded token sequence ``(L, d)``."""
    tokens = np.atleast_2d(tokens)
    out, _ = bilstm_forward(tokens[None], np.array([len(tokens)]), params)
    return out[0]


# -- node matrices -----------------------------------------------------------

@dataclass
class FeatureMatrices:
    words: np.ndarray
    sentences: np.ndarray
    cache: Optional[tuple] = None


def sentence_features(seqs: Sequence[np.ndarray], params: dict):
    x, lengths = pad_sequences(seqs)
    c_out, c_cache = cnn_forward(x, lengths, params)
    l_out, l_cache = bilstm_forward(x, lengths, params)
    return np.concatenate([c_out, l_out], axis=1), (c_cache, l_cache)


def sentence_features_backward(grad: np.ndarray, cache, params: dict) -> dict:
    c_cache, l_cache = cache
    width = len(KERNEL_SIZES) * CNN_MAPS
    grads = cnn_backward(grad[:, :width], c_cache, params)
    grads.update(bilstm_backward(grad[:, width:], l_cache, params))
    return grads


def init_nodes(graph: BipartiteGraph, table: EmbeddingTable, params: dict) -> FeatureMatrices:
    """Word rows from the table; sentence rows ``[CNN ; BiLSTM]`` of their token sequences."""
    if params["cnn.w3"].shape[1] != table.dim or params["lstm.fwd.w_ih"].shape[0] != table.dim:
        raise ValueError(f"initializer expects {params['cnn.w3'].shape[1]}-d word vectors, table has {table.dim}")
    words = table.lookup(graph.word_ids)
    seqs = [table.lookup(t) for t in graph.sentence_tokens]
    sents, cache = sentence_features(seqs, params)
    return FeatureMatrices(words, sents, cache)


def tfidf_sentence_embedding(document: Document, stats: TfIdfStats, vocab: Vocab) -> sparse.csr_matrix:
    """L2-normalized TF-IDF rows, one per sentence, over the vocabulary."""
    rows, cols, vals = [], [], []
    for i, s in enumerate(document.sentences):
        counts: dict[int, int] = {}
        for t in vocab.filter(s.graph_tokens):
            j = vocab.token_to_id[t]
            counts[j] = counts.get(j, 0) + 1
        if not counts:
            continue
        ids = sorted(counts)
        v = np.array([counts[j] * stats.idf(vocab.id_to_token[j]) for j in ids])
        v /= np.linalg.norm(v)
        rows += [i] * len(ids)
        cols += ids
        vals += v.tolist()
    return sparse.csr_matrix((vals, (rows, cols)), shape=(len(document.sentences), len(vocab)))

"""Dual-channel variational graph autoencoder over sentence-word graphs.

Both channels share the projected node features ``H0`` and run two graph
convolutions: a ReLU layer, then linear mean and log-variance heads on its
output. They differ only in how a message from node ``i`` to node ``j`` is
scaled:

* intra: ``e_ij / sqrt(d_i d_j)`` (shared, high-degree words damped)
* inter: ``e_ij * sqrt(d_i) / sqrt(d_j)`` (shared words amplified)

with ``d`` the weighted degree plus a unit self-loop. Latents of the two
channels are concatenated ``[inter ; intra]`` and word-sentence edge
weights are decoded as ``sigmoid(z_w . z_s)``.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..bipartite import BipartiteGraph
from ..features import (
    SENT_DIM,
    WORD_DIM,
    EmbeddingTable,
    init_initializer_params,
    sentence_features,
    sentence_features_backward,
)
from ..optim import Adam

logger = logging.getLogger(__name__)

CHANNELS = ("inter", "intra")


class NumericalError(FloatingPointError):
    pass


@dataclass
class TrainConfig:
    lr: float = 5e-5
    batch_size: int = 8
    dropout: float = 0.1
    warmup_steps: int = 8000
    total_steps: int = 210_000
    kl_coef: Optional[float] = None  # None: 1 / (N * 2 d_z) per graph
    seed: int = 0
    hidden_dim: int = 128
    latent_dim: int = 75
    freeze_initializer: bool = False
    literal_objective: bool = False  # mse - kl instead of mse + kl; inspection only
    log_every: int = 50
    val_every: int = 0
    val_frac: float = 0.0
    checkpoint_every: int = 0

    def __post_init__(self):
        for name in ("lr", "dropout", "kl_coef", "val_frac"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.batch_size < 1 or self.hidden_dim < 1 or self.latent_dim < 1 or self.total_steps < 0:
            raise ValueError("batch_size, dims must be positive and total_steps non-negative")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)


# -- parameters ----------------------------------------------------------------

def _glorot(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, (fan_in, fan_out))


def init_params(seed: int, hidden_dim: int = 128, latent_dim: int = 75, word_dim: int = WORD_DIM,
                head_scale: float = 0.1, logvar_bias: float = -4.0) -> dict:
    """All trainable tensors, keyed by name. Deterministic in ``seed``.

    Heads start at ``head_scale`` times Glorot so initial logits are not
    saturated. The log-variance head starts non-positive with a bias of
    ``logvar_bias``: its input is non-negative (ReLU output, non-negative
    propagation), so initial log-variances are at most ``logvar_bias``.
    """
    rng = np.random.default_rng(seed)
    params = init_initializer_params(rng, word_dim)
    params["proj.word"] = _glorot(rng, word_dim, hidden_dim)
    params["proj.sent"] = _glorot(rng, SENT_DIM, hidden_dim)
    for c in CHANNELS:
        params[f"{c}.w1"] = _glorot(rng, hidden_dim, hidden_dim)
        params[f"{c}.b1"] = np.zeros(hidden_dim)
        params[f"{c}.w_mu"] = head_scale * _glorot(rng, hidden_dim, latent_dim)
        params[f"{c}.b_mu"] = np.zeros(latent_dim)
        params[f"{c}.w_logvar"] = -np.abs(head_scale * _glorot(rng, hidden_dim, latent_dim))
        params[f"{c}.b_logvar"] = np.full(latent_dim, logvar_bias)
    return params


def is_initializer_param(name: str) -> bool:
    return name.startswith(("cnn.", "lstm."))


# -- propagation -----------------------------------------------------------------

@dataclass(frozen=True)
class Propagator:
    """Sparse-by-blocks message passing operator on a bipartite graph.

    ``to_word[w, s]`` scales the message from sentence ``s`` into word ``w``;
    ``to_sent[s, w]`` the reverse; ``self_*`` are self-loop coefficients.
    """

    self_word: np.ndarray
    self_sent: np.ndarray
    to_word: np.ndarray
    to_sent: np.ndarray

    def __call__(self, h: np.ndarray) -> np.ndarray:
        n = len(self.self_word)
        hw, hs = h[:n], h[n:]
        return np.concatenate([self.self_word[:, None] * hw + self.to_word @ hs, self.self_sent[:, None] * hs + self.to_sent @ hw])

    def transpose(self, g: np.ndarray) -> np.ndarray:
        n = len(self.self_word)
        gw, gs = g[:n], g[n:]
        return np.concatenate([self.self_word[:, None] * gw + self.to_sent.T @ gs, self.self_sent[:, None] * gs + self.to_word.T @ gw])

    def dense(self) -> np.ndarray:
        n = len(self.self_word)
        m = len(self.self_sent)
        out = np.zeros((n + m, n + m))
        out[:n, :n] = np.diag(self.self_word)
        out[n:, n:] = np.diag(self.self_sent)
        out[:n, n:] = self.to_word
        out[n:, :n] = self.to_sent
        return out


def make_propagator(graph: BipartiteGraph, kind: str, degrees: Optional[np.ndarray] = None) -> Propagator:
    a = graph.adjacency()
    d = graph.degrees() if degrees is None else np.asarray(degrees, dtype=np.float64)
    n = graph.n_words
    dw, ds = d[:n], d[n:]
    if kind == "intra":
        to_word = a / np.sqrt(dw)[:, None] / np.sqrt(ds)[None, :]
        return Propagator(1.0 / dw, 1.0 / ds, to_word, to_word.T.copy())
    if kind == "inter":
        to_word = a * np.sqrt(ds)[None, :] / np.sqrt(dw)[:, None]
        to_sent = a.T * np.sqrt(dw)[None, :] / np.sqrt(ds)[:, None]
        return Propagator(np.ones(n), np.ones(len(ds)), to_word, to_sent)
    raise ValueError(f"unknown channel {kind!r}")


def gcn_intra_layer(h: np.ndarray, graph: BipartiteGraph, theta: np.ndarray, degrees=None) -> np.ndarray:
    """Linear part of one intra-channel convolution: ``(M_intra h) theta``."""
    if h.shape[0] != graph.n_nodes or h.shape[1] != theta.shape[0]:
        raise ValueError(f"shape mismatch: features {h.shape}, theta {theta.shape}, {graph.n_nodes} nodes")
    return make_propagator(graph, "intra", degrees)(h) @ theta


def gcn_inter_layer(h: np.ndarray, graph: BipartiteGraph, theta: np.ndarray, degrees=None) -> np.ndarray:
    """Linear part of one inter-channel convolution: ``(M_inter h) theta``."""
    if h.shape[0] != graph.n_nodes or h.shape[1] != theta.shape[0]:
        raise ValueError(f"shape mismatch: features {h.shape}, theta {theta.shape}, {graph.n_nodes} nodes")
    return make_propagator(graph, "inter", degrees)(h) @ theta


# -- forward / backward ------------------------------------------------------------

@dataclass
class GraphInput:
    """A graph with its fixed inputs: word vectors and embedded token sequences."""

    graph: BipartiteGraph
    word_x: np.ndarray
    sent_seqs: list
    props: dict = field(default_factory=dict)

    @classmethod
    def build(cls, graph: BipartiteGraph, table: EmbeddingTable) -> "GraphInput":
        props = {c: make_propagator(graph, c) for c in CHANNELS}
        return cls(graph, table.lookup(graph.word_ids), [table.lookup(t) for t in graph.sentence_tokens], props)


@dataclass
class Noise:
    eps: dict
    masks: dict


@dataclass
class LatentState:
    mu: dict
    logvar: dict
    z: dict
    noise: Optional[Noise]

    @property
    def z_all(self) -> np.ndarray:
        return np.concatenate([self.z[c] for c in CHANNELS], axis=1)

    @property
    def mu_all(self) -> np.ndarray:
        return np.concatenate([self.mu[c] for c in CHANNELS], axis=1)


def draw_noise(rng: np.random.Generator, n_nodes: int, hidden_dim: int, latent_dim: int, dropout: float) -> Noise:
    eps, masks = {}, {}
    for c in CHANNELS:
        masks[c] = (rng.random((n_nodes, hidden_dim)) >= dropout) / (1.0 - dropout) if dropout > 0 else np.ones((n_nodes, hidden_dim))
        eps[c] = rng.standard_normal((n_nodes, latent_dim))
    return Noise(eps, masks)


def encode(item: GraphInput, params: dict, noise: Optional[Noise] = None, keep_cache: bool = False):
    """Encode a graph. ``noise=None`` is eval mode (``Z = mu``, no dropout).

    Returns the latent state, and the forward cache when ``keep_cache``.
    """
    n = item.graph.n_words
    xs, s_cache = sentence_features(item.sent_seqs, params)
    h0 = np.concatenate([item.word_x @ params["proj.word"], xs @ params["proj.sent"]])
    mu, logvar, z, chan_cache = {}, {}, {}, {}
    for c in CHANNELS:
        prop = item.props[c]
        mh0 = prop(h0)
        a1 = mh0 @ params[f"{c}.w1"] + params[f"{c}.b1"]
        h1 = np.maximum(a1, 0.0)
        if noise is not None:
            h1 = h1 * noise.masks[c]
        mh1 = prop(h1)
        mu[c] = mh1 @ params[f"{c}.w_mu"] + params[f"{c}.b_mu"]
        logvar[c] = mh1 @ params[f"{c}.w_logvar"] + params[f"{c}.b_logvar"]
        if noise is not None:
            z[c] = mu[c] + np.exp(0.5 * logvar[c]) * noise.eps[c]
        else:
            z[c] = mu[c]
        chan_cache[c] = (mh0, a1, mh1)
    state = LatentState(mu, logvar, z, noise)
    if not all(np.isfinite(z[c]).all() and np.isfinite(logvar[c]).all() for c in CHANNELS):
        raise NumericalError(f"numerical blowup while encoding document {item.graph.doc_id!r}")
    if keep_cache:
        return state, (xs, s_cache, h0, chan_cache, n)
    return state


def decode(z: np.ndarray, n_words: int) -> np.ndarray:
    """Predicted weight ``sigmoid(z_w . z_s)`` for every word-sentence pair (``n x m``)."""
    logits = z[:n_words] @ z[n_words:].T
    return 0.5 * (1.0 + np.tanh(0.5 * logits))


def kl_divergence(mu: np.ndarray, logvar: np.ndarray) -> float:
    """``KL(N(mu, exp(logvar)) || N(0, 1))`` summed over all units."""
    return 0.5 * float(np.sum(mu * mu + np.exp(logvar) - 1.0 - logvar))


def default_kl_coef(n_nodes: int, latent_dim: int) -> float:
    return 1.0 / (n_nodes * 2 * latent_dim)


def loss(recon: np.ndarray, graph: BipartiteGraph, latent: LatentState, kl_coef: float, literal: bool = False):
    """Return ``(mse, kl, total)``; ``total = mse + kl_coef * kl`` (``-`` if ``literal``)."""
    diff = recon - graph.adjacency()
    mse = float(np.mean(diff * diff))
    kl = sum(kl_divergence(latent.mu[c], latent.logvar[c]) for c in CHANNELS)
    total = mse - kl_coef * kl if literal else mse + kl_coef * kl
    return mse, kl, total


def backward(item: GraphInput, params: dict, latent: LatentState, cache, recon: np.ndarray, kl_coef: float,
             literal: bool = False, freeze_initializer: bool = False) -> dict:
    """Exact gradients of the total loss with respect to every trainable tensor."""
    xs, s_cache, h0, chan_cache, n = cache
    graph = item.graph
    z = latent.z_all
    sign = -1.0 if literal else 1.0
    ds_logits = (2.0 / recon.size) * (recon - graph.adjacency()) * recon * (1.0 - recon)
    dz = np.concatenate([ds_logits @ z[n:], ds_logits.T @ z[:n]])
    grads = {}
    dh0 = np.zeros_like(h0)
    width = z.shape[1] // 2
    for k, c in enumerate(CHANNELS):
        prop = item.props[c]
        mh0, a1, mh1 = chan_cache[c]
        dzc = dz[:, k * width : (k + 1) * width]
        mu, logvar = latent.mu[c], latent.logvar[c]
        dmu = dzc + sign * kl_coef * mu
        dlv = sign * kl_coef * 0.5 * (np.exp(logvar) - 1.0)
        if latent.noise is not None:
            dlv = dlv + dzc * latent.noise.eps[c] * 0.5 * np.exp(0.5 * logvar)
        grads[f"{c}.w_mu"] = mh1.T @ dmu
        grads[f"{c}.b_mu"] = dmu.sum(axis=0)
        grads[f"{c}.w_logvar"] = mh1.T @ dlv
        grads[f"{c}.b_logvar"] = dlv.sum(axis=0)
        dh1 = prop.transpose(dmu @ params[f"{c}.w_mu"].T + dlv @ params[f"{c}.w_logvar"].T)
        if latent.noise is not None:
            dh1 = dh1 * latent.noise.masks[c]
        da1 = dh1 * (a1 > 0)
        grads[f"{c}.w1"] = mh0.T @ da1
        grads[f"{c}.b1"] = da1.sum(axis=0)
        dh0 += prop.transpose(da1 @ params[f"{c}.w1"].T)
    grads["proj.word"] = item.word_x.T @ dh0[:n]
    grads["proj.sent"] = xs.T @ dh0[n:]
    if not freeze_initializer:
        grads.update(sentence_features_backward(dh0[n:] @ params["proj.sent"].T, s_cache, params))
    return grads


def forward_backward(item: GraphInput, params: dict, config: TrainConfig, noise: Optional[Noise]):
    latent, cache = encode(item, params, noise, keep_cache=True)
    recon = decode(latent.z_all, item.graph.n_words)
    kappa = config.kl_coef if config.kl_coef is not None else default_kl_coef(item.graph.n_nodes, config.latent_dim)
    mse, kl, total = loss(recon, item.graph, latent, kappa, config.literal_objective)
    if not np.isfinite(total):
        raise NumericalError(f"non-finite loss on document {item.graph.doc_id!r}")
    grads = backward(item, params, latent, cache, recon, kappa, config.literal_objective, config.freeze_initializer)
    return (mse, kl, total), grads


@dataclass
class StepMetrics:
    step: int
    mse: float
    kl: float
    total: float
    lr: float


def train_step(batch: Sequence[GraphInput], params: dict, optimizer: Adam, config: TrainConfig,
               rng: np.random.Generator) -> StepMetrics:
    """One Adam update on the mean loss of ``batch`` (accumulated in batch order)."""
    if not batch:
        raise ValueError("empty batch")
    acc: dict = {}
    sums = np.zeros(3)
    for item in batch:
        noise = draw_noise(rng, item.graph.n_nodes, config.hidden_dim, config.latent_dim, config.dropout)
        metrics, grads = forward_backward(item, params, config, noise)
        sums += metrics
        for name, g in grads.items():
            if name in acc:
                acc[name] += g
            else:
                acc[name] = g.copy()
    scale = 1.0 / len(batch)
    for g in acc.values():
        g *= scale
    lr = optimizer.update(params, acc)
    mse, kl, total = sums * scale
    return StepMetrics(optimizer.step, float(mse), float(kl), float(total), lr)


def evaluate_mse(items: Sequence[GraphInput], params: dict) -> float:
    """Mean eval-mode reconstruction MSE over graphs."""
    if not items:
        return float("nan")
    vals = []
    for item in items:
        latent = encode(item, params)
        recon = decode(latent.z_all, item.graph.n_words)
        diff = recon - item.graph.adjacency()
        vals.append(float(np.mean(diff * diff)))
    return float(np.mean(vals))


def loss_value(item: GraphInput, params: dict, config: TrainConfig, noise: Optional[Noise]) -> float:
    """Forward-only total loss (used by finite-difference checks)."""
    latent = encode(item, params, noise)
    recon = decode(latent.z_all, item.graph.n_words)
    kappa = config.kl_coef if config.kl_coef is not None else default_kl_coef(item.graph.n_nodes, config.latent_dim)
    return loss(recon, item.graph, latent, kappa, config.literal_objective)[2]

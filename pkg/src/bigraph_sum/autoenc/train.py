"""Pre-training loop plus the inference wrapper and the edge-prediction diagnostic."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from ..bipartite import BipartiteGraph, DegenerateGraphError, build_graph, remove_edges
from ..corpus import Corpus, Document, Vocab, build_vocab
from ..features import EmbeddingTable, synthetic_embeddings
from ..optim import Adam
from .checkpoint import ModelCheckpoint
from .model import (
    GraphInput,
    NumericalError,
    StepMetrics,
    TrainConfig,
    decode,
    encode,
    evaluate_mse,
    init_params,
    train_step,
)

logger = logging.getLogger(__name__)


def _streams(seed: int):
    """Independent generators for initialization, batching, noise and validation split."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4)]


def prepare_inputs(documents: Iterable[Document], vocab: Vocab, table: EmbeddingTable) -> list[GraphInput]:
    items = []
    for doc in documents:
        try:
            graph = build_graph(doc, vocab)
        except DegenerateGraphError as exc:
            logger.warning("skipping %s", exc)
            continue
        items.append(GraphInput.build(graph, table))
    return items


def make_checkpoint(params: dict, optimizer: Adam, config: TrainConfig, vocab: Vocab, table: EmbeddingTable,
                    extra: Optional[dict] = None) -> ModelCheckpoint:
    header = {
        "train": config.to_dict(),
        "vocab": list(vocab.id_to_token),
        "embeddings_source": table.source,
        "optimizer": {"lr": optimizer.lr, "warmup_steps": optimizer.warmup_steps,
                      "beta1": optimizer.beta1, "beta2": optimizer.beta2, "eps": optimizer.eps},
    }
    if extra:
        header.update(extra)
    ckpt = ModelCheckpoint(header, params, optimizer.m, optimizer.v, optimizer.step, table.vectors)
    return ckpt.quantized()


def pretrain(
    corpus: Corpus | Sequence[GraphInput],
    config: TrainConfig,
    vocab: Optional[Vocab] = None,
    table: Optional[EmbeddingTable] = None,
    extra_config: Optional[dict] = None,
    on_log: Optional[Callable[[dict], None]] = None,
    checkpoint_path=None,
) -> ModelCheckpoint:
    """Self-supervised edge-weight reconstruction over a corpus of graphs.

    ``corpus`` may also be a list of prepared :class:`GraphInput` (then
    ``vocab`` and ``table`` describe them). Word vectors default to the
    synthetic table seeded with ``config.seed``.
    """
    init_rng, batch_rng, noise_rng, split_rng = _streams(config.seed)
    if isinstance(corpus, Corpus):
        vocab = vocab if vocab is not None else build_vocab(corpus)
        table = table if table is not None else synthetic_embeddings(vocab, config.seed)
        items = prepare_inputs(corpus, vocab, table)
    else:
        items = list(corpus)
        if vocab is None or table is None:
            raise ValueError("vocab and table are required with prepared graph inputs")
    if not items:
        raise ValueError("no usable graphs in corpus")

    val: list[GraphInput] = []
    if config.val_frac > 0 and len(items) > 1:
        order = split_rng.permutation(len(items))
        n_val = max(1, int(round(config.val_frac * len(items))))
        val = [items[i] for i in sorted(order[:n_val])]
        items = [items[i] for i in sorted(order[n_val:])]

    params = init_params(int(init_rng.integers(2**63)), config.hidden_dim, config.latent_dim, table.dim)
    optimizer = Adam(lr=config.lr, warmup_steps=config.warmup_steps)

    def emit(record: dict):
        logger.info(" ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in record.items()))
        if on_log is not None:
            on_log(record)

    if val:
        emit({"step": 0, "val_mse": evaluate_mse(val, params)})
    queue: list[int] = []
    for _ in range(config.total_steps):
        batch = []
        while len(batch) < min(config.batch_size, len(items)):
            if not queue:
                queue = batch_rng.permutation(len(items)).tolist()
            batch.append(items[queue.pop(0)])
        try:
            metrics: StepMetrics = train_step(batch, params, optimizer, config, noise_rng)
        except NumericalError as exc:
            raise NumericalError(f"step {optimizer.step + 1}: {exc}") from None
        step = metrics.step
        if config.log_every and (step % config.log_every == 0 or step == config.total_steps):
            emit({"step": step, "mse": metrics.mse, "kl": metrics.kl, "total": metrics.total, "lr": metrics.lr})
        if val and config.val_every and step % config.val_every == 0:
            emit({"step": step, "val_mse": evaluate_mse(val, params)})
        if checkpoint_path and config.checkpoint_every and step % config.checkpoint_every == 0:
            make_checkpoint(params, optimizer, config, vocab, table, extra_config).save(checkpoint_path)
    return make_checkpoint(params, optimizer, config, vocab, table, extra_config)


@dataclass
class BiGAE:
    """Inference-side view of a checkpoint."""

    params: dict
    vocab: Vocab
    table: EmbeddingTable
    latent_dim: int

    @classmethod
    def from_checkpoint(cls, ckpt: ModelCheckpoint) -> "BiGAE":
        vocab = Vocab.from_tokens(ckpt.config["vocab"])
        if ckpt.embeddings is None:
            raise ValueError("checkpoint carries no word embeddings")
        table = EmbeddingTable(ckpt.embeddings, source=ckpt.config.get("embeddings_source", ""))
        return cls(ckpt.params, vocab, table, int(ckpt.config["train"]["latent_dim"]))

    @property
    def embedding_dim(self) -> int:
        return 2 * self.latent_dim

    def graph_input(self, document: Document) -> GraphInput:
        return GraphInput.build(build_graph(document, self.vocab), self.table)

    def encode_graph(self, graph: BipartiteGraph) -> np.ndarray:
        """Eval-mode concatenated means ``[inter ; intra]`` for every node."""
        return encode(GraphInput.build(graph, self.table), self.params).mu_all

    def embed(self, document: Document) -> np.ndarray:
        """Sentence embeddings ``(m, 2 d_z)``.

        Sentences without any in-vocab word are not graph nodes; their rows
        are zero. Raises :class:`DegenerateGraphError` when no sentence is.
        """
        item = self.graph_input(document)
        mu = encode(item, self.params).mu_all
        out = np.zeros((len(document.sentences), mu.shape[1]))
        out[item.graph.sentence_ids] = mu[item.graph.n_words :]
        return out


def embed_sentences(document: Document, checkpoint: ModelCheckpoint | BiGAE) -> np.ndarray:
    model = checkpoint if isinstance(checkpoint, BiGAE) else BiGAE.from_checkpoint(checkpoint)
    return model.embed(document)


def edge_prediction_accuracy(
    data: Corpus | Sequence[BipartiteGraph],
    checkpoint: ModelCheckpoint | BiGAE,
    holdout_frac: float = 0.10,
    seed: int = 0,
) -> float:
    """Balanced held-out edge existence accuracy.

    Per graph, a seeded ``holdout_frac`` of edges (at least one) is removed
    before encoding; those pairs and an equal number of sampled non-edge
    pairs are classified as edges iff ``p > 0.5``. Graphs with fewer than two
    edges are skipped.
    """
    model = checkpoint if isinstance(checkpoint, BiGAE) else BiGAE.from_checkpoint(checkpoint)
    if isinstance(data, Corpus):
        graphs = []
        for doc in data:
            try:
                graphs.append(build_graph(doc, model.vocab))
            except DegenerateGraphError:
                continue
    else:
        graphs = list(data)
    rng = np.random.default_rng(seed)
    correct = total = 0
    for graph in graphs:
        n_edges = graph.n_edges
        if n_edges < 2:
            continue
        k = min(n_edges - 1, max(1, int(round(holdout_frac * n_edges))))
        held = rng.choice(n_edges, size=k, replace=False)
        drop = np.zeros(n_edges, dtype=bool)
        drop[held] = True
        nonedge = np.flatnonzero(graph.adjacency().ravel() == 0)
        negatives = rng.choice(nonedge, size=min(k, len(nonedge)), replace=False) if len(nonedge) else np.zeros(0, int)
        reduced = remove_edges(graph, drop)
        z = model.encode_graph(reduced)
        prob = decode(z, graph.n_words)
        pos = prob[graph.edge_word[held], graph.edge_sent[held]]
        neg = prob.ravel()[negatives]
        correct += int((pos > 0.5).sum() + (neg <= 0.5).sum())
        total += len(pos) + len(neg)
    if not total:
        raise ValueError("no graph has enough edges for a holdout")
    return correct / total

"""End-to-end runs behind the command line: pretrain, embed, summarize, evaluate."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .autoenc import BiGAE, ModelCheckpoint, TrainConfig, pretrain
from .bipartite import build_graph
from .config import RunConfig
from .corpus import Corpus, Vocab, build_vocab, load_corpus
from .evaluation import evaluate_corpus, lead_baseline, oracle_summary
from .features import load_embeddings, synthetic_embeddings
from .rank import METHODS, RankConfig, Summary, TfIdfBackend, preset, summarize

logger = logging.getLogger(__name__)

BASELINES = ("lead", "oracle")
ALL_METHODS = METHODS + BASELINES


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def read_corpus(path, cfg: RunConfig, limit: Optional[int] = None) -> Corpus:
    return load_corpus(path, limit=limit, max_sentences=cfg.max_sentences, max_tokens=cfg.max_tokens)


def train_config(cfg: RunConfig) -> TrainConfig:
    return TrainConfig(
        lr=cfg.lr, batch_size=cfg.batch_size, dropout=cfg.dropout, warmup_steps=cfg.warmup_steps,
        total_steps=cfg.steps, kl_coef=cfg.kl_coef, seed=cfg.seed, hidden_dim=cfg.hidden_dim,
        latent_dim=cfg.latent_dim, freeze_initializer=cfg.freeze_initializer,
        literal_objective=cfg.literal_objective, log_every=cfg.log_every,
    )


def embedding_table(cfg: RunConfig, vocab: Vocab):
    if cfg.embeddings:
        return load_embeddings(cfg.embeddings, vocab)
    seed = cfg.synthetic_embeddings
    if seed is None:
        logger.warning("no word vectors given; using synthetic table seed=%d", cfg.seed)
        seed = cfg.seed
    return synthetic_embeddings(vocab, seed)


def _fmt(record: dict) -> str:
    return " ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in record.items())


def run_pretrain(cfg: RunConfig, data, out) -> Path:
    """Train on ``data`` and write ``out`` plus ``out.log`` (key=value lines)."""
    corpus = read_corpus(data, cfg)
    vocab = build_vocab(corpus, max_size=cfg.vocab_size, prune_frac=cfg.prune_frac)
    table = embedding_table(cfg, vocab)
    extra = {"run": cfg.to_dict(), "config_hash": cfg.hash(), "data_sha256": file_digest(data)}
    out = Path(out)
    lines = [_fmt({"event": "start", "config_hash": cfg.hash(), "documents": len(corpus), "vocab": len(vocab)})]
    tcfg = train_config(cfg)
    ckpt = pretrain(corpus, tcfg, vocab=vocab, table=table, extra_config=extra,
                    on_log=lambda r: lines.append(_fmt(r)))
    ckpt.save(out)
    lines.append(_fmt({"event": "done", "step": ckpt.step}))
    out.with_name(out.name + ".log").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out


def rank_config(cfg: RunConfig) -> RankConfig:
    base = preset(cfg.preset, cfg.method if cfg.method in METHODS else "pacsum")
    updates = {}
    if cfg.k is not None:
        updates["k"] = cfg.k
    if cfg.beta_sim is not None:
        updates["beta_sim"] = cfg.beta_sim
    if cfg.beta_far is not None:
        updates["beta_far"] = cfg.beta_far
    if not updates:
        return base
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return dataclasses.replace(base, **updates)


def _summarize_one(args):
    doc, method, backend, rcfg, model, tfidf = args
    if method == "lead":
        return lead_baseline(doc, rcfg.k)
    if method == "oracle":
        return oracle_summary(doc, k=rcfg.k)
    return summarize(doc, backend, rcfg, model=model, tfidf=tfidf)


def summarize_corpus(corpus: Corpus, cfg: RunConfig, model: Optional[BiGAE] = None) -> list[Summary]:
    if cfg.method not in ALL_METHODS:
        raise ValueError(f"unknown method {cfg.method!r}; valid methods: {', '.join(ALL_METHODS)}")
    rcfg = rank_config(cfg)
    tfidf = None
    if cfg.method in METHODS:
        if cfg.backend == "bigae" and model is None:
            raise ValueError("the bigae backend needs a checkpoint")
        tfidf = TfIdfBackend.fit(corpus)
    jobs = [(doc, cfg.method, cfg.backend, rcfg, model, tfidf) for doc in corpus]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(_summarize_one, jobs, chunksize=max(1, len(jobs) // (4 * cfg.jobs))))
    return [_summarize_one(j) for j in jobs]


def load_model(checkpoint) -> BiGAE:
    return BiGAE.from_checkpoint(ModelCheckpoint.load(checkpoint))


def write_summaries(summaries: Sequence[Summary], out, config_hash: str) -> Path:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        for s in summaries:
            fh.write(json.dumps(dict(s.to_dict(), config_hash=config_hash), sort_keys=True) + "\n")
    return out


def read_summaries(path) -> list[Summary]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"summaries not found: {path}")
    out = []
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(Summary.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError) as exc:
            raise ValueError(f"{path}:{n}: bad summary record ({exc})") from None
    return out


def run_summarize(cfg: RunConfig, data, out, checkpoint=None) -> Path:
    corpus = read_corpus(data, cfg)
    model = None
    if cfg.method in METHODS and cfg.backend == "bigae":
        if checkpoint is None:
            raise ValueError("the bigae backend needs --checkpoint")
        model = load_model(checkpoint)
    return write_summaries(summarize_corpus(corpus, cfg, model), out, cfg.hash())


def run_evaluate(cfg: RunConfig, summaries_path, data, out_stem) -> tuple[Path, Path]:
    summaries = read_summaries(summaries_path)
    corpus = read_corpus(data, cfg)
    meta = {"config_hash": cfg.hash(), "method": cfg.method, "backend": cfg.backend,
            "summaries_sha256": file_digest(summaries_path)}
    report = evaluate_corpus(summaries, corpus, pairing=cfg.pairing, oracle_k=rank_config(cfg).k, metadata=meta)
    return report.write(out_stem)


def run_embed(cfg: RunConfig, data, checkpoint, out) -> Path:
    """JSON lines ``{"id", "embeddings": [[...], ...]}`` for every document."""
    model = load_model(checkpoint)
    corpus = read_corpus(data, cfg)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        for doc in corpus:
            emb = model.embed(doc)
            fh.write(json.dumps({"id": doc.id, "embeddings": np.asarray(emb).tolist(), "config_hash": cfg.hash()}) + "\n")
    return out


def inspect_graph(cfg: RunConfig, data, doc_id: Optional[str] = None, checkpoint=None) -> str:
    corpus = read_corpus(data, cfg)
    vocab = load_model(checkpoint).vocab if checkpoint else build_vocab(corpus, cfg.vocab_size, cfg.prune_frac)
    docs = corpus.by_id()
    if doc_id is not None and doc_id not in docs:
        raise KeyError(f"document {doc_id!r} not in {data}")
    doc = docs[doc_id] if doc_id is not None else corpus[0]
    graph = build_graph(doc, vocab)
    head = f"# doc={doc.id} words={graph.n_words} sentences={graph.n_sentences} edges={graph.n_edges}"
    return head + "\n" + graph.dump()

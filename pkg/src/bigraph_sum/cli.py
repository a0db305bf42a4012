"""Command-line entry point (``bigraph-sum``)."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from . import pipeline
from .config import ConfigError, load_run_config
from .corpus import CorpusError
from .autoenc import CheckpointError, NumericalError
from .features import EmbeddingFormatError
from .rank import BACKENDS, PRESETS

logger = logging.getLogger("bigraph_sum")

# flag name -> RunConfig field; flags default to None so only explicit ones override
_CONFIG_FLAGS = {
    "seed", "preset", "embeddings", "synthetic_embeddings", "jobs", "max_sentences", "max_tokens",
    "vocab_size", "prune_frac", "lr", "batch_size", "dropout", "warmup_steps", "steps", "kl_coef",
    "hidden_dim", "latent_dim", "freeze_initializer", "log_every", "method", "backend", "k",
    "beta_sim", "beta_far", "pairing",
}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="worker processes for per-document work")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--embeddings", help="word-vector text file (token followed by floats)")
    p.add_argument("--synthetic-embeddings", type=int, metavar="SEED",
                   help="use the deterministic synthetic word-vector table")
    p.add_argument("--max-sentences", type=int)
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--log-level", default="INFO")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bigraph-sum", description="Bipartite graph autoencoder summarization")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pretrain", help="train the graph autoencoder")
    _common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    for name, kind in (("lr", float), ("batch-size", int), ("dropout", float), ("warmup-steps", int),
                       ("steps", int), ("kl-coef", float), ("hidden-dim", int), ("latent-dim", int),
                       ("log-every", int), ("vocab-size", int), ("prune-frac", float)):
        p.add_argument(f"--{name}", type=kind)
    p.add_argument("--freeze-initializer", action="store_const", const=True)

    p = sub.add_parser("embed", help="write sentence embeddings")
    _common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("summarize", help="extract summaries")
    _common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--method", choices=pipeline.ALL_METHODS)
    p.add_argument("--backend", choices=BACKENDS)
    p.add_argument("--k", type=int)
    p.add_argument("--beta-sim", type=float)
    p.add_argument("--beta-far", type=float)

    p = sub.add_parser("oracle", help="greedy ROUGE oracle extracts")
    _common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int)

    p = sub.add_parser("evaluate", help="score summaries against references")
    _common(p)
    p.add_argument("--summaries", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="report path stem; .json and .csv are written")
    p.add_argument("--pairing", choices=("article", "reference", "oracle"))
    p.add_argument("--k", type=int, help="oracle size for --pairing oracle")
    p.add_argument("--method", choices=pipeline.ALL_METHODS, help="recorded in the report metadata")
    p.add_argument("--backend", choices=BACKENDS)

    p = sub.add_parser("inspect-graph", help="print a document's weighted bipartite graph")
    _common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--doc-id")
    p.add_argument("--checkpoint", help="take the vocabulary from this checkpoint")
    return parser


def _run_config(args):
    overrides = {k: v for k, v in vars(args).items() if k in _CONFIG_FLAGS and v is not None}
    if args.command == "oracle":
        overrides["method"] = "oracle"
    return load_run_config(args.config, overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s %(message)s", stream=sys.stderr)
    try:
        cfg = _run_config(args)
        if args.command == "pretrain":
            out = pipeline.run_pretrain(cfg, args.data, args.out)
            print(f"checkpoint={out}")
        elif args.command == "embed":
            print(f"embeddings={pipeline.run_embed(cfg, args.data, args.checkpoint, args.out)}")
        elif args.command in ("summarize", "oracle"):
            out = pipeline.run_summarize(cfg, args.data, args.out, getattr(args, "checkpoint", None))
            print(f"summaries={out}")
        elif args.command == "evaluate":
            js, cs = pipeline.run_evaluate(cfg, args.summaries, args.data, args.out)
            print(f"report_json={js} report_csv={cs}")
        elif args.command == "inspect-graph":
            print(pipeline.inspect_graph(cfg, args.data, args.doc_id, args.checkpoint))
    except (ConfigError, CorpusError, CheckpointError, EmbeddingFormatError, NumericalError,
            FileNotFoundError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

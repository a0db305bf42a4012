"""ROUGE, extractive fragment statistics, reference baselines and corpus reports."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from . import kernels
from .corpus import Corpus, Document, tokenize
from .rank import Summary, render


@dataclass(frozen=True)
class Score:
    precision: float
    recall: float
    f1: float

    def __iter__(self):
        return iter((self.precision, self.recall, self.f1))


def _prf(overlap: float, n_cand: int, n_ref: int) -> Score:
    if n_cand == 0 or n_ref == 0 or overlap == 0:
        return Score(0.0, 0.0, 0.0)
    p, r = overlap / n_cand, overlap / n_ref
    return Score(p, r, 2 * p * r / (p + r))


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int = 1) -> Score:
    if n < 1:
        raise ValueError("n must be >= 1")
    c, r = _ngrams(candidate, n), _ngrams(reference, n)
    overlap = sum((c & r).values())
    return _prf(overlap, sum(c.values()), sum(r.values()))


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> Score:
    if not candidate or not reference:
        return Score(0.0, 0.0, 0.0)
    return _prf(kernels.lcs_length(candidate, reference), len(candidate), len(reference))


@dataclass(frozen=True)
class Fragment:
    start_a: int
    start_b: int
    length: int


def extractive_fragments(a: Sequence[str], b: Sequence[str]) -> list[Fragment]:
    """Greedy left-to-right longest matches of ``b`` against ``a``."""
    return [Fragment(*f) for f in kernels.greedy_fragments(a, b)]


def fragment_stats(a: Sequence[str], b: Sequence[str]) -> tuple[float, float, float]:
    """``(coverage, density, compression)`` of summary ``b`` against source ``a``."""
    if len(b) == 0:
        raise ValueError("empty summary")
    frags = extractive_fragments(a, b)
    coverage = sum(f.length for f in frags) / len(b)
    density = sum(f.length**2 for f in frags) / len(b)
    return coverage, density, len(a) / len(b)


def _selection_tokens(document: Document, indices: Iterable[int]) -> list[str]:
    return [t for i in sorted(indices) for t in document.sentences[i].tokens]


def oracle_summary(document: Document, reference: Optional[Sequence[str]] = None, k: int = 3) -> Summary:
    """Greedy selection maximizing the mean of ROUGE-1 and ROUGE-2 F1 against the reference.

    Stops early once no remaining sentence raises the objective.
    """
    ref = list(reference) if reference is not None else document.reference_tokens
    if not ref:
        raise ValueError(f"{document.id}: empty reference")
    chosen: list[int] = []
    best = 0.0
    while len(chosen) < k:
        pick, pick_score = None, best
        for i in range(len(document.sentences)):
            if i in chosen:
                continue
            cand = _selection_tokens(document, chosen + [i])
            s = 0.5 * (rouge_n(cand, ref, 1).f1 + rouge_n(cand, ref, 2).f1)
            if s > pick_score:
                pick, pick_score = i, s
        if pick is None:
            break
        chosen.append(pick)
        best = pick_score
    idx = tuple(sorted(chosen))
    return Summary(document.id, idx, render(document, idx))


def lead_baseline(document: Document, k: int = 3) -> Summary:
    idx = tuple(range(min(k, len(document.sentences))))
    return Summary(document.id, idx, render(document, idx))


METRICS = ("rouge1", "rouge2", "rougeL", "coverage", "density", "compression")
PAIRINGS = ("article", "reference", "oracle")


@dataclass
class EvalReport:
    rows: list[dict]
    means: dict
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {"metadata": self.metadata, "means": self.means, "n_documents": len(self.rows), "documents": self.rows}
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("id",) + METRICS)
        for row in self.rows:
            writer.writerow([row["id"]] + [repr(float(row[m]["f1"] if m.startswith("rouge") else row[m])) for m in METRICS])
        return buf.getvalue()

    def write(self, stem) -> tuple[Path, Path]:
        stem = Path(stem)
        stem.parent.mkdir(parents=True, exist_ok=True)
        js, cs = stem.with_suffix(".json"), stem.with_suffix(".csv")
        js.write_text(self.to_json(), encoding="utf-8")
        cs.write_text(self.to_csv(), encoding="utf-8")
        return js, cs


def evaluate_corpus(summaries: Sequence[Summary], corpus: Corpus, pairing: str = "article",
                    oracle_k: int = 3, metadata: Optional[dict] = None) -> EvalReport:
    """Per-document ROUGE against references plus fragment statistics.

    ``pairing`` picks the source text the system summary is compared to for
    coverage/density/compression: the article, the reference, or the greedy
    oracle extract.
    """
    if pairing not in PAIRINGS:
        raise ValueError(f"unknown pairing {pairing!r}")
    if not summaries:
        raise ValueError("no summaries to evaluate")
    docs = corpus.by_id()
    missing = [s.doc_id for s in summaries if s.doc_id not in docs]
    if missing:
        raise KeyError(f"summaries without a corpus document: {', '.join(missing)}")
    no_ref = [s.doc_id for s in summaries if not docs[s.doc_id].reference_summary]
    if no_ref:
        raise ValueError(f"documents without a reference summary: {', '.join(no_ref)}")

    rows = []
    for s in sorted(summaries, key=lambda s: s.doc_id):
        doc = docs[s.doc_id]
        ref = doc.reference_tokens
        cand = tokenize(s.text)
        if pairing == "article":
            source = doc.tokens
        elif pairing == "reference":
            source = ref
        else:
            source = tokenize(oracle_summary(doc, ref, oracle_k).text)
        row = {"id": s.doc_id}
        for name, sc in (("rouge1", rouge_n(cand, ref, 1)), ("rouge2", rouge_n(cand, ref, 2)), ("rougeL", rouge_l(cand, ref))):
            row[name] = {"precision": sc.precision, "recall": sc.recall, "f1": sc.f1}
        if cand:
            row["coverage"], row["density"], row["compression"] = fragment_stats(source, cand)
        else:
            row["coverage"] = row["density"] = row["compression"] = 0.0
        rows.append(row)

    n = len(rows)
    means = {m: sum(r[m]["f1"] for r in rows) / n for m in ("rouge1", "rouge2", "rougeL")}
    means.update({m: sum(r[m] for r in rows) / n for m in ("coverage", "density", "compression")})
    meta = dict(metadata or {})
    meta["pairing"] = pairing
    return EvalReport(rows, means, meta)

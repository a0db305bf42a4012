"""Document ingestion: sentence splitting, tokenization, vocabulary and TF-IDF.

Datasets are JSON Lines, one document per line::

    {"id": "doc-1", "text": "Full article text ...", "summary": "optional"}
    {"id": "doc-2", "sentences": ["First sentence.", "Second one."]}
"""

from __future__ import annotations

import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

logger = logging.getLogger(__name__)

MAX_SENTENCES = 50
MAX_TOKENS = 512
STOPWORDS_RESOURCE = "data/stopwords.txt"

# Lowercased forms, without the trailing period.
ABBREVIATIONS = frozenset(
    """
    mr mrs ms dr prof sr jr st mt ft gen sen rep gov lt col capt sgt cpl maj
    adm rev hon pres supt det insp messrs mme mlle
    inc ltd co corp bros llc plc dept univ assn est
    vs etc al approx fig no nos vol pp ed eds
    jan feb mar apr jun jul aug sep sept oct nov dec
    mon tue tues wed thu thur thurs fri sat sun
    u.s u.k u.n e.g i.e a.m p.m d.c
    """.split()
)

_BOUNDARY = re.compile(r"""[.!?]+["')\]]*(?=\s+["'(\[]?[A-Z]|\s*$)""")
_TOKEN = re.compile(r"[^\W_]+")


class CorpusError(ValueError):
    """Raised for malformed dataset files or unusable corpora."""


@lru_cache(maxsize=None)
def stopwords() -> frozenset:
    text = resources.files(__package__).joinpath(STOPWORDS_RESOURCE).read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def _is_abbreviation(text: str, end: int) -> bool:
    # `end` is the index of the terminal '.'; inspect the word right before it
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start:end].lstrip("\"'([").lower()
    if not word:
        return False
    if word in ABBREVIATIONS:
        return True
    # single-letter initials such as "J. Smith"
    return len(word) == 1 and word.isalpha()


def split_sentences(raw: str) -> list[str]:
    """Rule-based sentence splitter.

    A boundary is a run of ``.``, ``!`` or ``?`` (plus closing quotes or
    brackets) followed by whitespace and a capital letter, or by the end of
    the text. Periods that end a known abbreviation or an initial do not
    split.
    """
    sentences = []
    start = 0
    for match in _BOUNDARY.finditer(raw):
        punct = raw[match.start():match.end()].rstrip("\"')]")
        if punct == "." and match.end() < len(raw.rstrip()) and _is_abbreviation(raw, match.start()):
            continue
        piece = raw[start:match.end()].strip()
        if piece:
            sentences.append(piece)
        start = match.end()
    tail = raw[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def tokenize(sentence: str, for_graph: bool = False) -> list[str]:
    """Lowercase and split on whitespace/punctuation.

    With ``for_graph`` the shipped stopword list is applied as well.
    """
    tokens = _TOKEN.findall(sentence.lower())
    if for_graph:
        stop = stopwords()
        tokens = [t for t in tokens if t not in stop]
    return tokens


@dataclass(frozen=True)
class Sentence:
    index: int
    raw: str
    tokens: tuple[str, ...]
    graph_tokens: tuple[str, ...]


@dataclass(frozen=True)
class Document:
    id: str
    sentences: tuple[Sentence, ...]
    reference_summary: Optional[str] = None

    @property
    def tokens(self) -> list[str]:
        return [t for s in self.sentences for t in s.tokens]

    @property
    def reference_tokens(self) -> list[str]:
        return tokenize(self.reference_summary or "")

    def to_dict(self) -> dict:
        out = {"id": self.id, "sentences": [s.raw for s in self.sentences]}
        if self.reference_summary is not None:
            out["summary"] = self.reference_summary
        return out


def preprocess(
    doc_id: str,
    raw_sentences: Sequence[str],
    summary: Optional[str] = None,
    max_sentences: int = MAX_SENTENCES,
    max_tokens: int = MAX_TOKENS,
) -> Document:
    """Tokenize already-split sentences and apply the length caps.

    Sentences without any token are dropped. The first ``max_sentences``
    survivors are kept, then trailing sentences are cut until the full token
    stream fits in ``max_tokens``. A single over-long first sentence keeps
    its first ``max_tokens`` tokens.
    """
    kept: list[tuple[str, list[str]]] = []
    for raw in raw_sentences:
        raw = raw.strip()
        tokens = tokenize(raw)
        if tokens:
            kept.append((raw, tokens))
    kept = kept[:max_sentences]

    sentences = []
    budget = max_tokens
    for raw, tokens in kept:
        if len(tokens) > budget:
            if sentences:
                break
            tokens = tokens[:budget]
        budget -= len(tokens)
        stop = stopwords()
        graph_tokens = tuple(t for t in tokens if t not in stop)
        sentences.append(Sentence(len(sentences), raw, tuple(tokens), graph_tokens))
    return Document(doc_id, tuple(sentences), summary)


@dataclass
class Corpus:
    documents: list[Document] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __getitem__(self, i: int) -> Document:
        return self.documents[i]

    def by_id(self) -> dict[str, Document]:
        return {d.id: d for d in self.documents}

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(d.to_dict(), ensure_ascii=False, sort_keys=True) + "\n" for d in self.documents
        )


def parse_record(record: dict, **caps) -> Document:
    if not isinstance(record, dict) or not isinstance(record.get("id"), str):
        raise CorpusError("record needs a string 'id'")
    if "sentences" in record:
        raw = record["sentences"]
        if not isinstance(raw, list) or not all(isinstance(s, str) for s in raw):
            raise CorpusError("'sentences' must be a list of strings")
    elif isinstance(record.get("text"), str):
        raw = split_sentences(record["text"])
    else:
        raise CorpusError("record needs 'text' or 'sentences'")
    summary = record.get("summary")
    if summary is not None and not isinstance(summary, str):
        raise CorpusError("'summary' must be a string")
    return preprocess(record["id"], raw, summary, **caps)


def iter_records(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None


def load_corpus(path, limit: Optional[int] = None, **caps) -> Corpus:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset not found: {path}")
    docs: list[Document] = []
    for lineno, record in iter_records(path):
        if limit is not None and len(docs) >= limit:
            break
        try:
            doc = parse_record(record, **caps)
        except CorpusError as exc:
            raise CorpusError(f"{path}:{lineno}: {exc}") from None
        if not doc.sentences:
            logger.warning("skipping document %s (line %d): no sentences after preprocessing", doc.id, lineno)
            continue
        docs.append(doc)
    return Corpus(docs)


def corpus_from_texts(texts: Iterable[tuple[str, str]]) -> Corpus:
    """Convenience constructor from ``(id, text)`` pairs."""
    docs = [parse_record({"id": i, "text": t}) for i, t in texts]
    return Corpus([d for d in docs if d.sentences])


@dataclass(frozen=True)
class TfIdfStats:
    n_docs: int
    doc_freq: dict[str, int]
    term_freqs: list[Counter]

    def idf(self, token: str) -> float:
        return math.log((1 + self.n_docs) / (1 + self.doc_freq.get(token, 0))) + 1.0


def compute_tfidf(corpus: Corpus) -> TfIdfStats:
    """Smoothed IDF, ``ln((1+N)/(1+df)) + 1``, over graph tokens."""
    if not len(corpus):
        raise CorpusError("empty corpus")
    term_freqs = [Counter(t for s in doc.sentences for t in s.graph_tokens) for doc in corpus]
    df: Counter = Counter()
    for tf in term_freqs:
        df.update(tf.keys())
    return TfIdfStats(len(corpus), dict(df), term_freqs)


@dataclass(frozen=True)
class Vocab:
    id_to_token: tuple[str, ...]
    doc_freq: dict[str, int]
    tfidf: dict[str, float]
    token_to_id: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "token_to_id", {t: i for i, t in enumerate(self.id_to_token)})

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def filter(self, tokens: Iterable[str]) -> list[str]:
        return [t for t in tokens if t in self.token_to_id]

    def ids(self, tokens: Iterable[str]) -> list[int]:
        return [self.token_to_id[t] for t in tokens if t in self.token_to_id]

    @classmethod
    def from_tokens(cls, tokens: Sequence[str]) -> "Vocab":
        """Rebuild a bare vocabulary (no statistics) from its id order."""
        return cls(tuple(tokens), {}, {})


def build_vocab(corpus: Corpus, max_size: int = 50_000, prune_frac: float = 0.10) -> Vocab:
    """Frequency-capped vocabulary with the lowest corpus TF-IDF tokens pruned.

    Corpus TF-IDF of a token is its total count times its IDF. Ties at the
    prune boundary drop the lexicographically larger token first.
    """
    stats = compute_tfidf(corpus)
    counts: Counter = Counter()
    for tf in stats.term_freqs:
        counts.update(tf)
    ranked = sorted(counts, key=lambda t: (-counts[t], t))[:max_size]
    score = {t: counts[t] * stats.idf(t) for t in ranked}

    n_prune = math.floor(prune_frac * len(ranked))
    order = sorted(ranked, reverse=True)
    order.sort(key=lambda t: score[t])
    pruned = set(order[:n_prune])
    kept = tuple(t for t in ranked if t not in pruned)
    return Vocab(kept, {t: stats.doc_freq[t] for t in kept}, {t: score[t] for t in kept})

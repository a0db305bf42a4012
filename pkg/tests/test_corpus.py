import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bigraph_sum.corpus import (
    Corpus,
    CorpusError,
    build_vocab,
    compute_tfidf,
    corpus_from_texts,
    load_corpus,
    parse_record,
    preprocess,
    split_sentences,
    stopwords,
    tokenize,
)

from .conftest import write_lines


def test_split_basic():
    assert split_sentences("Messi scored. Fans cheered!") == ["Messi scored.", "Fans cheered!"]


def test_split_abbreviation_guard():
    assert split_sentences("Dr. Smith arrived.") == ["Dr. Smith arrived."]
    assert split_sentences("He met J. Smith. Then left.") == ["He met J. Smith.", "Then left."]


def test_split_empty():
    assert split_sentences("") == []
    assert split_sentences("   ") == []


def test_split_question_and_quotes():
    out = split_sentences('Is it true? "Yes." She nodded.')
    assert out == ["Is it true?", '"Yes."', "She nodded."]


def test_split_requires_capital():
    assert split_sentences("pi is 3.14 and e is 2.71. Done.") == ["pi is 3.14 and e is 2.71.", "Done."]


@given(st.lists(st.sampled_from(["Alpha", "beta", "Gamma.", "delta!", "Eps?", "x", "Dr.", "3.5"]), max_size=30))
def test_split_reconstructs_text(words):
    raw = " ".join(words)
    pieces = split_sentences(raw)
    assert "".join(pieces).replace(" ", "") == raw.replace(" ", "")


def test_tokenize_examples():
    assert tokenize("Messi shocked Beijing.", for_graph=True) == ["messi", "shocked", "beijing"]
    assert tokenize("the of and", for_graph=True) == []
    assert tokenize("U.S.-based firm") == ["u", "s", "based", "firm"]


def test_stopword_list_shipped():
    sw = stopwords()
    assert 150 <= len(sw) <= 220
    assert {"the", "of", "and"} <= sw


def test_graph_tokens_subset_of_tokens(small_corpus):
    for doc in small_corpus:
        for i, s in enumerate(doc.sentences):
            assert s.index == i
            assert set(s.graph_tokens) <= set(s.tokens)


def test_sentence_cap():
    text = " ".join(f"Sentence number {i} here." for i in range(60))
    doc = parse_record({"id": "d", "text": text})
    assert len(doc.sentences) == 50
    assert doc.sentences[-1].raw == "Sentence number 49 here."


def test_token_budget_cuts_trailing_sentences():
    sents = ["one two three four"] * 10
    doc = preprocess("d", sents, max_tokens=10)
    assert [len(s.tokens) for s in doc.sentences] == [4, 4]
    long = preprocess("d", ["a " * 20, "b c"], max_tokens=5)
    assert len(long.sentences) == 1 and len(long.sentences[0].tokens) == 5


def test_preprocess_idempotent(small_corpus):
    for doc in small_corpus:
        again = preprocess(doc.id, [s.raw for s in doc.sentences], doc.reference_summary)
        assert again == doc


def test_load_corpus_limit_and_order(tmp_path):
    rows = [{"id": f"d{i}", "text": f"Doc {i} says hello. It ends."} for i in range(3)]
    path = write_lines(tmp_path / "c.jsonl", rows)
    assert [d.id for d in load_corpus(path)] == ["d0", "d1", "d2"]
    assert len(load_corpus(path, limit=2)) == 2


def test_load_corpus_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_corpus(tmp_path / "missing.jsonl")
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "a", "text": "Fine."}\n{not json}\n', encoding="utf-8")
    with pytest.raises(CorpusError, match=":2:"):
        load_corpus(bad)
    nofield = write_lines(tmp_path / "nf.jsonl", [{"id": "a"}])
    with pytest.raises(CorpusError, match=":1:"):
        load_corpus(nofield)


def test_load_corpus_skips_empty(tmp_path, caplog):
    path = write_lines(tmp_path / "e.jsonl", [{"id": "a", "text": "..."}, {"id": "b", "text": "Real words."}])
    corpus = load_corpus(path)
    assert [d.id for d in corpus] == ["b"]
    assert "skipping document a" in caplog.text


def test_sentences_field_accepted():
    doc = parse_record({"id": "x", "sentences": ["First one.", "Second one."], "summary": "S."})
    assert len(doc.sentences) == 2 and doc.reference_summary == "S."


def test_serialization_deterministic(small_jsonl):
    a, b = load_corpus(small_jsonl), load_corpus(small_jsonl)
    assert a.to_jsonl() == b.to_jsonl()
    first = json.loads(a.to_jsonl().splitlines()[0])
    assert set(first) == {"id", "sentences", "summary"}


def test_idf_closed_forms():
    corpus = corpus_from_texts([("a", "Apple banana."), ("b", "Apple cherry."), ("c", "Apple date.")])
    stats = compute_tfidf(corpus)
    assert stats.idf("apple") == pytest.approx(1.0)
    assert stats.idf("banana") == pytest.approx(math.log(4 / 2) + 1)
    assert stats.idf("unseen") == pytest.approx(math.log(4 / 1) + 1)


def test_tfidf_empty_corpus():
    with pytest.raises(CorpusError):
        compute_tfidf(Corpus([]))


def _corpus_with_tokens(tokens):
    return Corpus([preprocess("d", [" ".join(tokens)])])


def test_vocab_prune_count():
    tokens = [f"tok{i:02d}" for i in range(40)]
    vocab = build_vocab(_corpus_with_tokens(tokens))
    assert len(vocab) == 36
    assert sorted(vocab.token_to_id.values()) == list(range(36))


def test_vocab_cap():
    tokens = [f"tok{i:03d}" for i in range(100)]
    vocab = build_vocab(_corpus_with_tokens(tokens), max_size=10, prune_frac=0.0)
    assert len(vocab) == 10


def test_vocab_tie_break_prunes_larger_token():
    # all scores tie; one token is pruned from 10 and it must be the largest
    tokens = [f"zq{c}" for c in "abcdefghij"]
    vocab = build_vocab(_corpus_with_tokens(tokens))
    assert "zqj" not in vocab and "zqa" in vocab and len(vocab) == 9


def test_vocab_prunes_lowest_scores():
    docs = [preprocess(f"d{i}", ["common rare%d filler" % i, "common"]) for i in range(10)]
    vocab = build_vocab(Corpus(docs), prune_frac=0.5)
    assert "common" in vocab


@settings(max_examples=30, deadline=None)
@given(st.lists(st.text(alphabet="abcdefg", min_size=1, max_size=4), min_size=1, max_size=60),
       st.integers(1, 30), st.floats(0.0, 0.5))
def test_vocab_bound(words, max_size, frac):
    vocab = build_vocab(_corpus_with_tokens(words), max_size=max_size, prune_frac=frac)
    assert len(vocab) <= max_size * (1 - frac) + 1


def test_graph_tokens_after_filter_are_in_vocab(small_corpus):
    vocab = build_vocab(small_corpus)
    for doc in small_corpus:
        for s in doc.sentences:
            assert all(t in vocab for t in vocab.filter(s.graph_tokens))

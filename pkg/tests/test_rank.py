import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bigraph_sum.corpus import preprocess
from bigraph_sum.rank import (
    PageRankError,
    RankConfig,
    TfIdfBackend,
    dasg_bucket,
    dasg_centrality,
    default_bucket_width,
    far_centrality,
    normalize_similarity,
    pacsum_centrality,
    pagerank_centrality,
    preset,
    rank_embeddings,
    select_sentences,
    similarity_matrix,
    summarize,
)
from bigraph_sum.corpus import Corpus

from .oracles import dasg_direct, far_direct, pacsum_direct, pagerank_eigen


def _sym(offdiag, m):
    e = np.zeros((m, m))
    iu = np.triu_indices(m, 1)
    e[iu] = offdiag
    return e + e.T


def test_similarity_examples():
    v = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert similarity_matrix(v, "dot")[0, 1] == 11
    u = np.array([[0.6, 0.8], [0.6, 0.8]])
    assert similarity_matrix(u, "cosine")[0, 1] == pytest.approx(1.0)
    o = np.array([[1.0, 0.0], [0.0, 2.0]])
    assert similarity_matrix(o, "dot")[0, 1] == 0 and similarity_matrix(o, "cosine")[0, 1] == 0


def test_cosine_zero_row_and_range(rng):
    v = rng.normal(size=(6, 4))
    v[2] = 0
    c = similarity_matrix(v, "cosine")
    assert np.all(c[2] == 0)
    assert c.min() >= -1 and c.max() <= 1
    with pytest.raises(ValueError):
        similarity_matrix(v, "euclid")


def test_normalize_example():
    e = normalize_similarity(_sym([0.2, 0.5, 0.8], 3), 0.5)
    assert np.allclose(e[np.triu_indices(3, 1)], [0.0, 0.0, 0.3])
    assert np.all(np.diag(e) == 0)


def test_normalize_beta_zero_and_constant(rng):
    raw = rng.normal(size=(5, 5))
    off = ~np.eye(5, dtype=bool)
    e = normalize_similarity(raw, 0.0)
    assert np.allclose(e[off], raw[off] - raw[off].min())
    assert np.all(normalize_similarity(np.full((4, 4), 0.7), 0.3) == 0)
    assert normalize_similarity(np.array([[5.0]]), 0.5).shape == (1, 1)
    assert normalize_similarity(np.array([[5.0]]), 0.5)[0, 0] == 0


def test_pacsum_example():
    e = _sym([0.3, 0.1, 0.2], 3)
    assert np.allclose(pacsum_centrality(e, -1.0, 1.0), [0.4, -0.1, -0.3])


def test_pacsum_half_row_sum(rng):
    e = _sym(rng.random(10), 5)
    assert np.allclose(pacsum_centrality(e, 0.5, 0.5), e.sum(axis=1) / 2)


def test_far_examples():
    e = _sym([0.2, 0.6, 1.0], 3)
    clipped = np.maximum(e - 0.4, 0)
    assert np.allclose(far_centrality(e, -1, 1, 0.5), pacsum_centrality(clipped, -1, 1))
    assert np.allclose(clipped[np.triu_indices(3, 1)], [0, 0.2, 0.6])


def test_far_boundaries(rng):
    e = normalize_similarity(rng.normal(size=(6, 6)), 0.3)
    assert np.allclose(far_centrality(e, -0.5, 0.9, 0.0), pacsum_centrality(e, -0.5, 0.9))
    assert np.all(far_centrality(e, -0.5, 0.9, 1.0) == 0)


def test_dasg_buckets_and_example():
    assert list(dasg_bucket(np.array([1, 2, 3, 7]), 1)) == [1, 2, 3, 3]
    e = np.ones((4, 4)) - np.eye(4)
    s = dasg_centrality(e, (-1.5, -0.5, -1.0), (1.0, 1.5, 2.0), 1)
    assert s[0] == pytest.approx(4.5)
    assert np.all(dasg_centrality(e, (0, 0, 0), (0, 0, 0), 1) == 0)
    assert default_bucket_width(10) == 4 and default_bucket_width(1) == 1
    with pytest.raises(ValueError):
        dasg_centrality(e, (1, 2), (1, 2, 3))


def test_pagerank_examples():
    assert np.allclose(pagerank_centrality(_sym([0.4], 2)), [0.5, 0.5])
    assert np.allclose(pagerank_centrality(np.zeros((4, 4))), 0.25)
    chain = _sym([0.5, 0.0, 2.0], 3)
    assert np.allclose(pagerank_centrality(chain, tol=1e-14, max_iter=10_000), pagerank_eigen(chain, 0.85), atol=1e-10)


def test_pagerank_nonconvergence_carries_iterate():
    e = _sym([1.0, 0.0, 3.0], 3)
    with pytest.raises(PageRankError) as info:
        pagerank_centrality(e, tol=0.0, max_iter=3)
    assert info.value.scores.shape == (3,)
    with pytest.raises(ValueError):
        pagerank_centrality(-np.ones((2, 2)))


def test_formula_oracles_sampled(rng):
    for _ in range(100):
        m = int(rng.integers(1, 21))
        e = normalize_similarity(rng.normal(size=(m, m)), rng.random())
        l1, l2, beta, w = rng.normal(), rng.normal(), rng.random(), int(rng.integers(1, 8))
        lp, ln = tuple(rng.normal(size=3)), tuple(rng.normal(size=3))
        assert np.allclose(pacsum_centrality(e, l1, l2), pacsum_direct(e, l1, l2), rtol=0, atol=1e-12)
        assert np.allclose(far_centrality(e, l1, l2, beta), far_direct(e, l1, l2, beta), rtol=0, atol=1e-12)
        assert np.allclose(dasg_centrality(e, lp, ln, w), dasg_direct(e, lp, ln, w), rtol=0, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 15), st.integers(0, 2**31 - 1))
def test_pagerank_probability_vector(m, seed):
    e = normalize_similarity(np.random.default_rng(seed).normal(size=(m, m)), 0.4)
    p = pagerank_centrality(e)
    assert np.all(p >= 0)
    assert abs(p.sum() - 1) < 1e-9


@pytest.mark.parametrize("method", ["pacsum", "far", "dasg"])
def test_argmax_scale_invariance(method, rng):
    cfg = preset("cnndm", method)
    for _ in range(20):
        emb = rng.normal(size=(int(rng.integers(4, 12)), 5))
        a = select_sentences(rank_embeddings(emb, cfg), 3).indices
        b = select_sentences(rank_embeddings(emb * 3.7, cfg), 3).indices
        assert a == b


def test_select_examples():
    assert select_sentences([0.1, 0.9, 0.5], 2).indices == (1, 2)
    assert select_sentences([1.0] * 5, 3).indices == (0, 1, 2)
    assert select_sentences([0.3, 0.1], 5).indices == (0, 1)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(-40, 40), min_size=1, max_size=20), st.integers(1, 6))
def test_select_monotone_invariance(scores, k):
    # a quarter grid keeps exp strictly monotone in floating point
    s = np.array(scores) / 4.0
    assert select_sentences(s, k).indices == select_sentences(np.exp(s) * 2 + 1, k).indices


def test_rank_config_validation():
    with pytest.raises(ValueError):
        RankConfig(k=0)
    with pytest.raises(ValueError):
        RankConfig(damping=1.0)
    with pytest.raises(ValueError):
        RankConfig(method="bogus")
    with pytest.warns(UserWarning, match="lambda1"):
        RankConfig(lambda1=-1.0, lambda2=1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        RankConfig(lambda1=0.2, lambda2=0.8)


def test_presets():
    assert preset("cnndm").k == 3 and preset("multinews").k == 9
    far = preset("far-cnndm")
    assert (far.method, far.lambda1, far.lambda2) == ("far", -0.5, 0.9)
    assert preset("cnndm", "dasg").beta_sim == 0.05
    assert preset("multinews", "dasg").beta_sim == 0.8
    with pytest.raises(ValueError):
        preset("xsum")
    assert preset("cnndm", "lexrank").kind == "cosine"
    assert preset("cnndm", "textrank").kind == "dot"


DOC = [
    "Storm floods the coastal town overnight.",
    "Residents of the coastal town fled the storm.",
    "Officials praised rescue crews after the flood.",
    "A local bakery reopened on Tuesday.",
    "Rescue crews searched the flooded town streets.",
]


@pytest.mark.parametrize("method", ["textrank", "lexrank", "pacsum", "far", "dasg"])
def test_summarize_tfidf_deterministic(method):
    doc = preprocess("d", DOC)
    cfg = preset("cnndm", method)
    a = summarize(doc, "tfidf", cfg, tfidf=TfIdfBackend.fit(Corpus([doc])))
    b = summarize(doc, "tfidf", cfg)
    assert a == b
    assert len(a.indices) == 3 and list(a.indices) == sorted(a.indices)
    assert a.text == " ".join(doc.sentences[i].raw for i in a.indices)


def test_summarize_single_sentence():
    doc = preprocess("one", ["Only this sentence here."])
    for method in ("pacsum", "lexrank"):
        assert summarize(doc, "tfidf", preset("cnndm", method)).indices == (0,)


def test_summarize_errors():
    doc = preprocess("d", DOC)
    with pytest.raises(ValueError):
        summarize(doc, "bert", preset("cnndm"))
    with pytest.raises(ValueError):
        summarize(doc, "bigae", preset("cnndm"))

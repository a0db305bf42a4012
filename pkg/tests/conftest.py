import json

import numpy as np
import pytest

from bigraph_sum.bipartite import graph_from_edges
from bigraph_sum.corpus import Corpus, parse_record
from bigraph_sum.synthetic import make_records, write_jsonl

# Figure-1 style layout: sentences a, b, c; words w0..w4
FIG1_EDGES = [(0, 0), (1, 0), (0, 1), (2, 1), (3, 1), (3, 2), (4, 2)]


@pytest.fixture
def fig1_graph():
    return graph_from_edges(list(range(5)), [0, 1, 2], FIG1_EDGES, words=[f"w{i}" for i in range(5)])


@pytest.fixture
def six_node_graph():
    return graph_from_edges([0, 1, 2, 3], [0, 1], [(0, 0), (1, 0), (2, 0), (2, 1), (3, 1)],
                            sentence_tokens=[[0, 1, 2, 1], [2, 3]])


@pytest.fixture
def small_records():
    return make_records(12, seed=3)


@pytest.fixture
def small_corpus(small_records):
    return Corpus([parse_record(r) for r in small_records])


@pytest.fixture
def small_jsonl(tmp_path, small_records):
    return write_jsonl(small_records, tmp_path / "data.jsonl")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_lines(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path

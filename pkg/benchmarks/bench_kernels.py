"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each row checks that both implementations agree before reporting timings.
"""

import argparse
import timeit

import numpy as np

from bigraph_sum import _kernels_py
from bigraph_sum.bipartite import _csr
from bigraph_sum.synthetic import random_bipartite_graph

try:
    from bigraph_sum import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def betweenness_case(n_words, n_sent, p, seed=0):
    g = random_bipartite_graph(np.random.default_rng(seed), n_words, n_sent, p)
    e = np.stack([g.edge_word, g.edge_sent + n_words], axis=1)
    indptr, indices, eid = _csr(g.n_nodes, e[:, 0], e[:, 1])
    return f"betweenness {n_words}w x {n_sent}s ({len(e)} edges)", (indptr, indices, eid, len(e)), "edge_betweenness_csr"


def token_case(kernel, n, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 60, n).tolist()
    b = rng.integers(0, 60, n // 4).tolist()
    return f"{kernel} |A|={n} |B|={n // 4}", (a, b), kernel


def _same(x, y):
    if isinstance(x, np.ndarray):
        return np.allclose(x, y, rtol=0, atol=1e-12)
    if isinstance(x, list):
        return [tuple(v) for v in x] == [tuple(v) for v in y]
    return x == y


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _compiled is None:
        print("compiled extension not importable; build with `pip install --no-build-isolation -e .`")
        return
    cases = [
        betweenness_case(60, 15, 0.2),
        betweenness_case(250, 40, 0.1),
        betweenness_case(600, 50, 0.05),
        token_case("lcs_length", 400),
        token_case("lcs_length", 2000),
        token_case("greedy_fragments", 400),
        token_case("greedy_fragments", 2000),
    ]
    print(f"{'case':<44}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for label, call_args, name in cases:
        fast, slow = getattr(_compiled, name), getattr(_kernels_py, name)
        r_fast, r_slow = fast(*call_args), slow(*call_args)
        assert _same(r_fast, r_slow), label
        t_slow = min(timeit.repeat(lambda: slow(*call_args), number=1, repeat=args.repeat)) * 1e3
        t_fast = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat)) * 1e3
        print(f"{label:<44}{t_slow:>12.2f}{t_fast:>12.3f}{t_slow / t_fast:>9.0f}x")


if __name__ == "__main__":
    main()

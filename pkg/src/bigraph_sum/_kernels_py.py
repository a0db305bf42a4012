"""Pure-Python kernels. Same signatures and summation order as ``_kernels.pyx``."""

from collections import deque

import numpy as np


def edge_betweenness_csr(indptr, indices, edge_ids, n_edges):
    """Brandes accumulation over an undirected graph in CSR form.

    ``edge_ids[k]`` is the edge index of adjacency entry ``k``. Returns the
    sum over ordered source/target pairs of the fraction of shortest paths
    through each edge (each unordered pair counted twice).
    """
    indptr = [int(x) for x in indptr]
    indices = [int(x) for x in indices]
    edge_ids = [int(x) for x in edge_ids]
    n = len(indptr) - 1
    score = [0.0] * n_edges
    for s in range(n):
        dist = [-1] * n
        sigma = [0.0] * n
        delta = [0.0] * n
        dist[s] = 0
        sigma[s] = 1.0
        order = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            dv = dist[v]
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    queue.append(w)
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
        for w in reversed(order):
            dw = dist[w]
            coeff = (1.0 + delta[w]) / sigma[w]
            for k in range(indptr[w], indptr[w + 1]):
                v = indices[k]
                if dist[v] == dw - 1:
                    c = sigma[v] * coeff
                    score[edge_ids[k]] += c
                    delta[v] += c
    return np.asarray(score, dtype=np.float64)


def lcs_length(a, b):
    a = list(a)
    b = list(b)
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, 1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = cur[j - 1] if cur[j - 1] > prev[j] else prev[j]
        prev = cur
    return prev[-1]


def greedy_fragments(a, b):
    """Scan ``b`` left to right taking the longest match against ``a``.

    Returns a list of ``(start_a, start_b, length)``; ties on length keep the
    leftmost position in ``a``.
    """
    a = list(a)
    b = list(b)
    out = []
    i = 0
    nb, na = len(b), len(a)
    while i < nb:
        best, best_j = 0, -1
        for j in range(na):
            k = 0
            while i + k < nb and j + k < na and a[j + k] == b[i + k]:
                k += 1
            if k > best:
                best, best_j = k, j
        if best:
            out.append((best_j, i, best))
            i += best
        else:
            i += 1
    return out

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Must stay numerically identical to ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def edge_betweenness_csr(indptr, indices, edge_ids, Py_ssize_t n_edges):
    cdef const cnp.int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const cnp.int64_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const cnp.int64_t[::1] eid = np.ascontiguousarray(edge_ids, dtype=np.int64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    out = np.zeros(n_edges, dtype=np.float64)
    cdef double[::1] score = out
    cdef cnp.int64_t[::1] dist = np.empty(n, dtype=np.int64)
    cdef double[::1] sigma = np.empty(n, dtype=np.float64)
    cdef double[::1] delta = np.empty(n, dtype=np.float64)
    cdef cnp.int64_t[::1] order = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t s, v, w, k, head, tail, t
    cdef cnp.int64_t dv, dw
    cdef double coeff, c

    for s in range(n):
        for v in range(n):
            dist[v] = -1
            sigma[v] = 0.0
            delta[v] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        # BFS queue doubles as the visit order
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = order[head]
            head += 1
            dv = dist[v]
            for k in range(ip[v], ip[v + 1]):
                w = ix[k]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
        for t in range(tail - 1, -1, -1):
            w = order[t]
            dw = dist[w]
            coeff = (1.0 + delta[w]) / sigma[w]
            for k in range(ip[w], ip[w + 1]):
                v = ix[k]
                if dist[v] == dw - 1:
                    c = sigma[v] * coeff
                    score[eid[k]] += c
                    delta[v] += c
    return out


def lcs_length(a, b):
    cdef const cnp.int64_t[::1] x = np.ascontiguousarray(a, dtype=np.int64)
    cdef const cnp.int64_t[::1] y = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t na = x.shape[0], nb = y.shape[0], i, j
    if na == 0 or nb == 0:
        return 0
    cdef cnp.int64_t[::1] prev = np.zeros(nb + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] cur = np.zeros(nb + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] tmp
    for i in range(na):
        cur[0] = 0
        for j in range(1, nb + 1):
            if x[i] == y[j - 1]:
                cur[j] = prev[j - 1] + 1
            elif cur[j - 1] > prev[j]:
                cur[j] = cur[j - 1]
            else:
                cur[j] = prev[j]
        tmp = prev
        prev = cur
        cur = tmp
    return int(prev[nb])


def greedy_fragments(a, b):
    cdef const cnp.int64_t[::1] x = np.ascontiguousarray(a, dtype=np.int64)
    cdef const cnp.int64_t[::1] y = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t na = x.shape[0], nb = y.shape[0]
    cdef Py_ssize_t i = 0, j, k, best, best_j
    out = []
    while i < nb:
        best = 0
        best_j = -1
        for j in range(na):
            k = 0
            while i + k < nb and j + k < na and x[j + k] == y[i + k]:
                k += 1
            if k > best:
                best = k
                best_j = j
        if best:
            out.append((best_j, i, best))
            i += best
        else:
            i += 1
    return out

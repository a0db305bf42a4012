"""Kernel dispatch: the compiled extension when importable, else pure Python.

Set ``BIGRAPH_SUM_PURE=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("BIGRAPH_SUM_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

edge_betweenness_csr = _impl.edge_betweenness_csr


def _intern(*seqs):
    table: dict = {}
    return [[table.setdefault(t, len(table)) for t in seq] for seq in seqs]


def lcs_length(a, b) -> int:
    """Length of the longest common subsequence of two token sequences."""
    x, y = _intern(a, b)
    return _impl.lcs_length(x, y)


def greedy_fragments(a, b) -> list:
    """Greedy extractive fragments of ``b`` in ``a`` as ``(start_a, start_b, length)``."""
    x, y = _intern(a, b)
    return _impl.greedy_fragments(x, y)

"""Hot search kernels: flat cosine top-k scoring and the HNSW graph.

A compiled Cython extension provides the fast path; a pure-Python/numpy twin
with identical semantics is selected at import time when the extension is
unavailable or when RAGSTACK_PURE_PYTHON=1 is set. `BACKEND` names the active
implementation; `benchmarks/bench_kernels.py` compares the two.
"""

from __future__ import annotations

import os

from . import _hnsw_py as python_backend
from .graph import HnswGraph, assign_levels

if os.environ.get("RAGSTACK_PURE_PYTHON") == "1":
    _impl = python_backend
    BACKEND = "python"
else:
    try:
        from . import _hnsw_cy as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = python_backend
        BACKEND = "python"

score_flat = _impl.score_flat
build_graph = _impl.build_graph
search_graph = _impl.search_graph

__all__ = [
    "BACKEND",
    "HnswGraph",
    "assign_levels",
    "build_graph",
    "python_backend",
    "score_flat",
    "search_graph",
]

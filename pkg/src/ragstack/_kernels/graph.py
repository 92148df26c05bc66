"""HNSW graph data shared by the compiled and pure-Python kernels.

The frozen graph is stored per level as CSR adjacency (indptr over all record
ids, int32 neighbor indices). Node levels are derived from a splitmix64 hash
of (seed, record_id), so level assignment is identical in both backends and
reproducible from the seed recorded in store metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_LEVEL_CAP = 32


@dataclass
class HnswGraph:
    m: int
    ef_construction: int
    seed: int
    entry_point: int
    max_level: int
    levels: np.ndarray  # int32 (n,), max layer of each node
    level_links: list[tuple[np.ndarray, np.ndarray]]  # per level: (indptr int64 (n+1,), indices int32)

    @property
    def count(self) -> int:
        return int(self.levels.shape[0])

    def neighbors(self, node: int, level: int) -> np.ndarray:
        indptr, indices = self.level_links[level]
        return indices[indptr[node] : indptr[node + 1]]


def _splitmix_unit(seed: int, index: int) -> float:
    """Deterministic uniform in (0, 1) from (seed, index); plain integer math."""
    z = (seed + 0x9E3779B97F4A7C15 * (index + 1)) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    z = z ^ (z >> 31)
    return ((z >> 11) + 0.5) / 9007199254740992.0  # / 2**53


def assign_levels(n: int, seed: int, m: int) -> np.ndarray:
    """Exponentially decaying random levels: P(level >= l) ~ (1/m)^l."""
    ml = 1.0 / math.log(m)
    levels = np.empty(n, dtype=np.int32)
    for i in range(n):
        levels[i] = min(int(-math.log(_splitmix_unit(seed, i)) * ml), MAX_LEVEL_CAP)
    return levels


def links_to_csr(n: int, adjacency: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    """Pack per-node neighbor lists for one level into CSR arrays."""
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i, neigh in enumerate(adjacency):
        indptr[i + 1] = indptr[i] + len(neigh)
    indices = np.empty(int(indptr[-1]), dtype=np.int32)
    for i, neigh in enumerate(adjacency):
        indices[indptr[i] : indptr[i + 1]] = neigh
    return indptr, indices

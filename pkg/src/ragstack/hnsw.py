"""HNSW index wrapper: build parameters, search entry point, serialization.

The graph itself lives in `_kernels` (compiled when available). The on-disk
form is a self-versioned little-endian blob stored as `ann.idx` next to the
store's vector file.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels.graph import HnswGraph
from .errors import RagError

_MAGIC = b"VANN"
_VERSION = 1


class CorruptIndexError(RagError):
    """ann.idx bytes do not decode to a valid graph."""


class IncompatibleIndexVersionError(RagError):
    """ann.idx was written by an unknown format version."""


@dataclass(frozen=True)
class AnnParams:
    m: int = 16
    ef_construction: int = 200

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"M must be >= 2, got {self.m}")
        if self.ef_construction < 1:
            raise ValueError(f"ef_construction must be >= 1, got {self.ef_construction}")


class AnnIndex:
    """A built HNSW graph over the first `count` records of a store."""

    def __init__(self, graph: HnswGraph, params: AnnParams):
        self.graph = graph
        self.params = params

    @property
    def count(self) -> int:
        return self.graph.count

    @classmethod
    def build(cls, matrix: np.ndarray, params: AnnParams, seed: int) -> "AnnIndex":
        graph = _kernels.build_graph(matrix, params.m, params.ef_construction, seed)
        return cls(graph, params)

    def search(
        self,
        matrix: np.ndarray,
        query: np.ndarray,
        ef: int,
        allowed: np.ndarray | None = None,
    ) -> tuple[np.ndarray, np.ndarray]:
        return _kernels.search_graph(self.graph, matrix, query, ef, allowed)

    def to_bytes(self) -> bytes:
        g = self.graph
        parts = [
            _MAGIC,
            struct.pack(
                "<IIIQqiQ",
                _VERSION,
                self.params.m,
                self.params.ef_construction,
                g.seed,
                g.entry_point,
                g.max_level,
                g.count,
            ),
            np.ascontiguousarray(g.levels, dtype="<i4").tobytes(),
        ]
        for indptr, indices in g.level_links:
            parts.append(struct.pack("<Q", int(indices.shape[0])))
            parts.append(np.ascontiguousarray(indptr, dtype="<i8").tobytes())
            parts.append(np.ascontiguousarray(indices, dtype="<i4").tobytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "AnnIndex":
        header = struct.calcsize("<IIIQqiQ")
        if len(data) < 4 + header:
            raise CorruptIndexError(f"index blob truncated at byte {len(data)}")
        if data[:4] != _MAGIC:
            raise CorruptIndexError("bad magic in index blob")
        version, m, ef_construction, seed, entry_point, max_level, count = struct.unpack_from(
            "<IIIQqiQ", data, 4
        )
        if version != _VERSION:
            raise IncompatibleIndexVersionError(f"index format version {version} not supported")
        offset = 4 + header
        try:
            levels = np.frombuffer(data, dtype="<i4", count=count, offset=offset).copy()
            offset += 4 * count
            level_links = []
            for _ in range(max_level + 1):
                (nnz,) = struct.unpack_from("<Q", data, offset)
                offset += 8
                indptr = np.frombuffer(data, dtype="<i8", count=count + 1, offset=offset).copy()
                offset += 8 * (count + 1)
                indices = np.frombuffer(data, dtype="<i4", count=nnz, offset=offset).copy()
                offset += 4 * nnz
                level_links.append((indptr, indices))
        except ValueError as exc:
            raise CorruptIndexError(f"index blob truncated near byte {offset}") from exc
        if offset != len(data):
            raise CorruptIndexError(f"trailing bytes in index blob at byte {offset}")
        graph = HnswGraph(
            m=m,
            ef_construction=ef_construction,
            seed=seed,
            entry_point=entry_point,
            max_level=max_level,
            levels=levels,
            level_links=level_links,
        )
        return cls(graph, AnnParams(m=m, ef_construction=ef_construction))

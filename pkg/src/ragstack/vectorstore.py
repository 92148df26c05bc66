"""Persistent store of chunk records with exact and approximate cosine search.

Concurrency contract: any number of concurrent readers OR one writer. Search
never mutates; insert/build/save need exclusive access. A loaded store can be
handed freely between threads.

On-disk layout (all little-endian):
  meta.json    {format_version, dim, embedder_id, chunk_size, overlap, count, ann_seed}
  vectors.bin  magic "VRAG", u32 version=1, u32 dim, u64 count, count*dim float32 rows
  chunks.jsonl one {record_id, doc_id, chunk_index, token_start, token_end, text, metadata} per record
  ann.idx      optional HNSW graph; absence means "no index built"
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .chunker import Chunk, ChunkParams
from .embed import EmbedderSpec
from .errors import DimensionMismatchError, RagError
from .filters import FilterPredicate
from .hnsw import AnnIndex, AnnParams, CorruptIndexError, IncompatibleIndexVersionError

_MAGIC = b"VRAG"
_FORMAT_VERSION = 1

META_FILE = "meta.json"
VECTORS_FILE = "vectors.bin"
CHUNKS_FILE = "chunks.jsonl"
ANN_FILE = "ann.idx"


class LengthMismatchError(RagError):
    """Chunk and vector lists have different lengths."""


class EmptyStoreError(RagError):
    """Operation requires at least one record."""


class StaleIndexError(RagError):
    """Records were inserted after the ANN index was built; rebuild it."""


class CorruptStoreError(RagError):
    """A store file failed validation (bad magic, truncation, inconsistency)."""


class IncompatibleVersionError(RagError):
    """Store was written by an unknown format version."""


@dataclass
class StoreMeta:
    dim: int
    embedder: EmbedderSpec
    chunk_params: ChunkParams = field(default_factory=ChunkParams)
    count: int = 0
    ann_seed: int = 0
    metric: str = "cosine"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.embedder.dim != self.dim:
            raise ValueError(
                f"embedder dim {self.embedder.dim} does not match store dim {self.dim}"
            )
        if self.metric != "cosine":
            raise ValueError(f"only the cosine metric is supported, got {self.metric!r}")


@dataclass(frozen=True)
class ChunkRecord:
    record_id: int
    chunk: Chunk
    vector: np.ndarray


@dataclass(frozen=True)
class RetrievalHit:
    """A scored chunk returned by search; the unit of source attribution."""

    record_id: int
    score: float
    chunk: Chunk

    def to_obj(self) -> dict:
        return {
            "record_id": self.record_id,
            "score": self.score,
            "doc_id": self.chunk.doc_id,
            "chunk_index": self.chunk.index,
            "token_start": self.chunk.token_start,
            "token_end": self.chunk.token_end,
            "text": self.chunk.text,
            "metadata": dict(self.chunk.metadata),
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "RetrievalHit":
        chunk = Chunk(
            doc_id=obj["doc_id"],
            index=obj["chunk_index"],
            token_start=obj.get("token_start", 0),
            token_end=obj.get("token_end", 0),
            text=obj["text"],
            metadata=dict(obj.get("metadata", {})),
        )
        return cls(record_id=obj["record_id"], score=obj["score"], chunk=chunk)


class VectorStore:
    """In-memory store over a float32 row matrix, persisted to a directory."""

    def __init__(self, meta: StoreMeta):
        meta.count = 0
        self.meta = meta
        self._matrix = np.empty((0, meta.dim), dtype=np.float32)
        self._chunks: list[Chunk] = []
        self._ann: AnnIndex | None = None

    # -- introspection ----------------------------------------------------

    @property
    def count(self) -> int:
        return len(self._chunks)

    @property
    def dim(self) -> int:
        return self.meta.dim

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix[: self.count]

    @property
    def ann_index(self) -> AnnIndex | None:
        return self._ann

    @property
    def ann_stale(self) -> bool:
        return self._ann is not None and self._ann.count != self.count

    def get_record(self, record_id: int) -> ChunkRecord:
        if not 0 <= record_id < self.count:
            raise KeyError(f"no record {record_id}")
        return ChunkRecord(record_id, self._chunks[record_id], self.matrix[record_id])

    def records(self):
        for i in range(self.count):
            yield self.get_record(i)

    # -- writes -----------------------------------------------------------

    def insert(self, chunks: list[Chunk], vectors: list[np.ndarray]) -> list[int]:
        """Append records; ids are assigned consecutively in argument order."""
        if len(chunks) != len(vectors):
            raise LengthMismatchError(
                f"{len(chunks)} chunks but {len(vectors)} vectors"
            )
        if not chunks:
            return []
        rows = []
        for vec in vectors:
            arr = np.ascontiguousarray(vec, dtype=np.float32)
            if arr.shape != (self.dim,):
                raise DimensionMismatchError(
                    f"vector shape {arr.shape} does not match store dim {self.dim}"
                )
            rows.append(arr)
        start = self.count
        self._ensure_capacity(start + len(rows))
        self._matrix[start : start + len(rows)] = np.vstack(rows)
        self._chunks.extend(chunks)
        self.meta.count = self.count
        return list(range(start, start + len(rows)))

    def _ensure_capacity(self, needed: int) -> None:
        cap = self._matrix.shape[0]
        if needed <= cap:
            return
        new_cap = max(needed, cap * 2, 1024)
        grown = np.empty((new_cap, self.dim), dtype=np.float32)
        grown[: self.count] = self._matrix[: self.count]
        self._matrix = grown

    # -- search -----------------------------------------------------------

    def _check_query(self, query: np.ndarray) -> np.ndarray:
        arr = np.ascontiguousarray(query, dtype=np.float32)
        if arr.shape != (self.dim,):
            raise DimensionMismatchError(
                f"query shape {arr.shape} does not match store dim {self.dim}"
            )
        return arr

    def _filter_mask(self, predicate: FilterPredicate | None) -> np.ndarray | None:
        if predicate is None:
            return None
        mask = np.empty(self.count, dtype=np.uint8)
        for i, chunk in enumerate(self._chunks):
            mask[i] = 1 if predicate.matches(chunk.metadata) else 0
        return mask

    def search_flat(
        self,
        query: np.ndarray,
        k: int,
        predicate: FilterPredicate | None = None,
    ) -> list[RetrievalHit]:
        """Exact top-k by cosine over all records satisfying the predicate,
        descending score, ties broken by ascending record id."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        query = self._check_query(query)
        n = self.count
        if n == 0:
            return []
        mask = self._filter_mask(predicate)
        scores = _kernels.score_flat(self.matrix, query, mask)
        matching = n if mask is None else int(np.count_nonzero(mask))
        take = min(k, matching)
        if take == 0:
            return []
        order = np.lexsort((np.arange(n), -scores))[:take]
        return [
            RetrievalHit(int(i), float(scores[i]), self._chunks[int(i)]) for i in order
        ]

    # -- approximate search -------------------------------------------------

    def build_ann_index(self, params: AnnParams | None = None) -> AnnIndex:
        """Build (or rebuild) the HNSW index over all current records,
        deterministically from the seed recorded in the store metadata."""
        if self.count == 0:
            raise EmptyStoreError("cannot build an index over an empty store")
        self._ann = AnnIndex.build(self.matrix, params or AnnParams(), self.meta.ann_seed)
        return self._ann

    def search_ann(
        self,
        query: np.ndarray,
        k: int,
        ef_search: int = 64,
        predicate: FilterPredicate | None = None,
    ) -> list[RetrievalHit]:
        """Approximate top-k; same result shape and ordering as search_flat.

        With a predicate, disallowed records are skipped during traversal and
        k surviving records are still sought.
        """
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        query = self._check_query(query)
        if self._ann is None:
            raise StaleIndexError("no ANN index built; call build_ann_index first")
        if self.ann_stale:
            raise StaleIndexError(
                f"ANN index covers {self._ann.count} of {self.count} records; rebuild it"
            )
        mask = self._filter_mask(predicate)
        ids, scores = self._ann.search(self.matrix, query, max(ef_search, k), mask)
        return [
            RetrievalHit(int(i), float(s), self._chunks[int(i)])
            for i, s in zip(ids[:k], scores[:k])
        ]

    # -- persistence --------------------------------------------------------

    def save(self, directory: str | Path) -> None:
        """Write the store; load() reproduces records bit-exactly."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        meta_obj = {
            "format_version": _FORMAT_VERSION,
            "dim": self.dim,
            "embedder_id": self.meta.embedder.id,
            "chunk_size": self.meta.chunk_params.chunk_size,
            "overlap": self.meta.chunk_params.overlap,
            "count": self.count,
            "ann_seed": self.meta.ann_seed,
        }
        (directory / META_FILE).write_text(
            json.dumps(meta_obj, indent=2) + "\n", encoding="utf-8"
        )
        with open(directory / VECTORS_FILE, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<IIQ", _FORMAT_VERSION, self.dim, self.count))
            fh.write(np.ascontiguousarray(self.matrix, dtype="<f4").tobytes())
        with open(directory / CHUNKS_FILE, "w", encoding="utf-8") as fh:
            for record_id, chunk in enumerate(self._chunks):
                fh.write(
                    json.dumps(
                        {
                            "record_id": record_id,
                            "doc_id": chunk.doc_id,
                            "chunk_index": chunk.index,
                            "token_start": chunk.token_start,
                            "token_end": chunk.token_end,
                            "text": chunk.text,
                            "metadata": chunk.metadata,
                        },
                        ensure_ascii=False,
                    )
                )
                fh.write("\n")
        ann_path = directory / ANN_FILE
        if self._ann is not None and not self.ann_stale:
            ann_path.write_bytes(self._ann.to_bytes())
        elif ann_path.exists():
            ann_path.unlink()

    @classmethod
    def load(cls, directory: str | Path) -> "VectorStore":
        directory = Path(directory)
        try:
            meta_obj = json.loads((directory / META_FILE).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorruptStoreError(f"{META_FILE}: invalid JSON ({exc})") from exc
        if meta_obj.get("format_version") != _FORMAT_VERSION:
            raise IncompatibleVersionError(
                f"store format version {meta_obj.get('format_version')} not supported"
            )
        dim = int(meta_obj["dim"])
        count = int(meta_obj["count"])
        meta = StoreMeta(
            dim=dim,
            embedder=EmbedderSpec(id=meta_obj["embedder_id"], dim=dim),
            chunk_params=ChunkParams(
                chunk_size=int(meta_obj["chunk_size"]), overlap=int(meta_obj["overlap"])
            ),
            ann_seed=int(meta_obj["ann_seed"]),
        )
        store = cls(meta)

        data = (directory / VECTORS_FILE).read_bytes()
        header = 4 + struct.calcsize("<IIQ")
        if len(data) < header:
            raise CorruptStoreError(f"{VECTORS_FILE}: truncated header at byte {len(data)}")
        if data[:4] != _MAGIC:
            raise CorruptStoreError(f"{VECTORS_FILE}: bad magic at byte 0")
        version, file_dim, file_count = struct.unpack_from("<IIQ", data, 4)
        if version != _FORMAT_VERSION:
            raise IncompatibleVersionError(
                f"{VECTORS_FILE}: format version {version} not supported"
            )
        if file_dim != dim or file_count != count:
            raise CorruptStoreError(
                f"{VECTORS_FILE}: header (dim={file_dim}, count={file_count}) disagrees "
                f"with {META_FILE} (dim={dim}, count={count})"
            )
        expected = header + 4 * dim * count
        if len(data) != expected:
            raise CorruptStoreError(
                f"{VECTORS_FILE}: expected {expected} bytes, file ends at byte {len(data)}"
            )
        matrix = (
            np.frombuffer(data, dtype="<f4", count=dim * count, offset=header)
            .reshape(count, dim)
            .copy()
        )

        chunks: list[Chunk] = []
        with open(directory / CHUNKS_FILE, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorruptStoreError(
                        f"{CHUNKS_FILE}: invalid JSON on line {line_no + 1}"
                    ) from exc
                if obj.get("record_id") != len(chunks):
                    raise CorruptStoreError(
                        f"{CHUNKS_FILE}: record_id {obj.get('record_id')} out of order "
                        f"on line {line_no + 1}"
                    )
                chunks.append(
                    Chunk(
                        doc_id=obj["doc_id"],
                        index=obj["chunk_index"],
                        token_start=obj["token_start"],
                        token_end=obj["token_end"],
                        text=obj["text"],
                        metadata=obj["metadata"],
                    )
                )
        if len(chunks) != count:
            raise CorruptStoreError(
                f"{CHUNKS_FILE}: {len(chunks)} records but {META_FILE} says {count}"
            )

        store._matrix = matrix
        store._chunks = chunks
        store.meta.count = count

        ann_path = directory / ANN_FILE
        if ann_path.exists():
            try:
                index = AnnIndex.from_bytes(ann_path.read_bytes())
            except CorruptIndexError as exc:
                raise CorruptStoreError(f"{ANN_FILE}: {exc}") from exc
            except IncompatibleIndexVersionError as exc:
                raise IncompatibleVersionError(f"{ANN_FILE}: {exc}") from exc
            if index.count != count:
                raise CorruptStoreError(
                    f"{ANN_FILE}: index covers {index.count} records, store has {count}"
                )
            store._ann = index
        return store


def create_store(meta: StoreMeta) -> VectorStore:
    """Create an empty store with the given metadata."""
    return VectorStore(meta)

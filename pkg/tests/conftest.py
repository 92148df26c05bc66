from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ragstack.chunker import Chunk, ChunkParams
from ragstack.embed import EmbedderSpec
from ragstack.vectorstore import StoreMeta, VectorStore


def random_unit_vectors(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    vecs = rng.standard_normal((n, dim)).astype(np.float64)
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    return vecs.astype(np.float32)


def synthetic_chunk(i: int, metadata: dict | None = None) -> Chunk:
    md = {"doc_id": f"doc-{i // 8}", "chunk_index": i % 8}
    if metadata:
        md.update(metadata)
    return Chunk(
        doc_id=f"doc-{i // 8}",
        index=i % 8,
        token_start=(i % 8) * 10,
        token_end=(i % 8) * 10 + 10,
        text=f"synthetic chunk number {i} lorem ipsum tokens",
        metadata=md,
    )


def make_store(
    vectors: np.ndarray,
    metadatas: list[dict] | None = None,
    chunk_params: ChunkParams | None = None,
    ann_seed: int = 7,
) -> VectorStore:
    n, dim = vectors.shape
    store = VectorStore(
        StoreMeta(
            dim=dim,
            embedder=EmbedderSpec(dim=dim),
            chunk_params=chunk_params or ChunkParams(),
            ann_seed=ann_seed,
        )
    )
    chunks = [
        synthetic_chunk(i, metadatas[i] if metadatas else None) for i in range(n)
    ]
    store.insert(chunks, [vectors[i] for i in range(n)])
    return store


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)

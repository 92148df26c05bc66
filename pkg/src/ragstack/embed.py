"""Text-to-vector embedding behind a pluggable contract.

Ships a deterministic lexical reference embedder (FNV-1a-64 hashed bag of
words with log-scaled term frequencies) so the whole stack runs and tests
without model weights. External embedding endpoints are reachable through the
same contract via `RemoteEmbedder`. All emitted vectors are float32 and
unit-norm; texts with no tokens are rejected because cosine similarity is
undefined for the zero vector.
"""

from __future__ import annotations

import math
import threading
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence, runtime_checkable

import httpx
import numpy as np

from .chunker import tokenize
from .errors import BackendUnavailableError, DimensionMismatchError, RagError

REFERENCE_EMBEDDER_ID = "ref-tfidf-v1"
DEFAULT_DIM = 512

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


class EmptyTextError(RagError):
    """Text produced no tokens, so no vector can be formed."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class EmbedderSpec:
    """Identity and dimensionality of an embedder; all vectors in one store share one spec."""

    id: str = REFERENCE_EMBEDDER_ID
    dim: int = DEFAULT_DIM

    def __post_init__(self):
        if not self.id:
            raise ValueError("embedder id must be nonempty")
        if self.dim < 1:
            raise ValueError(f"embedder dim must be >= 1, got {self.dim}")


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash (bucket hash of the reference embedder)."""
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


class _CallCounter:
    """Process-wide count of texts embedded; lets tests assert that loading a
    persisted store performs no re-embedding."""

    def __init__(self):
        self._lock = threading.Lock()
        self._value = 0

    def add(self, n: int = 1) -> None:
        with self._lock:
            self._value += n

    def value(self) -> int:
        with self._lock:
            return self._value


_calls = _CallCounter()


def embedding_call_count() -> int:
    """Number of texts embedded by this process so far (all embedders)."""
    return _calls.value()


@runtime_checkable
class Embedder(Protocol):
    spec: EmbedderSpec

    def embed_text(self, text: str) -> np.ndarray: ...

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]: ...


class ReferenceEmbedder:
    """Deterministic lexical embedder.

    Tokens are lowercased; each distinct token accumulates ln(1 + tf) into the
    bucket FNV-1a-64(token) mod dim; the result is L2-normalized. Identical
    texts give bitwise-identical vectors, and token order does not matter.
    """

    def __init__(self, spec: EmbedderSpec | None = None):
        self.spec = spec or EmbedderSpec()

    def embed_text(self, text: str) -> np.ndarray:
        tokens = [t.lower() for t in tokenize(text)]
        if not tokens:
            raise EmptyTextError("cannot embed text with no tokens")
        _calls.add()
        vec = np.zeros(self.spec.dim, dtype=np.float64)
        for token, tf in Counter(tokens).items():
            bucket = fnv1a_64(token.encode("utf-8")) % self.spec.dim
            vec[bucket] += math.log1p(tf)
        vec /= np.linalg.norm(vec)
        return vec.astype(np.float32)

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        out = []
        for i, text in enumerate(texts):
            try:
                out.append(self.embed_text(text))
            except EmptyTextError:
                raise EmptyTextError(f"text at index {i} has no tokens", index=i) from None
        return out


class RemoteEmbedder:
    """Adapter for an HTTP embeddings endpoint.

    Request shape: POST {"input": [texts], "model": id}; response shape:
    {"data": [{"embedding": [...]}, ...]}. Returned vectors are validated
    against the spec dimension and L2-normalized. In-flight requests are
    bounded by `max_in_flight`.
    """

    def __init__(
        self,
        endpoint: str,
        spec: EmbedderSpec,
        timeout: float = 30.0,
        max_in_flight: int = 4,
    ):
        self.endpoint = endpoint
        self.spec = spec
        self.timeout = timeout
        self._slots = threading.BoundedSemaphore(max_in_flight)

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        for i, text in enumerate(texts):
            if not text.split():
                raise EmptyTextError(f"text at index {i} has no tokens", index=i)
        if not texts:
            return []
        _calls.add(len(texts))
        with self._slots:
            try:
                resp = httpx.post(
                    self.endpoint,
                    json={"input": list(texts), "model": self.spec.id},
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                payload = resp.json()
            except httpx.HTTPError as exc:
                raise BackendUnavailableError(
                    f"embedding endpoint {self.endpoint}: {exc}"
                ) from exc
        try:
            rows = payload["data"]
            raw = [row["embedding"] for row in rows]
        except (KeyError, TypeError) as exc:
            raise BackendUnavailableError(
                f"embedding endpoint {self.endpoint}: malformed response ({exc})"
            ) from exc
        if len(raw) != len(texts):
            raise BackendUnavailableError(
                f"embedding endpoint {self.endpoint}: expected {len(texts)} vectors, "
                f"got {len(raw)}"
            )
        vectors = []
        for values in raw:
            vec = np.asarray(values, dtype=np.float32)
            if vec.shape != (self.spec.dim,):
                raise DimensionMismatchError(
                    f"endpoint returned dim {vec.shape} but spec requires ({self.spec.dim},)"
                )
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise BackendUnavailableError(
                    f"embedding endpoint {self.endpoint}: returned a zero vector"
                )
            vectors.append((vec / norm).astype(np.float32))
        return vectors

    def embed_text(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]


def embed_text(text: str, spec: EmbedderSpec | None = None) -> np.ndarray:
    """Embed one text with the reference embedder."""
    return ReferenceEmbedder(spec).embed_text(text)


def embed_batch(texts: Sequence[str], spec: EmbedderSpec | None = None) -> list[np.ndarray]:
    """Embed texts with the reference embedder, order preserved."""
    return ReferenceEmbedder(spec).embed_batch(texts)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two unit-norm vectors (their dot product)."""
    if a.shape != b.shape:
        raise DimensionMismatchError(f"vector dims differ: {a.shape} vs {b.shape}")
    return float(np.dot(a.astype(np.float64), b.astype(np.float64)))


def as_unit_vector(values: Iterable[float] | np.ndarray, dim: int) -> np.ndarray:
    """Validate shape and unit norm (within 1e-5), returning a float32 copy."""
    vec = np.ascontiguousarray(values, dtype=np.float32)
    if vec.shape != (dim,):
        raise DimensionMismatchError(f"expected shape ({dim},), got {vec.shape}")
    norm = float(np.linalg.norm(vec.astype(np.float64)))
    if abs(norm - 1.0) > 1e-5:
        raise ValueError(f"vector is not unit-norm (|v| = {norm:.6f})")
    return vec

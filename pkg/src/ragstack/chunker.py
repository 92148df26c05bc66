"""Token-window chunking.

Documents are split into fixed-size overlapping windows over the whitespace
token stream. The whitespace tokenizer here is the reference token accounting
used everywhere a token count matters (chunk windows, prompt budgets); a
different tokenizer can be plugged in by callers that need subword counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import RagError
from .ingest import Document, Scalar

DEFAULT_CHUNK_SIZE = 256
DEFAULT_OVERLAP = 32


class InvalidParamsError(RagError):
    """Chunk parameters violate 0 <= overlap < chunk_size."""


def tokenize(text: str) -> list[str]:
    """Split into maximal runs of non-whitespace.

    Joining the result with single spaces and retokenizing is a fixed point.
    """
    return text.split()


def token_count(text: str) -> int:
    return len(text.split())


@dataclass(frozen=True)
class ChunkParams:
    chunk_size: int = DEFAULT_CHUNK_SIZE
    overlap: int = DEFAULT_OVERLAP

    def __post_init__(self):
        if self.chunk_size < 1:
            raise InvalidParamsError(f"chunk_size must be >= 1, got {self.chunk_size}")
        if not 0 <= self.overlap < self.chunk_size:
            raise InvalidParamsError(
                f"overlap must satisfy 0 <= overlap < chunk_size, got "
                f"overlap={self.overlap}, chunk_size={self.chunk_size}"
            )

    @property
    def stride(self) -> int:
        return self.chunk_size - self.overlap


@dataclass
class Chunk:
    """A contiguous token window of one document (half-open token offsets)."""

    doc_id: str
    index: int
    token_start: int
    token_end: int
    text: str
    metadata: dict[str, Scalar] = field(default_factory=dict)


def chunk_document(doc: Document, params: ChunkParams | None = None) -> list[Chunk]:
    """Split a document into overlapping token windows.

    Window starts advance by `chunk_size - overlap`; emission stops with the
    first window whose clamped end reaches the token count, so no trailing
    chunk is fully contained in its predecessor. Every token is covered by at
    least one chunk. Each chunk inherits the document's metadata plus its own
    `doc_id` and `chunk_index`.
    """
    if params is None:
        params = ChunkParams()
    tokens = tokenize(doc.text)
    n = len(tokens)
    if n == 0:
        return []
    chunks: list[Chunk] = []
    start = 0
    index = 0
    while True:
        end = min(start + params.chunk_size, n)
        metadata = dict(doc.metadata)
        metadata["doc_id"] = doc.id
        metadata["chunk_index"] = index
        chunks.append(
            Chunk(
                doc_id=doc.id,
                index=index,
                token_start=start,
                token_end=end,
                text=" ".join(tokens[start:end]),
                metadata=metadata,
            )
        )
        if end >= n:
            break
        start += params.stride
        index += 1
    return chunks

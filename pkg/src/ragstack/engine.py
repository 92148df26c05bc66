"""Query orchestration: retrieve, budget-constrained prompt assembly, generation.

The answer contract here is the whole point of the stack: every answer carries
exactly the chunks that were placed in the prompt, so a reader can check any
claim against its sources.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .chunker import token_count
from .embed import Embedder
from .errors import RagError
from .filters import FilterPredicate
from .vectorstore import RetrievalHit, VectorStore

DEFAULT_SYSTEM_INSTRUCTION = (
    "Answer the question using only the numbered context passages below. "
    "Cite the passages you rely on by their bracketed numbers. If the passages "
    "do not contain the answer, say that the provided sources do not cover it."
)

# Budget charged per included chunk on top of its token count (separator,
# header line); deliberately conservative.
PER_CHUNK_SEPARATOR_COST = 4

DEFAULT_TOP_N = 4
DEFAULT_MIN_SCORE = 0.0


class QueryTooLargeError(RagError):
    """Template plus query alone exceed the prompt budget."""


class EmbedderMismatchError(RagError):
    """Store was vectorized under a different embedder than the query's."""


@dataclass(frozen=True)
class RetrievalParams:
    top_n: int = DEFAULT_TOP_N
    min_score: float = DEFAULT_MIN_SCORE
    filter: FilterPredicate | None = None
    use_ann: bool = False
    ef_search: int = 64

    def __post_init__(self):
        if self.top_n < 1:
            raise ValueError(f"top_n must be >= 1, got {self.top_n}")


@dataclass(frozen=True)
class PromptBudget:
    """Token budget for one request against a model context window."""

    context_window: int = 4096
    answer_reserve: int = 512
    template_cost: int = token_count(DEFAULT_SYSTEM_INSTRUCTION)

    def __post_init__(self):
        if self.context_window < 1 or self.answer_reserve < 1:
            raise ValueError("context_window and answer_reserve must be positive")
        if self.answer_reserve + self.template_cost >= self.context_window:
            raise ValueError(
                f"answer_reserve ({self.answer_reserve}) + template_cost "
                f"({self.template_cost}) must be smaller than the context window "
                f"({self.context_window})"
            )

    @property
    def prompt_limit(self) -> int:
        return self.context_window - self.answer_reserve


@dataclass
class PromptBundle:
    system_instruction: str
    included_hits: list[RetrievalHit]
    query: str
    total_tokens: int


@dataclass
class Answer:
    text: str
    sources: list[RetrievalHit]
    backend_id: str

    def to_obj(self) -> dict:
        return {
            "text": self.text,
            "backend_id": self.backend_id,
            "sources": [hit.to_obj() for hit in self.sources],
        }


def retrieve(
    store: VectorStore,
    query_text: str,
    params: RetrievalParams,
    embedder: Embedder,
) -> list[RetrievalHit]:
    """Embed the query and return the top-n closest chunks above min_score."""
    spec = embedder.spec
    if store.meta.embedder.id != spec.id or store.meta.embedder.dim != spec.dim:
        raise EmbedderMismatchError(
            f"store was vectorized with {store.meta.embedder}, query uses {spec}"
        )
    query_vec = embedder.embed_text(query_text)
    if params.use_ann:
        hits = store.search_ann(query_vec, params.top_n, params.ef_search, params.filter)
    else:
        hits = store.search_flat(query_vec, params.top_n, params.filter)
    return [hit for hit in hits if hit.score >= params.min_score]


def assemble_prompt(
    hits: list[RetrievalHit],
    query: str,
    budget: PromptBudget,
    system_instruction: str = DEFAULT_SYSTEM_INSTRUCTION,
    separator_cost: int = PER_CHUNK_SEPARATOR_COST,
) -> PromptBundle:
    """Greedily include hits in rank order while the budget allows.

    Each chunk is charged its token count plus `separator_cost`. An oversize
    hit is skipped and the walk continues down the ranking; included hits are
    never reordered or truncated (truncation would break source faithfulness).
    """
    total = budget.template_cost + token_count(query)
    if total > budget.prompt_limit:
        raise QueryTooLargeError(
            f"template + query need {total} tokens, budget allows "
            f"{budget.prompt_limit}"
        )
    included: list[RetrievalHit] = []
    for hit in hits:
        cost = token_count(hit.chunk.text) + separator_cost
        if total + cost <= budget.prompt_limit:
            included.append(hit)
            total += cost
    return PromptBundle(
        system_instruction=system_instruction,
        included_hits=included,
        query=query,
        total_tokens=total,
    )


def serialize_user_prompt(bundle: PromptBundle) -> str:
    """Render the user message: numbered passages, then the question.

    Each passage is exactly two lines (header, chunk text); chunk text never
    contains newlines because chunks are tokens joined by single spaces.
    """
    lines = ["Context passages:"]
    for rank, hit in enumerate(bundle.included_hits, start=1):
        lines.append(f"[{rank}] {hit.chunk.doc_id}#{hit.chunk.index} score={hit.score:.4f}")
        lines.append(hit.chunk.text)
    lines.append("")
    lines.append(f"Question: {bundle.query}")
    return "\n".join(lines)


def prompt_chunk_sections(prompt: str) -> list[str]:
    """Extract the chunk text lines back out of a serialized prompt.

    Used to audit that generation input contains no chunk text beyond the
    included hits.
    """
    header = re.compile(r"^\[\d+\] \S+#\d+ score=-?\d+\.\d{4}$")
    sections = []
    lines = prompt.split("\n")
    i = 0
    while i < len(lines):
        if header.match(lines[i]) and i + 1 < len(lines):
            sections.append(lines[i + 1])
            i += 2
        else:
            i += 1
    return sections


def generate(bundle: PromptBundle, backend) -> Answer:
    """Run the backend over the bundle; sources are copied from the bundle."""
    text = "".join(backend.stream(bundle))
    return Answer(text=text, sources=list(bundle.included_hits), backend_id=backend.backend_id)


def answer_query(
    store: VectorStore,
    query_text: str,
    params: RetrievalParams,
    budget: PromptBudget,
    backend,
    embedder: Embedder,
) -> Answer:
    """retrieve -> assemble_prompt -> generate."""
    hits = retrieve(store, query_text, params, embedder)
    bundle = assemble_prompt(hits, query_text, budget)
    return generate(bundle, backend)

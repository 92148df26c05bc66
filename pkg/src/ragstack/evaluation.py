"""Retrieval-quality evaluation on synthetic needle corpora.

A needle corpus is filler text with unique sentinel tokens planted at known
positions, which gives exact retrieval ground truth: querying a sentinel must
bring back a chunk containing it. Sentinels are sampled so their hash bucket
under the reference embedder collides with no filler word, making the sentinel
chunk the unique positive-score result and recall measurements noise-free.

`run_sweep` grids over chunk size, overlap, top-n, and context window,
reporting recall@1, recall@n, mean hit rank, retrieval timing, and prompt
budget violations per configuration (CSV plus a JSON mirror).
"""

from __future__ import annotations

import csv
import json
import random
import time
from dataclasses import asdict, dataclass, field
from itertools import product
from pathlib import Path

from .chunker import ChunkParams, chunk_document
from .embed import DEFAULT_DIM, Embedder, EmbedderSpec, ReferenceEmbedder, fnv1a_64
from .engine import PromptBudget, assemble_prompt
from .errors import RagError
from .ingest import Document
from .vectorstore import StoreMeta, VectorStore


class InvalidCountsError(RagError):
    """Needle corpus counts are inconsistent (e.g. more needles than docs)."""


class EmptyNeedlesError(RagError):
    """Recall is undefined over zero needles."""


class SentinelSpaceError(RagError):
    """Embedder dimension too small to give every sentinel a private bucket."""


# Filler vocabulary for synthetic documents. None of these start with "zq",
# the sentinel prefix, so a sentinel can never equal a filler word.
_VOCABULARY = (
    "about above across action added after again against almost along already "
    "always amount analysis annual answer around asked average balance based "
    "basic became because become before began behind being below better between "
    "board bring brought budget business called capital carried cause central "
    "certain chance change chapter charge choice close coming committee common "
    "compare cost could country course covered current cycle data decade decide "
    "demand depend detail develop differ direct discuss domestic double during "
    "early earned economy effect effort eight either energy enough ensure entire "
    "equal estimate evening event every exact example except exchange expand "
    "expect export extend factor fall fifteen figure final finance first fiscal "
    "five focus follow foreign formal forward found four frame further future "
    "gain general give global goods great group growth half happen heavy height "
    "higher hold hundred impact import improve include income increase index "
    "indicate industry inform inside instead intend interest invest issue item "
    "joint judge keep known labor large later least leave level light limit "
    "listed local longer lower major making manage margin market matter measure "
    "median meeting member method middle might million minor model moment month "
    "moved much national nearly need never night nine normal noted number "
    "observe obtain occur offer office often only open order other output over "
    "paper partial pattern people percent period phase place plan point policy "
    "present price private problem process produce profit program project public "
    "quarter question quite raise range rate ratio reach real reason recent "
    "record reduce reform region related remain report require research reserve "
    "result return review rise round same scale second sector seem segment "
    "series serve seven several share shift short should simple since small "
    "social source special stable staff stage standard state static still stock "
    "strong study supply support survey system table taken target term theory "
    "third three through today total trade trend twelve twenty under unit until "
    "upper usage using value various volume wages weight where which whole world "
    "would yearly yield"
).split()

SENTINEL_PREFIX = "zq"


@dataclass(frozen=True)
class Needle:
    needle_id: str
    sentinel_token: str
    host_doc_id: str
    expected_chunk_text: str


@dataclass
class NeedleCorpus:
    documents: list[Document]
    needles: list[Needle]


def _vocabulary_buckets(dim: int) -> set[int]:
    return {fnv1a_64(word.encode("utf-8")) % dim for word in _VOCABULARY}


def build_needle_corpus(
    n_docs: int,
    doc_tokens: int,
    n_needles: int,
    seed: int,
    dim: int = DEFAULT_DIM,
) -> NeedleCorpus:
    """Deterministically generate filler documents with planted sentinels.

    Each sentinel appears exactly once in the whole corpus and, under the
    reference embedder at dimension `dim`, occupies a hash bucket shared with
    no filler word and no other sentinel.
    """
    if n_docs < 1 or doc_tokens < 1 or n_needles < 0:
        raise InvalidCountsError(
            f"need n_docs >= 1, doc_tokens >= 1, n_needles >= 0; got "
            f"({n_docs}, {doc_tokens}, {n_needles})"
        )
    if n_needles > n_docs:
        raise InvalidCountsError(
            f"n_needles ({n_needles}) cannot exceed n_docs ({n_docs})"
        )
    rnd = random.Random(seed)
    taken = _vocabulary_buckets(dim)
    if len(taken) + n_needles > dim:
        raise SentinelSpaceError(
            f"dim {dim} leaves {dim - len(taken)} free buckets for {n_needles} sentinels"
        )

    sentinels: list[str] = []
    used_tokens: set[str] = set()
    while len(sentinels) < n_needles:
        token = f"{SENTINEL_PREFIX}{rnd.getrandbits(32):08x}"
        if token in used_tokens:
            continue
        bucket = fnv1a_64(token.encode("utf-8")) % dim
        if bucket in taken:
            continue
        taken.add(bucket)
        used_tokens.add(token)
        sentinels.append(token)

    host_docs = rnd.sample(range(n_docs), n_needles)
    positions = {doc: rnd.randrange(doc_tokens) for doc in host_docs}
    needle_of_doc = dict(zip(host_docs, range(n_needles)))

    documents: list[Document] = []
    needles: list[Needle] = []
    for i in range(n_docs):
        tokens = [rnd.choice(_VOCABULARY) for _ in range(doc_tokens)]
        doc_id = f"doc-{i:04d}"
        if i in needle_of_doc:
            k = needle_of_doc[i]
            pos = positions[i]
            tokens[pos] = sentinels[k]
            context = tokens[max(0, pos - 10) : pos + 11]
            needles.append(
                Needle(
                    needle_id=f"needle-{k:03d}",
                    sentinel_token=sentinels[k],
                    host_doc_id=doc_id,
                    expected_chunk_text=" ".join(context),
                )
            )
        documents.append(
            Document(
                id=doc_id,
                text=" ".join(tokens),
                metadata={"doc_index": i},
                source_path=f"synthetic://{doc_id}",
            )
        )
    needles.sort(key=lambda n: n.needle_id)
    return NeedleCorpus(documents=documents, needles=needles)


def vectorize_corpus(
    corpus: NeedleCorpus,
    chunk_params: ChunkParams,
    embedder: Embedder,
) -> VectorStore:
    """Chunk and embed a needle corpus into a fresh in-memory store."""
    store = VectorStore(
        StoreMeta(dim=embedder.spec.dim, embedder=embedder.spec, chunk_params=chunk_params)
    )
    for doc in corpus.documents:
        chunks = chunk_document(doc, chunk_params)
        store.insert(chunks, embedder.embed_batch([c.text for c in chunks]))
    return store


def needle_hit_ranks(
    store: VectorStore,
    needles: list[Needle],
    k: int,
    embedder: Embedder,
) -> tuple[list[int | None], float]:
    """For each needle: 1-based rank of the first hit containing its sentinel
    within the top k (None if absent). Also returns mean search seconds."""
    if not needles:
        raise EmptyNeedlesError("no needles to evaluate")
    ranks: list[int | None] = []
    elapsed = 0.0
    for needle in needles:
        query = embedder.embed_text(needle.sentinel_token)
        t0 = time.perf_counter()
        hits = store.search_flat(query, k)
        elapsed += time.perf_counter() - t0
        rank = None
        for position, hit in enumerate(hits, start=1):
            if needle.sentinel_token in hit.chunk.text.split():
                rank = position
                break
        ranks.append(rank)
    return ranks, elapsed / len(needles)


def recall_at_k(
    store: VectorStore,
    needles: list[Needle],
    k: int,
    embedder: Embedder,
) -> float:
    """Fraction of needles whose sentinel query retrieves a sentinel-bearing
    chunk within the top k."""
    ranks, _ = needle_hit_ranks(store, needles, k, embedder)
    return sum(1 for r in ranks if r is not None) / len(ranks)


@dataclass(frozen=True)
class SweepConfig:
    chunk_sizes: tuple[int, ...]
    overlaps: tuple[int, ...]
    top_ns: tuple[int, ...]
    context_windows: tuple[int, ...] = (4096,)
    trials: int = 1
    seed: int = 0
    n_docs: int = 25
    doc_tokens: int = 400
    n_needles: int = 25
    answer_reserve: int = 256
    dim: int = DEFAULT_DIM

    def __post_init__(self):
        object.__setattr__(self, "chunk_sizes", tuple(self.chunk_sizes))
        object.__setattr__(self, "overlaps", tuple(self.overlaps))
        object.__setattr__(self, "top_ns", tuple(self.top_ns))
        object.__setattr__(self, "context_windows", tuple(self.context_windows))
        if not (self.chunk_sizes and self.overlaps and self.top_ns and self.context_windows):
            raise ValueError("sweep grid must be nonempty on every axis")
        if max(self.overlaps) >= min(self.chunk_sizes):
            raise ValueError(
                f"every overlap must be smaller than every chunk size; "
                f"got overlap {max(self.overlaps)} vs chunk size {min(self.chunk_sizes)}"
            )
        if any(n < 1 for n in self.top_ns):
            raise ValueError("top_ns must be positive")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class SweepRow:
    chunk_size: int
    overlap: int
    top_n: int
    context_window: int
    recall_at_1: float
    recall_at_n: float
    mean_hit_rank: float
    mean_retrieval_time: float
    budget_violations: int


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[SweepRow] = field(default_factory=list)


CSV_COLUMNS = [
    "chunk_size",
    "overlap",
    "top_n",
    "context_window",
    "recall_at_1",
    "recall_at_n",
    "mean_hit_rank",
    "mean_retrieval_time",
    "budget_violations",
]


def _trial_seed(seed: int, trial: int) -> int:
    return (seed * 1_000_003 + trial) & 0x7FFFFFFF


def run_sweep(config: SweepConfig) -> SweepResult:
    """Evaluate every configuration in the grid.

    Per (chunk_size, overlap, trial) the corpus is rebuilt and searched once
    at the deepest top-n; per-row metrics are then cut from the recorded
    hits. Metric columns are deterministic per seed; timings are not.
    """
    embedder = ReferenceEmbedder(EmbedderSpec(dim=config.dim))
    k_max = max(config.top_ns)

    # (chunk_size, overlap) -> per trial: (per-needle (query, rank, hits), mean seconds)
    trial_data: dict[tuple[int, int], list[tuple[list, float]]] = {}
    for chunk_size, overlap in product(config.chunk_sizes, config.overlaps):
        runs = []
        for trial in range(config.trials):
            corpus = build_needle_corpus(
                config.n_docs,
                config.doc_tokens,
                config.n_needles,
                seed=_trial_seed(config.seed, trial),
                dim=config.dim,
            )
            store = vectorize_corpus(
                corpus, ChunkParams(chunk_size=chunk_size, overlap=overlap), embedder
            )
            outcomes = []
            elapsed = 0.0
            for needle in corpus.needles:
                query_vec = embedder.embed_text(needle.sentinel_token)
                t0 = time.perf_counter()
                hits = store.search_flat(query_vec, k_max)
                elapsed += time.perf_counter() - t0
                rank = None
                for position, hit in enumerate(hits, start=1):
                    if needle.sentinel_token in hit.chunk.text.split():
                        rank = position
                        break
                outcomes.append((needle.sentinel_token, rank, hits))
            runs.append((outcomes, elapsed / len(outcomes)))
        trial_data[(chunk_size, overlap)] = runs

    rows: list[SweepRow] = []
    for chunk_size, overlap, top_n, window in product(
        config.chunk_sizes, config.overlaps, config.top_ns, config.context_windows
    ):
        budget = PromptBudget(context_window=window, answer_reserve=config.answer_reserve)
        all_ranks: list[int | None] = []
        times: list[float] = []
        violations = 0
        for outcomes, mean_time in trial_data[(chunk_size, overlap)]:
            times.append(mean_time)
            for query, rank, hits in outcomes:
                all_ranks.append(rank)
                bundle = assemble_prompt(hits[:top_n], query, budget)
                if bundle.total_tokens + budget.answer_reserve > budget.context_window:
                    violations += 1
        found_in_n = [r for r in all_ranks if r is not None and r <= top_n]
        rows.append(
            SweepRow(
                chunk_size=chunk_size,
                overlap=overlap,
                top_n=top_n,
                context_window=window,
                recall_at_1=sum(1 for r in all_ranks if r == 1) / len(all_ranks),
                recall_at_n=len(found_in_n) / len(all_ranks),
                mean_hit_rank=(
                    sum(found_in_n) / len(found_in_n) if found_in_n else float("nan")
                ),
                mean_retrieval_time=sum(times) / len(times),
                budget_violations=violations,
            )
        )
    rows.sort(key=lambda r: (r.chunk_size, r.overlap, r.top_n, r.context_window))
    return SweepResult(config=config, rows=rows)


def write_report(result: SweepResult, csv_path: str | Path) -> Path:
    """Write the CSV report and a JSON mirror next to it; returns the JSON path."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in result.rows:
            record = asdict(row)
            writer.writerow([repr(record[c]) if isinstance(record[c], float) else record[c] for c in CSV_COLUMNS])
    json_path = csv_path.with_suffix(".json")
    payload = {
        "config": asdict(result.config),
        "rows": [asdict(row) for row in result.rows],
    }
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return json_path

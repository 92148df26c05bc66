"""Corpus and session registries persisted as plain files under the data dir.

Layout:
  corpora/<name>/corpus.json       {name, state, doc_count, created_at}
  corpora/<name>/documents.jsonl   one ingested Document per line
  corpora/<name>/store/            vector store directory (see vectorstore)
  sessions/<session_id>.json       {session_id, corpus, created_at, defaults, history}

Loading a vectorized corpus at startup reads the saved store; it never
re-embeds anything.
"""

from __future__ import annotations

import json
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..chunker import ChunkParams, chunk_document
from ..embed import Embedder
from ..errors import RagError
from ..ingest import (
    Document,
    IngestFailure,
    IngestReport,
    Manifest,
    load_manifest_documents,
)
from ..vectorstore import StoreMeta, VectorStore

NAME_RE = re.compile(r"^[a-z0-9_-]{1,64}$")

STATE_EMPTY = "empty"
STATE_INGESTED = "ingested"
STATE_VECTORIZED = "vectorized"

_EMBED_BATCH = 64


class CorpusExistsError(RagError):
    pass


class CorpusNotFoundError(RagError):
    pass


class CorpusNotReadyError(RagError):
    pass


class WrongStateError(RagError):
    pass


class SessionNotFoundError(RagError):
    pass


class InvalidNameError(RagError):
    pass


@dataclass
class CorpusHandle:
    name: str
    state: str = STATE_EMPTY
    doc_count: int = 0
    created_at: float = field(default_factory=time.time)
    store: VectorStore | None = None

    def to_obj(self) -> dict:
        return {
            "name": self.name,
            "state": self.state,
            "documents": self.doc_count,
            "records": self.store.count if self.store is not None else 0,
        }


class CorpusManager:
    def __init__(self, data_dir: Path, embedder: Embedder, ann_seed: int = 0):
        self.root = Path(data_dir) / "corpora"
        self.root.mkdir(parents=True, exist_ok=True)
        self.embedder = embedder
        self.ann_seed = ann_seed
        self._lock = threading.RLock()
        self._corpora: dict[str, CorpusHandle] = {}
        self._load_existing()

    def _dir(self, name: str) -> Path:
        return self.root / name

    def _load_existing(self) -> None:
        for meta_path in sorted(self.root.glob("*/corpus.json")):
            obj = json.loads(meta_path.read_text(encoding="utf-8"))
            handle = CorpusHandle(
                name=obj["name"],
                state=obj["state"],
                doc_count=obj.get("doc_count", 0),
                created_at=obj.get("created_at", 0.0),
            )
            if handle.state == STATE_VECTORIZED:
                handle.store = VectorStore.load(meta_path.parent / "store")
            self._corpora[handle.name] = handle

    def _persist(self, handle: CorpusHandle) -> None:
        obj = {
            "name": handle.name,
            "state": handle.state,
            "doc_count": handle.doc_count,
            "created_at": handle.created_at,
        }
        (self._dir(handle.name) / "corpus.json").write_text(
            json.dumps(obj, indent=2) + "\n", encoding="utf-8"
        )

    def list(self) -> list[CorpusHandle]:
        with self._lock:
            return sorted(self._corpora.values(), key=lambda h: h.name)

    def get(self, name: str) -> CorpusHandle:
        with self._lock:
            if name not in self._corpora:
                raise CorpusNotFoundError(f"no corpus named {name!r}")
            return self._corpora[name]

    def query_store(self, name: str) -> VectorStore:
        handle = self.get(name)
        if handle.state != STATE_VECTORIZED or handle.store is None:
            raise CorpusNotReadyError(
                f"corpus {name!r} is {handle.state}; vectorize it before querying"
            )
        return handle.store

    def create(self, name: str) -> CorpusHandle:
        if not NAME_RE.match(name or ""):
            raise InvalidNameError(
                f"corpus name must match [a-z0-9_-]{{1,64}}, got {name!r}"
            )
        with self._lock:
            if name in self._corpora:
                raise CorpusExistsError(f"corpus {name!r} already exists")
            self._dir(name).mkdir(parents=True, exist_ok=True)
            handle = CorpusHandle(name=name)
            self._corpora[name] = handle
            self._persist(handle)
            return handle

    def _existing_doc_ids(self, name: str) -> set[str]:
        path = self._dir(name) / "documents.jsonl"
        if not path.exists():
            return set()
        return {
            json.loads(line)["id"]
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        }

    def _read_documents(self, name: str) -> list[Document]:
        path = self._dir(name) / "documents.jsonl"
        docs = []
        if path.exists():
            for line in path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                obj = json.loads(line)
                docs.append(
                    Document(
                        id=obj["id"],
                        text=obj["text"],
                        metadata=obj["metadata"],
                        source_path=obj.get("source_path", ""),
                    )
                )
        return docs

    def add_documents(
        self, name: str, manifest: Manifest, root: Path | None = None
    ) -> IngestReport:
        """Ingest manifest entries and append them to the corpus. A previously
        ingested id is reported as a failure, not re-ingested."""
        handle = self.get(name)
        with self._lock:
            report = load_manifest_documents(manifest, root)
            existing = self._existing_doc_ids(name)
            accepted = []
            for doc in report.documents:
                if doc.id in existing:
                    report.failures.append(
                        IngestFailure(doc.id, doc.source_path, f"duplicate document id {doc.id!r}")
                    )
                    continue
                existing.add(doc.id)
                accepted.append(doc)
            report.documents = accepted
            self._append_documents(handle, accepted)
            return report

    def add_document_texts(self, name: str, docs: list[Document]) -> IngestReport:
        """Add already-loaded documents (e.g. multipart uploads)."""
        handle = self.get(name)
        with self._lock:
            existing = self._existing_doc_ids(name)
            report = IngestReport()
            for doc in docs:
                if doc.id in existing:
                    report.failures.append(
                        IngestFailure(doc.id, doc.source_path, f"duplicate document id {doc.id!r}")
                    )
                    continue
                existing.add(doc.id)
                report.documents.append(doc)
            self._append_documents(handle, report.documents)
            return report

    def _append_documents(self, handle: CorpusHandle, docs: list[Document]) -> None:
        if not docs:
            return
        path = self._dir(handle.name) / "documents.jsonl"
        with open(path, "a", encoding="utf-8") as fh:
            for doc in docs:
                fh.write(
                    json.dumps(
                        {
                            "id": doc.id,
                            "text": doc.text,
                            "metadata": doc.metadata,
                            "source_path": doc.source_path,
                        },
                        ensure_ascii=False,
                    )
                )
                fh.write("\n")
        handle.doc_count += len(docs)
        # Any existing store no longer reflects the corpus.
        if handle.state == STATE_VECTORIZED:
            handle.store = None
        handle.state = STATE_INGESTED
        self._persist(handle)

    def vectorize(self, name: str, chunk_params: ChunkParams | None = None) -> StoreMeta:
        """Chunk, embed, index, and persist the corpus store."""
        handle = self.get(name)
        with self._lock:
            if handle.state == STATE_EMPTY:
                raise WrongStateError(
                    f"corpus {name!r} has no documents; add documents before vectorizing"
                )
            params = chunk_params or ChunkParams()
            spec = self.embedder.spec
            store = VectorStore(
                StoreMeta(
                    dim=spec.dim,
                    embedder=spec,
                    chunk_params=params,
                    ann_seed=self.ann_seed,
                )
            )
            for doc in self._read_documents(name):
                chunks = chunk_document(doc, params)
                for start in range(0, len(chunks), _EMBED_BATCH):
                    batch = chunks[start : start + _EMBED_BATCH]
                    vectors = self.embedder.embed_batch([c.text for c in batch])
                    store.insert(batch, vectors)
            if store.count > 0:
                store.build_ann_index()
            store.save(self._dir(name) / "store")
            handle.store = store
            handle.state = STATE_VECTORIZED
            self._persist(handle)
            return store.meta


@dataclass
class Session:
    session_id: str
    corpus: str
    created_at: float
    defaults: dict = field(default_factory=dict)
    history: list[dict] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "session_id": self.session_id,
            "corpus": self.corpus,
            "created_at": self.created_at,
            "defaults": self.defaults,
            "history": self.history,
        }


class SessionStore:
    """Session registry; histories are append-only and survive restarts."""

    def __init__(self, data_dir: Path):
        self.root = Path(data_dir) / "sessions"
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()
        self._sessions: dict[str, Session] = {}
        for path in sorted(self.root.glob("*.json")):
            obj = json.loads(path.read_text(encoding="utf-8"))
            session = Session(
                session_id=obj["session_id"],
                corpus=obj["corpus"],
                created_at=obj["created_at"],
                defaults=obj.get("defaults", {}),
                history=obj.get("history", []),
            )
            self._sessions[session.session_id] = session

    def _persist(self, session: Session) -> None:
        path = self.root / f"{session.session_id}.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(session.to_obj(), ensure_ascii=False), encoding="utf-8")
        tmp.replace(path)

    def create(self, corpus: str, defaults: dict | None = None) -> Session:
        session = Session(
            session_id=uuid.uuid4().hex,
            corpus=corpus,
            created_at=time.time(),
            defaults=dict(defaults or {}),
        )
        with self._lock:
            self._sessions[session.session_id] = session
            self._persist(session)
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            if session_id not in self._sessions:
                raise SessionNotFoundError(f"no session {session_id!r}")
            return self._sessions[session_id]

    def switch_corpus(self, session_id: str, corpus: str) -> Session:
        """Bind the session to another corpus; clears retrieval defaults but
        keeps the history."""
        with self._lock:
            session = self.get(session_id)
            session.corpus = corpus
            session.defaults = {}
            self._persist(session)
            return session

    def append_history(self, session_id: str, entry: dict) -> None:
        with self._lock:
            session = self.get(session_id)
            session.history.append(entry)
            self._persist(session)

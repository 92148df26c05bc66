"""HTTP layer: corpus admin, sessions, queued queries, SSE answer streams."""

from __future__ import annotations

import json
import time
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel
from starlette.datastructures import UploadFile

from .. import engine
from ..chunker import ChunkParams, InvalidParamsError
from ..embed import EmptyTextError, embedding_call_count
from ..engine import (
    Answer,
    EmbedderMismatchError,
    PromptBudget,
    QueryTooLargeError,
    RetrievalParams,
)
from ..errors import BackendUnavailableError, DimensionMismatchError, RagError
from ..filters import FilterPredicate, InvalidFilterError
from ..generation import GenerationTimeoutError
from ..ingest import (
    Document,
    InvalidEncodingError,
    ManifestError,
    UnsupportedExtensionError,
    normalize_text,
    parse_manifest,
    strip_html,
)
from ..vectorstore import StaleIndexError
from .jobs import GenerationJob, GenerationQueue, JobNotFoundError
from .settings import ServiceSettings
from .state import (
    CorpusExistsError,
    CorpusManager,
    CorpusNotFoundError,
    CorpusNotReadyError,
    InvalidNameError,
    SessionNotFoundError,
    SessionStore,
    WrongStateError,
)

_ERROR_STATUS = [
    (CorpusExistsError, 409),
    (CorpusNotFoundError, 404),
    (SessionNotFoundError, 404),
    (JobNotFoundError, 404),
    (WrongStateError, 409),
    (CorpusNotReadyError, 409),
    (EmbedderMismatchError, 409),
    (StaleIndexError, 409),
    (InvalidNameError, 400),
    (ManifestError, 400),
    (InvalidFilterError, 400),
    (InvalidParamsError, 400),
    (EmptyTextError, 400),
    (QueryTooLargeError, 400),
    (UnsupportedExtensionError, 400),
    (InvalidEncodingError, 400),
    (DimensionMismatchError, 400),
    (GenerationTimeoutError, 504),
    (BackendUnavailableError, 502),
]


def _status_for(exc: RagError) -> int:
    for cls, status in _ERROR_STATUS:
        if isinstance(exc, cls):
            return status
    return 500


class ServiceState:
    """Everything the route handlers share."""

    def __init__(self, settings: ServiceSettings):
        self.settings = settings
        settings.data_dir.mkdir(parents=True, exist_ok=True)
        self.embedder = settings.build_embedder()
        self.backend = settings.build_backend()
        self.budget = PromptBudget(
            context_window=settings.context_window,
            answer_reserve=settings.answer_reserve,
        )
        self.corpora = CorpusManager(settings.data_dir, self.embedder)
        self.sessions = SessionStore(settings.data_dir)
        self.queue = GenerationQueue(self._process_job)
        self.started_at = time.time()

    def close(self) -> None:
        self.queue.shutdown()

    def _process_job(self, job: GenerationJob) -> None:
        session = self.sessions.get(job.session_id)
        store = self.corpora.query_store(session.corpus)
        merged = {**session.defaults, **job.overrides}
        params = RetrievalParams(
            top_n=int(merged.get("top_n", engine.DEFAULT_TOP_N)),
            min_score=float(merged.get("min_score", engine.DEFAULT_MIN_SCORE)),
            filter=FilterPredicate.from_obj(merged.get("filter")),
            use_ann=bool(merged.get("use_ann", False)),
        )
        hits = engine.retrieve(store, job.query_text, params, self.embedder)
        bundle = engine.assemble_prompt(hits, job.query_text, self.budget)
        parts: list[str] = []
        for delta in self.backend.stream(bundle):
            parts.append(delta)
            job.emit("token", {"text": delta})
        answer = Answer(
            text="".join(parts),
            sources=list(bundle.included_hits),
            backend_id=self.backend.backend_id,
        )
        job.emit("sources", {"hits": [hit.to_obj() for hit in answer.sources]})
        self.sessions.append_history(
            job.session_id,
            {"query": job.query_text, "answer": answer.to_obj(), "timestamp": time.time()},
        )


class CreateCorpusBody(BaseModel):
    name: str


class VectorizeBody(BaseModel):
    chunk_size: int | None = None
    overlap: int | None = None


class CreateSessionBody(BaseModel):
    corpus: str
    top_n: int | None = None
    min_score: float | None = None
    use_ann: bool | None = None


class SwitchCorpusBody(BaseModel):
    corpus: str


class QueryBody(BaseModel):
    text: str
    top_n: int | None = None
    min_score: float | None = None
    filter: list | dict | None = None
    use_ann: bool | None = None


def _sse(event: str, data: dict) -> str:
    return f"event: {event}\ndata: {json.dumps(data, ensure_ascii=False)}\n\n"


def create_app(settings: ServiceSettings | None = None) -> FastAPI:
    settings = settings or ServiceSettings.from_env()
    state = ServiceState(settings)
    app = FastAPI(title="ragstack service", version="0.1.0")
    app.state.rag = state
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RagError)
    async def _rag_error(request: Request, exc: RagError):
        name = type(exc).__name__
        if name.endswith("Error"):
            name = name[: -len("Error")]
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error": name, "detail": str(exc)},
        )

    def require_auth(request: Request) -> None:
        token = settings.auth_token
        if token and request.headers.get("authorization") != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or invalid bearer token")

    auth = Depends(require_auth)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/stats", dependencies=[auth])
    def stats():
        return {
            "embed_calls": embedding_call_count(),
            "corpora": len(state.corpora.list()),
            "backend_id": state.backend.backend_id,
            "embedder_id": state.embedder.spec.id,
            "uptime_s": time.time() - state.started_at,
        }

    # ---- corpora ---------------------------------------------------------

    @app.post("/corpora", status_code=201, dependencies=[auth])
    def create_corpus(body: CreateCorpusBody):
        return state.corpora.create(body.name).to_obj()

    @app.get("/corpora", dependencies=[auth])
    def list_corpora():
        return {"corpora": [h.to_obj() for h in state.corpora.list()]}

    @app.get("/corpora/{name}", dependencies=[auth])
    def get_corpus(name: str):
        return state.corpora.get(name).to_obj()

    @app.post("/corpora/{name}/documents", dependencies=[auth])
    async def add_documents(name: str, request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            docs = []
            failures = []
            for item in form.getlist("files"):
                if not isinstance(item, UploadFile):
                    continue
                raw = await item.read()
                filename = item.filename or "upload.txt"
                doc, failure = _document_from_upload(filename, raw)
                if doc is not None:
                    docs.append(doc)
                else:
                    failures.append(failure)
            report = state.corpora.add_document_texts(name, docs)
            report.failures.extend(failures)
        else:
            manifest = parse_manifest(await request.body())
            report = state.corpora.add_documents(name, manifest, root=Path.cwd())
        return {
            "added": len(report.documents),
            "errors": [
                {"id": f.doc_id, "path": f.path, "error": f.error} for f in report.failures
            ],
        }

    @app.post("/corpora/{name}/vectorize", dependencies=[auth])
    def vectorize(name: str, body: VectorizeBody | None = None):
        body = body or VectorizeBody()
        params = None
        if body.chunk_size is not None or body.overlap is not None:
            params = ChunkParams(
                chunk_size=body.chunk_size if body.chunk_size is not None else 256,
                overlap=body.overlap if body.overlap is not None else 32,
            )
        meta = state.corpora.vectorize(name, params)
        return {
            "dim": meta.dim,
            "embedder_id": meta.embedder.id,
            "chunk_size": meta.chunk_params.chunk_size,
            "overlap": meta.chunk_params.overlap,
            "count": meta.count,
            "ann_seed": meta.ann_seed,
        }

    # ---- sessions --------------------------------------------------------

    @app.post("/sessions", status_code=201, dependencies=[auth])
    def create_session(body: CreateSessionBody):
        state.corpora.get(body.corpus)  # existence check
        defaults = {
            k: v
            for k, v in {
                "top_n": body.top_n,
                "min_score": body.min_score,
                "use_ann": body.use_ann,
            }.items()
            if v is not None
        }
        session = state.sessions.create(body.corpus, defaults)
        return {"session_id": session.session_id, "corpus": session.corpus}

    @app.get("/sessions/{session_id}/history", dependencies=[auth])
    def get_history(session_id: str):
        session = state.sessions.get(session_id)
        return {
            "session_id": session.session_id,
            "corpus": session.corpus,
            "history": session.history,
        }

    @app.post("/sessions/{session_id}/corpus", dependencies=[auth])
    def switch_corpus(session_id: str, body: SwitchCorpusBody):
        state.corpora.get(body.corpus)
        session = state.sessions.switch_corpus(session_id, body.corpus)
        return {"session_id": session.session_id, "corpus": session.corpus}

    @app.post("/sessions/{session_id}/query", status_code=202, dependencies=[auth])
    def submit_query(session_id: str, body: QueryBody):
        session = state.sessions.get(session_id)
        # Corpus must be queryable at submission time, not just at run time.
        state.corpora.query_store(session.corpus)
        if body.filter is not None:
            FilterPredicate.from_obj(body.filter)  # validate before queueing
        overrides = {
            k: v
            for k, v in {
                "top_n": body.top_n,
                "min_score": body.min_score,
                "filter": body.filter,
                "use_ann": body.use_ann,
            }.items()
            if v is not None
        }
        job = state.queue.submit(session_id, body.text, overrides)
        return {"job_id": job.job_id, "state": job.state}

    # ---- jobs ------------------------------------------------------------

    @app.get("/jobs/{job_id}", dependencies=[auth])
    def get_job(job_id: int):
        return state.queue.get(job_id).to_obj()

    @app.get("/jobs/{job_id}/stream", dependencies=[auth])
    def stream_job(job_id: int):
        job = state.queue.get(job_id)

        def events():
            index = 0
            while True:
                batch, index = job.events_since(index, timeout=15.0)
                if not batch:
                    yield ": keep-alive\n\n"
                    continue
                for event in batch:
                    yield _sse(event.kind, event.data)
                    if event.kind in ("done", "failed"):
                        return

        return StreamingResponse(
            events(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    if settings.ui_dir and Path(settings.ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=settings.ui_dir, html=True), name="ui")

    return app


def _document_from_upload(filename: str, raw: bytes):
    """Turn an uploaded file into a Document (id = filename stem)."""
    from ..ingest import IngestFailure, SUPPORTED_EXTENSIONS

    path = Path(filename)
    ext = path.suffix.lower()
    if ext not in SUPPORTED_EXTENSIONS:
        return None, IngestFailure(path.stem, filename, f"unsupported extension {ext!r}")
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        return None, IngestFailure(path.stem, filename, f"not valid UTF-8 ({exc})")
    if ext in (".html", ".htm"):
        text = strip_html(text)
    return (
        Document(id=path.stem, text=normalize_text(text), metadata={}, source_path=filename),
        None,
    )

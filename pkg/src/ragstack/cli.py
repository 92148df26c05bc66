"""Command-line interface: serve, ingest, vectorize, query, eval."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .chunker import ChunkParams
from .engine import PromptBudget, RetrievalParams, answer_query
from .errors import RagError
from .evaluation import SweepConfig, run_sweep, write_report
from .ingest import parse_manifest
from .service.settings import ServiceSettings
from .service.state import CorpusManager, CorpusNotFoundError


def _int_list(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in raw.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rag", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--data-dir", default=None, help="state directory (env RAG_DATA_DIR)")
        p.add_argument("--embedder", default=None, help="embedder id (env RAG_EMBEDDER)")
        p.add_argument(
            "--embed-endpoint",
            default=None,
            help="external embeddings endpoint URL (env RAG_EMBED_ENDPOINT)",
        )
        p.add_argument(
            "--embed-dim", type=int, default=None, help="embedding dimension (env RAG_EMBED_DIM)"
        )

    p = sub.add_parser("serve", help="run the HTTP service")
    add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--llm-endpoint", default=None, help="chat endpoint URL (env RAG_LLM_ENDPOINT)")
    p.add_argument("--llm-model", default=None, help="model id for the chat endpoint")
    p.add_argument("--auth-token", default=None, help="shared bearer token (env RAG_AUTH_TOKEN)")
    p.add_argument("--ui-dir", default=None, help="static frontend directory to serve at /")

    p = sub.add_parser("ingest", help="create a corpus (if needed) and add manifest documents")
    add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--manifest", required=True, help="JSONL manifest path")

    p = sub.add_parser("vectorize", help="chunk, embed, index, and persist a corpus")
    add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--chunk-size", type=int, default=None)
    p.add_argument("--overlap", type=int, default=None)

    p = sub.add_parser("query", help="one-shot query: print the answer, then its sources")
    add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--top-n", type=int, default=4)
    p.add_argument("--min-score", type=float, default=0.0)
    p.add_argument("--use-ann", action="store_true")
    p.add_argument("--llm-endpoint", default=None)
    p.add_argument("--llm-model", default=None)

    p = sub.add_parser("eval", help="sweep retrieval hyperparameters on a needle corpus")
    p.add_argument("--docs", type=int, default=25)
    p.add_argument("--doc-tokens", type=int, default=400)
    p.add_argument("--needles", type=int, default=25)
    p.add_argument("--chunk-sizes", type=_int_list, default=(256,))
    p.add_argument("--overlaps", type=_int_list, default=(32,))
    p.add_argument("--top-ns", type=_int_list, default=(4,))
    p.add_argument("--context-windows", type=_int_list, default=(4096,))
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--embed-dim", type=int, default=None)
    p.add_argument("--out", required=True, help="CSV report path (JSON mirror written next to it)")

    return parser


def _settings(args) -> ServiceSettings:
    return ServiceSettings.from_env(
        data_dir=getattr(args, "data_dir", None),
        embedder_id=getattr(args, "embedder", None),
        embed_endpoint=getattr(args, "embed_endpoint", None),
        embed_dim=getattr(args, "embed_dim", None),
        llm_endpoint=getattr(args, "llm_endpoint", None),
        llm_model=getattr(args, "llm_model", None),
        auth_token=getattr(args, "auth_token", None),
        ui_dir=getattr(args, "ui_dir", None),
    )


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(_settings(args))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_ingest(args) -> int:
    settings = _settings(args)
    manager = CorpusManager(settings.data_dir, settings.build_embedder())
    try:
        manager.get(args.corpus)
    except CorpusNotFoundError:
        manager.create(args.corpus)
    manifest_path = Path(args.manifest)
    manifest = parse_manifest(manifest_path.read_bytes())
    report = manager.add_documents(args.corpus, manifest, root=manifest_path.parent)
    print(f"added {len(report.documents)} document(s) to corpus {args.corpus!r}")
    for failure in report.failures:
        print(f"  error: {failure.doc_id} ({failure.path}): {failure.error}")
    return 1 if report.failures else 0


def cmd_vectorize(args) -> int:
    settings = _settings(args)
    manager = CorpusManager(settings.data_dir, settings.build_embedder())
    params = None
    if args.chunk_size is not None or args.overlap is not None:
        params = ChunkParams(
            chunk_size=args.chunk_size if args.chunk_size is not None else 256,
            overlap=args.overlap if args.overlap is not None else 32,
        )
    meta = manager.vectorize(args.corpus, params)
    print(
        f"vectorized corpus {args.corpus!r}: {meta.count} chunks, dim {meta.dim}, "
        f"chunk_size {meta.chunk_params.chunk_size}, overlap {meta.chunk_params.overlap}"
    )
    return 0


def cmd_query(args) -> int:
    settings = _settings(args)
    embedder = settings.build_embedder()
    manager = CorpusManager(settings.data_dir, embedder)
    store = manager.query_store(args.corpus)
    params = RetrievalParams(
        top_n=args.top_n, min_score=args.min_score, use_ann=args.use_ann
    )
    answer = answer_query(
        store,
        args.text,
        params,
        PromptBudget(
            context_window=settings.context_window, answer_reserve=settings.answer_reserve
        ),
        settings.build_backend(),
        embedder,
    )
    print(answer.text)
    print()
    print("Sources:")
    if not answer.sources:
        print("  (none)")
    for rank, hit in enumerate(answer.sources, start=1):
        metadata = {
            k: v for k, v in hit.chunk.metadata.items() if k not in ("doc_id", "chunk_index")
        }
        print(
            f"  [{rank}] {hit.chunk.doc_id}#{hit.chunk.index} "
            f"score={hit.score:.4f} {json.dumps(metadata, ensure_ascii=False)}"
        )
    return 0


def cmd_eval(args) -> int:
    config = SweepConfig(
        chunk_sizes=args.chunk_sizes,
        overlaps=args.overlaps,
        top_ns=args.top_ns,
        context_windows=args.context_windows,
        trials=args.trials,
        seed=args.seed,
        n_docs=args.docs,
        doc_tokens=args.doc_tokens,
        n_needles=args.needles,
        **({"dim": args.embed_dim} if args.embed_dim else {}),
    )
    result = run_sweep(config)
    json_path = write_report(result, args.out)
    print(f"wrote {len(result.rows)} row(s) to {args.out} (JSON mirror: {json_path})")
    best = max(result.rows, key=lambda r: (r.recall_at_n, -r.mean_retrieval_time))
    print(
        f"best recall@n: chunk_size={best.chunk_size} overlap={best.overlap} "
        f"top_n={best.top_n} window={best.context_window} "
        f"recall@1={best.recall_at_1:.3f} recall@n={best.recall_at_n:.3f}"
    )
    return 0


_COMMANDS = {
    "serve": cmd_serve,
    "ingest": cmd_ingest,
    "vectorize": cmd_vectorize,
    "query": cmd_query,
    "eval": cmd_eval,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (RagError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

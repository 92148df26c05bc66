"""Service configuration from environment variables and CLI flags.

Env vars: RAG_DATA_DIR, RAG_LLM_ENDPOINT, RAG_LLM_MODEL, RAG_EMBEDDER,
RAG_EMBED_ENDPOINT, RAG_EMBED_DIM, RAG_AUTH_TOKEN. Flags override env.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from ..embed import (
    DEFAULT_DIM,
    REFERENCE_EMBEDDER_ID,
    Embedder,
    EmbedderSpec,
    ReferenceEmbedder,
    RemoteEmbedder,
)
from ..generation import RemoteChatBackend, StubBackend

DEFAULT_DATA_DIR = "rag-data"


@dataclass
class ServiceSettings:
    data_dir: Path = field(default_factory=lambda: Path(DEFAULT_DATA_DIR))
    llm_endpoint: str | None = None
    llm_model: str = "local"
    embedder_id: str = REFERENCE_EMBEDDER_ID
    embed_endpoint: str | None = None
    embed_dim: int = DEFAULT_DIM
    auth_token: str | None = None
    context_window: int = 4096
    answer_reserve: int = 512
    ui_dir: Path | None = None

    @classmethod
    def from_env(cls, **overrides) -> "ServiceSettings":
        values = {
            "data_dir": os.environ.get("RAG_DATA_DIR", DEFAULT_DATA_DIR),
            "llm_endpoint": os.environ.get("RAG_LLM_ENDPOINT") or None,
            "llm_model": os.environ.get("RAG_LLM_MODEL", "local"),
            "embedder_id": os.environ.get("RAG_EMBEDDER", REFERENCE_EMBEDDER_ID),
            "embed_endpoint": os.environ.get("RAG_EMBED_ENDPOINT") or None,
            "embed_dim": int(os.environ.get("RAG_EMBED_DIM", DEFAULT_DIM)),
            "auth_token": os.environ.get("RAG_AUTH_TOKEN") or None,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        values["data_dir"] = Path(values["data_dir"])
        if values.get("ui_dir"):
            values["ui_dir"] = Path(values["ui_dir"])
        return cls(**values)

    def build_embedder(self) -> Embedder:
        spec = EmbedderSpec(id=self.embedder_id, dim=self.embed_dim)
        if self.embed_endpoint:
            return RemoteEmbedder(self.embed_endpoint, spec)
        if not self.embedder_id.startswith("ref-"):
            raise ValueError(
                f"embedder {self.embedder_id!r} needs RAG_EMBED_ENDPOINT "
                "(only ref-* embedders run in-process)"
            )
        return ReferenceEmbedder(spec)

    def build_backend(self):
        if self.llm_endpoint:
            return RemoteChatBackend(self.llm_endpoint, self.llm_model)
        return StubBackend()

"""Generation backends: a deterministic extractive stub and a remote adapter.

The stub makes the full pipeline runnable and testable with no model weights.
Locally hosted models (GGUF runners, vLLM, llama.cpp server, ...) and hosted
APIs are reached through the same remote adapter as long as they speak the
streaming chat-completions shape.
"""

from __future__ import annotations

import json
import re
from typing import Iterator

import httpx

from .chunker import tokenize
from .engine import PromptBundle, serialize_user_prompt
from .errors import BackendUnavailableError, RagError

STUB_BACKEND_ID = "extractive-v1"
STUB_PREVIEW_TOKENS = 30

DEFAULT_GENERATION_TIMEOUT = 120.0


class GenerationTimeoutError(RagError):
    """The generation backend did not answer within the configured timeout."""


def split_token_deltas(text: str) -> list[str]:
    """Split text into word-sized deltas whose concatenation is exactly `text`."""
    if not text:
        return []
    parts = re.findall(r"\s*\S+", text)
    consumed = sum(len(p) for p in parts)
    if consumed < len(text):
        parts.append(text[consumed:])
    return parts


class StubBackend:
    """Deterministic extractive backend.

    The answer is a header naming the passage count, then one line per
    included hit: its [doc_id#chunk_index] tag and the first 30 tokens of the
    chunk text. Byte-identical across calls on the same bundle.
    """

    backend_id = STUB_BACKEND_ID

    def render(self, bundle: PromptBundle) -> str:
        lines = [f"Based on {len(bundle.included_hits)} retrieved passage(s):"]
        for hit in bundle.included_hits:
            preview = " ".join(tokenize(hit.chunk.text)[:STUB_PREVIEW_TOKENS])
            lines.append(f"[{hit.chunk.doc_id}#{hit.chunk.index}] {preview}")
        return "\n".join(lines)

    def stream(self, bundle: PromptBundle) -> Iterator[str]:
        yield from split_token_deltas(self.render(bundle))


class RemoteChatBackend:
    """Adapter for a streaming chat-completions HTTP endpoint.

    Request: POST {"model", "messages": [...], "stream": true}; the endpoint
    answers with line-delimited `data: {...}` events carrying token deltas
    under choices[0].delta.content, terminated by `data: [DONE]`.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        timeout: float = DEFAULT_GENERATION_TIMEOUT,
    ):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.backend_id = f"remote:{model}"

    def stream(self, bundle: PromptBundle) -> Iterator[str]:
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": bundle.system_instruction},
                {"role": "user", "content": serialize_user_prompt(bundle)},
            ],
            "stream": True,
        }
        try:
            with httpx.stream(
                "POST", self.endpoint, json=payload, timeout=self.timeout
            ) as resp:
                resp.raise_for_status()
                for line in resp.iter_lines():
                    if not line.startswith("data:"):
                        continue
                    data = line[len("data:") :].strip()
                    if data == "[DONE]":
                        return
                    try:
                        event = json.loads(data)
                        delta = event["choices"][0].get("delta", {}).get("content")
                    except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
                        raise BackendUnavailableError(
                            f"generation endpoint {self.endpoint}: malformed stream event ({exc})"
                        ) from exc
                    if delta:
                        yield delta
        except httpx.TimeoutException as exc:
            raise GenerationTimeoutError(
                f"generation endpoint {self.endpoint} timed out after {self.timeout}s"
            ) from exc
        except httpx.HTTPError as exc:
            raise BackendUnavailableError(
                f"generation endpoint {self.endpoint}: {exc}"
            ) from exc

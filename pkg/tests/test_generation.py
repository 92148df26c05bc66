from __future__ import annotations

import pytest

from fakes import FakeEndpoint, chat_handler, embedding_handler
from ragstack.embed import EmbedderSpec, RemoteEmbedder
from ragstack.engine import PromptBundle, generate, serialize_user_prompt
from ragstack.errors import BackendUnavailableError
from ragstack.generation import (
    GenerationTimeoutError,
    RemoteChatBackend,
    split_token_deltas,
)


class TestSplitTokenDeltas:
    @pytest.mark.parametrize(
        "text",
        ["", "one", "two words", "  leading", "trailing  ", "a\nb\nc", "multi  space"],
    )
    def test_concatenation_identity(self, text):
        assert "".join(split_token_deltas(text)) == text

    def test_word_sized(self):
        assert split_token_deltas("alpha beta") == ["alpha", " beta"]


class TestRemoteChatBackend:
    def test_streams_tokens(self):
        handler = chat_handler(["Hello", " ", "world"])
        with FakeEndpoint(handler) as ep:
            backend = RemoteChatBackend(f"{ep.url}/v1/chat/completions", "test-model")
            bundle = PromptBundle("sys", [], "hi", 5)
            answer = generate(bundle, backend)
        assert answer.text == "Hello world"
        assert answer.backend_id == "remote:test-model"
        # The request carried the serialized prompt and stream flag.
        request = handler.captured[-1]
        assert request["stream"] is True
        assert request["messages"][0] == {"role": "system", "content": "sys"}
        assert request["messages"][1]["content"] == serialize_user_prompt(bundle)

    def test_unreachable_endpoint(self):
        backend = RemoteChatBackend("http://127.0.0.1:9/chat", "test-model")
        with pytest.raises(BackendUnavailableError):
            list(backend.stream(PromptBundle("sys", [], "hi", 5)))

    def test_http_error(self):
        with FakeEndpoint(chat_handler([], status=500)) as ep:
            backend = RemoteChatBackend(f"{ep.url}/chat", "test-model")
            with pytest.raises(BackendUnavailableError):
                list(backend.stream(PromptBundle("sys", [], "hi", 5)))

    def test_timeout(self):
        with FakeEndpoint(chat_handler(["late"], hang=1.5)) as ep:
            backend = RemoteChatBackend(f"{ep.url}/chat", "test-model", timeout=0.2)
            with pytest.raises(GenerationTimeoutError):
                list(backend.stream(PromptBundle("sys", [], "hi", 5)))


class TestRemoteEmbedder:
    def test_round_trip(self):
        spec = EmbedderSpec(id="remote-embed", dim=16)
        with FakeEndpoint(embedding_handler(16)) as ep:
            embedder = RemoteEmbedder(f"{ep.url}/v1/embeddings", spec)
            vecs = embedder.embed_batch(["alpha", "beta"])
            again = embedder.embed_text("alpha")
        assert len(vecs) == 2
        assert vecs[0].shape == (16,)
        assert abs(float((vecs[0] ** 2).sum()) - 1.0) < 1e-5
        assert (vecs[0] == again).all()

    def test_unreachable(self):
        spec = EmbedderSpec(id="remote-embed", dim=16)
        embedder = RemoteEmbedder("http://127.0.0.1:9/embed", spec)
        with pytest.raises(BackendUnavailableError):
            embedder.embed_text("alpha")

    def test_http_error(self):
        spec = EmbedderSpec(id="remote-embed", dim=16)
        with FakeEndpoint(embedding_handler(16, fail=True)) as ep:
            embedder = RemoteEmbedder(f"{ep.url}/v1/embeddings", spec)
            with pytest.raises(BackendUnavailableError):
                embedder.embed_text("alpha")

    def test_dimension_checked(self):
        from ragstack.errors import DimensionMismatchError

        spec = EmbedderSpec(id="remote-embed", dim=32)
        with FakeEndpoint(embedding_handler(16)) as ep:
            embedder = RemoteEmbedder(f"{ep.url}/v1/embeddings", spec)
            with pytest.raises(DimensionMismatchError):
                embedder.embed_text("alpha")

    def test_empty_text_rejected_before_request(self):
        from ragstack.embed import EmptyTextError

        spec = EmbedderSpec(id="remote-embed", dim=16)
        embedder = RemoteEmbedder("http://127.0.0.1:9/embed", spec)
        with pytest.raises(EmptyTextError) as exc:
            embedder.embed_batch(["ok", "  "])
        assert exc.value.index == 1

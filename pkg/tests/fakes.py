"""Local fake HTTP servers standing in for external embedding/LLM endpoints."""

from __future__ import annotations

import json
import socketserver
import threading
from http.server import BaseHTTPRequestHandler

import numpy as np


class _Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class FakeEndpoint:
    """Context manager running a handler class on an ephemeral localhost port."""

    def __init__(self, handler_cls):
        self._server = _Server(("127.0.0.1", 0), handler_cls)
        self.port = self._server.server_address[1]
        self.url = f"http://127.0.0.1:{self.port}"
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._server.shutdown()
        self._server.server_close()


def embedding_handler(dim: int, fail: bool = False):
    """Handler answering the embeddings wire shape with deterministic vectors."""

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            if fail:
                self.send_response(503)
                self.end_headers()
                return
            length = int(self.headers["Content-Length"])
            payload = json.loads(self.rfile.read(length))
            data = []
            for text in payload["input"]:
                rng = np.random.default_rng(abs(hash(text)) % (2**32))
                vec = rng.standard_normal(dim)
                vec /= np.linalg.norm(vec)
                data.append({"embedding": vec.tolist()})
            body = json.dumps({"data": data}).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    return Handler


def chat_handler(reply_tokens: list[str], status: int = 200, hang: float = 0.0):
    """Handler streaming chat-completion deltas, one SSE event per token."""

    class Handler(BaseHTTPRequestHandler):
        captured: list[dict] = []

        def do_POST(self):
            length = int(self.headers["Content-Length"])
            Handler.captured.append(json.loads(self.rfile.read(length)))
            if hang:
                import time

                time.sleep(hang)
            if status != 200:
                self.send_response(status)
                self.end_headers()
                return
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.end_headers()
            for token in reply_tokens:
                event = {"choices": [{"delta": {"content": token}}]}
                self.wfile.write(f"data: {json.dumps(event)}\n\n".encode())
            self.wfile.write(b"data: [DONE]\n\n")

        def log_message(self, *args):
            pass

    return Handler

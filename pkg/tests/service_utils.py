"""Helpers for exercising the HTTP service in tests."""

from __future__ import annotations

import json
import threading
import time

import httpx
import uvicorn


class LiveServer:
    """Run a FastAPI app under real uvicorn on an ephemeral localhost port."""

    def __init__(self, app):
        self.app = app
        config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)
        self.url = ""

    def __enter__(self) -> "LiveServer":
        self.thread.start()
        deadline = time.time() + 10
        while not self.server.started:
            if time.time() > deadline:
                raise RuntimeError("uvicorn did not start")
            time.sleep(0.01)
        port = self.server.servers[0].sockets[0].getsockname()[1]
        self.url = f"http://127.0.0.1:{port}"
        return self

    def __exit__(self, *exc):
        self.server.should_exit = True
        self.thread.join(timeout=10)
        self.app.state.rag.close()


def parse_sse(text: str) -> list[tuple[str, dict]]:
    """Parse a buffered SSE body into (event, data) pairs, ignoring comments."""
    events = []
    event_name = None
    for line in text.split("\n"):
        if line.startswith("event: "):
            event_name = line[len("event: ") :]
        elif line.startswith("data: ") and event_name is not None:
            events.append((event_name, json.loads(line[len("data: ") :])))
            event_name = None
    return events


def stream_sse(base_url: str, job_id: int, headers: dict | None = None, timeout: float = 60.0):
    """Consume a live SSE stream until the terminal event."""
    events = []
    event_name = None
    with httpx.stream(
        "GET", f"{base_url}/jobs/{job_id}/stream", headers=headers, timeout=timeout
    ) as resp:
        resp.raise_for_status()
        for line in resp.iter_lines():
            if line.startswith("event: "):
                event_name = line[len("event: ") :]
            elif line.startswith("data: ") and event_name is not None:
                events.append((event_name, json.loads(line[len("data: ") :])))
                if event_name in ("done", "failed"):
                    return events
                event_name = None
    return events


def answer_text_from_events(events: list[tuple[str, dict]]) -> str:
    return "".join(data["text"] for name, data in events if name == "token")


def seed_corpus(client, tmp_path, name="trade", n_docs=3, extra_meta=None):
    """Create a corpus over real files and vectorize it through the API.

    `client` is anything with .post/.get returning httpx-style responses and
    a base_url already applied (TestClient or a bound httpx.Client).
    """
    docs_dir = tmp_path / "docs"
    docs_dir.mkdir(exist_ok=True)
    lines = []
    for i in range(n_docs):
        path = docs_dir / f"doc{i}.txt"
        path.write_text(
            f"report {i} about trade and tariffs in region {i} "
            + " ".join(f"filler{i}w{j}" for j in range(40))
        )
        entry = {"id": f"doc{i}", "path": str(path), "year": 2019 + i}
        if extra_meta:
            entry.update(extra_meta)
        lines.append(json.dumps(entry))
    resp = client.post("/corpora", json={"name": name})
    assert resp.status_code == 201, resp.text
    resp = client.post(
        f"/corpora/{name}/documents",
        content="\n".join(lines).encode(),
        headers={"Content-Type": "application/x-ndjson"},
    )
    assert resp.status_code == 200, resp.text
    assert resp.json()["added"] == n_docs
    resp = client.post(f"/corpora/{name}/vectorize", json={"chunk_size": 32, "overlap": 8})
    assert resp.status_code == 200, resp.text
    return resp.json()

"""Single-consumer FIFO generation queue.

Exactly one generation job runs at a time, strictly in job-id (submission)
order; retrieval and vectorization are not serialized by this queue. Each job
keeps an append-only event log that any number of stream readers can replay
concurrently, whether they attach before, during, or after execution.
"""

from __future__ import annotations

import queue
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

from ..errors import RagError

STATE_QUEUED = "queued"
STATE_RUNNING = "running"
STATE_DONE = "done"
STATE_FAILED = "failed"

_TERMINAL_EVENTS = ("done", "failed")


class JobNotFoundError(RagError):
    pass


@dataclass
class JobEvent:
    kind: str  # status | token | sources | done | failed
    data: dict = field(default_factory=dict)


class GenerationJob:
    def __init__(self, job_id: int, session_id: str, query_text: str, overrides: dict):
        self.job_id = job_id
        self.session_id = session_id
        self.query_text = query_text
        self.overrides = overrides
        self.state = STATE_QUEUED
        self.submitted_at = time.time()
        self.started_at: float | None = None
        self.finished_at: float | None = None
        self.started_mono: float | None = None
        self.finished_mono: float | None = None
        self.error: str | None = None
        self._events: list[JobEvent] = []
        self._cond = threading.Condition()

    def emit(self, kind: str, data: dict | None = None) -> None:
        with self._cond:
            self._events.append(JobEvent(kind, data or {}))
            self._cond.notify_all()

    def events_since(self, index: int, timeout: float = 10.0) -> tuple[list[JobEvent], int]:
        """Return events after `index`, waiting up to `timeout` for new ones."""
        with self._cond:
            if index >= len(self._events):
                self._cond.wait(timeout)
            events = self._events[index:]
            return events, index + len(events)

    @property
    def finished(self) -> bool:
        with self._cond:
            return any(e.kind in _TERMINAL_EVENTS for e in self._events)

    def to_obj(self) -> dict:
        return {
            "job_id": self.job_id,
            "session_id": self.session_id,
            "state": self.state,
            "submitted_at": self.submitted_at,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "started_mono": self.started_mono,
            "finished_mono": self.finished_mono,
            "error": self.error,
        }


class GenerationQueue:
    """FIFO queue with one worker thread.

    `process` receives the job and is responsible for emitting token/sources
    events; the queue takes care of state transitions, status events, and the
    terminal done/failed event.
    """

    def __init__(self, process: Callable[[GenerationJob], None]):
        self._process = process
        self._queue: queue.Queue[GenerationJob | None] = queue.Queue()
        self._lock = threading.Lock()
        self._jobs: dict[int, GenerationJob] = {}
        self._next_id = 1
        self._worker = threading.Thread(target=self._run, name="generation-worker", daemon=True)
        self._worker.start()

    def submit(self, session_id: str, query_text: str, overrides: dict | None = None) -> GenerationJob:
        with self._lock:
            job = GenerationJob(self._next_id, session_id, query_text, overrides or {})
            self._next_id += 1
            self._jobs[job.job_id] = job
            position = sum(
                1
                for other in self._jobs.values()
                if other.state == STATE_QUEUED and other.job_id < job.job_id
            )
            self._queue.put(job)
        job.emit("status", {"state": STATE_QUEUED, "position": position})
        return job

    def get(self, job_id: int) -> GenerationJob:
        with self._lock:
            if job_id not in self._jobs:
                raise JobNotFoundError(f"no job {job_id}")
            return self._jobs[job_id]

    def _notify_positions(self) -> None:
        with self._lock:
            waiting = sorted(
                (j for j in self._jobs.values() if j.state == STATE_QUEUED),
                key=lambda j: j.job_id,
            )
        for position, job in enumerate(waiting):
            job.emit("status", {"state": STATE_QUEUED, "position": position})

    def _run(self) -> None:
        while True:
            job = self._queue.get()
            if job is None:
                return
            job.state = STATE_RUNNING
            job.started_at = time.time()
            job.started_mono = time.monotonic()
            job.emit("status", {"state": STATE_RUNNING})
            self._notify_positions()
            try:
                self._process(job)
            except Exception as exc:  # noqa: BLE001 - failure becomes an event
                job.error = f"{type(exc).__name__}: {exc}"
                job.finished_at = time.time()
                job.finished_mono = time.monotonic()
                job.state = STATE_FAILED
                job.emit("failed", {"error": job.error})
            else:
                job.finished_at = time.time()
                job.finished_mono = time.monotonic()
                job.state = STATE_DONE
                job.emit("done")
            finally:
                self._queue.task_done()

    def shutdown(self) -> None:
        self._queue.put(None)
        self._worker.join(timeout=30)

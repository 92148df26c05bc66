"""Multi-user HTTP service: corpus management, vectorization, FIFO-queued chat."""

from .app import create_app
from .settings import ServiceSettings

__all__ = ["ServiceSettings", "create_app"]

"""HTTP facade: FastAPI app plus the client the CLI talks through."""

from .app import create_app
from .client import ApiClient, ApiError

__all__ = ["create_app", "ApiClient", "ApiError"]

"""HTTP service layer: pydantic models and the FastAPI application."""

from .app import app
from .models import RunConfig

__all__ = ["RunConfig", "app"]

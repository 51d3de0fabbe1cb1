"""FastAPI service exposing simulation, estimation, reporting, and live
positioning sessions over HTTP."""

from .routes import create_app

__all__ = ["create_app"]

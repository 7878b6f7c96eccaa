"""HTTP service: configuration, composition root, and REST routes."""

from .app import create_app
from .config import ServerConfig, load_config
from .state import AppState

__all__ = ["AppState", "ServerConfig", "create_app", "load_config"]

from .app import create_app, serve, ServeConfig
from .state import PlatformState

__all__ = ["create_app", "serve", "ServeConfig", "PlatformState"]

from .app import create_app
from .handlers import EngineHandlers

__all__ = ["create_app", "EngineHandlers"]

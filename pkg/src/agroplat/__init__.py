"""Self-hostable farm advisory and trading platform.

Leaf-photo vegetation indices and disease classification, an agronomist
diagnosis workflow, an auction marketplace, chat, analytics, and the HTTP +
realtime gateway tying them together.
"""
from .config import Config, load_config
from .errors import PlatformError
from .runtime import Platform

__version__ = "1.0.0"

__all__ = ["Config", "load_config", "Platform", "PlatformError", "__version__"]

from . import logsetup
from .handler import handler

logsetup.configure_default()

__version__ = "0.1.0"

__all__ = ["handler"]

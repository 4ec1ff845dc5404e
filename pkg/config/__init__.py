from config.logging_setup import configure_logging
from config.settings import Settings, settings

__all__ = ["Settings", "configure_logging", "settings"]

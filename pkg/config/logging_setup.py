import logging

from rich.logging import RichHandler


def configure_logging(level: str = "INFO") -> None:
    """Route library loggers through a single rich handler."""
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=False, show_path=False)],
        force=True,
    )

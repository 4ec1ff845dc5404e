from cli.commands import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, Command, run
from cli.config_loader import Grids, McConfig, RunConfig, load_config, parse_config

__all__ = [
    "Command",
    "EXIT_CONFIG",
    "EXIT_FAILED",
    "EXIT_OK",
    "Grids",
    "McConfig",
    "RunConfig",
    "load_config",
    "parse_config",
    "run",
]

"""
Turnpike Toolkit Configuration
Uses dataclasses + environment variables for typed numerical defaults.
"""

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from dotenv import load_dotenv

from core.errors import ConfigError

# Load .env file if present
load_dotenv()


@dataclass
class Settings:
    """Central numerical and output configuration."""

    # --- Quadrature ---
    QUAD_NODE_COUNT: int = field(default_factory=lambda: int(os.getenv("QUAD_NODE_COUNT", "256")))
    QUAD_ETA_HALFWIDTH: float = field(default_factory=lambda: float(os.getenv("QUAD_ETA_HALFWIDTH", "12")))
    QUAD_REL_TOL: float = field(default_factory=lambda: float(os.getenv("QUAD_REL_TOL", "1e-10")))
    QUAD_MAX_DOUBLINGS: int = field(default_factory=lambda: int(os.getenv("QUAD_MAX_DOUBLINGS", "5")))

    # --- Conjugation / classification ---
    CONJUGATE_BRACKET_CAP: float = field(
        default_factory=lambda: float(os.getenv("CONJUGATE_BRACKET_CAP", "1e12"))
    )
    CLASSIFY_TOP_DECADE: int = field(default_factory=lambda: int(os.getenv("CLASSIFY_TOP_DECADE", "-2")))
    CLASSIFY_BOTTOM_DECADE: int = field(default_factory=lambda: int(os.getenv("CLASSIFY_BOTTOM_DECADE", "-8")))
    CLASSIFY_POINTS_PER_DECADE: int = field(
        default_factory=lambda: int(os.getenv("CLASSIFY_POINTS_PER_DECADE", "4"))
    )
    CLASSIFY_SLOPE_TOL: float = field(default_factory=lambda: float(os.getenv("CLASSIFY_SLOPE_TOL", "0.02")))
    CLASSIFY_RATIO_TOL: float = field(default_factory=lambda: float(os.getenv("CLASSIFY_RATIO_TOL", "1e-3")))
    RATE_THRESHOLD_DELTA: float = field(default_factory=lambda: float(os.getenv("RATE_THRESHOLD_DELTA", "1.0")))

    # --- Primal inversion ---
    INVERSION_TOL: float = field(default_factory=lambda: float(os.getenv("INVERSION_TOL", "1e-10")))
    INVERSION_MAX_EXPANSIONS: int = field(
        default_factory=lambda: int(os.getenv("INVERSION_MAX_EXPANSIONS", "200"))
    )
    FD_TAU_STEP: float = field(default_factory=lambda: float(os.getenv("FD_TAU_STEP", "1e-4")))

    # --- Monte Carlo / simulation ---
    MC_CHUNK_SIZE: int = field(default_factory=lambda: int(os.getenv("MC_CHUNK_SIZE", "65536")))
    POLICY_CLAMP: float = field(default_factory=lambda: float(os.getenv("POLICY_CLAMP", "50")))
    PATH_DUMP_LIMIT: int = field(default_factory=lambda: int(os.getenv("PATH_DUMP_LIMIT", "100")))

    # --- Output ---
    OUTPUT_DIR: Path = field(default_factory=lambda: Path(os.getenv("OUTPUT_DIR", "./output")))
    LOG_LEVEL: str = field(default_factory=lambda: os.getenv("LOG_LEVEL", "INFO"))

    def __post_init__(self):
        """Reject settings no solver could run with."""
        if self.QUAD_NODE_COUNT < 64 or self.QUAD_NODE_COUNT % 2:
            raise ConfigError("QUAD_NODE_COUNT must be an even integer >= 64", key_path="QUAD_NODE_COUNT")
        if self.QUAD_ETA_HALFWIDTH < 8:
            raise ConfigError("QUAD_ETA_HALFWIDTH must be >= 8", key_path="QUAD_ETA_HALFWIDTH")
        if not 0 < self.QUAD_REL_TOL < 1e-2:
            raise ConfigError("QUAD_REL_TOL must lie in (0, 1e-2)", key_path="QUAD_REL_TOL")
        if self.CLASSIFY_BOTTOM_DECADE >= self.CLASSIFY_TOP_DECADE - 3:
            raise ConfigError("classification needs at least four y decades", key_path="CLASSIFY_BOTTOM_DECADE")
        if self.POLICY_CLAMP <= 0:
            raise ConfigError("POLICY_CLAMP must be positive", key_path="POLICY_CLAMP")

    def classification_grid(self) -> np.ndarray:
        """Decreasing y-values spanning the configured classification decades."""
        decades = self.CLASSIFY_TOP_DECADE - self.CLASSIFY_BOTTOM_DECADE
        return np.logspace(
            self.CLASSIFY_TOP_DECADE,
            self.CLASSIFY_BOTTOM_DECADE,
            decades * self.CLASSIFY_POINTS_PER_DECADE + 1,
        )


# Singleton instance
settings = Settings()

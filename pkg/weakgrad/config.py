"""Centralized runtime settings for weakgrad.

Loads environment variables via python-dotenv and exposes them through a
validated Pydantic settings object. Experiment-level options live in
``weakgrad.experiment.config``; this module only holds process-wide knobs.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# ---------------------------------------------------------------------------
# Load .env from the project root (one level up from this package)
# ---------------------------------------------------------------------------
_ENV_PATH = Path(__file__).resolve().parents[1] / ".env"
load_dotenv(dotenv_path=_ENV_PATH, override=False)

LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"


class Settings(BaseSettings):
    """Process-wide settings read from ``WEAKGRAD_*`` environment variables."""

    # ── Logging ──────────────────────────────────────────────────────────
    LOG_LEVEL: str = "INFO"

    # ── Replication engine ───────────────────────────────────────────────
    BLOCK_SIZE: int = Field(default=1000, ge=1)
    WORKERS: int = Field(default=1, ge=1)

    # ── Experiments ──────────────────────────────────────────────────────
    DEFAULT_SEED: int = Field(default=12345, ge=0, lt=2**64)

    model_config = SettingsConfigDict(
        env_prefix="WEAKGRAD_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """Return a cached singleton of runtime settings."""
    return Settings()


def configure_logging(level: str | None = None) -> None:
    """Install the root handler once; later calls only adjust the level."""
    resolved = (level or get_settings().LOG_LEVEL).upper()
    logging.basicConfig(level=resolved, format=LOG_FORMAT)
    logging.getLogger().setLevel(resolved)

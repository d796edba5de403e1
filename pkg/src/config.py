"""
Runtime settings, read from the environment (and a .env file when present).
"""
import logging
import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator


class Settings(BaseModel):
    """Process-wide knobs that are not part of an experiment's definition."""

    log_level: str = Field(default="INFO", description="Root logging level")
    n_jobs: int = Field(default=1, description="Worker count for concurrent fold fits")
    verdict_threshold: float = Field(default=0.7, description="Adversarial AUC at or above which data is shifted")
    lending_club_csv: Optional[str] = Field(default=None, description="Path to the Lending Club extract")
    run_slow: bool = Field(default=False, description="Enable the multi-seed acceptance suite")

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level: {value}")
        return value

    @field_validator("verdict_threshold")
    @classmethod
    def _unit_interval(cls, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError("verdict_threshold must lie in [0, 1]")
        return value


def _env_flag(name: str) -> bool:
    return os.getenv(name, "").strip().lower() in {"1", "true", "yes", "on"}


def load_settings() -> Settings:
    """Build settings from DRIFTGATE_* environment variables."""
    load_dotenv()
    return Settings(
        log_level=os.getenv("DRIFTGATE_LOG_LEVEL", "INFO"),
        n_jobs=int(os.getenv("DRIFTGATE_N_JOBS", "1")),
        verdict_threshold=float(os.getenv("DRIFTGATE_VERDICT_THRESHOLD", "0.7")),
        lending_club_csv=os.getenv("DRIFTGATE_LENDING_CLUB_CSV") or None,
        run_slow=_env_flag("DRIFTGATE_RUN_SLOW"),
    )


# Singleton settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get or create the settings instance."""
    global _settings
    if _settings is None:
        _settings = load_settings()
    return _settings


def configure_logging(level: Optional[str] = None) -> None:
    """Configure the root logger once for CLI runs."""
    logging.basicConfig(
        level=(level or get_settings().log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

"""
Runtime configuration.

Settings come from environment variables (optionally a ``.env`` file) and
are read when ``get_settings`` is called, not at import time.
"""

import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

DEFAULT_CORPUS_DIR = Path(__file__).resolve().parents[2] / "corpus"


class Settings(BaseModel):
    """Validated padepde settings."""

    log_level: str = "INFO"
    corpus_dir: Path = DEFAULT_CORPUS_DIR
    seed: int = 20240611
    rewrite_budget: int = Field(default=100_000, gt=0)
    numeric_points: int = Field(default=20, gt=0)

    @field_validator("log_level")
    @classmethod
    def _upper_level(cls, value: str) -> str:
        level = value.strip().upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unsupported log level: {value}")
        return level


def get_settings() -> Settings:
    """
    Build the settings from the environment.

    Returns:
        Settings: the validated configuration

    Raises:
        pydantic.ValidationError: if a variable holds an invalid value
    """
    load_dotenv()

    values = {
        "log_level": os.getenv("PADEPDE_LOG_LEVEL"),
        "corpus_dir": os.getenv("PADEPDE_CORPUS_DIR"),
        "seed": os.getenv("PADEPDE_SEED"),
        "rewrite_budget": os.getenv("PADEPDE_REWRITE_BUDGET"),
        "numeric_points": os.getenv("PADEPDE_NUMERIC_POINTS"),
    }
    return Settings(**{key: value for key, value in values.items() if value})

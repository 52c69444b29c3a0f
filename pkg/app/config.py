"""
Process settings for the frame interpolator.
Uses os.environ for environment variable management.
"""

import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv

# Load .env file if exists
load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.environ.get(name, default).lower() in ("true", "1", "yes")


def _env_optional_int(name: str) -> Optional[int]:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return None
    return int(raw)


@dataclass
class Settings:
    """Process settings loaded from environment variables."""

    # Application
    app_name: str = field(default_factory=lambda: os.environ.get("APP_NAME", "Texture Mapping Frame Interpolator"))
    app_version: str = field(default_factory=lambda: os.environ.get("APP_VERSION", "1.0.0"))
    debug: bool = field(default_factory=lambda: _env_bool("DEBUG", "False"))

    # Logging
    log_level: str = field(default_factory=lambda: os.environ.get("LOG_LEVEL", "INFO"))
    json_logs: bool = field(default_factory=lambda: _env_bool("JSON_LOGS", "True"))

    # Compute
    device: str = field(default_factory=lambda: os.environ.get("TEXMAP_DEVICE", "cpu"))
    seed_override: Optional[int] = field(default_factory=lambda: _env_optional_int("VTINKER_SEED"))
    deterministic: bool = field(default_factory=lambda: _env_bool("TEXMAP_DETERMINISTIC", "True"))
    num_threads: int = field(default_factory=lambda: int(os.environ.get("TEXMAP_NUM_THREADS", "1")))


@lru_cache()
def get_settings() -> Settings:
    """
    Returns cached settings instance.
    Using lru_cache ensures settings are only loaded once.
    """
    return Settings()

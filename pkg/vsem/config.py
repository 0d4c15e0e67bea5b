"""Environment-driven settings and logging setup.

Values come from ``VSEM_*`` environment variables, optionally provided
through a ``.env`` file next to the working directory.
"""

import logging
import os
from dataclasses import dataclass
from functools import lru_cache

from dotenv import load_dotenv

from vsem.errors import ConfigError

load_dotenv()

LOG_FORMAT = "%(asctime)s - %(levelname)s - [%(filename)s:%(lineno)d] - %(message)s"

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off", ""}


@dataclass(frozen=True)
class Settings:
    log_level: str = "INFO"
    log_file: str | None = None
    cg_threshold: int = 200_000
    fd_step: float = 1e-5
    residual_limit: float = 1e-10
    report_timings: bool = False


def _read_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        value = int(float(raw))
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")
    if value < 1:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


def _read_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a number, got {raw!r}")
    if not value > 0:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


def _read_bool(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    lowered = raw.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ConfigError(f"{name} must be a boolean flag, got {raw!r}")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    level = os.getenv("VSEM_LOG_LEVEL", "INFO").upper()
    if level not in logging.getLevelNamesMapping():
        raise ConfigError(f"VSEM_LOG_LEVEL is not a logging level: {level!r}")
    return Settings(
        log_level=level,
        log_file=os.getenv("VSEM_LOG_FILE") or None,
        cg_threshold=_read_int("VSEM_CG_THRESHOLD", 200_000),
        fd_step=_read_float("VSEM_FD_STEP", 1e-5),
        residual_limit=_read_float("VSEM_RESIDUAL_LIMIT", 1e-10),
        report_timings=_read_bool("VSEM_REPORT_TIMINGS", False),
    )


def configure_logging(settings: Settings | None = None, level: str | None = None) -> None:
    """Install the stderr handler (and the optional activity log file)."""
    settings = settings or get_settings()
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file, mode="w"))
    logging.basicConfig(
        level=level or settings.log_level,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )

"""Utility modules for the monoped co-design toolkit."""

from .config import ConfigError, RunConfig, config_digest, load_config, stage1_cache_key
from .logging_config import setup_logging, setup_worker_logging

__all__ = [
    "load_config",
    "RunConfig",
    "ConfigError",
    "config_digest",
    "stage1_cache_key",
    "setup_logging",
    "setup_worker_logging",
]

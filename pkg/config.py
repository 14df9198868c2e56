"""
Configuration module for the Khovanov width toolkit.
Loads environment variables and provides a Config class shared by the CLI and the Flask app.
"""

import os
from typing import Dict, Optional

from dotenv import load_dotenv, dotenv_values

load_dotenv()


def _env_flag(name: str, default: str) -> bool:
    return os.environ.get(name, default).lower() == 'true'


class Config:
    """Engine limits, logging and server settings loaded from environment variables or defaults."""

    # Engine limits
    MAX_CROSSINGS = int(os.environ.get('KHWIDTH_MAX_CROSSINGS', 28))
    CUBE_MAX_CROSSINGS = int(os.environ.get('KHWIDTH_CUBE_MAX_CROSSINGS', 16))
    CUBE_PREFERRED_CROSSINGS = int(os.environ.get('KHWIDTH_CUBE_PREFERRED_CROSSINGS', 10))
    ORACLE_MAX_CROSSINGS = 20
    THREADS = int(os.environ.get('KHWIDTH_THREADS', 0))  # 0 means all cores

    ENABLE_EXTENDED = _env_flag('KHWIDTH_ENABLE_EXTENDED', 'false')
    DEBUG_CHECKS = _env_flag('KHWIDTH_DEBUG_CHECKS', 'true')

    # Logging
    CONSOLE_LOG_LEVEL = os.environ.get('CONSOLE_LOG_LEVEL', 'INFO').upper()
    FILE_LOG_LEVEL = os.environ.get('FILE_LOG_LEVEL', 'INFO').upper()
    LOG_FILE = os.environ.get('LOG_FILE')

    # HTTP server
    HOST = os.environ.get('HOST', '127.0.0.1')
    PORT = int(os.environ.get('PORT', 5000))

    # Keys a config file may preset, with their parsers
    FILE_KEYS = {
        'max_crossings': int,
        'threads': int,
        'extended': lambda value: value.lower() == 'true',
        'json': lambda value: value.lower() == 'true',
        'ascii': lambda value: value.lower() == 'true',
    }

    @staticmethod
    def worker_count(requested: Optional[int] = None) -> int:
        """Resolve a worker count; 0 or None falls back to THREADS, then to all cores."""
        count = requested or Config.THREADS
        return count if count and count > 0 else (os.cpu_count() or 1)

    @staticmethod
    def pin_single_worker():
        """Process-pool initializer: work inside a pool worker runs serially."""
        Config.THREADS = 1

    @staticmethod
    def load_file(path: str) -> Dict[str, object]:
        """Read key=value presets from a config file. Unknown keys raise ValueError."""
        if not os.path.isfile(path):
            raise FileNotFoundError(f"Config file not found: {path}")
        overrides = {}
        for key, raw in dotenv_values(path).items():
            name = key.strip().lower().replace('-', '_')
            parser = Config.FILE_KEYS.get(name)
            if parser is None:
                raise ValueError(f"Unknown config key '{key}' in {path}")
            if raw is None:
                raise ValueError(f"Config key '{key}' in {path} has no value")
            overrides[name] = parser(raw.strip())
        return overrides

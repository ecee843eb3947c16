"""
Workbench configuration.

Values come from the environment (optionally a dotenv file selected with
ENV_FILE) and may be overridden from the command line.
"""

import os
from pathlib import Path
from typing import Any, Dict

from dotenv import load_dotenv

from src.errors import InputError

PROJECT_ROOT = Path(__file__).resolve().parent.parent


def load_environment():
    env_file = os.getenv("ENV_FILE")
    if env_file:
        dotenv_path = Path(env_file)
        if not dotenv_path.is_absolute():
            dotenv_path = PROJECT_ROOT / dotenv_path
        if dotenv_path.exists():
            load_dotenv(dotenv_path=dotenv_path, override=True)
    else:
        dotenv_path = PROJECT_ROOT / ".env"
        if dotenv_path.exists():
            load_dotenv(dotenv_path=dotenv_path, override=False)


load_environment()


def _int_env(key: str, default: int) -> int:
    raw = os.getenv(key)
    if raw in (None, ""):
        return default
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{key} must be an integer, got {raw!r}", {'variable': key, 'value': raw})
    if value < 1:
        raise InputError(f"{key} must be at least 1, got {value}", {'variable': key, 'value': raw})
    return value


WORKBENCH_CONFIG: Dict[str, Any] = {
    "max_lattice_size": _int_env("WORKBENCH_MAX_LATTICE_SIZE", 64),
    "max_sieves": _int_env("WORKBENCH_MAX_SIEVES", 4096),
    "max_diagram_size": _int_env("WORKBENCH_MAX_DIAGRAM_SIZE", 4),
    "workers": _int_env("WORKBENCH_WORKERS", os.cpu_count() or 1),
    "log_level": os.getenv("WORKBENCH_LOG_LEVEL", "WARNING"),
}

TOOL_VERSION = "1.0.0"


def config_value(key: str) -> Any:
    return WORKBENCH_CONFIG[key]


def apply_cli_overrides(args):
    if getattr(args, "max_lattice_size", None):
        WORKBENCH_CONFIG["max_lattice_size"] = args.max_lattice_size
    if getattr(args, "max_sieves", None):
        WORKBENCH_CONFIG["max_sieves"] = args.max_sieves
    if getattr(args, "workers", None):
        WORKBENCH_CONFIG["workers"] = args.workers
    if getattr(args, "verbose", False):
        WORKBENCH_CONFIG["log_level"] = "DEBUG"

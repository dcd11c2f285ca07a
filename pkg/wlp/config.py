"""
Configuration Loader
====================
Engine defaults live in config.json next to this module. A missing file
falls back to `_default_config()`; `.env` can point at another file
(WLP_CONFIG) or raise/lower verbosity (WLP_LOG_LEVEL).

Author: WLP Engine
Version: 1.0.0
"""

import copy
import json
import logging
import os
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from .errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(__file__), 'config.json')


def _default_config() -> Dict[str, Any]:
    """Return default configuration"""
    return {
        "solver": {
            "tolerance": 1e-12,
            "max_iterations": 10000,
            "mode": "auto",
            "max_atoms": 1_000_000,
        },
        "proofs": {
            "max_depth": 12,
            "max_count": 10000,
        },
        "output": {
            "significant_digits": 12,
        },
        "infometrics": {
            "parallel_solves": True,
        },
        "logging": {
            "level": "WARNING",
            "json": False,
            "file": None,
        },
    }


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load configuration from JSON, layered over the built-in defaults.

    Args:
        config_path: Explicit file. Falls back to $WLP_CONFIG, then the
            packaged config.json.

    Returns:
        Configuration dict with every default key present.
    """
    load_dotenv()
    path = config_path or os.getenv('WLP_CONFIG') or DEFAULT_CONFIG_PATH

    config = _default_config()
    if os.path.exists(path):
        try:
            with open(path, 'r', encoding='utf-8') as f:
                config = _merge(config, json.load(f))
        except json.JSONDecodeError as e:
            raise ConfigError(f"Malformed config file {path}: {e}") from e
    else:
        logger.warning(f"Config file not found: {path}. Using defaults.")

    level = os.getenv('WLP_LOG_LEVEL')
    if level:
        config['logging']['level'] = level.upper()

    return config


def solve_options_from_config(config: Dict[str, Any]):
    """Build SolveOptions from the `solver` section."""
    from .solver import SolveOptions

    section = config.get('solver', {})
    return SolveOptions(
        tolerance=float(section.get('tolerance', 1e-12)),
        max_iterations=int(section.get('max_iterations', 10000)),
        mode=section.get('mode', 'auto'),
        max_atoms=int(section.get('max_atoms', 1_000_000)),
    )


def proof_limits_from_config(config: Dict[str, Any]):
    from .proofs import ProofLimits

    section = config.get('proofs', {})
    return ProofLimits(
        max_depth=int(section.get('max_depth', 12)),
        max_count=int(section.get('max_count', 10000)),
    )

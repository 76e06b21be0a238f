"""Environment variable handling for Chewing SSL.

Recognized variables:
  CHEWING_SSL_OUTPUT_ROOT  default output directory for runs
  CHEWING_SSL_CONFIG       default config file when --config is not given
"""

import os
import re
from typing import Dict, Optional

from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)

OUTPUT_ROOT_VAR = "CHEWING_SSL_OUTPUT_ROOT"
CONFIG_VAR = "CHEWING_SSL_CONFIG"
DEFAULT_OUTPUT_ROOT = "output"


def load_env_file(env_file: str = ".env") -> Dict[str, str]:
    """Load variables from a .env file without overriding existing ones.

    Args:
        env_file: Path to the .env file

    Returns:
        Dictionary of loaded environment variables
    """
    loaded_vars: Dict[str, str] = {}
    if not os.path.isfile(env_file):
        logger.debug(f"No .env file found at {env_file}")
        return loaded_vars

    logger.info(f"Loading environment variables from {env_file}")
    with open(env_file, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            match = re.match(r"^([A-Za-z0-9_]+)=(.*)$", line)
            if match:
                key, value = match.groups()
                if key not in os.environ:
                    os.environ[key] = value
                    loaded_vars[key] = value
                    logger.debug(f"Set environment variable: {key}")
    return loaded_vars


def get_env(key: str, default: Optional[str] = None) -> Optional[str]:
    value = os.environ.get(key)
    return value if value else default


def get_output_root() -> str:
    """Output root from the environment, `./output` otherwise."""
    return os.path.abspath(get_env(OUTPUT_ROOT_VAR, DEFAULT_OUTPUT_ROOT))


def get_default_config_path() -> Optional[str]:
    return get_env(CONFIG_VAR)

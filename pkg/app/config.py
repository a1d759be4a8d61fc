"""
Configuration Management
=======================

Description: Environment variables and configuration management
Version: 1.0.0

This module handles all configuration settings: logging, API keys, rate
limits, oracle and experiment budgets.
"""

import os
from dotenv import load_dotenv
from fastapi import HTTPException, status

load_dotenv()


def _int_list(raw: str) -> list[int]:
    return [int(part.strip()) for part in raw.split(",") if part.strip()]


# API Key configuration
API_KEYS_RAW = os.getenv("API_KEYS", "")
API_KEYS = [key.strip() for key in API_KEYS_RAW.split(",") if key.strip()] if API_KEYS_RAW else []
API_KEY_HEADER = "X-API-Key"

# Create global API key header instance
from fastapi.security.api_key import APIKeyHeader
api_key_header = APIKeyHeader(name=API_KEY_HEADER, auto_error=False)

# Rate limiting (shared by main and routers)
from slowapi import Limiter
from slowapi.util import get_remote_address
limiter = Limiter(key_func=get_remote_address)
RATE_LIMIT_EXPERIMENTS = os.getenv("RATE_LIMIT_EXPERIMENTS", "5/minute")

# Engine sessions
SESSION_STORE_SIZE = int(os.getenv("SESSION_STORE_SIZE", "32"))  # Default 32 live sessions

# Gradient paths: uniqueness queries saturate the counter at this cap
PATH_COUNT_CAP = int(os.getenv("PATH_COUNT_CAP", "2"))

# Oracle budgets
ORACLE_MAX_CELLS = int(os.getenv("ORACLE_MAX_CELLS", "4096"))  # 2**12
ORACLE_PATH_MAX_CELLS = int(os.getenv("ORACLE_PATH_MAX_CELLS", "64"))

# Generators and experiment
SIMPLEX_MAX_DIM = int(os.getenv("SIMPLEX_MAX_DIM", "12"))
EXPERIMENT_TIME_BUDGET = float(os.getenv("EXPERIMENT_TIME_BUDGET", "300"))  # seconds
EXPERIMENT_SPOT_CHECK_EVERY = int(os.getenv("EXPERIMENT_SPOT_CHECK_EVERY", "25"))
SCALING_SWEEP_DIMS = _int_list(os.getenv("SCALING_SWEEP_DIMS", "7,8,9,10"))
SCALING_SWEEP_CANCELS = int(os.getenv("SCALING_SWEEP_CANCELS", "20"))
DEFAULT_SEED = int(os.getenv("DEFAULT_SEED", "0"))
VERIFY_DEFAULT = os.getenv("VERIFY_DEFAULT", "false").lower() == "true"

# Logging configuration
LOG_TO_STDOUT = os.getenv("LOG_TO_STDOUT", "true").lower() == "true"  # Default to stdout
LOG_PATH = os.getenv("LOG_PATH", "logs/app.log")  # Fallback file path
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")  # Default log level


def validate_api_key(api_key: str) -> bool:
    """
    Validate the provided API key.

    Args:
        api_key: The API key to validate (can be None if header is missing)

    Returns:
        bool: True if valid

    Raises:
        HTTPException: If API key is invalid or missing
    """
    import logging
    logger = logging.getLogger(__name__)
    logger.debug("API key validation requested")

    if not api_key:
        logger.warning("API key is missing")
        raise HTTPException(
            status_code=status.HTTP_401_UNAUTHORIZED,
            detail="API key is required"
        )

    if not API_KEYS:
        logger.error("No API keys configured in environment")
        raise HTTPException(
            status_code=status.HTTP_401_UNAUTHORIZED,
            detail="API keys not configured"
        )

    if api_key not in API_KEYS:
        logger.warning(f"Invalid API key provided: '{api_key[:8]}...'")
        raise HTTPException(
            status_code=status.HTTP_401_UNAUTHORIZED,
            detail="Invalid API key"
        )

    logger.debug("API key validation successful")
    return True

"""
Config Utility
File: utils/utils_config.py

This script provides the configuration functions for the project.

It centralizes the configuration management
by loading environment variables from .env in the root project folder
and constructing file paths using pathlib.

If you rename any variables in .env, remember to:
- recopy .env to .env.example
- update the corresponding function in this module.
"""

#####################################
# Imports
#####################################

# import from Python Standard Library
import os
import pathlib
from fractions import Fraction

# import from external packages
from dotenv import load_dotenv

# import from local modules
from .utils_logger import logger

#####################################
# Load Environment Variables
#####################################

load_dotenv()

#####################################
# Getter Functions for .env Variables
#####################################


def get_precision_bits() -> int:
    """Fetch PRODLAB_PRECISION_BITS from environment or use default."""
    bits = int(os.getenv("PRODLAB_PRECISION_BITS", 128))
    logger.debug(f"PRODLAB_PRECISION_BITS: {bits}")
    return bits


def get_conjecture_precision_bits() -> int:
    """Fetch PRODLAB_CONJECTURE_PRECISION_BITS from environment or use default."""
    bits = int(os.getenv("PRODLAB_CONJECTURE_PRECISION_BITS", 256))
    logger.debug(f"PRODLAB_CONJECTURE_PRECISION_BITS: {bits}")
    return bits


def get_output_format() -> str:
    """Fetch PRODLAB_OUTPUT_FORMAT (json or text) from environment or use default."""
    output_format = os.getenv("PRODLAB_OUTPUT_FORMAT", "json").lower()
    logger.debug(f"PRODLAB_OUTPUT_FORMAT: {output_format}")
    return output_format


def get_default_tolerance() -> Fraction:
    """Fetch PRODLAB_TOLERANCE (fraction or decimal) from environment or use default."""
    tol = Fraction(os.getenv("PRODLAB_TOLERANCE", "1e-5"))
    logger.debug(f"PRODLAB_TOLERANCE: {tol}")
    return tol


def get_identity_tolerance() -> Fraction:
    """Fetch PRODLAB_IDENTITY_TOLERANCE from environment or use default."""
    tol = Fraction(os.getenv("PRODLAB_IDENTITY_TOLERANCE", "1e-10"))
    logger.debug(f"PRODLAB_IDENTITY_TOLERANCE: {tol}")
    return tol


def get_identity_window() -> int:
    """Fetch PRODLAB_IDENTITY_WINDOW (stream positions) from environment or use default."""
    window = int(os.getenv("PRODLAB_IDENTITY_WINDOW", 256))
    logger.debug(f"PRODLAB_IDENTITY_WINDOW: {window}")
    return window


def get_extrapolation_periods() -> int:
    """Fetch PRODLAB_EXTRAPOLATION_PERIODS from environment or use default."""
    periods = int(os.getenv("PRODLAB_EXTRAPOLATION_PERIODS", 2**14))
    logger.debug(f"PRODLAB_EXTRAPOLATION_PERIODS: {periods}")
    return periods


def get_extrapolation_levels() -> int:
    """Fetch PRODLAB_EXTRAPOLATION_LEVELS from environment or use default."""
    levels = int(os.getenv("PRODLAB_EXTRAPOLATION_LEVELS", 3))
    logger.debug(f"PRODLAB_EXTRAPOLATION_LEVELS: {levels}")
    return levels


def get_conjecture_blocks() -> int:
    """Fetch PRODLAB_CONJECTURE_BLOCKS from environment or use default."""
    blocks = int(os.getenv("PRODLAB_CONJECTURE_BLOCKS", 10))
    logger.debug(f"PRODLAB_CONJECTURE_BLOCKS: {blocks}")
    return blocks


def get_factor_budget() -> int:
    """Fetch PRODLAB_FACTOR_BUDGET from environment or use default."""
    budget = int(os.getenv("PRODLAB_FACTOR_BUDGET", 10_000_000))
    logger.debug(f"PRODLAB_FACTOR_BUDGET: {budget}")
    return budget


def get_project_root() -> pathlib.Path:
    """Return the project root folder."""
    return pathlib.Path(__file__).parent.parent


def get_claims_path() -> pathlib.Path:
    """Fetch PRODLAB_CLAIMS_DIR from environment or use default."""
    claims_dir = get_project_root() / os.getenv("PRODLAB_CLAIMS_DIR", "claims")
    logger.debug(f"PRODLAB_CLAIMS_DIR: {claims_dir}")
    return claims_dir


def get_log_level() -> str:
    """Fetch PRODLAB_LOG_LEVEL from environment or use default."""
    level = os.getenv("PRODLAB_LOG_LEVEL", "WARNING").upper()
    logger.debug(f"PRODLAB_LOG_LEVEL: {level}")
    return level


def get_log_folder() -> pathlib.Path:
    """Fetch PRODLAB_LOG_DIR from environment or use default."""
    folder = pathlib.Path(os.getenv("PRODLAB_LOG_DIR", "logs"))
    logger.debug(f"PRODLAB_LOG_DIR: {folder}")
    return folder


#####################################
# Conditional Execution
#####################################

if __name__ == "__main__":
    # Test the configuration functions
    logger.info("Testing configuration.")
    try:
        get_precision_bits()
        get_conjecture_precision_bits()
        get_output_format()
        get_default_tolerance()
        get_identity_tolerance()
        get_identity_window()
        get_extrapolation_periods()
        get_extrapolation_levels()
        get_conjecture_blocks()
        get_factor_budget()
        get_claims_path()
        get_log_level()
        get_log_folder()
        logger.info("SUCCESS: Configuration function tests complete.")

    except Exception as e:
        logger.error(f"ERROR: Configuration function test failed: {e}")

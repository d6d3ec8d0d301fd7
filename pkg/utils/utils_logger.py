"""
Logger Setup Script
File: utils/utils_logger.py

This script provides logging functions for the project.
Every prodlab module logs through the `logger` defined here.

Features:
- Logs information, warnings, and errors to a designated log file.
- Ensures the log directory exists.
- Keeps stderr quiet (WARNING by default) so stdout stays a clean
  JSON document for the command-line tool.

The log folder and the stderr level come from the environment
(PRODLAB_LOG_DIR, PRODLAB_LOG_LEVEL); see utils/utils_config.py.
"""

#####################################
# Imports
#####################################

# Imports from Python Standard Library
import os
import pathlib
import sys

# Imports from external packages
from dotenv import load_dotenv
from loguru import logger

load_dotenv()

# Get this file name without the extension
CURRENT_SCRIPT = pathlib.Path(__file__).stem

# Set directory where logs will be stored
LOG_FOLDER: pathlib.Path = pathlib.Path(os.getenv("PRODLAB_LOG_DIR", "logs"))

# Set the name of the log file
LOG_FILE: pathlib.Path = LOG_FOLDER.joinpath("prodlab.log")

# Level for the stderr sink
STDERR_LEVEL: str = os.getenv("PRODLAB_LOG_LEVEL", "WARNING").upper()

# Replace the default stderr sink with one at the configured level
try:
    logger.remove()
    logger.add(sys.stderr, level=STDERR_LEVEL)
except Exception as e:
    logger.error(f"Error configuring stderr logging at level {STDERR_LEVEL}: {e}")

# Ensure the log folder exists or create it
try:
    LOG_FOLDER.mkdir(parents=True, exist_ok=True)
    logger.debug(f"Log folder ready at: {LOG_FOLDER}")
except Exception as e:
    logger.error(f"Error creating log folder: {e}")

# Configure Loguru to write to the log file
try:
    logger.add(LOG_FILE, level="INFO")
    logger.debug(f"Logging to file: {LOG_FILE}")
except Exception as e:
    logger.error(f"Error configuring logger to write to file: {e}")


def get_log_file_path() -> pathlib.Path:
    """Return the path to the log file."""
    return LOG_FILE


def main() -> None:
    """Show where the log output goes."""
    logger.info(f"STARTING {CURRENT_SCRIPT}.py")
    logger.warning(f"stderr level is {STDERR_LEVEL}; file sink at {LOG_FILE}")
    logger.info(f"EXITING {CURRENT_SCRIPT}.py.")


# Conditional execution block that calls main() only when this file is executed directly
if __name__ == "__main__":
    main()

import logging
import os
import sys

LOG_LEVEL_ENV = "BUTTERFLY_LOG_LEVEL"


def get_logger(name: str) -> logging.Logger:
    """
    Configures and returns a stdout logger.

    The level defaults to INFO and can be raised or lowered for a whole run
    through the BUTTERFLY_LOG_LEVEL environment variable (e.g. WARNING inside
    long sweeps).
    """
    logger = logging.getLogger(name)
    if not logger.handlers:
        logger.setLevel(os.environ.get(LOG_LEVEL_ENV, "INFO").upper())

        handler = logging.StreamHandler(sys.stdout)
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    return logger

"""
Logging configuration for VoxPath
"""

import logging
import os
from logging.handlers import RotatingFileHandler
from typing import List, Optional

from src.config.settings import settings

LOGGER_NAME = "voxpath"


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """Setup application logging"""

    handlers: List[logging.Handler] = [logging.StreamHandler()]  # Console output

    if settings.LOG_FILE:
        log_dir = os.path.dirname(settings.LOG_FILE)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        handlers.append(
            RotatingFileHandler(
                settings.LOG_FILE,
                maxBytes=10 * 1024 * 1024,  # 10MB
                backupCount=5,
            )
        )

    logging.basicConfig(
        level=getattr(logging, (level or settings.LOG_LEVEL).upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )

    logger = logging.getLogger(LOGGER_NAME)
    logger.info("VoxPath logging system initialized")
    return logger


def get_logger(name: str) -> logging.Logger:
    """Child logger of the application logger for a module name"""
    if name.startswith("src."):
        name = name[len("src."):]
    return logging.getLogger(f"{LOGGER_NAME}.{name}")

"""
Logging setup shared by every module

Records go to standard error. The CLI attaches a sidecar log file per run
with attachRunLog(); data files never carry timestamps, only this log does.
"""

import logging
import os
import sys
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

_configured = False
_runHandler: Optional[logging.Handler] = None


@dataclass
class LoggingConfig:
    """Process-level logging settings"""
    level: str = "INFO"
    run_log_name: str = "run.log"

    @classmethod
    def fromEnv(cls) -> 'LoggingConfig':
        """Load configuration from environment variables (and an optional .env file)."""
        load_dotenv()
        return cls(
            level=os.getenv('SOFTMANIFOLD_LOG_LEVEL', 'INFO').upper(),
            run_log_name=os.getenv('SOFTMANIFOLD_RUN_LOG', 'run.log')
        )


def _configureRoot() -> None:
    global _configured
    if _configured:
        return
    config = LoggingConfig.fromEnv()
    root = logging.getLogger()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(getattr(logging, config.level, logging.INFO))
    _configured = True


def get_logger(name: str) -> logging.Logger:
    """Return a module logger, configuring the root handler on first use"""
    _configureRoot()
    return logging.getLogger(name)


def attachRunLog(outputDir: str) -> str:
    """
    Mirror all log records into <outputDir>/<run log name>

    Args:
        outputDir: Directory receiving the run's data files

    Returns:
        str: Path of the sidecar log file
    """
    global _runHandler
    _configureRoot()
    detachRunLog()
    os.makedirs(outputDir, exist_ok=True)
    logPath = os.path.join(outputDir, LoggingConfig.fromEnv().run_log_name)
    _runHandler = logging.FileHandler(logPath, mode='a', encoding='utf-8')
    _runHandler.setFormatter(logging.Formatter(LOG_FORMAT))
    logging.getLogger().addHandler(_runHandler)
    return logPath


def detachRunLog() -> None:
    """Close the sidecar log file if one is attached"""
    global _runHandler
    if _runHandler is not None:
        logging.getLogger().removeHandler(_runHandler)
        _runHandler.close()
        _runHandler = None

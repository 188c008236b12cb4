import json
import os
import tempfile
from typing import Any

import pandas as pd

from logs.logger import get_logger
from utils.exceptions import DataValidationError

logger = get_logger(__name__)


class BaseArtifactHandler:
    """
    Base class for all artifact handlers.
    Provides the output directory and atomic file writes.

    Files are written to a temporary sibling first and renamed into place, so
    a failed run never leaves a half-written artifact behind.
    """

    def __init__(self, outputDir: str):
        """
        Args:
            outputDir: Directory receiving the artifacts (created on first write)
        """
        self.outputDir = outputDir

    def pathFor(self, name: str) -> str:
        return os.path.join(self.outputDir, name)

    def writeText(self, name: str, text: str) -> str:
        """
        Atomically write a text artifact

        Args:
            name: File name inside the output directory
            text: Content

        Returns:
            str: Final path
        """
        os.makedirs(self.outputDir, exist_ok=True)
        target = self.pathFor(name)
        handle, tempPath = tempfile.mkstemp(prefix=f".{name}.", dir=self.outputDir)
        try:
            with os.fdopen(handle, 'w', encoding='utf-8', newline='') as stream:
                stream.write(text)
            os.replace(tempPath, target)
        except Exception:
            if os.path.exists(tempPath):
                os.remove(tempPath)
            raise
        logger.info(f"Wrote {target}")
        return target

    def writeJson(self, name: str, payload: Any) -> str:
        return self.writeText(name, json.dumps(payload, indent=2) + "\n")

    def writeFrame(self, name: str, frame: pd.DataFrame) -> str:
        return self.writeText(name, frame.to_csv(index=False, lineterminator="\n"))

    @staticmethod
    def readJson(path: str) -> Any:
        """Load a JSON artifact, raising DataValidationError when it is missing or malformed"""
        try:
            with open(path, 'r', encoding='utf-8') as stream:
                return json.load(stream)
        except OSError as e:
            raise DataValidationError(f"cannot read {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise DataValidationError(f"{path} is not valid JSON: {e}") from e

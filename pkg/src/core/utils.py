"""
Utility functions and helpers shared across the engine.

This module contains the exact-rational text codec, path helpers and the
performance timer used by several services.
"""

import json
import logging
import os
import re
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Tuple

from .abstractions import ValidationError

logger = logging.getLogger(__name__)


class RationalCodec:
    """Utility class for the "p/q" string form of exact rationals."""

    RATIONAL_PATTERN = re.compile(r'^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$')

    @staticmethod
    def to_text(value: Fraction) -> str:
        """
        Render a rational as "p/q", or "p" when the denominator is 1.

        Args:
            value: Rational to render

        Returns:
            Canonical string form
        """
        value = Fraction(value)
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"

    @classmethod
    def from_text(cls, text: str) -> Fraction:
        """
        Parse a "p/q" or "p" string into a rational.

        Args:
            text: Rational string; decimals are rejected

        Returns:
            Parsed rational

        Raises:
            ValidationError: If the text is not an exact rational
        """
        if isinstance(text, int) and not isinstance(text, bool):
            return Fraction(text)
        match = cls.RATIONAL_PATTERN.match(str(text))
        if not match:
            raise ValidationError(f"not an exact rational: {text!r}")
        numerator = int(match.group(1))
        denominator = int(match.group(2)) if match.group(2) else 1
        if denominator == 0:
            raise ValidationError(f"zero denominator in {text!r}")
        return Fraction(numerator, denominator)

    @classmethod
    def point_to_text(cls, point: Iterable[Fraction]) -> List[str]:
        """Render a rational vector as a list of strings."""
        return [cls.to_text(coordinate) for coordinate in point]

    @classmethod
    def point_from_text(cls, items: Sequence[str]) -> Tuple[Fraction, ...]:
        """Parse a list of rational strings into a point."""
        return tuple(cls.from_text(item) for item in items)

    @classmethod
    def parse_point(cls, text: str) -> Tuple[Fraction, ...]:
        """
        Parse a comma-separated point such as "1/3,1/2".

        Args:
            text: Comma-separated rationals

        Returns:
            Point as a tuple of rationals
        """
        parts = [part for part in text.split(',') if part.strip()]
        if not parts:
            raise ValidationError("empty point")
        return tuple(cls.from_text(part) for part in parts)


class PathManager:
    """Utility class for path management and operations."""

    @staticmethod
    def project_root() -> Path:
        """Repository root (the directory holding main.py)."""
        return Path(__file__).resolve().parents[2]

    @staticmethod
    def schema_directory(configured: Optional[str] = None) -> Path:
        """
        Resolve the directory of the shipped JSON schema files.

        Args:
            configured: Directory from configuration, empty for the default

        Returns:
            Schema directory path
        """
        if configured:
            return Path(configured)
        return PathManager.project_root() / "schemas"

    @staticmethod
    def ensure_directory_exists(directory_path: str) -> None:
        """
        Ensure a directory exists, creating it if necessary.

        Args:
            directory_path: Path to directory
        """
        if directory_path:
            os.makedirs(directory_path, exist_ok=True)

    @staticmethod
    def read_text(path: str) -> str:
        """
        Read an input file.

        Raises:
            ValidationError: If the file cannot be read
        """
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return f.read()
        except OSError as e:
            raise ValidationError(f"cannot read {path}: {e.strerror or e}")

    @classmethod
    def read_json(cls, path: str) -> Any:
        """Read and decode a JSON input file."""
        try:
            return json.loads(cls.read_text(path))
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path} is not valid JSON: line {e.lineno}, column {e.colno}")

    @staticmethod
    def write_text(path: str, text: str) -> None:
        """Write text to a file, creating parent directories."""
        PathManager.ensure_directory_exists(os.path.dirname(path))
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)


class PerformanceTimer:
    """Utility class for performance timing."""

    def __init__(self, operation_name: str):
        self.operation_name = operation_name
        self.start_time = None

    def __enter__(self):
        self.start_time = datetime.now()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        duration = datetime.now() - self.start_time
        logger.debug("%s completed in %.2f seconds", self.operation_name, duration.total_seconds())

"""
Console and report output.

Status lines and logs go to stderr through rich; stdout carries only the
deterministic report, rendered as compact JSON or as CSV via pandas.
"""

import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional

import jsonschema
import pandas as pd
from rich.console import Console
from rich.logging import RichHandler

from ..core.abstractions import InvariantViolation, IReportWriter, IUserInterface, OutputFormat
from ..core.utils import PathManager

logger = logging.getLogger(__name__)

TABLE_KEYS = ("rows", "suites")


def setup_logging(verbose: bool = False) -> None:
    """Route every logger through a RichHandler on stderr."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=verbose)],
        force=True
    )


class RichUserInterface(IUserInterface):
    """Rich-based status output on stderr."""

    def __init__(self, quiet: bool = False):
        self.console = Console(stderr=True)
        self.quiet = quiet

    def display_error(self, message: str) -> None:
        """
        Display error message.

        Args:
            message: Error message to display
        """
        self.console.print(f"[red]❌ Error: {message}[/red]")

    def display_success(self, message: str) -> None:
        if not self.quiet:
            self.console.print(f"[green]✅ {message}[/green]")

    def display_warning(self, message: str) -> None:
        self.console.print(f"[yellow]⚠️  {message}[/yellow]")

    def display_info(self, message: str) -> None:
        if not self.quiet:
            self.console.print(f"[cyan]ℹ️  {message}[/cyan]")


@lru_cache(maxsize=None)
def _load_schema(path: str) -> Dict[str, Any]:
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def _cell(value: Any) -> Any:
    if isinstance(value, list):
        if all(not isinstance(item, (list, dict)) for item in value):
            return " ".join(str(item) for item in value)
        return json.dumps(value, separators=(",", ":"))
    if isinstance(value, dict):
        return json.dumps(value, separators=(",", ":"))
    return value


class ReportWriter(IReportWriter):
    """Serializes reports, appending the seed and checking the shipped schemas."""

    def __init__(self,
                 output_format: OutputFormat = OutputFormat.JSON,
                 seed: int = 7,
                 validate_schemas: bool = True,
                 schema_dir: Optional[str] = None):
        self.output_format = output_format
        self.seed = seed
        self.validate_schemas = validate_schemas
        self.schema_dir = PathManager.schema_directory(schema_dir)

    def render(self, report_name: str, payload: Dict[str, Any]) -> str:
        """
        Render one report.

        Args:
            report_name: Report kind, naming its schema file
            payload: Report fields in output order

        Returns:
            Report text ending in a newline

        Raises:
            InvariantViolation: If the report breaks its schema
        """
        document = dict(payload)
        document["seed"] = self.seed
        if self.validate_schemas:
            self.validate(report_name, document)
        if self.output_format == OutputFormat.CSV:
            return self.to_frame(document).to_csv(index=False, lineterminator="\n")
        return json.dumps(document, separators=(",", ":"), ensure_ascii=False) + "\n"

    def validate(self, report_name: str, document: Dict[str, Any]) -> None:
        path: Path = self.schema_dir / f"{report_name}.schema.json"
        if not path.exists():
            logger.warning("no schema for report %s at %s", report_name, path)
            return
        try:
            jsonschema.validate(document, _load_schema(str(path)))
        except jsonschema.ValidationError as e:
            raise InvariantViolation(f"report {report_name} breaks its schema: {e.message}")

    @staticmethod
    def dump_text(data: Dict[str, Any]) -> str:
        """Indented JSON for side files such as PWL dumps."""
        return json.dumps(data, indent=2, ensure_ascii=False) + "\n"

    @staticmethod
    def to_frame(document: Dict[str, Any]) -> pd.DataFrame:
        """One CSV row per table entry (rows or suites), scalar fields repeated on each."""
        table_key = next((key for key in TABLE_KEYS if isinstance(document.get(key), list) and document[key]), None)
        if table_key is None:
            return pd.DataFrame([{key: _cell(value) for key, value in document.items()}])
        shared = {key: _cell(value) for key, value in document.items()
                  if key not in TABLE_KEYS and not isinstance(value, (list, dict))}
        records: List[Dict[str, Any]] = []
        for entry in document[table_key]:
            record = dict(shared)
            record.update({key: _cell(value) for key, value in entry.items()})
            records.append(record)
        return pd.DataFrame(records)

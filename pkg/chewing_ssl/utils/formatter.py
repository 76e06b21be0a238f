"""Formatting and display helpers for Chewing SSL commands."""

import json
import os
from typing import Any, Mapping, Optional, Sequence, Union

import click
from tabulate import tabulate

from chewing_ssl.core.metrics import format_table
from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)

OUTPUT_FORMATS = ("table", "json")


def format_duration(seconds: Union[int, float]) -> str:
    """Format seconds as human-readable duration.

    Args:
        seconds: Duration in seconds

    Returns:
        Formatted duration string (e.g., "2h 30m 15s")
    """
    if seconds < 0:
        return "0s"

    seconds = int(seconds)
    hours, remainder = divmod(seconds, 3600)
    minutes, seconds = divmod(remainder, 60)

    parts = []
    if hours > 0:
        parts.append(f"{hours}h")
    if minutes > 0 or (hours > 0 and seconds > 0):
        parts.append(f"{minutes}m")
    if seconds > 0 or not parts:
        parts.append(f"{seconds}s")
    return " ".join(parts)


def to_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False)


def write_text(text: str, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text if text.endswith("\n") else text + "\n")
    logger.debug(f"Wrote {path}")
    return path


def display_metric_rows(
    rows: Sequence[Any],
    key_columns: Sequence[str],
    format_type: str = "table",
    output_file: Optional[str] = None,
) -> str:
    """Display evaluation rows as a metric table or as JSON.

    Args:
        rows: SweepRow or HoldoutRow objects
        key_columns: Columns naming each row, taken from `to_dict()`
        format_type: Output format (table/json)
        output_file: Also write the rendered text here

    Returns:
        The rendered text
    """
    if format_type == "json":
        text = to_json([row.to_dict() for row in rows])
    else:
        table_rows = []
        for row in rows:
            data = row.to_dict()
            cells = {k: ("-" if data[k] is None else data[k]) for k in key_columns}
            cells["report"] = row.report
            table_rows.append(cells)
        text = format_table(table_rows, key_columns)

    click.echo(text)
    if output_file:
        write_text(text, output_file)
    return text


def display_mapping(data: Mapping[str, Any], format_type: str = "table") -> None:
    """Print a flat summary as a two-column table or as JSON."""
    if format_type == "json":
        click.echo(to_json(dict(data)))
        return
    click.echo(tabulate([[k, v] for k, v in data.items()], headers=["Key", "Value"], tablefmt="grid"))

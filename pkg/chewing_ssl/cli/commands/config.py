"""Configuration inspection commands."""

import os

import click

from chewing_ssl.cli.context import RunContext, pass_run
from chewing_ssl.utils.config import CONFIG_SCHEMA, PRESETS
from chewing_ssl.utils.env import CONFIG_VAR, OUTPUT_ROOT_VAR, get_default_config_path
from chewing_ssl.utils.formatter import to_json


@click.group()
def config() -> None:
    """Inspect the run configuration."""


@config.command("show")
@pass_run
def config_show(run: RunContext) -> None:
    """Print the resolved configuration."""
    click.echo(to_json(run.config))


@config.command("schema")
def config_schema() -> None:
    """Print the JSON schema of config files."""
    click.echo(to_json(CONFIG_SCHEMA))


@config.command("path")
@pass_run
def config_path(run: RunContext) -> None:
    """Show where configuration and outputs are read from."""
    path = get_default_config_path()
    click.echo(f"Config file (${CONFIG_VAR}): {path or 'not set'}")
    if path:
        click.echo(f"  exists: {os.path.exists(path)}")
    click.echo(f"Output root (${OUTPUT_ROOT_VAR} or paths.output_dir): {run.output_dir}")
    click.echo(f"Presets: {', '.join(sorted(PRESETS))}")

"""Command-line interface for Chewing SSL."""

import json
import logging
import sys
from typing import Optional, Sequence, Tuple

import click
from threadpoolctl import threadpool_limits

from chewing_ssl import __version__
from chewing_ssl.cli.commands.config import config
from chewing_ssl.cli.commands.holdout import holdout
from chewing_ssl.cli.commands.postprocess import postprocess
from chewing_ssl.cli.commands.predict import predict
from chewing_ssl.cli.commands.preprocess import preprocess
from chewing_ssl.cli.commands.pretrain import pretrain
from chewing_ssl.cli.commands.sweep import sweep
from chewing_ssl.cli.commands.synth import synth
from chewing_ssl.cli.commands.train_head import train_head
from chewing_ssl.cli.context import RunContext
from chewing_ssl.core.errors import ChewingError
from chewing_ssl.utils.config import PRESETS, build_run_config, load_config
from chewing_ssl.utils.env import load_env_file
from chewing_ssl.utils.logger import get_logger, setup_logging

logger = get_logger(__name__)


@click.group()
@click.version_option(version=__version__)
@click.option("--verbose", "-v", count=True, help="Increase verbosity level")
@click.option("--quiet", "-q", is_flag=True, help="Silent mode, errors only")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON config file")
@click.option("--preset", type=click.Choice(sorted(PRESETS)), help="Named preset applied before the config file")
@click.option("--set", "overrides", multiple=True, metavar="SECTION.KEY=VALUE", help="Override a config value")
@click.option("--output-dir", type=click.Path(file_okay=False), help="Output root, overrides paths.output_dir")
@click.option("--deterministic", is_flag=True, help="One worker and one BLAS thread, for bit-exact reruns")
@click.pass_context
def cli(
    ctx: click.Context,
    verbose: int = 0,
    quiet: bool = False,
    config_path: Optional[str] = None,
    preset: Optional[str] = None,
    overrides: Tuple[str, ...] = (),
    output_dir: Optional[str] = None,
    deterministic: bool = False,
) -> None:
    """Chewing SSL - self-supervised chewing detection from in-ear audio."""
    if quiet:
        log_level = logging.ERROR
    else:
        log_levels = [logging.WARNING, logging.INFO, logging.DEBUG]
        log_level = log_levels[min(verbose, len(log_levels) - 1)]
    setup_logging(log_level)
    load_env_file()

    resolved = load_config(config_path, preset, overrides, output_dir)
    if deterministic:
        resolved["workers"] = 1
        limiter = threadpool_limits(limits=1)
        ctx.call_on_close(limiter.restore_original_limits)
        logger.debug("Native thread pools limited to one thread")
    ctx.obj = RunContext(resolved, build_run_config(resolved, show_progress=not quiet), quiet)
    logger.debug(f"Output root: {ctx.obj.output_dir}")


cli.add_command(synth)
cli.add_command(preprocess)
cli.add_command(pretrain)
cli.add_command(train_head)
cli.add_command(sweep)
cli.add_command(holdout)
cli.add_command(predict)
cli.add_command(postprocess)
cli.add_command(config)


def main(args: Optional[Sequence[str]] = None) -> None:
    """Main entry point for the CLI application.

    Rejected inputs and missing artifacts are reported as JSON on stderr with
    exit code 2, anything else exits with 1.
    """
    try:
        cli.main(args=list(args) if args is not None else None, prog_name="chewing-ssl")
    except ChewingError as e:
        logger.debug("Command failed", exc_info=True)
        click.echo(json.dumps(e.to_dict(), ensure_ascii=False, default=str), err=True)
        sys.exit(2)
    except Exception as e:
        logger.exception(f"Unhandled error: {str(e)}")
        click.echo(f"Error: {str(e)}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()

import sys
from typing import Optional

import click

from ..core.config import settings
from ..core.errors import ConfigError, ToolkitError
from ..services.sweep_service import load_config, run_sweep, write_csv
from ..utils.logger import configure_logging

EXIT_OK, EXIT_BOUND_FAILURE, EXIT_ERROR = 0, 1, 2


@click.command("sweep")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="CSV path (overrides output.csv of the config)")
@click.option("--threads", type=int, default=None, help=f"Worker threads (default {settings.THREADS})")
@click.option("--log-level", default=None, help="Log level name")
@click.pass_context
def sweep(ctx: click.Context, config: str, output: Optional[str], threads: Optional[int], log_level: Optional[str]):
    """
    Run a frequency sweep of bound checks.

    Writes one CSV row per (omega, bound). Exits 1 if a bound fails on a
    radially monotone medium, 2 on configuration or solver errors.
    """
    configure_logging(log_level)
    try:
        cfg = load_config(config)
        result = run_sweep(cfg, threads)
    except ConfigError as e:
        click.echo(str(e), err=True)
        ctx.exit(EXIT_ERROR)
    except ToolkitError as e:
        click.echo(f"sweep failed: {e}", err=True)
        ctx.exit(EXIT_ERROR)

    target = output or cfg.output.csv
    if target:
        write_csv(result, target)
    else:
        write_csv(result, sys.stdout)

    failures = result.bound_failures
    click.echo(
        f"rows={len(result.reports)} failures={len(failures)} monotone={int(result.summary.monotone)} "
        f"max_ratio={result.max_ratio:.6g}",
        err=True,
    )
    if not result.summary.monotone:
        click.echo("medium is not radially monotone: failures are reported, not enforced", err=True)
    ctx.exit(EXIT_BOUND_FAILURE if failures else EXIT_OK)

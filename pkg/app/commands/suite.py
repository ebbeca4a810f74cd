from typing import Optional

import click

from ..core.errors import ToolkitError
from ..data.schemas import SuiteSelector
from ..services.suite_service import run_suites
from ..utils.logger import configure_logging


@click.command("suite")
@click.argument("selector", type=click.Choice([s.value for s in SuiteSelector]))
@click.option("--out-dir", type=click.Path(file_okay=False), default=None, help="Directory for the mollifier trace CSV")
@click.option("--log-level", default=None, help="Log level name")
@click.pass_context
def suite(ctx: click.Context, selector: str, out_dir: Optional[str], log_level: Optional[str]):
    """Run acceptance checks; prints one line per check: id value tolerance status."""
    configure_logging(log_level)
    try:
        summary = run_suites(selector, out_dir)
    except ToolkitError as e:
        click.echo(f"suite failed: {e}", err=True)
        ctx.exit(2)
    for check in summary.checks:
        click.echo(check.line())
    ctx.exit(0 if summary.passed else 1)

import click

from app.commands import plot, suite, sweep
from app.core.config import settings


@click.group()
@click.version_option(settings.TOOLKIT_VERSION, prog_name="maxstab")
def cli():
    """Wavenumber-explicit stability bounds for heterogeneous Maxwell problems."""


# include sweep command
cli.add_command(sweep.sweep)

# include suite command
cli.add_command(suite.suite)

# include plot command
cli.add_command(plot.plot)


if __name__ == "__main__":
    cli()

import click

from ..core.errors import PlotError
from ..data.schemas import PlotKind
from ..services.plot_service import emit_plot


@click.command("plot")
@click.argument("csv_path", type=click.Path(dir_okay=False))
@click.option("--kind", "-k", type=click.Choice([k.value for k in PlotKind]), required=True)
@click.option("--output", "-o", "out_path", type=click.Path(dir_okay=False), required=True, help="SVG destination")
@click.pass_context
def plot(ctx: click.Context, csv_path: str, kind: str, out_path: str):
    """Render a sweep or suite CSV as SVG."""
    try:
        out = emit_plot(csv_path, kind, out_path)
    except PlotError as e:
        click.echo(str(e), err=True)
        ctx.exit(2)
    click.echo(str(out))

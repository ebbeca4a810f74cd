"""
Plot service: static SVG figures from sweep and suite CSV reports.
"""
from pathlib import Path
from typing import Iterable, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from ..core.errors import PlotError  # noqa: E402
from ..data.schemas import PlotKind  # noqa: E402
from ..utils.logger import get_logger  # noqa: E402

logger = get_logger(__name__)

_REQUIRED = {
    PlotKind.RATIO_VS_OMEGA: ("omega", "bound_id", "lhs", "rhs"),
    PlotKind.MARGIN_VS_OMEGA: ("omega", "bound_id", "margin"),
    PlotKind.MOLLIFIER_TRACE: ("r", "eps", "eps_delta"),
}


def _load(csv_path: Union[str, Path], columns: Iterable[str]) -> pd.DataFrame:
    path = Path(csv_path)
    if not path.exists():
        raise PlotError(f"report {path} does not exist")
    try:
        frame = pd.read_csv(path, comment="#")
    except pd.errors.EmptyDataError as e:
        raise PlotError(f"report {path}: no rows") from e
    for col in columns:
        if col not in frame.columns:
            raise PlotError(f"report {path} is missing column {col!r}")
    if frame.empty:
        raise PlotError(f"report {path}: no rows")
    return frame


def _save_svg(fig, out_path: Union[str, Path]) -> Path:
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out


def _ratio_plot(frame: pd.DataFrame, ax) -> None:
    for bound_id, group in frame.groupby("bound_id", sort=True):
        group = group.sort_values("omega")
        ratio = group["lhs"] / group["rhs"]
        ax.plot(group["omega"], ratio, marker="o", ms=3, label=str(bound_id))
    ax.axhline(1.0, color="black", linestyle="--", linewidth=1.0, label="bound")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("omega")
    ax.set_ylabel("lhs / rhs")


def _margin_plot(frame: pd.DataFrame, ax) -> None:
    for bound_id, group in frame.groupby("bound_id", sort=True):
        group = group.sort_values("omega")
        ax.plot(group["omega"], group["margin"], marker="o", ms=3, label=str(bound_id))
    ax.axhline(0.0, color="black", linestyle="--", linewidth=1.0)
    ax.set_xscale("log")
    ax.set_yscale("symlog")
    ax.set_xlabel("omega")
    ax.set_ylabel("rhs - lhs")


def _trace_plot(frame: pd.DataFrame, ax) -> None:
    frame = frame.sort_values("r")
    ax.step(frame["r"], frame["eps"], where="mid", label="eps")
    ax.plot(frame["r"], frame["eps_delta"], label="eps_delta")
    ax.set_xlabel("r")
    ax.set_ylabel("smallest eigenvalue")


def emit_plot(csv_path: Union[str, Path], kind: Union[PlotKind, str], out_path: Union[str, Path]) -> Path:
    """
    Render a CSV report as a self-contained SVG.

    Args:
        csv_path: Report written by the sweep or the suite runner
        kind: ratio_vs_omega, margin_vs_omega or mollifier_trace
        out_path: SVG destination

    Returns:
        Path of the written SVG

    Raises:
        PlotError: If the report is missing, empty or lacks a required column
    """
    kind = PlotKind(kind)
    frame = _load(csv_path, _REQUIRED[kind])
    plt.rcParams["svg.hashsalt"] = "maxstab"
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    if kind == PlotKind.RATIO_VS_OMEGA:
        frame = frame[np.isfinite(frame["lhs"]) & (frame["rhs"] > 0)]
        if frame.empty:
            plt.close(fig)
            raise PlotError(f"report {csv_path}: no finite rows")
        _ratio_plot(frame, ax)
    elif kind == PlotKind.MARGIN_VS_OMEGA:
        _margin_plot(frame[np.isfinite(frame["margin"])], ax)
    else:
        _trace_plot(frame, ax)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    out = _save_svg(fig, out_path)
    logger.info("plot %s written to %s", kind.value, out)
    return out

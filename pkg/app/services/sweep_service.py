"""
Sweep service: configuration loading, frequency sweeps of the bound checks,
CSV reports and the quasi-resonance probe for non-monotone media.
"""
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, TextIO, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError
from scipy.optimize import minimize_scalar
from scipy.signal import find_peaks

from ..core.config import settings
from ..core.errors import ConfigError, TruncationError
from ..data.models import LayeredMedium, PlaneWaveIncidence
from ..data.schemas import REPORT_COLUMNS, BoundId, BoundReport, CoeffSummary, MediumKind, SweepConfig
from ..utils.helpers import config_hash
from ..utils.logger import get_logger
from .bound_service import medium_summary, reports_for_bounds
from .mie_service import example1_medium, example2_medium, example3_medium, solve_layered, uniform_medium

logger = get_logger(__name__)
TRUNCATION_NOTE = "truncation failure"


@dataclass
class SweepResult:
    config: SweepConfig
    reports: List[BoundReport]
    summary: CoeffSummary
    header: dict = field(default_factory=dict)

    @property
    def bound_failures(self) -> List[BoundReport]:
        """Rows that fail on a monotone medium; truncation rows are not bound failures."""
        return [r for r in self.reports if r.monotone and not r.passed and not r.notes.startswith(TRUNCATION_NOTE)]

    @property
    def max_ratio(self) -> float:
        ratios = [r.ratio for r in self.reports if math.isfinite(r.lhs) and math.isfinite(r.rhs)]
        return max(ratios) if ratios else float("nan")


@dataclass
class ResonanceProbe:
    peaks: List[float]
    reports: List[BoundReport]
    max_ratio: float
    reference_ratio: Optional[float]
    factor: Optional[float]
    found: bool
    message: str


# ============= Configuration =============

def _format_validation(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        loc = ".".join(str(part) for part in item.get("loc", ()))
        lines.append(f"{loc or '<document>'}: {item.get('msg')}")
    return "invalid sweep configuration:\n  " + "\n  ".join(lines)


def parse_config(text: str) -> SweepConfig:
    """
    Parse and validate a JSON sweep configuration.

    Raises:
        ConfigError: On JSON syntax errors (with line and column) or validation
        errors (with the dotted field path)
    """
    try:
        return SweepConfig.model_validate_json(text)
    except ValidationError as e:
        raise ConfigError(_format_validation(e)) from e


def load_config(path: Union[str, Path]) -> SweepConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text)


def medium_from_spec(cfg: SweepConfig) -> LayeredMedium:
    """Expand the medium section of a config into a LayeredMedium."""
    spec = cfg.medium
    if spec.kind == MediumKind.UNIFORM:
        return uniform_medium(cfg.eps0, cfg.mu0)
    if spec.kind == MediumKind.EXAMPLE1:
        return example1_medium(spec.eps_minus, spec.mu_minus, spec.radius, cfg.eps0, cfg.mu0)
    if spec.kind == MediumKind.EXAMPLE2:
        return example2_medium(spec.radii, spec.eps, spec.mu, cfg.eps0, cfg.mu0)
    if spec.kind == MediumKind.EXAMPLE3:
        return example3_medium(cfg.eps0, cfg.mu0, spec.mu_constant)
    return LayeredMedium(tuple(spec.radii), tuple(spec.eps), tuple(spec.mu), cfg.eps0, cfg.mu0, name="layers")


def incidence_from_spec(cfg: SweepConfig, omega: float) -> PlaneWaveIncidence:
    return PlaneWaveIncidence(np.asarray(cfg.incidence.direction), np.asarray(cfg.incidence.polarization), omega)


# ============= Sweep =============

def _truncated_rows(omega: float, bounds: Sequence[BoundId], error: TruncationError, monotone: bool) -> List[BoundReport]:
    return [
        BoundReport(
            omega=omega,
            bound_id=b,
            lhs=float("nan"),
            rhs=float("nan"),
            margin=float("nan"),
            passed=False,
            n_trunc=error.order,
            tail=error.tail,
            notes=f"{TRUNCATION_NOTE}: {error}",
            monotone=monotone,
        )
        for b in bounds
    ]


def run_sweep(cfg: SweepConfig, threads: Optional[int] = None) -> SweepResult:
    """
    Check every configured bound at every configured frequency.

    Rows are ordered by frequency, then by the configured bound order, whatever
    the completion order of the worker pool.

    Args:
        cfg: Validated sweep configuration
        threads: Worker count (defaults to settings.THREADS)

    Returns:
        SweepResult: reports, coefficient summary and CSV header fields
    """
    medium = medium_from_spec(cfg)
    summary = medium_summary(medium)
    omegas = cfg.omega_values()
    workers = max(1, threads or settings.THREADS)
    logger.info("sweep %s: %d frequencies x %d bounds on %d workers", medium.name, len(omegas), len(cfg.bounds), workers)

    def row(omega: float) -> List[BoundReport]:
        inc = incidence_from_spec(cfg, omega)
        try:
            reports = reports_for_bounds(medium, inc, cfg.R, cfg.R_scat, cfg.bounds, summary, cfg.quadrature)
        except TruncationError as e:
            logger.warning("omega=%g: %s", omega, e)
            return _truncated_rows(omega, cfg.bounds, e, summary.monotone)
        for r in reports:
            logger.info("omega=%g %s lhs=%.6g rhs=%.6g pass=%s", omega, r.bound_id.value, r.lhs, r.rhs, r.passed)
        return reports

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(row, omegas))

    q = cfg.quadrature
    header = {
        "toolkit_version": settings.TOOLKIT_VERSION,
        "config_hash": config_hash(cfg.model_dump(mode="json")),
        "quadrature": f"{q.n_r},{q.n_phi},{q.n_theta}",
        "seed": cfg.seed,
        "medium": medium.name,
        "monotone": int(summary.monotone),
    }
    return SweepResult(config=cfg, reports=[r for chunk in rows for r in chunk], summary=summary, header=header)


def reports_frame(reports: Sequence[BoundReport]) -> pd.DataFrame:
    return pd.DataFrame([r.csv_row() for r in reports], columns=REPORT_COLUMNS)


def write_csv(result: SweepResult, target: Union[str, Path, TextIO, None] = None) -> str:
    """
    Write the sweep report: '#'-prefixed header lines, then one row per (omega, bound).

    Args:
        result: Sweep result
        target: Path or open text stream; the text is returned either way

    Returns:
        str: CSV text
    """
    buf = io.StringIO()
    for key, value in result.header.items():
        buf.write(f"# {key}={value}\n")
    reports_frame(result.reports).to_csv(buf, index=False, float_format="%.17g", lineterminator="\n")
    text = buf.getvalue()
    if target is None:
        return text
    if isinstance(target, (str, Path)):
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        Path(target).write_text(text, encoding="utf-8")
    else:
        target.write(text)
    return text


def read_report(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


# ============= Quasi-Resonance Probe =============

def interior_amplitude(medium: LayeredMedium, inc: PlaneWaveIncidence) -> float:
    """Largest modulus of the regular multipole coefficients in the innermost shell."""
    sol = solve_layered(medium, inc)
    return float(np.max(np.abs(sol.coefficients[0, :, 0, :])))


def probe_quasi_resonances(
    medium: LayeredMedium,
    inc: PlaneWaveIncidence,
    R: float,
    R_scat: float,
    omega_grid: Sequence[float],
    bound_id: BoundId = BoundId.THM22,
    reference_ratio: Optional[float] = None,
    top: int = 3,
    factor_required: float = 10.0,
) -> ResonanceProbe:
    """
    Locate quasi-resonant frequencies and evaluate the bound there.

    Scans the interior amplitude on omega_grid, refines the strongest peaks with a
    bounded scalar search and evaluates the bound at the refined frequencies.

    Args:
        medium: Layered (typically non-monotone) medium
        inc: Incidence; its frequency is replaced along the grid
        R: Energy ball radius
        R_scat: Cutoff radius
        omega_grid: Increasing frequencies to scan
        bound_id: Bound to evaluate at the peaks
        reference_ratio: Largest lhs/rhs ratio of a monotone reference sweep
        top: Number of peaks to refine
        factor_required: Ratio growth over the reference that counts as found

    Returns:
        ResonanceProbe: refined peaks, reports and the growth factor over the reference
    """
    grid = np.asarray(omega_grid, dtype=float)
    amps = np.array([interior_amplitude(medium, inc.with_omega(w)) for w in grid])
    idx, _ = find_peaks(amps)
    idx = sorted(idx, key=lambda i: -amps[i])[:top]
    summary = medium_summary(medium)
    peaks, reports = [], []
    for i in sorted(idx):
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        res = minimize_scalar(
            lambda w: -interior_amplitude(medium, inc.with_omega(w)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-9 * hi},
        )
        omega = float(res.x)
        peaks.append(omega)
        try:
            reports.extend(reports_for_bounds(medium, inc.with_omega(omega), R, R_scat, [bound_id], summary))
        except TruncationError as e:
            logger.warning("resonance probe at omega=%g: %s", omega, e)
    max_ratio = max((r.ratio for r in reports), default=float("nan"))
    factor = max_ratio / reference_ratio if reference_ratio else None
    found = factor is not None and factor >= factor_required
    if found:
        message = f"ratio {max_ratio:.6g} exceeds the monotone reference by a factor {factor:.3g}"
    elif not peaks:
        message = "no interior amplitude peaks on the grid; refine the grid or extend it to higher omega"
    else:
        message = (
            f"largest ratio {max_ratio:.6g} at the refined peaks"
            + (f" (factor {factor:.3g} over the reference)" if factor is not None else "")
            + "; refine the grid near the peaks or extend it to higher omega"
        )
    logger.info("resonance probe: %s", message)
    return ResonanceProbe(peaks, reports, max_ratio, reference_ratio, factor, found, message)

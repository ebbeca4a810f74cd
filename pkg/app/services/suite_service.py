"""
Suite service: acceptance checks for the identities, the mollifier and the
sharpness families, reported one line per check.
"""
import math
from pathlib import Path
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..core.config import settings
from ..data.schemas import ChiKind, CheckResult, CheckStatus, SuiteSelector, SuiteSummary
from ..utils.helpers import random_spd, random_unit_vectors
from ..utils.logger import get_logger
from .coefficient_service import (
    check_radial_monotonicity,
    eval_coeff,
    example1_profile,
    example3_profile,
    gamma_lower_bound,
)
from .manufactured_service import constant_trio, random_points, smooth_trios, vacuum_trio
from .mie_service import boundary_flux, default_incidence, example1_medium, scattered_fields, solve_layered
from .mollifier_service import (
    cartesian_counterexample,
    convergence_table,
    mollifier_config,
    spherical_mollify,
    trace_rows,
)
from .morawetz_service import (
    integrated_identity_residual,
    normal_tangent_check,
    pointwise_identity_residual,
    second_identity_residual,
)
from .quadrature_service import sphere_rule
from .sharpness_service import (
    cutoff_family,
    eigenfunction_residual,
    omega_independence_probe,
    sharpness_bracket,
    sharpness_ratio,
)

logger = get_logger(__name__)

SWEEP_OMEGAS = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0)
MOLLIFIER_DELTAS = (0.2, 0.1, 0.05, 0.025)


def _check(check_id: str, value: float, ok: bool, tolerance: str, detail: Optional[str] = None) -> CheckResult:
    status = CheckStatus.PASS if ok else CheckStatus.FAIL
    logger.info("check %s value=%.12g %s", check_id, value, status.value)
    return CheckResult(id=check_id, value=float(value), tolerance=tolerance, status=status, detail=detail)


# ============= Identity Checks =============

def _integrated_checks() -> List[CheckResult]:
    out = []
    for mf in smooth_trios():
        res = integrated_identity_residual(mf, 1.0)
        out.append(_check(f"identities.integrated.{mf.name}", res.residual, res.residual < 1e-8, "<1e-8"))
    const = integrated_identity_residual(constant_trio(), 1.0)
    expected = -8.0 * math.pi / 3.0
    err = max(abs(const.volume_side - expected), abs(const.surface_side - expected))
    out.append(_check("identities.integrated.constant", err, err < 1e-10, "both sides -8pi/3 within 1e-10"))
    return out


def pointwise_orders(steps: Tuple[float, ...] = (4e-3, 2e-3, 1e-3), count: int = 64) -> List[float]:
    """Observed convergence orders of the pointwise residual between successive steps."""
    x = random_points(count, 0.8)
    worst = []
    for h in steps:
        worst.append(max(pointwise_identity_residual(mf, x, h).max_residual for mf in smooth_trios()))
    return [math.log2(a / b) for a, b in zip(worst, worst[1:]) if a > 0 and b > 0]


def _pointwise_checks() -> List[CheckResult]:
    orders = pointwise_orders()
    first = orders[0] if orders else float("nan")
    out = [_check("identities.pointwise.order", first, first >= 3.5, ">=3.5 (order 4 stencil)")]
    x = random_points(32, 0.8)
    const = pointwise_identity_residual(constant_trio(), x).max_residual
    out.append(_check("identities.pointwise.constant", const, const < 1e-10, "<1e-10"))
    return out


def _algebraic_checks() -> List[CheckResult]:
    rng = np.random.default_rng(settings.RANDOM_SEED)
    m = 1000
    v = rng.normal(size=(m, 3)) + 1j * rng.normal(size=(m, 3))
    alpha = random_spd(rng, m)
    n = random_unit_vectors(rng, m)
    x = rng.normal(size=(m, 3))
    worst = float(np.max(normal_tangent_check(v, alpha, n, x)))
    out = [_check("identities.normal_tangent", worst, worst < 1e-12, "<1e-12")]
    res = second_identity_residual(vacuum_trio(), random_points(200, 0.9) + 0.05)
    lowest = float(min(res.remainder_E.min(), res.remainder_H.min()))
    out.append(_check("identities.remainders_nonnegative", lowest, lowest >= 0.0, ">=0"))
    return out


def flux_positivity(omegas=SWEEP_OMEGAS, R: float = 2.0) -> List[Tuple[float, float]]:
    """(omega, normalized boundary flux of the scattered field) for the monotone ball."""
    medium = example1_medium(0.5, 0.5, 1.0)
    rows = []
    for omega in omegas:
        sol = solve_layered(medium, default_incidence(omega))
        srule = sphere_rule(R, n_phi=sol.order + 16, n_theta=16)
        flux = boundary_flux(sol, R, None, srule)
        E, H = scattered_fields(sol, srule.points)
        scale = R * float(np.real(srule.integrate(np.sum(np.abs(E) ** 2 + np.abs(H) ** 2, axis=1))))
        rows.append((float(omega), flux / scale if scale > 0 else 0.0))
    return rows


def _flux_checks() -> List[CheckResult]:
    rows = flux_positivity()
    lowest = min(v for _, v in rows)
    return [_check("identities.flux_positivity", lowest, lowest >= -1e-9, ">=-1e-9 (normalized)")]


def identity_checks() -> List[CheckResult]:
    return _integrated_checks() + _pointwise_checks() + _algebraic_checks() + _flux_checks()


# ============= Mollifier Checks =============

def _monotone_after(profile, R: float, delta: float, grid) -> Tuple[bool, float, object]:
    smoothed = spherical_mollify(profile, mollifier_config(delta, R, grid))
    rays = random_points(167, R, settings.RANDOM_SEED)
    res = check_radial_monotonicity(smoothed, ray_samples=rays)
    return res.passed, res.min_margin, smoothed


def mollifier_checks(grid=None, out_dir: Optional[Path] = None) -> List[CheckResult]:
    at_origin, at_half = cartesian_counterexample(0.25)
    out = [
        _check("mollifier.counterexample.origin", at_origin, abs(at_origin - 0.75) < 1e-6, "0.75 +-1e-6"),
        _check("mollifier.counterexample.half", at_half, abs(at_half - 0.5) < 1e-6, "0.5 +-1e-6"),
    ]
    ex1 = example1_profile(0.5, radius=0.5)
    ok, margin, smoothed = _monotone_after(ex1, 1.0, 0.05, grid)
    out.append(_check("mollifier.monotone.example1", margin, ok, "monotone on 1e3 (ray, h) pairs"))
    gamma = gamma_lower_bound(smoothed)
    out.append(_check("mollifier.gamma.example1", gamma, gamma >= 1.0 - 1e-6, ">= 1 - 1e-6"))
    origin = float(eval_coeff(smoothed, np.zeros(3))[0, 0])
    out.append(_check("mollifier.clamp.origin", origin, abs(origin - 0.5) < 1e-12, "eps_min = 0.5"))
    ok3, margin3, _ = _monotone_after(example3_profile(), 1.0, 0.05, grid)
    out.append(_check("mollifier.monotone.example3", margin3, ok3, "monotone on 1e3 (ray, h) pairs"))
    table = convergence_table(ex1, 1.0, MOLLIFIER_DELTAS, grid)
    errors = table[:, 1]
    decreasing = bool(np.all(np.diff(errors) < 0))
    out.append(_check("mollifier.l2_convergence", errors[-1], decreasing, "strictly decreasing in delta"))
    if out_dir is not None:
        radii = np.linspace(0.0, 1.2, 241)
        rows = trace_rows(ex1, smoothed, (1.0, 0.0, 0.0), radii)
        path = Path(out_dir) / "mollifier_trace.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(rows, columns=["r", "eps", "eps_delta"]).to_csv(path, index=False, float_format="%.17g")
        logger.info("mollifier trace written to %s", path)
    return out


# ============= Sharpness Checks =============

def sharpness_checks() -> List[CheckResult]:
    fam = cutoff_family(R=1.0)
    ratio = sharpness_ratio(fam)
    expected = 3.0 / (2.0 * math.pi**2)
    out = [_check("sharpness.ratio.j0", ratio, abs(ratio / expected - 1.0) < 1e-6, "3/(2 pi^2) rel 1e-6")]
    lo, hi = sharpness_bracket(fam)
    out.append(_check("sharpness.bracket", ratio, lo <= ratio <= hi, f"[{lo:.6g}, {hi:.6g}]"))
    scaling = sharpness_ratio(cutoff_family(R=2.0)) / ratio
    out.append(_check("sharpness.r_scaling", scaling, abs(scaling - 4.0) < 1e-8, "4 +-1e-8"))
    probe = omega_independence_probe(cutoff_family(R=1.0, chi_kind=ChiKind.SMOOTH_BUMP), (1.0, 10.0, 100.0))
    cols = ["E_eps", "H_mu", "J_epsinv", "K_muinv"]
    spread = float(((probe[cols].max() - probe[cols].min()) / probe[cols].abs().max()).max())
    out.append(_check("sharpness.omega_independence", spread, spread < 1e-10, "<1e-10 relative"))
    pts = random_points(64, 0.85, settings.RANDOM_SEED) + np.array([0.05, 0.0, 0.0])
    lap = float(np.max(np.abs(eigenfunction_residual(fam, pts))))
    out.append(_check("sharpness.eigenfunction", lap, lap < 1e-5, "<1e-5"))
    return out


# ============= Runner =============

_SUITES: dict = {
    SuiteSelector.IDENTITIES: identity_checks,
    SuiteSelector.MOLLIFIER: mollifier_checks,
    SuiteSelector.SHARPNESS: sharpness_checks,
}


def run_suites(
    selector: Union[SuiteSelector, str],
    out_dir: Optional[Union[str, Path]] = None,
    mollifier_grid=None,
) -> SuiteSummary:
    """
    Run the checks of one suite, or all suites in a fixed order.

    Args:
        selector: identities, mollifier, sharpness or all
        out_dir: Directory for the mollifier trace CSV
        mollifier_grid: Override of the mollifier grid resolution

    Returns:
        SuiteSummary: ordered checks with pass / fail status
    """
    selector = SuiteSelector(selector)
    order = list(_SUITES) if selector == SuiteSelector.ALL else [selector]
    checks: List[CheckResult] = []
    for key in order:
        runner: Callable[..., List[CheckResult]] = _SUITES[key]
        if key == SuiteSelector.MOLLIFIER:
            checks.extend(runner(mollifier_grid, Path(out_dir) if out_dir else None))
        else:
            checks.extend(runner())
    return SuiteSummary(selector=selector, checks=checks)

"""
Sharpness service: cutoff plane waves chi(|x|) (E^I, H^I) whose energy-to-source
ratio shows that the R^2 and frequency dependence of the bounds cannot be improved.
"""
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..core.errors import BoundInputError
from ..data.models import BallRule, CutoffFamily
from ..data.schemas import ChiKind
from ..utils.helpers import as_points, fd_laplacian
from ..utils.logger import get_logger
from .bound_service import rhs_thm22
from .mie_service import plane_wave
from .quadrature_service import ball_rule

logger = get_logger(__name__)


def cutoff_family(
    R: float = 1.0,
    omega: float = 1.0,
    chi_kind: ChiKind = ChiKind.J0_EIGENFUNCTION,
    eps0: float = 1.0,
    mu0: float = 1.0,
    direction=(0.0, 0.0, 1.0),
    polarization=(1.0, 0.0, 0.0),
) -> CutoffFamily:
    if R <= 0:
        raise BoundInputError("R must be positive")
    return CutoffFamily(
        R=R,
        direction=np.asarray(direction, dtype=float),
        polarization=np.asarray(polarization, dtype=float),
        omega=omega,
        chi_kind=chi_kind,
        eps0=eps0,
        mu0=mu0,
    )


def chi(fam: CutoffFamily, r: np.ndarray) -> np.ndarray:
    """
    Radial cutoff profile.

    j0 kind: R sin(pi r / R) / (pi r) inside B_R, the first Dirichlet eigenfunction
    of the ball normalised to 1 at the origin. Smooth bump: exp(1 - 1 / (1 - (r/a)^2))
    for r < a = bump_fraction * R.
    """
    r = np.asarray(r, dtype=float)
    R = fam.R
    if fam.chi_kind == ChiKind.J0_EIGENFUNCTION:
        return np.where(r < R, np.sinc(r / R), 0.0)
    a = fam.bump_fraction * R
    s = np.clip(r / a, 0.0, 1.0)
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def dchi(fam: CutoffFamily, r: np.ndarray) -> np.ndarray:
    """d chi / dr, using the interior branch at r = R for the j0 kind."""
    r = np.asarray(r, dtype=float)
    R = fam.R
    if fam.chi_kind == ChiKind.J0_EIGENFUNCTION:
        k = np.pi / R
        safe = np.where(r > 1e-6, r, 1.0)
        exact = (np.cos(k * safe) * k * safe - np.sin(k * safe)) / (k * safe**2)
        small = -(k**2) * r / 3.0
        return np.where(r <= R, np.where(r > 1e-6, exact, small), 0.0)
    a = fam.bump_fraction * R
    s = np.clip(r / a, 0.0, 1.0)
    out = np.zeros_like(s)
    inside = s < 1.0
    q = 1.0 - s[inside] ** 2
    out[inside] = np.exp(1.0 - 1.0 / q) * (-2.0 * s[inside] / q**2) / a
    return out


def cutoff_fields(fam: CutoffFamily, x) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    E = chi E^I, H = chi H^I and the sources J = grad chi x H^I, K = grad chi x E^I.

    Args:
        fam: Cutoff family
        x: Point (3,) or points (m, 3)

    Returns:
        Tuple (E, H, J, K), each (m, 3) complex (or (3,) for a single point)
    """
    points, single = as_points(x)
    r = np.linalg.norm(points, axis=1)
    xhat = points / np.where(r > 0, r, 1.0)[:, None]
    E_i, H_i = plane_wave(fam.incidence(), points, fam.eps0, fam.mu0)
    c = chi(fam, r)[:, None]
    grad = dchi(fam, r)[:, None] * xhat
    out = (c * E_i, c * H_i, np.cross(grad, H_i), np.cross(grad, E_i))
    return tuple(o[0] for o in out) if single else out


def _norms(fam: CutoffFamily, rule: BallRule) -> dict:
    E, H, J, K = cutoff_fields(fam, rule.points)
    sq = lambda v: float(np.real(rule.integrate(np.sum(np.abs(v) ** 2, axis=1))))  # noqa: E731
    return {
        "E_eps": fam.eps0 * sq(E),
        "H_mu": fam.mu0 * sq(H),
        "J_epsinv": sq(J) / fam.eps0,
        "K_muinv": sq(K) / fam.mu0,
    }


def default_rule(fam: CutoffFamily) -> BallRule:
    return ball_rule(fam.R, n_r=48, n_phi=16, n_theta=16)


def sharpness_ratio(fam: CutoffFamily, rule: Optional[BallRule] = None) -> float:
    """
    (||E||^2_eps + ||H||^2_mu) / (||K||^2_{mu^-1} + ||J||^2_{eps^-1}) for the cutoff family.

    For the j0 kind this equals 3 eps0 mu0 R^2 / (2 pi^2), inside the bracket
    [eps0 mu0 R^2 / pi^2, 32 eps0 mu0 R^2].
    """
    rule = default_rule(fam) if rule is None else rule
    n = _norms(fam, rule)
    ratio = (n["E_eps"] + n["H_mu"]) / (n["K_muinv"] + n["J_epsinv"])
    lower = fam.eps0 * fam.mu0 * fam.R**2 / np.pi**2
    if ratio < lower * (1.0 - 1e-9):
        logger.warning("sharpness ratio %.6g below the lower bracket %.6g", ratio, lower)
    return float(ratio)


def sharpness_bracket(fam: CutoffFamily) -> Tuple[float, float]:
    scale = fam.eps0 * fam.mu0 * fam.R**2
    return scale / np.pi**2, 32.0 * scale


def omega_independence_probe(
    fam: CutoffFamily,
    omegas: Sequence[float],
    rule: Optional[BallRule] = None,
) -> pd.DataFrame:
    """
    Energy and source norms of the cutoff family at each frequency.

    Columns: omega, E_eps, H_mu, J_epsinv, K_muinv, bound_ratio where bound_ratio
    is the energy over the constant-coefficient bound right-hand side.
    """
    rule = default_rule(fam) if rule is None else rule
    rows = []
    for omega in omegas:
        member = cutoff_family(fam.R, omega, fam.chi_kind, fam.eps0, fam.mu0, fam.direction, fam.polarization)
        n = _norms(member, rule)
        rhs = rhs_thm22(fam.eps0, fam.mu0, fam.R, omega, n["J_epsinv"], n["K_muinv"])
        rows.append({"omega": float(omega), **n, "bound_ratio": (n["E_eps"] + n["H_mu"]) / rhs})
    return pd.DataFrame(rows)


def eigenfunction_residual(fam: CutoffFamily, x, h: float = 1e-3) -> np.ndarray:
    """Finite-difference residual of Laplacian chi + (pi / R)^2 chi away from r in {0, R}."""
    points, _ = as_points(x)
    f = lambda p: chi(fam, np.linalg.norm(p, axis=1))  # noqa: E731
    return fd_laplacian(f, points, h) + (np.pi / fam.R) ** 2 * f(points)

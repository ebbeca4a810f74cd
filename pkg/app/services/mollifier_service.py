"""
Mollifier service: smoothing of L-infinity coefficient profiles along
spherical coordinates, the candy-shaped clamp region and the Cartesian
convolution counterexample.
"""
from typing import Optional, Sequence, Tuple

import numpy as np
from icecream import ic
from scipy.interpolate import RegularGridInterpolator
from scipy.signal import fftconvolve

from ..core.config import settings
from ..core.errors import MollifierError
from ..data.models import BallRule, CoeffProfile, MollifierConfig
from ..data.schemas import ProfileKind, Smoothness
from ..utils.helpers import as_points, spherical_coordinates
from ..utils.logger import get_logger
from .coefficient_service import check_radial_monotonicity, eval_coeff, profile_extrema, radial_trace
from .quadrature_service import ball_rule

ic.disable()
logger = get_logger(__name__)

_UPPER = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
_EVAL_CHUNK = 200_000


def mollifier_config(delta: float, R: float, grid: Optional[Tuple[int, int, int]] = None) -> MollifierConfig:
    return MollifierConfig(delta=delta, R=R, grid=settings.MOLLIFIER_GRID if grid is None else tuple(grid))


def bump(y: np.ndarray) -> np.ndarray:
    """Unnormalized C-infinity bump exp(-1 / (1 - |y|^2)) on the unit ball."""
    s = np.sum(np.asarray(y, dtype=float) ** 2, axis=-1)
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside]))
    return out


def candy_membership(x, cfg: MollifierConfig):
    """
    Membership in the candy-shaped region: the ball of radius delta plus the two
    polar cones of half-angle delta inside B_R.

    Args:
        x: Point (3,) or points (m, 3)
        cfg: Mollifier configuration

    Returns:
        bool for a single point, boolean array otherwise
    """
    points, single = as_points(x)
    rho, polar, _ = spherical_coordinates(points)
    d = cfg.delta
    inside = (rho < d) | ((rho < cfg.R) & (polar < d)) | ((rho < cfg.R) & (polar > np.pi - d))
    return bool(inside[0]) if single else inside


# ============= Spherical Mollification =============

def _kernel(delta: float, steps: Tuple[float, float, float]) -> np.ndarray:
    """Discrete bump with support |y| < delta in (rho, azimuth, polar) units, summing to one."""
    half = [int(np.floor(delta / h)) for h in steps]
    axes = [np.arange(-n, n + 1) * h / delta for n, h in zip(half, steps)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    k = bump(grid)
    total = k.sum()
    if total <= 0:
        raise MollifierError("mollifier grid too coarse for delta")
    return k / total


def _component_values(profile: CoeffProfile, points: np.ndarray, components) -> np.ndarray:
    out = np.empty((len(points), len(components)))
    for start in range(0, len(points), _EVAL_CHUNK):
        mats = eval_coeff(profile, points[start:start + _EVAL_CHUNK])
        for c, (i, j) in enumerate(components):
            out[start:start + _EVAL_CHUNK, c] = mats[:, i, j]
    return out


def _transformed_samples(profile: CoeffProfile, cfg: MollifierConfig, rho, azimuth, polar, components, floor) -> np.ndarray:
    """
    f-star on the padded (rho, azimuth, polar) grid: the profile on the regular part,
    floor values where rho < 2 delta or the polar angle is within 2 delta of the axis.

    The axis clamp stops at R + 2 delta so the output returns to the background beyond R + 3 delta.
    """
    d = cfg.delta
    R_, T_, P_ = np.meshgrid(rho, azimuth, polar, indexing="ij")
    clamp = (R_ < 2.0 * d) | ((R_ < cfg.R + 2.0 * d) & ((P_ <= 2.0 * d) | (P_ >= np.pi - 2.0 * d)))
    regular = ~clamp
    pts = np.stack(
        [
            R_[regular] * np.cos(T_[regular]) * np.sin(P_[regular]),
            R_[regular] * np.sin(T_[regular]) * np.sin(P_[regular]),
            R_[regular] * np.cos(P_[regular]),
        ],
        axis=-1,
    )
    values = np.broadcast_to(floor, R_.shape + (len(components),)).copy()
    values[regular] = _component_values(profile, pts, components)
    return values


def spherical_mollify(profile: CoeffProfile, cfg: MollifierConfig) -> CoeffProfile:
    """
    Smooth a profile by convolution in spherical coordinates.

    The transformed function is clamped to eps_min (eps_min I for matrices) on the
    candy-shaped region, extended periodically in the azimuth, convolved with a
    scaled bump, and pulled back to Cartesian coordinates by interpolation.

    Args:
        profile: Profile with support inside B_R
        cfg: delta, R and grid resolution (n_rho, n_azimuth, n_polar)

    Returns:
        CoeffProfile: W1infty profile equal to eps_min on the candy region, with
        values in [eps_min, eps_max] and support R + 3 delta

    Raises:
        MollifierError: If the profile support exceeds R
    """
    if profile.support_radius > cfg.R + 1e-12:
        raise MollifierError(f"profile support {profile.support_radius} exceeds R={cfg.R}")
    if not check_radial_monotonicity(profile).passed:
        logger.warning("profile %s is not radially monotone; the mollified profile will not be either", profile.name)
    d = cfg.delta
    n_rho, n_az, n_pol = cfg.grid
    lowest, _ = profile_extrema(profile)
    scalar = profile.kind in (ProfileKind.CONSTANT, ProfileKind.RADIAL_SCALAR)
    components = [(0, 0)] if scalar else _UPPER
    floor = np.array([lowest if i == j else 0.0 for i, j in components])

    top = cfg.R + 4.0 * d
    rho = np.linspace(0.0, top, n_rho)
    azimuth = 2.0 * np.pi * np.arange(n_az) / n_az
    polar = np.linspace(0.0, np.pi, n_pol)
    steps = (rho[1] - rho[0], azimuth[1] - azimuth[0], polar[1] - polar[0])
    kernel = _kernel(d, steps)
    pad = [(s - 1) // 2 for s in kernel.shape]

    rho_pad = rho[0] + steps[0] * np.arange(-pad[0], n_rho + pad[0])
    polar_pad = polar[0] + steps[2] * np.arange(-pad[2], n_pol + pad[2])
    samples = _transformed_samples(profile, cfg, rho_pad, azimuth, polar_pad, components, floor)
    samples = np.pad(samples, ((0, 0), (pad[1], pad[1]), (0, 0), (0, 0)), mode="wrap")

    smoothed = np.stack(
        [fftconvolve(samples[..., c], kernel, mode="valid") for c in range(len(components))],
        axis=-1,
    )
    # keep the clamp exact against FFT round-off
    smoothed = np.clip(smoothed, samples.min(axis=(0, 1, 2)), samples.max(axis=(0, 1, 2)))
    radial = np.gradient(smoothed, steps[0], axis=0)
    ic(smoothed.shape, kernel.shape)

    az_ext = np.append(azimuth, 2.0 * np.pi)
    grid = (rho, az_ext, polar)
    wrap = lambda a: np.concatenate([a, a[:, :1]], axis=1)  # noqa: E731
    value_interp = RegularGridInterpolator(grid, wrap(smoothed))
    radial_interp = RegularGridInterpolator(grid, wrap(radial))
    support = cfg.R + 3.0 * d

    def _assemble(comp: np.ndarray) -> np.ndarray:
        if scalar:
            return comp[:, 0][:, None, None] * np.eye(3)
        out = np.empty((len(comp), 3, 3))
        for c, (i, j) in enumerate(components):
            out[:, i, j] = comp[:, c]
            out[:, j, i] = comp[:, c]
        return out

    def _query(points: np.ndarray) -> np.ndarray:
        r, pol, az = spherical_coordinates(points)
        return np.stack([np.minimum(r, top), az, pol], axis=-1)

    def value(points: np.ndarray) -> np.ndarray:
        return _assemble(value_interp(_query(points)))

    def derivative(points: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(points, axis=1)
        return r[:, None, None] * _assemble(radial_interp(_query(points)))

    return CoeffProfile(
        kind=profile.kind if profile.kind != ProfileKind.CONSTANT else ProfileKind.RADIAL_SCALAR,
        background=profile.background,
        support_radius=support,
        smoothness=Smoothness.W1INFTY,
        value_fn=value,
        radial_derivative_fn=derivative,
        name=f"{profile.name}:delta={d:g}",
    )


def mollify_error_l2(profile: CoeffProfile, smoothed: CoeffProfile, R: float, rule: Optional[BallRule] = None) -> float:
    """L^2(B_R) norm of the Frobenius difference between a profile and its mollification."""
    if rule is None:
        rule = ball_rule(R, n_r=64, breakpoints=profile.shell_radii)
    diff = eval_coeff(profile, rule.points) - eval_coeff(smoothed, rule.points)
    return float(np.sqrt(np.real(rule.integrate(np.sum(diff**2, axis=(1, 2))))))


def convergence_table(profile: CoeffProfile, R: float, deltas: Sequence[float], grid=None) -> np.ndarray:
    """(delta, L^2 error) rows for a sequence of mollification widths."""
    rows = []
    for d in deltas:
        smoothed = spherical_mollify(profile, mollifier_config(d, R, grid))
        rows.append((d, mollify_error_l2(profile, smoothed, R)))
        logger.info("mollifier delta=%g error=%.6e", d, rows[-1][1])
    return np.asarray(rows)


# ============= Cartesian Counterexample =============

def half_ball_coefficient(points: np.ndarray, eps0: float = 1.0) -> np.ndarray:
    """eps0 / 2 on the half ball {|x| < 1, x_1 > 0}, eps0 elsewhere."""
    r = np.linalg.norm(points, axis=1)
    return np.where((r < 1.0) & (points[:, 0] > 0.0), 0.5 * eps0, eps0)


def cartesian_mollify(points, delta: float, eps0: float = 1.0, n_r: int = 24, n_phi: int = 24, n_theta: int = 64) -> np.ndarray:
    """Standard Cartesian convolution of the half-ball coefficient with the bump of radius delta."""
    pts, _ = as_points(points)
    rule = ball_rule(delta, n_r, n_phi, n_theta)
    k = bump(rule.points / delta) * rule.weights
    k = k / k.sum()
    return np.array([k @ half_ball_coefficient(p[None, :] - rule.points, eps0) for p in pts])


def cartesian_counterexample(delta: float) -> Tuple[float, float]:
    """
    Values of the Cartesian mollification at the origin and at (1/2, 0, 0).

    The first exceeds 1/2 while the second equals 1/2, so Cartesian smoothing
    breaks radial monotonicity.

    Raises:
        MollifierError: Unless 0 < delta < 1/2
    """
    if not (0.0 < delta < 0.5):
        raise MollifierError(f"delta={delta} outside (0, 1/2)")
    values = cartesian_mollify(np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]]), delta)
    return float(values[0]), float(values[1])


def cartesian_ray_trace(delta: float, t: np.ndarray) -> np.ndarray:
    """Cartesian mollification along the ray t e_1."""
    t = np.asarray(t, dtype=float)
    points = np.stack([t, np.zeros_like(t), np.zeros_like(t)], axis=-1)
    return cartesian_mollify(points, delta)


def trace_rows(profile: CoeffProfile, smoothed: CoeffProfile, direction, radii: np.ndarray) -> np.ndarray:
    """(r, eps, eps_delta) along a ray, smallest eigenvalue of each."""
    return np.column_stack([radii, radial_trace(profile, direction, radii), radial_trace(smoothed, direction, radii)])

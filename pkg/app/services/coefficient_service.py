"""
Coefficient service: construction and evaluation of eps / mu profiles,
radial monotonicity checks and the constants entering every bound.
"""
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ..core.config import settings
from ..core.errors import ProfileError
from ..data.models import CoeffProfile, LayeredMedium
from ..data.schemas import CoeffSummary, ProfileKind, Smoothness
from ..utils.helpers import as_points, probe_directions
from ..utils.logger import get_logger

logger = get_logger(__name__)

_IDENTITY = np.eye(3)


@dataclass(frozen=True)
class MonotonicityWitness:
    x: np.ndarray
    h: float
    v: np.ndarray
    drop: float


@dataclass(frozen=True)
class MonotonicityResult:
    passed: bool
    witness: Optional[MonotonicityWitness] = None
    min_margin: float = 0.0


# ============= Profile Construction =============

def _validate_spd(profile: CoeffProfile) -> CoeffProfile:
    """Reject profiles whose sampled values are not symmetric positive definite."""
    radii = np.linspace(0.0, profile.support_radius, 33)
    pts = (radii[:, None, None] * probe_directions()[None, :, :]).reshape(-1, 3)
    mats = eval_coeff(profile, pts)
    asym = np.max(np.abs(mats - np.swapaxes(mats, 1, 2)))
    if asym > settings.MATRIX_TOL:
        raise ProfileError(f"profile {profile.name!r} is not symmetric (max asymmetry {asym:.3e})")
    lowest = np.min(np.linalg.eigvalsh(mats))
    if lowest <= 0:
        raise ProfileError(f"profile {profile.name!r} is not positive definite (eigenvalue {lowest:.3e})")
    return profile


def constant_profile(background: float, name: str = "constant") -> CoeffProfile:
    if background <= 0:
        raise ProfileError("background must be positive")

    def value(points: np.ndarray) -> np.ndarray:
        return np.broadcast_to(background * _IDENTITY, (len(points), 3, 3)).copy()

    def derivative(points: np.ndarray) -> np.ndarray:
        return np.zeros((len(points), 3, 3))

    return CoeffProfile(
        kind=ProfileKind.CONSTANT,
        background=background,
        support_radius=0.0,
        smoothness=Smoothness.W1INFTY,
        value_fn=value,
        radial_derivative_fn=derivative,
        name=name,
    )


def piecewise_radial_profile(
    radii: Sequence[float],
    values: Sequence[float],
    background: float,
    name: str = "piecewise",
) -> CoeffProfile:
    """
    Scalar profile constant on concentric shells.

    Args:
        radii: Outer radius of each shell, strictly increasing
        values: Scalar value on each shell
        background: Value outside the last shell

    Returns:
        CoeffProfile: Linfty profile using the inner-shell value on interfaces

    Raises:
        ProfileError: If radii are not increasing or a value is not positive
    """
    radii_arr = np.asarray(radii, dtype=float)
    vals = np.asarray(values, dtype=float)
    if radii_arr.size == 0 or radii_arr.size != vals.size:
        raise ProfileError("radii and values must be non-empty and of equal length")
    if np.any(np.diff(radii_arr) <= 0) or radii_arr[0] <= 0:
        raise ProfileError("shell radii must be positive and strictly increasing")
    if np.any(vals <= 0) or background <= 0:
        raise ProfileError("shell values must be positive")
    table = np.append(vals, background)

    def value(points: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(points, axis=1)
        idx = np.searchsorted(radii_arr, r, side="left")
        return table[idx][:, None, None] * _IDENTITY

    profile = CoeffProfile(
        kind=ProfileKind.RADIAL_SCALAR,
        background=float(background),
        support_radius=float(radii_arr[-1]),
        smoothness=Smoothness.LINFTY,
        value_fn=value,
        shell_radii=tuple(float(r) for r in radii_arr),
        shell_values=tuple(float(v) for v in vals),
        name=name,
    )
    return _validate_spd(profile)


def smooth_radial_profile(
    f: Callable[[np.ndarray], np.ndarray],
    df: Callable[[np.ndarray], np.ndarray],
    support_radius: float,
    background: float,
    name: str = "smooth",
) -> CoeffProfile:
    """
    Scalar profile f(r) I inside the support with derivative access.

    (x . grad) eps = r f'(r) I.
    """
    def value(points: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(points, axis=1)
        return np.asarray(f(r), dtype=float)[:, None, None] * _IDENTITY

    def derivative(points: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(points, axis=1)
        return (r * np.asarray(df(r), dtype=float))[:, None, None] * _IDENTITY

    profile = CoeffProfile(
        kind=ProfileKind.RADIAL_SCALAR,
        background=float(background),
        support_radius=float(support_radius),
        smoothness=Smoothness.W1INFTY,
        value_fn=value,
        radial_derivative_fn=derivative,
        name=name,
    )
    return _validate_spd(profile)


def radial_matrix_profile(
    value_fn: Callable[[np.ndarray], np.ndarray],
    derivative_fn: Optional[Callable[[np.ndarray], np.ndarray]],
    support_radius: float,
    background: float,
    name: str = "matrix",
) -> CoeffProfile:
    """Matrix-valued profile from user callbacks; W1infty when a derivative is supplied."""
    profile = CoeffProfile(
        kind=ProfileKind.RADIAL_MATRIX,
        background=float(background),
        support_radius=float(support_radius),
        smoothness=Smoothness.W1INFTY if derivative_fn is not None else Smoothness.LINFTY,
        value_fn=value_fn,
        radial_derivative_fn=derivative_fn,
        name=name,
    )
    return _validate_spd(profile)


def example1_profile(value_minus: float, radius: float = 1.0, background: float = 1.0) -> CoeffProfile:
    """Ball of radius `radius` with value_minus inside."""
    return piecewise_radial_profile([radius], [value_minus], background, name="example1")


def example2_profile(radii: Sequence[float], values: Sequence[float], background: float = 1.0) -> CoeffProfile:
    """Nested regions with values non-decreasing outwards up to the background."""
    seq = list(values) + [background]
    if any(b < a for a, b in zip(seq, seq[1:])):
        raise ProfileError("example2 values must be non-decreasing outwards up to the background")
    return piecewise_radial_profile(radii, values, background, name="example2")


def example3_shells(background: float = 1.0, thickness_tol: float = 1e-4) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """
    Shells B_{j/(j+1)} minus B_{(j-1)/j} with value background (1 - 2^-j).

    The sequence stops at the first shell thinner than thickness_tol; the
    remaining shells are merged into the last kept one, which then extends to r = 1.
    """
    radii, values = [], []
    j = 1
    while True:
        thickness = 1.0 / (j * (j + 1))
        if thickness < thickness_tol:
            break
        radii.append(j / (j + 1.0))
        values.append(background * (1.0 - 2.0 ** (-j)))
        j += 1
    radii[-1] = 1.0
    return tuple(radii), tuple(values)


def example3_profile(background: float = 1.0, thickness_tol: float = 1e-4) -> CoeffProfile:
    radii, values = example3_shells(background, thickness_tol)
    return piecewise_radial_profile(radii, values, background, name="example3")


def profiles_for_medium(medium: LayeredMedium) -> Tuple[CoeffProfile, CoeffProfile]:
    """eps and mu profiles of a layered medium."""
    if medium.n_shells == 0:
        return constant_profile(medium.eps0, "eps0"), constant_profile(medium.mu0, "mu0")
    eps = piecewise_radial_profile(medium.radii, medium.eps, medium.eps0, name=f"{medium.name}:eps")
    mu = piecewise_radial_profile(medium.radii, medium.mu, medium.mu0, name=f"{medium.name}:mu")
    return eps, mu


# ============= Evaluation =============

def eval_coeff(profile: CoeffProfile, x) -> np.ndarray:
    """
    Evaluate a profile at one point or a stack of points.

    Args:
        profile: Coefficient profile
        x: Point (3,) or points (m, 3)

    Returns:
        np.ndarray: (3, 3) matrix or (m, 3, 3) stack; background * I beyond the support
    """
    points, single = as_points(x)
    out = np.broadcast_to(profile.background * _IDENTITY, (len(points), 3, 3)).copy()
    r = np.linalg.norm(points, axis=1)
    inside = r <= profile.support_radius
    if profile.kind != ProfileKind.CONSTANT and np.any(inside):
        out[inside] = profile.value_fn(points[inside])
    return out[0] if single else out


def eval_radial_derivative(profile: CoeffProfile, x) -> np.ndarray:
    """(x . grad) of the profile; zero beyond the support."""
    if profile.radial_derivative_fn is None:
        raise ProfileError(f"profile {profile.name!r} has no derivative access")
    points, single = as_points(x)
    out = np.zeros((len(points), 3, 3))
    r = np.linalg.norm(points, axis=1)
    inside = r <= profile.support_radius
    if np.any(inside):
        out[inside] = profile.radial_derivative_fn(points[inside])
    return out[0] if single else out


def radial_trace(profile: CoeffProfile, direction, radii: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of the profile along the ray t * direction."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    mats = eval_coeff(profile, np.asarray(radii, dtype=float)[:, None] * d[None, :])
    return np.linalg.eigvalsh(mats)[:, 0]


def default_sample_points(profile: CoeffProfile, n_radii: int = 129) -> np.ndarray:
    """Tensor grid of radii (plus shell-boundary refinement) times probe directions."""
    top = max(profile.support_radius, 1e-12)
    radii = [np.linspace(0.0, top * (1.0 + 1e-6), n_radii)]
    for rb in profile.shell_radii:
        radii.append(rb * np.array([1.0 - 1e-9, 1.0, 1.0 + 1e-9]))
    radii = np.unique(np.concatenate(radii))
    return (radii[:, None, None] * probe_directions()[None, :, :]).reshape(-1, 3)


def _default_radii(profile: CoeffProfile) -> np.ndarray:
    """Uniform radii past the support, with the support radius itself included."""
    top = max(profile.support_radius, 1e-12)
    return np.union1d(np.linspace(0.0, top * 1.05, 2001), [profile.support_radius * (1.0 - 1e-12), profile.support_radius])


def _sym_min_eig(mats: np.ndarray) -> np.ndarray:
    sym = 0.5 * (mats + np.swapaxes(mats, 1, 2))
    return np.linalg.eigvalsh(sym)[:, 0]


def gamma_lower_bound(
    profile: CoeffProfile,
    radial_grid: Optional[np.ndarray] = None,
    direction_grid: Optional[np.ndarray] = None,
) -> float:
    """
    Grid estimate of essinf of I + ((x . grad) eps) eps^-1.

    Args:
        profile: W1infty profile with derivative access
        radial_grid: Radii to sample (defaults to a uniform grid past the support)
        direction_grid: Unit directions (defaults to the probe set)

    Returns:
        float: Smallest eigenvalue of the symmetrized matrix over the grid.
        Values <= 0 mean the growth condition is violated; this is logged, not raised.

    Raises:
        ProfileError: If the profile has no derivative access
    """
    if profile.smoothness != Smoothness.W1INFTY or profile.radial_derivative_fn is None:
        raise ProfileError(f"profile {profile.name!r} is not W1infty with derivative access")
    if radial_grid is None:
        radial_grid = _default_radii(profile)
    if direction_grid is None:
        direction_grid = probe_directions()
    pts = (np.asarray(radial_grid)[:, None, None] * np.asarray(direction_grid)[None, :, :]).reshape(-1, 3)
    eps = eval_coeff(profile, pts)
    deps = eval_radial_derivative(profile, pts)
    growth = _IDENTITY + deps @ np.linalg.inv(eps)
    gamma = float(np.min(_sym_min_eig(growth)))
    if gamma <= 0:
        logger.warning("growth condition violated for %s: gamma estimate %.3e", profile.name, gamma)
    return gamma


def star_lower_bound(profile: CoeffProfile, points: Optional[np.ndarray] = None) -> float:
    """Grid minimum of the smallest eigenvalue of eps + (x . grad) eps."""
    if points is None:
        radii = _default_radii(profile)
        points = (radii[:, None, None] * probe_directions()[None, :, :]).reshape(-1, 3)
    mats = eval_coeff(profile, points) + eval_radial_derivative(profile, points)
    return float(np.min(_sym_min_eig(mats)))


def default_ray_samples(profile: CoeffProfile, n_radii: int = 64) -> np.ndarray:
    top = max(profile.support_radius, 1e-12) * 1.1
    radii = np.linspace(top / n_radii, top, n_radii)
    return (radii[:, None, None] * probe_directions()[None, :, :]).reshape(-1, 3)


def check_radial_monotonicity(
    profile: CoeffProfile,
    ray_samples: Optional[np.ndarray] = None,
    dilation_factors: Optional[Sequence[float]] = None,
    tol: Optional[float] = None,
) -> MonotonicityResult:
    """
    Check Pi((1+h)x) >= Pi(x) in the quadratic-form sense on samples.

    Pi = eps - eps_min I, so only differences of the profile matter. Both the
    probe-vector forms and the smallest eigenvalue of the difference are tested.

    Args:
        profile: Profile to check
        ray_samples: Points x (m, 3)
        dilation_factors: Values h >= 0
        tol: Absolute tolerance (defaults to settings.MATRIX_TOL)

    Returns:
        MonotonicityResult: pass flag, first witness (x, h, v) if any, smallest margin
    """
    tol = settings.MATRIX_TOL if tol is None else tol
    if ray_samples is None:
        ray_samples = default_ray_samples(profile)
    if dilation_factors is None:
        dilation_factors = (0.01, 0.05, 0.1, 0.25, 0.5, 1.0)
    x = np.asarray(ray_samples, dtype=float).reshape(-1, 3)
    probes = probe_directions()
    base = eval_coeff(profile, x)
    worst = np.inf
    for h in dilation_factors:
        if h < 0:
            raise ProfileError("dilation factors must be non-negative")
        diff = eval_coeff(profile, (1.0 + h) * x) - base
        forms = np.einsum("pi,mij,pj->mp", probes, diff, probes)
        eig = _sym_min_eig(diff)
        worst = min(worst, float(forms.min()), float(eig.min()))
        bad = np.argwhere(forms < -tol)
        if bad.size:
            m, p = bad[0]
            return MonotonicityResult(False, MonotonicityWitness(x[m], float(h), probes[p], float(forms[m, p])), worst)
        bad_eig = np.flatnonzero(eig < -tol)
        if bad_eig.size:
            m = bad_eig[0]
            sym = 0.5 * (diff[m] + diff[m].T)
            _, vecs = np.linalg.eigh(sym)
            return MonotonicityResult(False, MonotonicityWitness(x[m], float(h), vecs[:, 0], float(eig[m])), worst)
    return MonotonicityResult(True, None, worst)


def profile_extrema(profile: CoeffProfile) -> Tuple[float, float]:
    if profile.is_piecewise:
        vals = profile.shell_values + (profile.background,)
        return float(min(vals)), float(max(vals))
    eig = np.linalg.eigvalsh(eval_coeff(profile, default_sample_points(profile)))
    lo = min(float(eig[:, 0].min()), profile.background)
    hi = max(float(eig[:, -1].max()), profile.background)
    return lo, hi


def _growth_constants(profile: CoeffProfile, lowest: float, monotone: bool) -> Tuple[float, float]:
    """(gamma, eps_star) of one profile."""
    if profile.smoothness == Smoothness.W1INFTY and profile.radial_derivative_fn is not None:
        return min(gamma_lower_bound(profile), 1.0), star_lower_bound(profile)
    # Linfty profiles: monotone ones are limits of smooth monotone profiles with gamma = 1
    # and eps + (x . grad) eps >= eps_min. Otherwise both constants are 0 and flagged invalid.
    if monotone:
        return 1.0, lowest
    return 0.0, 0.0


def summarize(profile_eps: CoeffProfile, profile_mu: CoeffProfile) -> CoeffSummary:
    """
    Constants of the pair (eps, mu) used by the bound formulas.

    Args:
        profile_eps: Permittivity profile
        profile_mu: Permeability profile

    Returns:
        CoeffSummary: Extrema, gamma constants, stars and monotonicity flags
    """
    eps_min, eps_max = profile_extrema(profile_eps)
    mu_min, mu_max = profile_extrema(profile_mu)
    eps_mono = check_radial_monotonicity(profile_eps).passed
    mu_mono = check_radial_monotonicity(profile_mu).passed
    gamma_eps, eps_star = _growth_constants(profile_eps, eps_min, eps_mono)
    gamma_mu, mu_star = _growth_constants(profile_mu, mu_min, mu_mono)
    if eps_star <= settings.MATRIX_TOL or mu_star <= settings.MATRIX_TOL:
        logger.warning("eps_star=%.3e mu_star=%.3e: unweighted bound unavailable", eps_star, mu_star)
    if gamma_eps <= 0 or gamma_mu <= 0:
        logger.warning("gamma_eps=%.3e gamma_mu=%.3e: growth-constant bounds unavailable", gamma_eps, gamma_mu)
    return CoeffSummary(
        eps_min=eps_min,
        eps_max=eps_max,
        mu_min=mu_min,
        mu_max=mu_max,
        gamma_eps=gamma_eps,
        gamma_mu=gamma_mu,
        eps_star=eps_star,
        mu_star=mu_star,
        eps_star_valid=eps_star > settings.MATRIX_TOL,
        mu_star_valid=mu_star > settings.MATRIX_TOL,
        gamma_eps_valid=gamma_eps > 0,
        gamma_mu_valid=gamma_mu > 0,
        eps_monotone=eps_mono,
        mu_monotone=mu_mono,
        eps0=profile_eps.background,
        mu0=profile_mu.background,
    )

"""
Product quadrature on balls, spherical shells and spheres.

Radial direction: Gauss-Legendre panels split at interfaces. Polar
direction: Gauss-Legendre in cos(polar). Azimuth: uniform, offset by half a step.
"""
from typing import Iterable, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..core.config import settings
from ..core.errors import QuadratureError
from ..data.models import BallRule, SphereRule

_MIN_PANEL_NODES = 6
_MIN_GAP = 1e-6


def _angular_nodes(n_phi: int, n_theta: int) -> Tuple[np.ndarray, np.ndarray]:
    """Unit directions (n_phi * n_theta, 3) and weights summing to 4 pi."""
    cos_polar, w_polar = leggauss(n_phi)
    azimuth = 2.0 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    sin_polar = np.sqrt(1.0 - cos_polar**2)
    dirs = np.stack(
        [
            np.outer(sin_polar, np.cos(azimuth)),
            np.outer(sin_polar, np.sin(azimuth)),
            np.outer(cos_polar, np.ones(n_theta)),
        ],
        axis=-1,
    ).reshape(-1, 3)
    weights = np.outer(w_polar, np.full(n_theta, 2.0 * np.pi / n_theta)).reshape(-1)
    return dirs, weights


def radial_panels(r_inner: float, r_outer: float, breakpoints: Iterable[float] = ()) -> np.ndarray:
    """Panel edges from r_inner to r_outer, split at interior breakpoints further apart than 1e-6."""
    edges = [r_inner]
    for b in sorted(float(b) for b in breakpoints):
        if edges[-1] + _MIN_GAP < b < r_outer - _MIN_GAP:
            edges.append(b)
    edges.append(r_outer)
    return np.asarray(edges)


def _radial_nodes(edges: np.ndarray, n_r: int) -> Tuple[np.ndarray, np.ndarray]:
    total = edges[-1] - edges[0]
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        count = n_r if len(edges) == 2 else max(_MIN_PANEL_NODES, int(np.ceil(n_r * (hi - lo) / total)))
        x, w = leggauss(count)
        nodes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        weights.append(0.5 * (hi - lo) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def ball_rule(
    R: float,
    n_r: Optional[int] = None,
    n_phi: Optional[int] = None,
    n_theta: Optional[int] = None,
    r_inner: float = 0.0,
    breakpoints: Iterable[float] = (),
) -> BallRule:
    """
    Product rule on the ball B_R or the shell r_inner < |x| < R.

    Args:
        R: Outer radius
        n_r: Radial nodes (per panel when unsplit; split panels share n_r by length, at least 6 each)
        n_phi: Gauss nodes in cos(polar)
        n_theta: Uniform azimuth nodes
        r_inner: Inner radius for shells
        breakpoints: Radii where the radial direction is split (shell interfaces)

    Returns:
        BallRule: nodes and weights; weights sum to the domain volume

    Raises:
        QuadratureError: For counts below 2 or an empty domain
    """
    n_r = settings.QUAD_N_R if n_r is None else n_r
    n_phi = settings.QUAD_N_PHI if n_phi is None else n_phi
    n_theta = settings.QUAD_N_THETA if n_theta is None else n_theta
    if min(n_r, n_phi, n_theta) < 2:
        raise QuadratureError("quadrature counts must be at least 2")
    if not (0.0 <= r_inner < R):
        raise QuadratureError(f"empty radial range [{r_inner}, {R}]")
    edges = radial_panels(r_inner, R, breakpoints)
    r, w_r = _radial_nodes(edges, n_r)
    dirs, w_ang = _angular_nodes(n_phi, n_theta)
    points = (r[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    weights = ((w_r * r**2)[:, None] * w_ang[None, :]).reshape(-1)
    return BallRule(
        points=points,
        weights=weights,
        r_inner=float(r_inner),
        r_outer=float(R),
        breakpoints=tuple(float(e) for e in edges[1:-1]),
        counts=(n_r, n_phi, n_theta),
    )


def shell_rule(r_inner: float, r_outer: float, **kwargs) -> BallRule:
    return ball_rule(r_outer, r_inner=r_inner, **kwargs)


def sphere_rule(R: float, n_phi: Optional[int] = None, n_theta: Optional[int] = None) -> SphereRule:
    """Product rule on the sphere of radius R; weights sum to 4 pi R^2."""
    n_phi = settings.QUAD_N_PHI if n_phi is None else n_phi
    n_theta = settings.QUAD_N_THETA if n_theta is None else n_theta
    if min(n_phi, n_theta) < 2:
        raise QuadratureError("quadrature counts must be at least 2")
    dirs, w_ang = _angular_nodes(n_phi, n_theta)
    return SphereRule(points=R * dirs, weights=R**2 * w_ang, normals=dirs, radius=float(R))


def refined(rule: BallRule, factor: int = 2) -> BallRule:
    """Same domain with every count multiplied by factor."""
    n_r, n_phi, n_theta = rule.counts
    return ball_rule(
        rule.r_outer,
        n_r * factor,
        n_phi * factor,
        n_theta * factor,
        r_inner=rule.r_inner,
        breakpoints=rule.breakpoints,
    )

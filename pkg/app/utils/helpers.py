"""
Shared numeric helpers: finite-difference stencils, probe directions,
spherical coordinates and hashing of configuration payloads.
"""
import hashlib
import json
from typing import Any, Callable, Tuple

import numpy as np

ArrayFn = Callable[[np.ndarray], np.ndarray]

# Order-4 central first-derivative stencil: offsets and weights (divide by h).
_D1_OFFSETS = (-2, -1, 1, 2)
_D1_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)

# Order-4 central second-derivative stencil (divide by h**2).
_D2_OFFSETS = (-2, -1, 0, 1, 2)
_D2_WEIGHTS = (-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0)


def as_points(x: Any) -> Tuple[np.ndarray, bool]:
    """
    Normalize a point or a stack of points to shape (m, 3).

    Returns:
        Tuple of the (m, 3) array and a flag telling whether the input was a single point
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        return arr.reshape(1, 3), True
    return arr.reshape(-1, 3), False


def fd_partial(func: ArrayFn, points: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Order-4 central difference of func along coordinate axis at every point."""
    step = np.zeros(3)
    step[axis] = h
    total = None
    for offset, weight in zip(_D1_OFFSETS, _D1_WEIGHTS):
        term = weight * func(points + offset * step)
        total = term if total is None else total + term
    return total / h


def fd_jacobian(func: ArrayFn, points: np.ndarray, h: float) -> np.ndarray:
    """
    Finite-difference Jacobian of a vector field.

    Returns:
        Array (m, 3, 3) with [i, j] = d f_i / d x_j
    """
    cols = [fd_partial(func, points, axis, h) for axis in range(3)]
    return np.stack(cols, axis=-1)


def fd_divergence(func: ArrayFn, points: np.ndarray, h: float) -> np.ndarray:
    """Finite-difference divergence of a vector field; returns (m,)."""
    return sum(fd_partial(func, points, axis, h)[:, axis] for axis in range(3))


def fd_curl(func: ArrayFn, points: np.ndarray, h: float) -> np.ndarray:
    return curl_from_jacobian(fd_jacobian(func, points, h))


def fd_laplacian(func: ArrayFn, points: np.ndarray, h: float) -> np.ndarray:
    """Order-4 finite-difference Laplacian of a scalar field."""
    total = 0.0
    for axis in range(3):
        step = np.zeros(3)
        step[axis] = h
        for offset, weight in zip(_D2_OFFSETS, _D2_WEIGHTS):
            total = total + weight * func(points + offset * step)
    return total / h**2


def curl_from_jacobian(jac: np.ndarray) -> np.ndarray:
    """Curl from a Jacobian stack with [i, j] = d f_i / d x_j."""
    return np.stack(
        [
            jac[:, 2, 1] - jac[:, 1, 2],
            jac[:, 0, 2] - jac[:, 2, 0],
            jac[:, 1, 0] - jac[:, 0, 1],
        ],
        axis=-1,
    )


def probe_directions() -> np.ndarray:
    """
    Fixed probe set for quadratic-form comparisons.

    The three coordinate axes, the six icosahedral vertex axes, the four cube
    body diagonals and the three face diagonals (16 unit vectors).
    """
    g = (1.0 + np.sqrt(5.0)) / 2.0
    vecs = [
        (1, 0, 0), (0, 1, 0), (0, 0, 1),
        (0, 1, g), (0, 1, -g), (1, g, 0), (1, -g, 0), (g, 0, 1), (-g, 0, 1),
        (1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1),
        (1, 1, 0), (1, 0, 1), (0, 1, 1),
    ]
    arr = np.asarray(vecs, dtype=float)
    return arr / np.linalg.norm(arr, axis=1, keepdims=True)


def spherical_coordinates(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Radius, polar angle in [0, pi] and azimuth in [0, 2 pi) of (m, 3) points.

    The polar angle at the origin is reported as 0.
    """
    r = np.linalg.norm(points, axis=1)
    safe = np.where(r > 0.0, r, 1.0)
    polar = np.arccos(np.clip(points[:, 2] / safe, -1.0, 1.0))
    azimuth = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2.0 * np.pi)
    return r, polar, azimuth


def random_unit_vectors(rng: np.random.Generator, count: int) -> np.ndarray:
    v = rng.normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_spd(rng: np.random.Generator, count: int, floor: float = 0.2) -> np.ndarray:
    """Random symmetric positive definite 3x3 matrices with eigenvalues above floor."""
    a = rng.normal(size=(count, 3, 3))
    return np.einsum("mij,mkj->mik", a, a) / 3.0 + floor * np.eye(3)


def config_hash(payload: Any) -> str:
    """SHA-256 of the canonical JSON encoding of payload."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()

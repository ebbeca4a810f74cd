"""
Spherical Bessel and Hankel functions of real positive argument.

j_n comes from Miller's downward recurrence, y_n from the upward
recurrence, derivatives from the ladder relation f_n' = f_{n-1} - (n+1)/z f_n.
The log-scaled Riccati table stays finite at orders where y_n overflows.
"""
import math
from typing import Tuple

import numpy as np

from ..core.config import settings
from ..core.errors import BesselArgumentError
from ..data.models import RiccatiLogTable, RiccatiTable, SphericalBesselTable

_OVERFLOW = 1e250
_MIN_ARGUMENT = 1e-8
_ANCHOR_FLOOR = 1e-250


def _check_request(order_max: int, z: np.ndarray) -> None:
    if order_max < 0:
        raise BesselArgumentError("order_max must be non-negative")
    if order_max > settings.BESSEL_ORDER_CAP:
        raise BesselArgumentError(f"order_max={order_max} exceeds cap {settings.BESSEL_ORDER_CAP}")
    if np.iscomplexobj(z):
        raise BesselArgumentError("complex arguments are not supported (lossless media only)")
    if z.size and np.min(z) < _MIN_ARGUMENT:
        raise BesselArgumentError(f"argument {np.min(z):.3e} below {_MIN_ARGUMENT}: evaluate limit form instead")


def _downward_j(order_max: int, z: np.ndarray) -> np.ndarray:
    """Miller recurrence for j_0..j_{order_max+1}; z is 1-d."""
    start = order_max + 1 + max(20, int(math.ceil(1.5 * float(np.max(z)))))
    vals = np.zeros((start + 2, z.size))
    vals[start] = 1e-30
    for n in range(start, 0, -1):
        vals[n - 1] = (2 * n + 1) / z * vals[n] - vals[n + 1]
        big = np.abs(vals[n - 1]) > _OVERFLOW
        if np.any(big):
            vals[n - 1:, big] /= _OVERFLOW
    sin_z, cos_z = np.sin(z), np.cos(z)
    j0 = sin_z / z
    j1 = sin_z / z**2 - cos_z / z
    use_j0 = np.abs(j0) >= np.abs(j1)
    scale = np.where(use_j0, j0 / np.where(use_j0, vals[0], 1.0), j1 / np.where(use_j0, 1.0, vals[1]))
    return vals[: order_max + 2] * scale


def _upward_y(order_max: int, z: np.ndarray) -> np.ndarray:
    vals = np.empty((order_max + 2, z.size))
    vals[0] = -np.cos(z) / z
    vals[1] = -np.cos(z) / z**2 - np.sin(z) / z
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, order_max + 1):
            vals[n + 1] = (2 * n + 1) / z * vals[n] - vals[n - 1]
    return vals


def _ladder(f: np.ndarray, z: np.ndarray, order_max: int) -> np.ndarray:
    d = np.empty((order_max + 1, z.size))
    d[0] = -f[1]
    n = np.arange(1, order_max + 1)[:, None]
    with np.errstate(over="ignore", invalid="ignore"):
        d[1:] = f[:-2][: order_max] - (n + 1) / z * f[1: order_max + 1]
    return d


def bessel_table(order_max: int, z) -> SphericalBesselTable:
    """
    Table of j_n, y_n and their derivatives for n = 0..order_max.

    Args:
        order_max: Highest order N (at most settings.BESSEL_ORDER_CAP)
        z: Positive real argument, scalar or array

    Returns:
        SphericalBesselTable: arrays of shape (N+1,) + shape(z)

    Raises:
        BesselArgumentError: For complex, too small or out-of-cap requests
    """
    z_arr = np.asarray(z)
    _check_request(order_max, z_arr)
    shape = z_arr.shape
    flat = z_arr.astype(float).reshape(-1)
    j = _downward_j(order_max, flat)
    y = _upward_y(order_max, flat)
    dj = _ladder(j, flat, order_max)
    dy = _ladder(y, flat, order_max)
    full = (order_max + 1,) + shape
    return SphericalBesselTable(
        order_max=order_max,
        z=z_arr.astype(float),
        j=j[: order_max + 1].reshape(full),
        y=y[: order_max + 1].reshape(full),
        dj=dj.reshape(full),
        dy=dy.reshape(full),
    )


def riccati_derivatives(table: SphericalBesselTable) -> RiccatiTable:
    """psi_n = z j_n, xi_n = z h_n and their z-derivatives."""
    z = table.z
    h, dh = table.h, table.dh
    with np.errstate(over="ignore", invalid="ignore"):
        return RiccatiTable(
            psi=z * table.j,
            dpsi=table.j + z * table.dj,
            xi=z * h,
            dxi=h + z * dh,
        )


def riccati_log_table(order_max: int, z: float) -> RiccatiLogTable:
    """
    Logarithmic derivatives and logarithms of psi_n, xi_n at one real argument.

    D_n runs downward, D_{n-1} = n/z - 1/(D_n + n/z), started at zero well above
    max(order_max, z); G_n runs upward from G_0 = i. log psi_n is read from the
    Miller table while psi_n is representable and continued with
    psi_{n-1}/psi_n = D_n + n/z beyond; log xi_n follows xi_{n-1}/xi_n = G_n + n/z
    from xi_0 = -i e^{iz}.

    Args:
        order_max: Highest order N (at most settings.BESSEL_ORDER_CAP)
        z: Positive real scalar argument

    Returns:
        RiccatiLogTable: arrays of shape (N+1,)

    Raises:
        BesselArgumentError: For complex, array, too small or out-of-cap requests
    """
    z_arr = np.asarray(z)
    _check_request(order_max, z_arr)
    if z_arr.ndim:
        raise BesselArgumentError("riccati_log_table takes a scalar argument")
    x = float(z_arr)
    start = max(order_max, int(math.ceil(x))) + 16
    D = np.zeros(start + 1)
    for n in range(start, 0, -1):
        D[n - 1] = n / x - 1.0 / (D[n] + n / x)
    D = D[: order_max + 1]
    G = np.empty(order_max + 1, dtype=complex)
    G[0] = 1j
    for n in range(1, order_max + 1):
        G[n] = -n / x + 1.0 / (n / x - G[n - 1])

    psi = x * _downward_j(order_max, np.array([x]))[: order_max + 1, 0]
    log_psi = np.empty(order_max + 1, dtype=complex)
    log_xi = np.empty(order_max + 1, dtype=complex)
    log_psi[0] = np.log(complex(psi[0]))
    log_xi[0] = 1j * (x - 0.5 * math.pi)
    for n in range(1, order_max + 1):
        if abs(psi[n]) > _ANCHOR_FLOOR:
            log_psi[n] = np.log(complex(psi[n]))
        else:
            log_psi[n] = log_psi[n - 1] - np.log(complex(D[n] + n / x))
        log_xi[n] = log_xi[n - 1] - np.log(G[n] + n / x)
    return RiccatiLogTable(order_max=order_max, z=x, D=D, G=G, log_psi=log_psi, log_xi=log_xi)


def series_table(order_max: int, z, terms: int = 30) -> Tuple[np.ndarray, np.ndarray]:
    """
    Power-series j_n(z) and j_n'(z); accurate for small z, used near the origin.

    Returns:
        Tuple of arrays (N+1,) + shape(z) for j and j'
    """
    z = np.asarray(z, dtype=float)
    j = np.zeros((order_max + 1,) + z.shape)
    dj = np.zeros_like(j)
    half_sq = -0.5 * z**2
    for n in range(order_max + 1):
        lead = 1.0 / float(np.prod(np.arange(1, 2 * n + 2, 2, dtype=float)))
        coeff = lead
        for k in range(terms):
            if k > 0:
                coeff = coeff * 1.0 / (k * (2 * n + 2 * k + 1))
            power = n + 2 * k
            term = coeff * half_sq**k * z**n
            j[n] += term
            if power > 0:
                dj[n] += coeff * (-0.5) ** k * power * z ** (power - 1)
    return j, dj


def series_jn(n: int, z, terms: int = 30) -> np.ndarray:
    j, _ = series_table(n, z, terms)
    return j[n]

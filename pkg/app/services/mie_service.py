"""
Mie service: exact transmission solution for radially layered spheres under
plane-wave incidence.

Fields are expanded in vector spherical wave functions in the incidence
frame (A, d x A, d). In shell s,

    E = sqrt(mu0) sum_n E_n [ M_o1n[zA] - i N_e1n[zB] ],   E_n = i^n (2n+1) / (n (n+1)),
    H = curl E / (i omega mu_s),

with radial functions z = alpha j_n(k_s r) + beta h_n(k_s r) per channel
(A: magnetic multipoles, B: electric multipoles). The innermost shell is
regular; the exterior holds (1, -b_n) and (1, -a_n).
"""
import math
from typing import Optional, Tuple

import numpy as np
from icecream import ic

from ..core.config import settings
from ..core.errors import TruncationError
from ..data.models import (
    BallRule,
    CoeffProfile,
    LayeredMedium,
    MultipoleSolution,
    PlaneWaveIncidence,
    SphereRule,
)
from ..utils.helpers import as_points, spherical_coordinates
from ..utils.logger import get_logger
from .bessel_service import bessel_table, riccati_log_table, series_table
from .coefficient_service import eval_coeff, example3_shells
from .morawetz_service import q_beta_from_values

ic.disable()
logger = get_logger(__name__)

_TE, _TM = 0, 1
_SMALL_ARGUMENT = 1e-6


# ============= Media and Incident Field =============

def uniform_medium(eps0: float = 1.0, mu0: float = 1.0) -> LayeredMedium:
    return LayeredMedium(radii=(), eps=(), mu=(), eps0=eps0, mu0=mu0, name="uniform")


def example1_medium(eps_minus: float, mu_minus: float, radius: float = 1.0, eps0: float = 1.0, mu0: float = 1.0) -> LayeredMedium:
    """Homogeneous ball of radius `radius`."""
    return LayeredMedium((radius,), (eps_minus,), (mu_minus,), eps0, mu0, name="example1")


def example2_medium(radii, eps, mu, eps0: float = 1.0, mu0: float = 1.0) -> LayeredMedium:
    """Nested regions with values non-decreasing towards the background."""
    return LayeredMedium(tuple(radii), tuple(eps), tuple(mu), eps0, mu0, name="example2")


def example3_medium(eps0: float = 1.0, mu0: float = 1.0, mu_constant: bool = False) -> LayeredMedium:
    """Shells B_{j/(j+1)} minus B_{(j-1)/j}, truncated where shells get thinner than 1e-4."""
    radii, eps = example3_shells(eps0)
    if mu_constant:
        mu = tuple(mu0 for _ in radii)
    else:
        _, mu = example3_shells(mu0)
    return LayeredMedium(radii, eps, mu, eps0, mu0, name="example3")


def default_incidence(omega: float) -> PlaneWaveIncidence:
    """Incidence along e3 polarized along e1."""
    return PlaneWaveIncidence(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]), omega)


def plane_wave(inc: PlaneWaveIncidence, x, eps0: float = 1.0, mu0: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Incident field E = sqrt(mu0) A e^{i k d.x}, H = sqrt(eps0) (d x A) e^{i k d.x}.

    Returns:
        Tuple (E, H) of complex arrays shaped like x
    """
    points, single = as_points(x)
    k = inc.omega * math.sqrt(eps0 * mu0)
    phase = np.exp(1j * k * (points @ inc.direction))
    E = math.sqrt(mu0) * phase[:, None] * inc.polarization[None, :]
    H = math.sqrt(eps0) * phase[:, None] * np.cross(inc.direction, inc.polarization)[None, :]
    if single:
        return E[0], H[0]
    return E, H


# ============= Solver =============

def truncation_order(size_parameter: float) -> int:
    """Wiscombe-style order N = ceil(x + 4 x^(1/3) + 2), capped."""
    n = int(math.ceil(size_parameter + 4.0 * size_parameter ** (1.0 / 3.0) + 2.0))
    return min(n, settings.BESSEL_ORDER_CAP)


def _interface_logs(order: int, rho: float):
    lt = riccati_log_table(order, rho)
    return lt.D[1:], lt.G[1:], lt.log_psi[1:], lt.log_xi[1:]


def _transfer(log_amp: np.ndarray, r: float, k_in: float, k_out: float, mu_in: float, mu_out: float, order: int) -> np.ndarray:
    """
    Carry log (regular, outgoing) coefficients across the interface at radius r.

    log_amp has shape (2 channels, 2, N) and holds log alpha, log beta of
    u = alpha psi_n + beta xi_n. Magnetic multipoles keep u/k and u'/mu
    continuous; electric multipoles keep u/mu and u'/k continuous. Only
    logarithmic derivatives and log psi, log xi enter, so orders where psi_n
    underflows or xi_n overflows at k r stay finite.
    """
    if k_in == k_out and mu_in == mu_out:
        return log_amp.copy()
    D_i, G_i, lpsi_i, lxi_i = _interface_logs(order, k_in * r)
    D_o, G_o, lpsi_o, lxi_o = _interface_logs(order, k_out * r)
    log_alpha, log_beta = log_amp[:, 0], log_amp[:, 1]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        # outgoing-to-regular weight of u at the inner side, relative to alpha psi
        w = np.exp(log_beta - log_alpha + lxi_i - lpsi_i)
        V = np.array([k_out / k_in, mu_out / mu_in])[:, None] * (1.0 + w)
        W = np.array([mu_out / mu_in, k_out / k_in])[:, None] * (D_i + w * G_i)
        gap = G_o - D_o
        A = (V * G_o - W) / gap
        B = (W - V * D_o) / gap
        out = np.empty_like(log_amp)
        out[:, 0] = log_alpha + lpsi_i - lpsi_o + np.log(A)
        out[:, 1] = log_alpha + lpsi_i - lxi_o + np.log(B)
    return out


def _solve_order(medium: LayeredMedium, omega: float, order: int):
    k = medium.wavenumbers(omega)
    mu = medium.shell_mu()
    n_layers = medium.n_shells + 1
    log_amp = np.zeros((n_layers, 2, 2, order), dtype=complex)
    log_amp[0, :, 1, :] = -np.inf
    for j, r in enumerate(medium.radii):
        log_amp[j + 1] = _transfer(log_amp[j], r, k[j], k[j + 1], mu[j], mu[j + 1], order)
    with np.errstate(over="ignore", invalid="ignore"):
        coeffs = np.exp(log_amp - log_amp[-1, :, 0, :][None, :, None, :])
    b = -coeffs[-1, _TE, 1, :]
    a = -coeffs[-1, _TM, 1, :]
    coeffs[-1, :, 0, :] = 1.0
    return coeffs, a, b


def _tail(a: np.ndarray, b: np.ndarray) -> float:
    """Relative size of the last retained term; inf for non-finite coefficients."""
    t = np.abs(a) + np.abs(b)
    if not np.all(np.isfinite(t)):
        return math.inf
    peak = float(np.max(t)) if t.size else 0.0
    return float(t[-1] / peak) if peak > 0 else 0.0


def solve_layered(medium: LayeredMedium, inc: PlaneWaveIncidence) -> MultipoleSolution:
    """
    Solve the layered-sphere transmission problem.

    Args:
        medium: Concentric shells and exterior background
        inc: Incident plane wave

    Returns:
        MultipoleSolution: per-shell coefficients, scattering coefficients a_n, b_n, tail

    Raises:
        TruncationError: If the order cap is reached with the tail above settings.MIE_TAIL_TOLERANCE,
            or if any coefficient is not finite
    """
    size = inc.omega * math.sqrt(medium.eps0 * medium.mu0) * medium.outer_radius
    order = truncation_order(size)
    cap = settings.BESSEL_ORDER_CAP
    tol = settings.MIE_TAIL_TOLERANCE
    while True:
        coeffs, a, b = _solve_order(medium, inc.omega, order)
        tail = _tail(a, b)
        if not np.all(np.isfinite(coeffs)) or math.isinf(tail):
            raise TruncationError(order, math.inf, tol, reason="non-finite multipole coefficients")
        if tail <= tol:
            break
        if order >= cap:
            raise TruncationError(order, tail, tol)
        order = min(cap, order + max(4, order // 4))
    ic(medium.name, inc.omega, order, tail)
    logger.debug("solved %s at omega=%g with N=%d tail=%.2e", medium.name, inc.omega, order, tail)
    return MultipoleSolution(medium=medium, incidence=inc, order=order, coefficients=coeffs, a=a, b=b, tail=tail)


# ============= Field Evaluation =============

def _angular_functions(order: int, cos_polar: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """pi_n and tau_n for n = 1..order; arrays (order, m)."""
    pi = np.zeros((order + 1, cos_polar.size))
    tau = np.zeros_like(pi)
    if order >= 1:
        pi[1] = 1.0
        tau[1] = cos_polar
    for n in range(2, order + 1):
        pi[n] = ((2 * n - 1) * cos_polar * pi[n - 1] - n * pi[n - 2]) / (n - 1)
        tau[n] = n * cos_polar * pi[n] - (n + 1) * pi[n - 1]
    return pi[1:], tau[1:]


def _radial_functions(order: int, rho: np.ndarray, regular: bool):
    """
    (j, j', h, h') for n = 1..order at rho.

    Arguments below 1e-6 use the power series; there only regular functions are defined.
    """
    small = rho < _SMALL_ARGUMENT
    j = np.zeros((order, rho.size))
    dj = np.zeros_like(j)
    h = np.zeros((order, rho.size), dtype=complex)
    dh = np.zeros_like(h)
    if np.any(~small):
        table = bessel_table(order, rho[~small])
        j[:, ~small] = table.j[1:]
        dj[:, ~small] = table.dj[1:]
        if not regular:
            # h_n overflows only at orders whose outgoing coefficient has underflowed
            with np.errstate(invalid="ignore"):
                ok = np.isfinite(table.h[1:]) & np.isfinite(table.dh[1:])
                h[:, ~small] = np.where(ok, table.h[1:], 0.0)
                dh[:, ~small] = np.where(ok, table.dh[1:], 0.0)
    if np.any(small):
        sj, sdj = series_table(order, np.maximum(rho[small], 1e-12))
        j[:, small] = sj[1:]
        dj[:, small] = sdj[1:]
    return j, dj, h, dh


def _expansion_fields(
    coeffs: np.ndarray,
    k: float,
    mu: float,
    omega: float,
    mu0: float,
    local: np.ndarray,
    regular: bool,
) -> Tuple[np.ndarray, np.ndarray]:
    """Expansion fields in the incidence frame for points (m, 3) in one shell."""
    order = coeffs.shape[-1]
    r, polar, azimuth = spherical_coordinates(local)
    rho = np.maximum(k * r, 1e-12)
    j, dj, h, dh = _radial_functions(order, rho, regular)
    zA = coeffs[_TE, 0][:, None] * j + coeffs[_TE, 1][:, None] * h
    zB = coeffs[_TM, 0][:, None] * j + coeffs[_TM, 1][:, None] * h
    dzA = coeffs[_TE, 0][:, None] * dj + coeffs[_TE, 1][:, None] * dh
    dzB = coeffs[_TM, 0][:, None] * dj + coeffs[_TM, 1][:, None] * dh
    upA = zA / rho + dzA
    upB = zB / rho + dzB
    cos_p, sin_p = np.cos(polar), np.sin(polar)
    pi, tau = _angular_functions(order, cos_p)
    n = np.arange(1, order + 1)[:, None]
    En = (1j ** n) * (2 * n + 1) / (n * (n + 1))
    cphi, sphi = np.cos(azimuth), np.sin(azimuth)
    nn1 = n * (n + 1) * sin_p * pi

    E_r = cphi * np.sum(En * (-1j) * nn1 * zB / rho, axis=0)
    E_t = cphi * np.sum(En * (pi * zA - 1j * tau * upB), axis=0)
    E_p = sphi * np.sum(En * (-tau * zA + 1j * pi * upB), axis=0)

    pref = k / (1j * omega * mu)
    H_r = pref * sphi * np.sum(En * nn1 * zA / rho, axis=0)
    H_t = pref * sphi * np.sum(En * (tau * upA + 1j * pi * zB), axis=0)
    H_p = pref * cphi * np.sum(En * (pi * upA + 1j * tau * zB), axis=0)

    e_r = np.stack([sin_p * cphi, sin_p * sphi, cos_p], axis=-1)
    e_t = np.stack([cos_p * cphi, cos_p * sphi, -sin_p], axis=-1)
    e_p = np.stack([-sphi, cphi, np.zeros_like(cphi)], axis=-1)
    amp = math.sqrt(mu0)
    E = amp * (E_r[:, None] * e_r + E_t[:, None] * e_t + E_p[:, None] * e_p)
    H = amp * (H_r[:, None] * e_r + H_t[:, None] * e_t + H_p[:, None] * e_p)
    return E, H


def _chunked(func, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    size = settings.FIELD_CHUNK
    E = np.zeros((len(points), 3), dtype=complex)
    H = np.zeros_like(E)
    for start in range(0, len(points), size):
        sl = slice(start, start + size)
        E[sl], H[sl] = func(points[sl])
    return E, H


def fields_in_shell(sol: MultipoleSolution, x, shell: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Evaluate the expansion belonging to one shell at arbitrary points.

    The exterior shell (index L) is the incident plane wave plus the outgoing series.

    Returns:
        Tuple (E, H) of complex arrays (m, 3), or (3,) for a single point
    """
    points, single = as_points(x)
    medium, inc = sol.medium, sol.incidence
    frame = inc.frame()
    k = medium.wavenumbers(inc.omega)[shell]
    mu = medium.shell_mu()[shell]
    exterior = shell == medium.n_shells
    coeffs = sol.coefficients[shell].copy()
    if exterior:
        coeffs[:, 0, :] = 0.0

    def compute(chunk: np.ndarray):
        E_loc, H_loc = _expansion_fields(
            coeffs, k, mu, inc.omega, medium.mu0, chunk @ frame.T, regular=(shell == 0)
        )
        E, H = E_loc @ frame, H_loc @ frame
        if exterior:
            E_i, H_i = plane_wave(inc, chunk, medium.eps0, medium.mu0)
            E, H = E + E_i, H + H_i
        return E, H

    E, H = _chunked(compute, points)
    if single:
        return E[0], H[0]
    return E, H


def eval_fields(sol: MultipoleSolution, x) -> Tuple[np.ndarray, np.ndarray]:
    """
    Total field (E, H) at points; each point uses the expansion of its own shell.

    Returns:
        Tuple (E, H) of complex arrays (m, 3), or (3,) for a single point
    """
    points, single = as_points(x)
    shells = sol.medium.shell_index(np.linalg.norm(points, axis=1))
    E = np.zeros((len(points), 3), dtype=complex)
    H = np.zeros_like(E)
    for s in np.unique(shells):
        mask = shells == s
        E[mask], H[mask] = fields_in_shell(sol, points[mask], int(s))
    if single:
        return E[0], H[0]
    return E, H


def scattered_fields(sol: MultipoleSolution, x) -> Tuple[np.ndarray, np.ndarray]:
    """Total minus incident field."""
    points, single = as_points(x)
    E, H = eval_fields(sol, points)
    E_i, H_i = plane_wave(sol.incidence, points, sol.medium.eps0, sol.medium.mu0)
    E, H = E - E_i, H - H_i
    if single:
        return E[0], H[0]
    return E, H


def far_field_pattern(sol: MultipoleSolution, xhat) -> np.ndarray:
    """
    E_inf(xhat) = lim r e^{-ikr} E^S(r xhat) from a_n and b_n.

    Returns:
        Complex array (m, 3), or (3,) for a single direction
    """
    dirs, single = as_points(xhat)
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    medium, inc = sol.medium, sol.incidence
    frame = inc.frame()
    k = inc.omega * math.sqrt(medium.eps0 * medium.mu0)
    _, polar, azimuth = spherical_coordinates(dirs @ frame.T)
    cos_p, sin_p = np.cos(polar), np.sin(polar)
    pi, tau = _angular_functions(sol.order, cos_p)
    n = np.arange(1, sol.order + 1)[:, None]
    c = (2 * n + 1) / (n * (n + 1))
    S1 = np.sum(c * (sol.a[:, None] * pi + sol.b[:, None] * tau), axis=0)
    S2 = np.sum(c * (sol.a[:, None] * tau + sol.b[:, None] * pi), axis=0)
    cphi, sphi = np.cos(azimuth), np.sin(azimuth)
    e_t = np.stack([cos_p * cphi, cos_p * sphi, -sin_p], axis=-1)
    e_p = np.stack([-sphi, cphi, np.zeros_like(cphi)], axis=-1)
    amp = 1j * math.sqrt(medium.mu0) / k
    F = amp * ((cphi * S2)[:, None] * e_t - (sphi * S1)[:, None] * e_p)
    F = F @ frame
    return F[0] if single else F


def cross_sections(sol: MultipoleSolution) -> Tuple[float, float]:
    """(extinction, scattering) cross sections; equal for lossless media."""
    k = sol.incidence.omega * math.sqrt(sol.medium.eps0 * sol.medium.mu0)
    n = np.arange(1, sol.order + 1)
    c_ext = 2.0 * np.pi / k**2 * np.sum((2 * n + 1) * np.real(sol.a + sol.b))
    c_sca = 2.0 * np.pi / k**2 * np.sum((2 * n + 1) * (np.abs(sol.a) ** 2 + np.abs(sol.b) ** 2))
    return float(c_ext), float(c_sca)


# ============= Norms and Fluxes =============

def shell_coefficient_values(medium: LayeredMedium, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Scalar eps and mu of the owning shell at each point."""
    idx = medium.shell_index(np.linalg.norm(points, axis=1))
    return medium.shell_eps()[idx], medium.shell_mu()[idx]


def quadratic_density(matrices: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Re(M v . conj v) for stacks of matrices (m, 3, 3) and vectors (m, 3)."""
    return np.real(np.einsum("mij,mj,mi->m", matrices, v, np.conj(v)))


def weighted_energy(
    sol: MultipoleSolution,
    R: float,
    eps: CoeffProfile,
    mu: CoeffProfile,
    rule: BallRule,
) -> Tuple[float, float]:
    """
    Weighted energies (eps E, E) and (mu H, H) over B_R.

    Args:
        sol: Multipole solution
        R: Ball radius; must match rule.r_outer
        eps: Weight for E
        mu: Weight for H
        rule: Ball rule split at the medium interfaces

    Returns:
        Tuple of the two non-negative energies
    """
    if abs(rule.r_outer - R) > 1e-12 * max(R, 1.0):
        raise ValueError(f"rule radius {rule.r_outer} does not match R={R}")
    missing = [r for r in sol.medium.radii if r < R - 1e-6 and all(abs(r - b) > 1e-9 for b in rule.breakpoints)]
    if missing:
        logger.warning("ball rule not split at interfaces %s; accuracy degrades", missing[:5])
    E, H = eval_fields(sol, rule.points)
    e_density = quadratic_density(eval_coeff(eps, rule.points), E)
    h_density = quadratic_density(eval_coeff(mu, rule.points), H)
    return float(rule.integrate(e_density)), float(rule.integrate(h_density))


def boundary_flux(
    sol: MultipoleSolution,
    R: float,
    beta: Optional[float],
    rule: SphereRule,
    field: str = "scattered",
) -> float:
    """
    Integral of Q_beta . xhat over the sphere of radius R.

    Args:
        sol: Multipole solution
        R: Sphere radius, at least the outer interface radius
        beta: Multiplier; defaults to R sqrt(eps0 mu0)
        rule: Sphere rule of radius R
        field: "scattered" (radiating part) or "total"

    Returns:
        float: The flux; non-negative for radiating fields when beta = R sqrt(eps0 mu0)
    """
    medium = sol.medium
    if R < medium.outer_radius:
        raise ValueError(f"R={R} is inside the scatterer (outer radius {medium.outer_radius})")
    if beta is None:
        beta = R * math.sqrt(medium.eps0 * medium.mu0)
    if field == "scattered":
        E, H = scattered_fields(sol, rule.points)
    elif field == "total":
        E, H = eval_fields(sol, rule.points)
    else:
        raise ValueError(f"unknown field selector {field!r}")
    m = len(rule.points)
    eps = np.broadcast_to(medium.eps0 * np.eye(3), (m, 3, 3))
    mu = np.broadcast_to(medium.mu0 * np.eye(3), (m, 3, 3))
    Q = q_beta_from_values(rule.points, E, H, eps, mu, np.full(m, beta))
    return float(rule.integrate(np.sum(Q * rule.normals, axis=1)))

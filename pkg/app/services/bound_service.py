"""
Bound service: closed-form right-hand sides of the wavenumber-explicit
bounds, and bound reports checking them against exact layered-sphere
solutions.
"""
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from icecream import ic

from ..core.config import settings
from ..core.errors import BoundInputError, UnweightedHypothesisError
from ..data.models import FieldEvaluation, LayeredMedium, PlaneWaveIncidence
from ..data.schemas import BoundId, BoundReport, CoeffSummary, QuadratureSpec
from ..utils.logger import get_logger
from .coefficient_service import profiles_for_medium, summarize
from .mie_service import eval_fields, plane_wave, shell_coefficient_values, solve_layered
from .quadrature_service import ball_rule

ic.disable()
logger = get_logger(__name__)

GAMMA_UNAVAILABLE_NOTE = "growth constant unavailable"
_GAMMA_BOUNDS = (BoundId.THM21, BoundId.WEIGHTED_HDIV, BoundId.SCAT)


def _check_common(R: float, omega: float, *norms: float) -> None:
    if R <= 0:
        raise BoundInputError("R must be positive")
    if omega <= 0:
        raise BoundInputError("omega must be positive")
    if any(n < 0 for n in norms):
        raise BoundInputError("norms must be non-negative")


def _check_gammas(summary: CoeffSummary) -> None:
    if not (summary.gammas_valid and summary.gamma_eps <= 1.0 and summary.gamma_mu <= 1.0):
        raise BoundInputError(f"gamma values must lie in (0, 1], got {summary.gamma_eps}, {summary.gamma_mu}")


def _growth_factor(norm_J_sq: float, norm_K_sq: float) -> float:
    """8, reduced to 4 when either source vanishes."""
    return 4.0 if norm_J_sq == 0.0 or norm_K_sq == 0.0 else 8.0


# ============= Closed-Form Right-Hand Sides =============

def rhs_thm21(
    summary: CoeffSummary,
    R: float,
    omega: float,
    norm_J_sq: float,
    norm_K_sq: float,
) -> float:
    """
    Bound for W1infty coefficients with growth constants gamma_eps, gamma_mu.

    Args:
        summary: Coefficient constants
        R: Radius of the ball containing the sources and the inhomogeneity
        omega: Frequency
        norm_J_sq: ||J||^2 in L^2(B_R; eps^-1)
        norm_K_sq: ||K||^2 in L^2(B_R; mu^-1)

    Returns:
        float: Right-hand side; each 8 becomes 4 when J = 0 or K = 0
    """
    _check_common(R, omega, norm_J_sq, norm_K_sq)
    _check_gammas(summary)
    c = _growth_factor(norm_J_sq, norm_K_sq)
    em = summary.eps_max * summary.mu_max
    e0m0 = summary.eps0 * summary.mu0
    g_e, g_m = summary.gamma_eps, summary.gamma_mu
    coeff_J = 2.0 * max(c * R**2 * (em / g_m + e0m0 / g_e), g_e / omega**2)
    coeff_K = 2.0 * max(c * R**2 * (em / g_e + e0m0 / g_m), g_m / omega**2)
    return coeff_J * norm_J_sq + coeff_K * norm_K_sq


def rhs_thm22(
    eps0: float,
    mu0: float,
    R: float,
    omega: float,
    norm_J_sq: float,
    norm_K_sq: float,
) -> float:
    """2 max{16 R^2 eps0 mu0, omega^-2} (||J||^2 + ||K||^2), with 16 -> 8 when one source vanishes."""
    _check_common(R, omega, norm_J_sq, norm_K_sq)
    c = 2.0 * _growth_factor(norm_J_sq, norm_K_sq)
    return 2.0 * max(c * R**2 * eps0 * mu0, omega**-2) * (norm_J_sq + norm_K_sq)


def rhs_weighted_hdiv(
    summary: CoeffSummary,
    R: float,
    omega: float,
    norm_K_eps: float,
    norm_J_epsinv: float,
    norm_div_J: float,
    norm_J_mu: float,
    norm_K_muinv: float,
    norm_div_K: float,
) -> float:
    """
    Bound for sources in H(div; B_R); all norms are unsquared.

    4 R^2 [ (||K||_eps + sqrt(eps0 mu0) ||J||_{eps^-1} + ||div J|| / (omega sqrt(eps_min)))^2 / gamma_eps
          + (||J||_mu + sqrt(eps0 mu0) ||K||_{mu^-1} + ||div K|| / (omega sqrt(mu_min)))^2 / gamma_mu ]
    """
    _check_common(R, omega, norm_K_eps, norm_J_epsinv, norm_div_J, norm_J_mu, norm_K_muinv, norm_div_K)
    _check_gammas(summary)
    c = math.sqrt(summary.eps0 * summary.mu0)
    first = norm_K_eps + c * norm_J_epsinv + norm_div_J / (omega * math.sqrt(summary.eps_min))
    second = norm_J_mu + c * norm_K_muinv + norm_div_K / (omega * math.sqrt(summary.mu_min))
    return 4.0 * R**2 * (first**2 / summary.gamma_eps + second**2 / summary.gamma_mu)


def rhs_unweighted(
    summary: CoeffSummary,
    R: float,
    omega: float,
    norm_J_sq: float,
    norm_K_sq: float,
) -> float:
    """
    Bound in unweighted L^2 norms with the constants eps_star, mu_star.

    Raises:
        UnweightedHypothesisError: If eps_star or mu_star is not positive
    """
    _check_common(R, omega, norm_J_sq, norm_K_sq)
    if not (summary.eps_star_valid and summary.mu_star_valid) or summary.eps_star <= 0 or summary.mu_star <= 0:
        raise UnweightedHypothesisError(
            f"unweighted hypothesis violated: eps_star={summary.eps_star}, mu_star={summary.mu_star} must be positive"
        )
    c = _growth_factor(norm_J_sq, norm_K_sq)
    s = summary
    e0m0 = s.eps0 * s.mu0
    ratio_e = s.eps_max / s.eps_min
    ratio_m = s.mu_max / s.mu_min
    coeff_J = 2.0 * max(
        c * R**2 * (s.mu_max**2 / s.mu_star * ratio_e + e0m0 / s.eps_star * ratio_e),
        s.eps_star / (s.eps_min**2 * omega**2),
    )
    coeff_K = 2.0 * max(
        c * R**2 * (s.eps_max**2 / s.eps_star * ratio_m + e0m0 / s.mu_star * ratio_m),
        s.mu_star / (s.mu_min**2 * omega**2),
    )
    return coeff_J * norm_J_sq + coeff_K * norm_K_sq


def rhs_scattering(
    summary: CoeffSummary,
    R: float,
    R_scat: float,
    omega: float,
    E_inc_eps_sq: float,
    H_inc_mu_sq: float,
    H_inc_shell_epsinv_sq: float,
    E_inc_shell_muinv_sq: float,
) -> float:
    """
    Bound on the total field of the scattering problem in terms of the incident field.

    Args:
        summary: Coefficient constants
        R: Outer radius
        R_scat: Radius of the smallest ball containing the inhomogeneity
        omega: Frequency
        E_inc_eps_sq: ||E^I||^2 in L^2(B_R; eps)
        H_inc_mu_sq: ||H^I||^2 in L^2(B_R; mu)
        H_inc_shell_epsinv_sq: ||H^I||^2 in L^2(B_R minus B_R_scat; eps^-1)
        E_inc_shell_muinv_sq: ||E^I||^2 in L^2(B_R minus B_R_scat; mu^-1)

    Raises:
        BoundInputError: If R <= R_scat
    """
    _check_common(R, omega, E_inc_eps_sq, H_inc_mu_sq, H_inc_shell_epsinv_sq, E_inc_shell_muinv_sq)
    _check_gammas(summary)
    if R <= R_scat:
        raise BoundInputError(f"R={R} must exceed R_scat={R_scat}")
    em = summary.eps_max * summary.mu_max
    e0m0 = summary.eps0 * summary.mu0
    g_e, g_m = summary.gamma_eps, summary.gamma_mu
    coeff_H = max(8.0 * R**2 * (em / g_m + e0m0 / g_e), g_e / omega**2)
    coeff_E = max(8.0 * R**2 * (em / g_e + e0m0 / g_m), g_m / omega**2)
    cutoff = 4.0 / (R - R_scat) ** 2
    return (
        2.0 * g_e * E_inc_eps_sq
        + 2.0 * g_m * H_inc_mu_sq
        + cutoff * (coeff_H * H_inc_shell_epsinv_sq + coeff_E * E_inc_shell_muinv_sq)
    )


def impedance_constant(theta, eps_norm, mu_norm, rho: float = 1.0) -> float:
    """
    M_theta = (3 + 1/rho) max over the boundary of max(|eps| / theta, theta |mu|).

    Args:
        theta: Impedance values on the boundary (scalar or array)
        eps_norm: Spectral norms of eps on the boundary
        mu_norm: Spectral norms of mu on the boundary
        rho: Star-shapedness ratio in (0, 1]
    """
    if not (0.0 < rho <= 1.0):
        raise BoundInputError(f"rho must lie in (0, 1], got {rho}")
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0):
        raise BoundInputError("theta must be positive")
    values = np.maximum(np.asarray(eps_norm, dtype=float) / theta, theta * np.asarray(mu_norm, dtype=float))
    return float((3.0 + 1.0 / rho) * np.max(values))


def rhs_impedance(
    summary: CoeffSummary,
    R_omega: float,
    M_theta: float,
    omega: float,
    norm_J_sq: float,
    norm_K_sq: float,
    norm_g_sq: float,
) -> float:
    """
    Bound for the interior impedance problem.

    Args:
        summary: Coefficient constants
        R_omega: sup |x| over the domain
        M_theta: Impedance constant from impedance_constant
        omega: Frequency
        norm_J_sq: ||J||^2 in L^2(Omega; eps^-1)
        norm_K_sq: ||K||^2 in L^2(Omega; mu^-1)
        norm_g_sq: ||theta^{-1/2} g||^2 on the boundary

    Returns:
        float: Right-hand side; each 8 becomes 4 when K = 0
    """
    _check_common(R_omega, omega, norm_J_sq, norm_K_sq, norm_g_sq)
    _check_gammas(summary)
    c = 4.0 if norm_K_sq == 0.0 else 8.0
    em = summary.eps_max * summary.mu_max
    g_e, g_m = summary.gamma_eps, summary.gamma_mu
    m2 = M_theta**2
    coeff_J = 2.0 * max(c * R_omega**2 * (em / g_m + m2 / g_e), g_e / omega**2)
    coeff_K = 2.0 * max(c * R_omega**2 * (em / g_e + m2 / g_m), g_m / omega**2)
    return coeff_J * norm_J_sq + coeff_K * norm_K_sq + 4.0 * R_omega * M_theta * norm_g_sq


def rhs_impedance_weighted(
    summary: CoeffSummary,
    R_omega: float,
    M_theta: float,
    omega: float,
    norm_K_eps: float,
    norm_J_epsinv: float,
    norm_div_J: float,
    norm_J_mu: float,
    norm_K_muinv: float,
    norm_div_K: float,
    norm_g_sq: float,
) -> float:
    """H(div) variant of the impedance bound; the g term carries 2 R M_theta."""
    _check_common(R_omega, omega, norm_K_eps, norm_J_epsinv, norm_div_J, norm_J_mu, norm_K_muinv, norm_div_K, norm_g_sq)
    _check_gammas(summary)
    first = norm_K_eps + M_theta * norm_J_epsinv + norm_div_J / (omega * math.sqrt(summary.eps_min))
    second = norm_J_mu + M_theta * norm_K_muinv + norm_div_K / (omega * math.sqrt(summary.mu_min))
    return (
        4.0 * R_omega**2 * (first**2 / summary.gamma_eps + second**2 / summary.gamma_mu)
        + 2.0 * R_omega * M_theta * norm_g_sq
    )


# ============= Transmission Bound Verification =============

def medium_summary(medium: LayeredMedium) -> CoeffSummary:
    eps, mu = profiles_for_medium(medium)
    return summarize(eps, mu)


def adaptive_counts(quad: QuadratureSpec, order: int, k_max: float, R: float) -> Tuple[int, int, int]:
    """Quadrature counts large enough for multipole order N and the largest wavenumber on B_R."""
    n_r = max(quad.n_r, int(math.ceil(k_max * R)) + 16)
    n_phi = max(quad.n_phi, order + 4)
    n_theta = max(quad.n_theta, 2 * order + 8)
    return n_r, n_phi, n_theta


def evaluate_transmission_fields(
    medium: LayeredMedium,
    inc: PlaneWaveIncidence,
    R: float,
    R_scat: float,
    quad: Optional[QuadratureSpec] = None,
) -> FieldEvaluation:
    """
    Solve once and evaluate total and incident fields on a ball rule over B_R.

    The rule is split at every interface and at R_scat; counts grow with the
    truncation order and the largest wavenumber.

    Raises:
        TruncationError: If the multipole series does not converge
        BoundInputError: If R <= R_scat or R_scat is inside the scatterer
    """
    if R <= R_scat:
        raise BoundInputError(f"R={R} must exceed R_scat={R_scat}")
    if R_scat < medium.outer_radius - 1e-12:
        raise BoundInputError(f"R_scat={R_scat} is inside the scatterer (outer radius {medium.outer_radius})")
    quad = QuadratureSpec() if quad is None else quad
    sol = solve_layered(medium, inc)
    k_max = float(np.max(medium.wavenumbers(inc.omega)))
    n_r, n_phi, n_theta = adaptive_counts(quad, sol.order, k_max, R)
    rule = ball_rule(R, n_r, n_phi, n_theta, breakpoints=tuple(medium.radii) + (R_scat,))
    E, H = eval_fields(sol, rule.points)
    E_i, H_i = plane_wave(inc, rule.points, medium.eps0, medium.mu0)
    eps, mu = shell_coefficient_values(medium, rule.points)
    notes = []
    if (n_r, n_phi, n_theta) != (quad.n_r, quad.n_phi, quad.n_theta):
        notes.append(f"quadrature raised to {n_r}x{n_phi}x{n_theta}")
    ic(inc.omega, sol.order, rule.counts)
    return FieldEvaluation(
        solution=sol,
        rule=rule,
        E_total=E,
        H_total=H,
        E_inc=E_i,
        H_inc=H_i,
        eps=eps,
        mu=mu,
        R=R,
        R_scat=R_scat,
        notes=tuple(notes),
    )


def _sq(values: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(values) ** 2, axis=1)


def cutoff_profile(r: np.ndarray, R: float, R_scat: float) -> Tuple[np.ndarray, np.ndarray]:
    """Piecewise-linear chi = clip((R - r) / (R - R_scat), 0, 1) and the radial slope d chi / dr."""
    chi = np.clip((R - r) / (R - R_scat), 0.0, 1.0)
    slope = np.where((r > R_scat) & (r < R), -1.0 / (R - R_scat), 0.0)
    return chi, slope


def cutoff_sources(ev: FieldEvaluation) -> dict:
    """
    Fields and sources of the cutoff construction.

    E~ = chi E^I + E^S, H~ = chi H^I + H^S solve the transmission problem with
    J = grad chi x H^I, K = grad chi x E^I supported in the shell R_scat < r < R.
    """
    pts = ev.rule.points
    r = np.linalg.norm(pts, axis=1)
    xhat = pts / np.where(r > 0, r, 1.0)[:, None]
    chi, slope = cutoff_profile(r, ev.R, ev.R_scat)
    grad_chi = slope[:, None] * xhat
    omega = ev.solution.incidence.omega
    E_t = ev.E_total - (1.0 - chi)[:, None] * ev.E_inc
    H_t = ev.H_total - (1.0 - chi)[:, None] * ev.H_inc
    J = np.cross(grad_chi, ev.H_inc)
    K = np.cross(grad_chi, ev.E_inc)
    # div J = i omega eps0 grad chi . E^I, div K = -i omega mu0 grad chi . H^I
    medium = ev.solution.medium
    div_J = 1j * omega * medium.eps0 * np.sum(grad_chi * ev.E_inc, axis=1)
    div_K = -1j * omega * medium.mu0 * np.sum(grad_chi * ev.H_inc, axis=1)
    return {"E": E_t, "H": H_t, "J": J, "K": K, "div_J": div_J, "div_K": div_K}


def report_from_evaluation(ev: FieldEvaluation, bound_id: BoundId, summary: CoeffSummary) -> BoundReport:
    """
    Check one bound against a shared field evaluation.

    Args:
        ev: Field evaluation at one frequency
        bound_id: thm21, thm22, weighted_hdiv, scat or small_contrast
        summary: Constants of the medium

    Returns:
        BoundReport: lhs energy, rhs and pass flag

    Raises:
        BoundInputError: For bound ids that cannot be checked against a layered-sphere solution
    """
    rule = ev.rule
    omega = ev.solution.incidence.omega
    eps, mu = ev.eps, ev.mu
    medium = ev.solution.medium
    R, R_scat = ev.R, ev.R_scat
    # without growth constants the energy is reported unweighted against an undefined rhs
    has_gamma = summary.gammas_valid or bound_id not in _GAMMA_BOUNDS
    g_e, g_m = (summary.gamma_eps, summary.gamma_mu) if has_gamma else (1.0, 1.0)
    integrate = lambda values: float(np.real(rule.integrate(values)))  # noqa: E731

    if bound_id in (BoundId.THM21, BoundId.THM22, BoundId.WEIGHTED_HDIV):
        src = cutoff_sources(ev)
        energy_E = integrate(eps * _sq(src["E"]))
        energy_H = integrate(mu * _sq(src["H"]))
        norm_J_sq = integrate(_sq(src["J"]) / eps)
        norm_K_sq = integrate(_sq(src["K"]) / mu)
        if bound_id == BoundId.THM22:
            lhs = energy_E + energy_H
            rhs = rhs_thm22(medium.eps0, medium.mu0, R, omega, norm_J_sq, norm_K_sq)
        elif not has_gamma:
            lhs, rhs = energy_E + energy_H, math.nan
        elif bound_id == BoundId.THM21:
            lhs = g_e * energy_E + g_m * energy_H
            rhs = rhs_thm21(summary, R, omega, norm_J_sq, norm_K_sq)
        else:
            lhs = g_e * energy_E + g_m * energy_H
            rhs = rhs_weighted_hdiv(
                summary,
                R,
                omega,
                norm_K_eps=math.sqrt(integrate(eps * _sq(src["K"]))),
                norm_J_epsinv=math.sqrt(norm_J_sq),
                norm_div_J=math.sqrt(integrate(np.abs(src["div_J"]) ** 2)),
                norm_J_mu=math.sqrt(integrate(mu * _sq(src["J"]))),
                norm_K_muinv=math.sqrt(norm_K_sq),
                norm_div_K=math.sqrt(integrate(np.abs(src["div_K"]) ** 2)),
            )
    elif bound_id == BoundId.SCAT:
        shell = np.linalg.norm(rule.points, axis=1) > R_scat
        lhs = g_e * integrate(eps * _sq(ev.E_total)) + g_m * integrate(mu * _sq(ev.H_total))
        rhs = math.nan if not has_gamma else rhs_scattering(
            summary,
            R,
            R_scat,
            omega,
            E_inc_eps_sq=integrate(eps * _sq(ev.E_inc)),
            H_inc_mu_sq=integrate(mu * _sq(ev.H_inc)),
            H_inc_shell_epsinv_sq=integrate(np.where(shell, _sq(ev.H_inc) / eps, 0.0)),
            E_inc_shell_muinv_sq=integrate(np.where(shell, _sq(ev.E_inc) / mu, 0.0)),
        )
    elif bound_id == BoundId.SMALL_CONTRAST:
        E_s = ev.E_total - ev.E_inc
        H_s = ev.H_total - ev.H_inc
        lhs = integrate(eps * _sq(E_s)) + integrate(mu * _sq(H_s))
        # J = i omega (eps0 - eps) E^I, K = i omega (mu - mu0) H^I
        norm_J_sq = integrate(omega**2 * (medium.eps0 - eps) ** 2 / eps * _sq(ev.E_inc))
        norm_K_sq = integrate(omega**2 * (mu - medium.mu0) ** 2 / mu * _sq(ev.H_inc))
        rhs = rhs_thm22(medium.eps0, medium.mu0, R, omega, norm_J_sq, norm_K_sq)
    else:
        raise BoundInputError(f"bound {bound_id.value} cannot be checked against a layered-sphere solution")

    notes = list(ev.notes)
    if not summary.monotone:
        notes.append("non-monotone medium")
    if not has_gamma:
        notes.append(GAMMA_UNAVAILABLE_NOTE)
    sol = ev.solution
    report = BoundReport.from_values(
        omega,
        bound_id,
        lhs,
        rhs,
        n_trunc=sol.order,
        tail=sol.tail,
        notes="; ".join(notes),
        monotone=summary.monotone,
        summary=summary,
    )
    if not report.passed and summary.monotone:
        logger.warning("bound %s failed at omega=%g: lhs=%.6g rhs=%.6g", bound_id.value, omega, lhs, rhs)
    return report


def verify_transmission_bound(
    medium: LayeredMedium,
    inc: PlaneWaveIncidence,
    R: float,
    bound_id: BoundId = BoundId.THM22,
    R_scat: Optional[float] = None,
    quad: Optional[QuadratureSpec] = None,
) -> BoundReport:
    """
    Solve the layered-sphere problem and check one bound.

    Args:
        medium: Layered medium
        inc: Incident plane wave
        R: Outer radius of the energy ball
        bound_id: Bound to check
        R_scat: Cutoff radius (defaults to the outer interface, or R / 2 for a uniform medium)
        quad: Base quadrature counts

    Returns:
        BoundReport for the requested bound

    Raises:
        TruncationError: If the multipole series does not converge
    """
    if R_scat is None:
        R_scat = medium.outer_radius if medium.n_shells else R / 2.0
    summary = medium_summary(medium)
    if not summary.monotone:
        logger.warning("medium %s is not radially monotone; the bound is not guaranteed", medium.name)
    ev = evaluate_transmission_fields(medium, inc, R, R_scat, quad)
    return report_from_evaluation(ev, bound_id, summary)


def reports_for_bounds(
    medium: LayeredMedium,
    inc: PlaneWaveIncidence,
    R: float,
    R_scat: float,
    bound_ids: Sequence[BoundId],
    summary: Optional[CoeffSummary] = None,
    quad: Optional[QuadratureSpec] = None,
) -> Sequence[BoundReport]:
    """All requested reports at one frequency from one shared evaluation."""
    summary = medium_summary(medium) if summary is None else summary
    ev = evaluate_transmission_fields(medium, inc, R, R_scat, quad)
    return [report_from_evaluation(ev, b, summary) for b in bound_ids]

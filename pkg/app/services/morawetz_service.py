"""
Morawetz service: the multiplier flux Q_beta, both sides of the pointwise
and integrated Morawetz identities, the vacuum identity with its
sign-definite remainders, and the boundary inequality for impedance traces.

Divergences of assembled vector fields are always taken by order-4 finite
differences so that the identities are tested, not re-derived.
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np
from icecream import ic

from ..core.config import settings
from ..data.models import BallRule, FieldSample, SphereRule
from ..utils.helpers import as_points, curl_from_jacobian, fd_divergence
from ..utils.logger import get_logger
from .manufactured_service import divergence_of_product
from .quadrature_service import ball_rule, sphere_rule

ic.disable()
logger = get_logger(__name__)


@dataclass(frozen=True)
class IdentityResidual:
    lhs: np.ndarray
    rhs_nondiv: np.ndarray
    div_q: np.ndarray
    residual: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residual, initial=0.0))


@dataclass(frozen=True)
class SecondIdentityResult:
    residual: np.ndarray
    remainder_E: np.ndarray
    remainder_H: np.ndarray


@dataclass(frozen=True)
class IntegratedIdentity:
    volume_side: float
    surface_side: float
    residual: float


@dataclass(frozen=True)
class ImpedanceCheck:
    functional: float
    rhs: float
    beta_threshold: float
    beta_ok: bool

    @property
    def holds(self) -> bool:
        return self.functional <= self.rhs + settings.PASS_TOLERANCE * (abs(self.rhs) + 1.0)


def _normalized(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(a - b) / (np.abs(a) + np.abs(b) + 1.0)


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


def _apply(matrices: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("mij,mj->mi", matrices, v)


def _form(matrices: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Real quadratic form (M v) . conj(v)."""
    return np.real(_dot(_apply(matrices, v), np.conj(v)))


# ============= Flux and Multiplier Terms =============

def q_beta_from_values(
    x: np.ndarray,
    E: np.ndarray,
    H: np.ndarray,
    eps: np.ndarray,
    mu: np.ndarray,
    beta: np.ndarray,
) -> np.ndarray:
    """
    Q_beta = 2Re{(E.x) eps conj(E) + (H.x) mu conj(H) + beta E x conj(H)} - (eps E.conj E) x - (mu H.conj H) x.

    Returns:
        Real array (m, 3)
    """
    beta = np.broadcast_to(np.asarray(beta, dtype=float), (len(x),))
    epsE_bar = np.conj(_apply(eps, E))
    muH_bar = np.conj(_apply(mu, H))
    inner = (
        _dot(E, x)[:, None] * epsE_bar
        + _dot(H, x)[:, None] * muH_bar
        + beta[:, None] * np.cross(E, np.conj(H))
    )
    return 2.0 * np.real(inner) - (_form(eps, E) + _form(mu, H))[:, None] * x


def q_beta(s: FieldSample) -> np.ndarray:
    return q_beta_from_values(s.x, s.E, s.H, s.eps, s.mu, s.beta)


def maxwell_residuals(s: FieldSample) -> Tuple[np.ndarray, np.ndarray]:
    """(curl E - i omega mu H, curl H + i omega eps E)."""
    rE = s.curlE - 1j * s.omega * _apply(s.mu, s.H)
    rH = s.curlH + 1j * s.omega * _apply(s.eps, s.E)
    return rE, rH


def rellich_part(s: FieldSample) -> np.ndarray:
    """Left side contribution of the test fields eps conj(E) x x and mu conj(H) x x."""
    rE, rH = maxwell_residuals(s)
    t_E = np.cross(np.conj(_apply(s.eps, s.E)), s.x)
    t_H = np.cross(np.conj(_apply(s.mu, s.H)), s.x)
    return 2.0 * np.real(_dot(rE, t_E) + _dot(rH, t_H))


def beta_part(s: FieldSample) -> np.ndarray:
    """Left side contribution of the test fields beta conj(H) and -beta conj(E)."""
    rE, rH = maxwell_residuals(s)
    return 2.0 * np.real(s.beta * (_dot(rE, np.conj(s.H)) - _dot(rH, np.conj(s.E))))


def lhs(s: FieldSample) -> np.ndarray:
    return rellich_part(s) + beta_part(s)


def p_beta(s: FieldSample) -> np.ndarray:
    """
    Non-divergence terms on the right of the first Morawetz identity.

    -2Re{(E.x) conj(div eps E) + (H.x) conj(div mu H) + grad beta . E x conj H}
    + ((eps + (x.grad) eps) E).conj E + ((mu + (x.grad) mu) H).conj H
    """
    cross = np.cross(s.E, np.conj(s.H))
    div_terms = (
        _dot(s.E, s.x) * np.conj(s.div_eps_E)
        + _dot(s.H, s.x) * np.conj(s.div_mu_H)
        + _dot(s.grad_beta, cross)
    )
    return -2.0 * np.real(div_terms) + _form(s.eps + s.deps_dir, s.E) + _form(s.mu + s.dmu_dir, s.H)


# ============= Pointwise Identities =============

def q_field(mf) -> Callable[[np.ndarray], np.ndarray]:
    """Q_beta of a manufactured field as a function of position."""
    def func(points: np.ndarray) -> np.ndarray:
        return q_beta(mf.sample(points))
    return func


def pointwise_identity_residual(mf, x, h: Optional[float] = None) -> IdentityResidual:
    """
    Both sides of the first Morawetz identity at points x.

    Args:
        mf: ManufacturedField providing exact curls and coefficient derivatives
        x: Points (m, 3) or a single point
        h: Finite-difference step for div Q_beta (default settings.FD_STEP)

    Returns:
        IdentityResidual: lhs, non-divergence terms, div Q_beta and the normalized residual
    """
    h = settings.FD_STEP if h is None else h
    points, _ = as_points(x)
    s = mf.sample(points)
    left = lhs(s)
    rhs_nondiv = p_beta(s)
    div_q = fd_divergence(q_field(mf), points, h)
    ic(mf.name, h)
    return IdentityResidual(left, rhs_nondiv, div_q, _normalized(left, div_q + rhs_nondiv))


def rellich_identity_residual(v_block, alpha_block, x, h: Optional[float] = None) -> np.ndarray:
    """
    Single-field building block of the identity.

    2Re{curl v . (alpha conj(v) x x)} against
    div[2Re{(v.x) alpha conj v} - (alpha v.conj v) x] - 2Re{(v.x) conj(div alpha v)} + ((alpha + (x.grad) alpha) v).conj v

    Args:
        v_block: Vector block with evaluate(x) -> (value, jacobian)
        alpha_block: Coefficient block with evaluate(x) -> (value, gradient)
        x: Points (m, 3)
        h: Finite-difference step

    Returns:
        Normalized residual per point
    """
    h = settings.FD_STEP if h is None else h
    points, _ = as_points(x)

    def flux(p: np.ndarray) -> np.ndarray:
        v, _ = v_block.evaluate(p)
        alpha, _ = alpha_block.evaluate(p)
        return 2.0 * np.real(_dot(v, p)[:, None] * np.conj(_apply(alpha, v))) - _form(alpha, v)[:, None] * p

    v, jac = v_block.evaluate(points)
    alpha, grad = alpha_block.evaluate(points)
    left = 2.0 * np.real(_dot(curl_from_jacobian(jac), np.cross(np.conj(_apply(alpha, v)), points)))
    div_alpha_v = divergence_of_product(grad, alpha, v, jac)
    radial = np.einsum("mijk,mk->mij", grad, points)
    right = (
        fd_divergence(flux, points, h)
        - 2.0 * np.real(_dot(v, points) * np.conj(div_alpha_v))
        + _form(alpha + radial, v)
    )
    return _normalized(left, right)


def vacuum_remainders(E: np.ndarray, H: np.ndarray, x: np.ndarray, eps0: float, mu0: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    The two squares of the vacuum identity.

    Returns:
        (|mu0 H x xhat - sqrt(eps0 mu0) E|^2 / (2 mu0), |eps0 xhat x E - sqrt(eps0 mu0) H|^2 / (2 eps0))
    """
    xhat = x / np.linalg.norm(x, axis=1, keepdims=True)
    c = math.sqrt(eps0 * mu0)
    a = mu0 * np.cross(H, xhat) - c * E
    b = eps0 * np.cross(xhat, E) - c * H
    return np.sum(np.abs(a) ** 2, axis=1) / (2.0 * mu0), np.sum(np.abs(b) ** 2, axis=1) / (2.0 * eps0)


def sign_decomposition_residual(E, H, x, eps0: float = 1.0, mu0: float = 1.0) -> np.ndarray:
    """
    Algebraic split of -2 sqrt(eps0 mu0) Re{xhat . E x conj H} into two squares minus energy terms.

    Returns:
        Normalized residual per point (exact identity, zero up to rounding)
    """
    E = np.atleast_2d(np.asarray(E, dtype=complex))
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    points, _ = as_points(x)
    xhat = points / np.linalg.norm(points, axis=1, keepdims=True)
    left = -2.0 * math.sqrt(eps0 * mu0) * np.real(_dot(xhat, np.cross(E, np.conj(H))))
    rem_E, rem_H = vacuum_remainders(E, H, points, eps0, mu0)
    energy = (
        0.5 * eps0 * (np.sum(np.abs(E) ** 2, axis=1) + np.sum(np.abs(np.cross(E, xhat)) ** 2, axis=1))
        + 0.5 * mu0 * (np.sum(np.abs(H) ** 2, axis=1) + np.sum(np.abs(np.cross(H, xhat)) ** 2, axis=1))
    )
    return _normalized(left, rem_E + rem_H - energy)


def second_identity_residual(mf, x, h: Optional[float] = None) -> SecondIdentityResult:
    """
    Vacuum form of the identity with beta = r sqrt(eps0 mu0).

    Args:
        mf: ManufacturedField with constant scalar eps, mu and beta = r sqrt(eps0 mu0)
        x: Points away from the origin
        h: Finite-difference step

    Returns:
        SecondIdentityResult: residual and both remainder squares (non-negative)

    Raises:
        ValueError: If the coefficients are not constant
    """
    eps0 = getattr(mf.eps, "value", None)
    mu0 = getattr(mf.mu, "value", None)
    if eps0 is None or mu0 is None or not hasattr(mf.beta, "c"):
        raise ValueError("second identity needs constant eps, mu and a radial beta")
    h = settings.FD_STEP if h is None else h
    points, _ = as_points(x)
    s = mf.sample(points)
    E, H = s.E, s.H
    xhat = points / np.linalg.norm(points, axis=1, keepdims=True)
    rem_E, rem_H = vacuum_remainders(E, H, points, eps0, mu0)
    right = (
        fd_divergence(q_field(mf), points, h)
        - 2.0 * np.real(_dot(E, points) * np.conj(s.div_eps_E) + _dot(H, points) * np.conj(s.div_mu_H))
        + 0.5 * eps0 * (np.sum(np.abs(E) ** 2, axis=1) - np.sum(np.abs(np.cross(E, xhat)) ** 2, axis=1))
        + 0.5 * mu0 * (np.sum(np.abs(H) ** 2, axis=1) - np.sum(np.abs(np.cross(H, xhat)) ** 2, axis=1))
        + rem_E
        + rem_H
    )
    return SecondIdentityResult(_normalized(lhs(s), right), rem_E, rem_H)


def split_flux_density(E, H, x, eps0: float = 1.0, mu0: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Q_{r sqrt(eps0 mu0)} . xhat evaluated directly and in normal / tangential form.

    The second form is r eps0 |E_N|^2 + r mu0 |H_N|^2 - r |sqrt(eps0) E_T - sqrt(mu0) H_T x xhat|^2.
    """
    E = np.atleast_2d(np.asarray(E, dtype=complex))
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    points, _ = as_points(x)
    m = len(points)
    r = np.linalg.norm(points, axis=1)
    xhat = points / r[:, None]
    eps = np.broadcast_to(eps0 * np.eye(3), (m, 3, 3))
    mu = np.broadcast_to(mu0 * np.eye(3), (m, 3, 3))
    direct = _dot(q_beta_from_values(points, E, H, eps, mu, r * math.sqrt(eps0 * mu0)), xhat)
    E_n, H_n = _dot(E, xhat), _dot(H, xhat)
    E_t = E - E_n[:, None] * xhat
    H_t = H - H_n[:, None] * xhat
    mismatch = math.sqrt(eps0) * E_t - math.sqrt(mu0) * np.cross(H_t, xhat)
    split = r * (eps0 * np.abs(E_n) ** 2 + mu0 * np.abs(H_n) ** 2 - np.sum(np.abs(mismatch) ** 2, axis=1))
    return direct, split


def normal_tangent_check(v, alpha, n, x) -> np.ndarray:
    """
    Residual of the normal / tangential split of 2Re{(v.x)(alpha conj v.n)} - (alpha v.conj v)(x.n).

    Args:
        v: Complex vectors (m, 3)
        alpha: SPD matrices (m, 3, 3)
        n: Unit normals (m, 3)
        x: Points (m, 3)

    Returns:
        Absolute residual per input
    """
    v = np.atleast_2d(np.asarray(v, dtype=complex))
    alpha = np.asarray(alpha, dtype=float).reshape(-1, 3, 3)
    n = np.atleast_2d(np.asarray(n, dtype=float))
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x_n = _dot(x, n)
    alpha_v_bar_n = _dot(np.conj(_apply(alpha, v)), n)
    left = 2.0 * np.real(_dot(v, x) * alpha_v_bar_n) - _form(alpha, v) * x_n
    v_N = _dot(v, n)[:, None] * n
    v_T = v - v_N
    x_T = x - x_n[:, None] * n
    right = (_form(alpha, v_N) - _form(alpha, v_T)) * x_n + 2.0 * np.real(_dot(v_T, x_T) * alpha_v_bar_n)
    return np.abs(left - right)


# ============= Integrated Identity =============

def surface_integrand(
    x: np.ndarray,
    n: np.ndarray,
    E: np.ndarray,
    H: np.ndarray,
    eps: np.ndarray,
    mu: np.ndarray,
    beta: np.ndarray,
) -> np.ndarray:
    """Boundary integrand of the integrated identity in normal / tangential traces."""
    x_n = _dot(x, n)
    x_T = x - x_n[:, None] * n
    E_N = _dot(E, n)[:, None] * n
    H_N = _dot(H, n)[:, None] * n
    E_T, H_T = E - E_N, H - H_N
    normal = (_form(eps, E_N) - _form(eps, E_T) + _form(mu, H_N) - _form(mu, H_T)) * x_n
    tangential = (
        _dot(E_T, x_T) * _dot(np.conj(_apply(eps, E)), n)
        + _dot(H_T, x_T) * _dot(np.conj(_apply(mu, H)), n)
        + beta * _dot(E_T, np.cross(np.conj(H_T), n))
    )
    return normal + 2.0 * np.real(tangential)


def integrated_identity_residual(
    mf,
    R: float,
    rule: Optional[BallRule] = None,
    srule: Optional[SphereRule] = None,
) -> IntegratedIdentity:
    """
    Volume and surface sides of the integrated identity on B_R.

    Volume side: integral of lhs - P_beta. Surface side: the normal / tangential trace integrand.

    Args:
        mf: Smooth manufactured field on the closed ball
        R: Ball radius
        rule: Ball rule (default quadrature when omitted)
        srule: Sphere rule of radius R

    Returns:
        IntegratedIdentity with the normalized residual |vol - surf| / (|vol| + |surf| + 1)
    """

    rule = ball_rule(R) if rule is None else rule
    srule = sphere_rule(R) if srule is None else srule
    s = mf.sample(rule.points)
    volume = float(rule.integrate(lhs(s) - p_beta(s)))
    b = mf.sample(srule.points)
    surface = float(rule_integrate(srule, surface_integrand(b.x, srule.normals, b.E, b.H, b.eps, b.mu, b.beta)))
    residual = abs(volume - surface) / (abs(volume) + abs(surface) + 1.0)
    logger.debug("integrated identity %s: volume=%.12g surface=%.12g", mf.name, volume, surface)
    return IntegratedIdentity(volume, surface, residual)


def rule_integrate(rule: SphereRule, values: np.ndarray) -> float:
    return float(np.real(rule.integrate(values)))


# ============= Impedance Boundary =============

def impedance_traces(E_T, theta, g, n, E_N=0.0, H_N=0.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Boundary fields satisfying H x n - theta E_T = g.

    Args:
        E_T: Tangential electric traces (m, 3)
        theta: Impedance, scalar or (m,)
        g: Tangential data (m, 3)
        n: Unit normals (m, 3)
        E_N: Normal component of E, scalar or (m,)
        H_N: Normal component of H, scalar or (m,)

    Returns:
        Tuple (E, H) of complex arrays (m, 3)
    """
    n = np.atleast_2d(np.asarray(n, dtype=float))
    E_T = np.atleast_2d(np.asarray(E_T, dtype=complex))
    E_T = E_T - _dot(E_T, n)[:, None] * n
    g = np.atleast_2d(np.asarray(g, dtype=complex))
    g = g - _dot(g, n)[:, None] * n
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (len(n),))
    H_T = np.cross(n, theta[:, None] * E_T + g)
    E = E_T + np.broadcast_to(np.asarray(E_N, dtype=complex), (len(n),))[:, None] * n
    H = H_T + np.broadcast_to(np.asarray(H_N, dtype=complex), (len(n),))[:, None] * n
    return E, H


def impedance_beta_threshold(R: float, rho: float, eps: np.ndarray, mu: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Pointwise R (3 + 1/rho) max(|eps| / theta, theta |mu|)."""
    eps_norm = np.linalg.norm(eps, ord=2, axis=(1, 2))
    mu_norm = np.linalg.norm(mu, ord=2, axis=(1, 2))
    return R * (3.0 + 1.0 / rho) * np.maximum(eps_norm / theta, theta * mu_norm)


def impedance_boundary_functional(
    rule: SphereRule,
    E: np.ndarray,
    H: np.ndarray,
    eps: np.ndarray,
    mu: np.ndarray,
    beta: Union[float, np.ndarray],
    theta: Union[float, np.ndarray],
    g: np.ndarray,
    rho: float = 1.0,
    use_min_norms: bool = False,
) -> ImpedanceCheck:
    """
    Boundary functional I and the right-hand side of the impedance inequality on a ball.

    Args:
        rule: Sphere rule of the ball boundary (x.n = R, x_T = 0)
        E: Electric traces (m, 3)
        H: Magnetic traces (m, 3), with H x n - theta E_T = g
        eps: Permittivity at the nodes (m, 3, 3)
        mu: Permeability at the nodes (m, 3, 3)
        beta: Multiplier on the boundary
        theta: Positive impedance
        g: Impedance data (m, 3)
        rho: Star-shapedness ratio (1 for a ball)
        use_min_norms: Replace |eps|, |mu| by their minimum eigenvalues in the rhs

    Returns:
        ImpedanceCheck: I, rhs, the largest pointwise beta threshold and whether beta meets it
    """
    m = len(rule.points)
    n = rule.normals
    R = rule.radius
    beta = np.broadcast_to(np.asarray(beta, dtype=float), (m,))
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (m,))
    E_N = _dot(E, n)[:, None] * n
    H_N = _dot(H, n)[:, None] * n
    E_T, H_T = E - E_N, H - H_N
    x_n = _dot(rule.points, n)
    density = x_n * (_form(eps, E_T) - _form(eps, E_N) + _form(mu, H_T) - _form(mu, H_N))
    density -= 2.0 * np.real(beta * _dot(np.cross(E, np.conj(H)), n))
    functional = rule_integrate(rule, density)

    if use_min_norms:
        eps_norm = np.linalg.eigvalsh(eps)[:, 0]
        mu_norm = np.linalg.eigvalsh(mu)[:, 0]
    else:
        eps_norm = np.linalg.norm(eps, ord=2, axis=(1, 2))
        mu_norm = np.linalg.norm(mu, ord=2, axis=(1, 2))
    g_sq = np.sum(np.abs(g) ** 2, axis=1)
    rhs_density = (
        beta / theta * g_sq
        - R * eps_norm * np.sum(np.abs(E_T) ** 2, axis=1)
        - R * mu_norm * np.sum(np.abs(H_T) ** 2, axis=1)
    )
    rhs = rule_integrate(rule, rhs_density)
    threshold = impedance_beta_threshold(R, rho, eps, mu, theta)
    beta_ok = bool(np.all(beta >= threshold * (1.0 - 1e-12)))
    if not beta_ok:
        logger.warning("beta below the impedance threshold %.6g; inequality not guaranteed", float(np.max(threshold)))
    return ImpedanceCheck(functional, rhs, float(np.max(threshold)), beta_ok)

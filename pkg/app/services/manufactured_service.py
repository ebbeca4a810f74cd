"""
Manufactured service: closed-form smooth fields, coefficients and multipliers
with exact derivatives, assembled into FieldSample objects for the identity
evaluators.

Vector blocks return values (m, 3) and Jacobians (m, 3, 3) with
[i, j] = d f_i / d x_j. Coefficient blocks return values (m, 3, 3) and
gradients (m, 3, 3, 3) with [i, j, k] = d_k c_ij.
"""
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from ..core.config import settings
from ..data.models import FieldSample
from ..utils.helpers import as_points, curl_from_jacobian

_IDENTITY = np.eye(3)


# ============= Vector Fields =============

@dataclass(frozen=True)
class ConstantVector:
    value: Tuple[complex, complex, complex]

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        v = np.broadcast_to(np.asarray(self.value, dtype=complex), (len(x), 3)).copy()
        return v, np.zeros((len(x), 3, 3), dtype=complex)


@dataclass(frozen=True)
class GaussianWave:
    """p exp(i k.x) exp(-|x - c|^2 / (2 s^2))."""
    amplitude: Tuple[complex, complex, complex]
    wavevector: Tuple[float, float, float]
    center: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    width: float = 0.5

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        p = np.asarray(self.amplitude, dtype=complex)
        kv = np.asarray(self.wavevector, dtype=float)
        d = x - np.asarray(self.center, dtype=float)
        s2 = self.width**2
        g = np.exp(1j * (x @ kv) - np.sum(d * d, axis=1) / (2.0 * s2))
        grad_log = 1j * kv[None, :] - d / s2
        value = g[:, None] * p[None, :]
        jac = g[:, None, None] * p[None, :, None] * grad_log[:, None, :]
        return value, jac


@dataclass(frozen=True)
class CurlGaussian:
    """curl(p phi) = grad phi x p with phi = exp(-|x - c|^2 / (2 s^2)); divergence free."""
    amplitude: Tuple[complex, complex, complex]
    center: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    width: float = 0.5

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        p = np.asarray(self.amplitude, dtype=complex)
        d = x - np.asarray(self.center, dtype=float)
        s2 = self.width**2
        phi = np.exp(-np.sum(d * d, axis=1) / (2.0 * s2))
        w = np.cross(d, p[None, :])
        scale = -phi / s2
        value = scale[:, None] * w
        dscale = (phi / s2**2)[:, None] * d
        dw = np.stack([np.cross(np.eye(3)[l], p) for l in range(3)], axis=-1)
        jac = w[:, :, None] * dscale[:, None, :] + scale[:, None, None] * dw[None, :, :]
        return value, jac


@dataclass(frozen=True)
class VectorSum:
    terms: Tuple = ()

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        value = np.zeros((len(x), 3), dtype=complex)
        jac = np.zeros((len(x), 3, 3), dtype=complex)
        for term in self.terms:
            v, j = term.evaluate(x)
            value += v
            jac += j
        return value, jac


# ============= Coefficient Fields =============

@dataclass(frozen=True)
class ConstantCoefficient:
    value: float = 1.0

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        m = len(x)
        return np.broadcast_to(self.value * _IDENTITY, (m, 3, 3)).copy(), np.zeros((m, 3, 3, 3))


@dataclass(frozen=True)
class QuadraticIsotropic:
    """(a + b r^2) I."""
    a: float = 1.0
    b: float = 0.25

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        r2 = np.sum(x * x, axis=1)
        value = (self.a + self.b * r2)[:, None, None] * _IDENTITY
        grad = 2.0 * self.b * _IDENTITY[None, :, :, None] * x[:, None, None, :]
        return value, grad


@dataclass(frozen=True)
class RankOneRadial:
    """a I + c x x^T / (1 + r^2): anisotropic, radially structured."""
    a: float = 1.0
    c: float = 0.5

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        q = 1.0 + np.sum(x * x, axis=1)
        xx = np.einsum("mi,mj->mij", x, x)
        value = self.a * _IDENTITY + self.c * xx / q[:, None, None]
        term1 = np.einsum("ik,mj->mijk", _IDENTITY, x) + np.einsum("mi,jk->mijk", x, _IDENTITY)
        term2 = 2.0 * np.einsum("mij,mk->mijk", xx, x) / q[:, None, None, None]
        grad = self.c * (term1 - term2) / q[:, None, None, None]
        return value, grad


# ============= Multipliers =============

@dataclass(frozen=True)
class ConstantBeta:
    value: float = 1.0

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return np.full(len(x), self.value), np.zeros((len(x), 3))


@dataclass(frozen=True)
class QuadraticBeta:
    """b0 + b2 r^2."""
    b0: float = 1.0
    b2: float = 0.5

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self.b0 + self.b2 * np.sum(x * x, axis=1), 2.0 * self.b2 * x


@dataclass(frozen=True)
class RadialBeta:
    """c r; the gradient is reported as zero at the origin."""
    c: float = 1.0

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        r = np.linalg.norm(x, axis=1)
        safe = np.where(r > 0.0, r, 1.0)
        grad = np.where((r > 0.0)[:, None], self.c * x / safe[:, None], 0.0)
        return self.c * r, grad


# ============= Manufactured Field =============

@dataclass(frozen=True)
class ManufacturedField:
    """
    Smooth (E, H, eps, mu, beta) with exact derivatives.

    The fields need not solve Maxwell's equations: the identities hold for
    arbitrary smooth data, the Maxwell residuals enter their left-hand side.
    """
    name: str
    E: object
    H: object
    eps: object = field(default_factory=ConstantCoefficient)
    mu: object = field(default_factory=ConstantCoefficient)
    beta: object = field(default_factory=ConstantBeta)
    omega: float = 1.0

    def fields(self, x) -> Tuple[np.ndarray, np.ndarray]:
        points, _ = as_points(x)
        return self.E.evaluate(points)[0], self.H.evaluate(points)[0]

    def sample(self, x) -> FieldSample:
        """Assemble a FieldSample with exact curls, coefficient derivatives and divergences."""
        points, _ = as_points(x)
        E, jacE = self.E.evaluate(points)
        H, jacH = self.H.evaluate(points)
        eps, grad_eps = self.eps.evaluate(points)
        mu, grad_mu = self.mu.evaluate(points)
        beta, grad_beta = self.beta.evaluate(points)
        return FieldSample(
            x=points,
            E=E,
            H=H,
            curlE=curl_from_jacobian(jacE),
            curlH=curl_from_jacobian(jacH),
            jacE=jacE,
            jacH=jacH,
            eps=eps,
            mu=mu,
            deps_dir=np.einsum("mijk,mk->mij", grad_eps, points),
            dmu_dir=np.einsum("mijk,mk->mij", grad_mu, points),
            div_eps_E=divergence_of_product(grad_eps, eps, E, jacE),
            div_mu_H=divergence_of_product(grad_mu, mu, H, jacH),
            beta=beta,
            grad_beta=grad_beta,
            omega=self.omega,
            grad_eps=grad_eps,
            grad_mu=grad_mu,
        )


def divergence_of_product(grad_c: np.ndarray, c: np.ndarray, v: np.ndarray, jac: np.ndarray) -> np.ndarray:
    """div(c v) = (d_i c_ij) v_j + c_ij d_i v_j."""
    return np.einsum("miji,mj->m", grad_c, v) + np.einsum("mij,mji->m", c, jac)


def divergence_consistency(sample: FieldSample) -> float:
    """Max deviation of the stored div(eps E) from the gradient data; 0 when no gradient is stored."""
    if sample.grad_eps is None:
        return 0.0
    recomputed = divergence_of_product(sample.grad_eps, sample.eps, sample.E, sample.jacE)
    return float(np.max(np.abs(recomputed - sample.div_eps_E), initial=0.0))


# ============= Trio Factories =============

def constant_trio(beta: float = 0.5, omega: float = 1.0) -> ManufacturedField:
    """E = e1, H = e2, eps = mu = I, constant beta."""
    return ManufacturedField(
        name="constant",
        E=ConstantVector((1.0, 0.0, 0.0)),
        H=ConstantVector((0.0, 1.0, 0.0)),
        beta=ConstantBeta(beta),
        omega=omega,
    )


def zero_trio(omega: float = 1.0) -> ManufacturedField:
    return ManufacturedField(
        name="zero",
        E=ConstantVector((0.0, 0.0, 0.0)),
        H=ConstantVector((0.0, 0.0, 0.0)),
        omega=omega,
    )


def gaussian_wave_trio(omega: float = 1.5) -> ManufacturedField:
    """Modulated Gaussians, quadratic isotropic eps and mu, quadratic beta."""
    return ManufacturedField(
        name="gaussian_wave",
        E=GaussianWave((1.0, 0.5j, -0.25), (1.0, 0.0, 0.5), (0.1, -0.2, 0.0), 0.6),
        H=GaussianWave((0.3j, -1.0, 0.2), (0.0, -0.7, 1.2), (-0.1, 0.1, 0.2), 0.5),
        eps=QuadraticIsotropic(1.0, 0.25),
        mu=QuadraticIsotropic(0.8, 0.1),
        beta=QuadraticBeta(1.0, 0.5),
        omega=omega,
    )


def curl_gaussian_trio(omega: float = 2.0) -> ManufacturedField:
    """Divergence-free curl-of-bump fields with anisotropic eps."""
    return ManufacturedField(
        name="curl_gaussian",
        E=VectorSum((
            CurlGaussian((0.0, 0.0, 1.0), (0.2, 0.0, 0.0), 0.5),
            CurlGaussian((1.0j, 0.5, 0.0), (-0.1, 0.2, 0.1), 0.45),
        )),
        H=CurlGaussian((0.5, -1.0, 0.25j), (0.0, -0.15, 0.1), 0.55),
        eps=RankOneRadial(1.0, 0.5),
        mu=ConstantCoefficient(1.2),
        beta=ConstantBeta(0.75),
        omega=omega,
    )


def mixed_trio(omega: float = 0.8) -> ManufacturedField:
    """Sum of both block types, anisotropic mu and a radial multiplier."""
    return ManufacturedField(
        name="mixed",
        E=VectorSum((
            GaussianWave((0.4, -0.2j, 1.0), (0.0, 1.5, 0.0), (0.0, 0.0, 0.1), 0.7),
            CurlGaussian((0.2, 0.3, -0.4j), (0.1, 0.1, -0.1), 0.5),
        )),
        H=VectorSum((
            GaussianWave((-0.6j, 0.2, 0.1), (0.8, 0.0, -0.6), (0.0, 0.2, 0.0), 0.6),
            ConstantVector((0.1, 0.0, -0.05j)),
        )),
        eps=QuadraticIsotropic(1.5, -0.2),
        mu=RankOneRadial(0.9, 0.3),
        beta=RadialBeta(1.3),
        omega=omega,
    )


def vacuum_trio(eps0: float = 1.0, mu0: float = 1.0, omega: float = 1.0) -> ManufacturedField:
    """Constant background with beta = r sqrt(eps0 mu0); smooth away from the origin."""
    return ManufacturedField(
        name="vacuum",
        E=GaussianWave((1.0, 0.2j, -0.5), (0.3, 0.9, 0.0), (0.5, 0.5, 0.5), 0.7),
        H=CurlGaussian((0.4j, 1.0, -0.3), (0.6, 0.4, 0.5), 0.6),
        eps=ConstantCoefficient(eps0),
        mu=ConstantCoefficient(mu0),
        beta=RadialBeta(math.sqrt(eps0 * mu0)),
        omega=omega,
    )


def smooth_trios() -> Sequence[ManufacturedField]:
    """The three smooth trios used by the integrated-identity checks."""
    return (gaussian_wave_trio(), curl_gaussian_trio(), mixed_trio())


def random_points(count: int, radius: float = 0.9, seed: Optional[int] = None) -> np.ndarray:
    """Uniform random points in the ball of the given radius."""
    rng = np.random.default_rng(settings.RANDOM_SEED if seed is None else seed)
    dirs = rng.normal(size=(count, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    r = radius * rng.uniform(size=count) ** (1.0 / 3.0)
    return dirs * r[:, None]

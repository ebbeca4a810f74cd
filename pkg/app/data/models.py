"""
Numeric domain objects. Immutable after construction; arrays are numpy.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from ..core.errors import MollifierError, ProfileError
from .schemas import ChiKind, ProfileKind, Smoothness

MatrixFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CoeffProfile:
    """
    Radially structured SPD coefficient field (eps or mu).

    value_fn maps (m, 3) points inside the support to (m, 3, 3) matrices;
    radial_derivative_fn maps them to (x . grad) of the matrix. Piecewise
    profiles also carry their shell radii and scalar shell values.
    """
    kind: ProfileKind
    background: float
    support_radius: float
    smoothness: Smoothness
    value_fn: MatrixFn
    radial_derivative_fn: Optional[MatrixFn] = None
    shell_radii: Tuple[float, ...] = ()
    shell_values: Tuple[float, ...] = ()
    name: str = ""

    @property
    def is_piecewise(self) -> bool:
        return len(self.shell_radii) > 0


@dataclass(frozen=True)
class LayeredMedium:
    """Concentric shells r_1 < ... < r_L with scalar (eps_j, mu_j); the exterior is (eps0, mu0)."""
    radii: Tuple[float, ...]
    eps: Tuple[float, ...]
    mu: Tuple[float, ...]
    eps0: float = 1.0
    mu0: float = 1.0
    name: str = "layers"

    def __post_init__(self):
        if not (len(self.radii) == len(self.eps) == len(self.mu)):
            raise ProfileError("radii, eps and mu must have the same length")
        if any(r <= 0 for r in self.radii) or any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ProfileError("interface radii must be positive and strictly increasing")
        if min(self.eps + self.mu + (self.eps0, self.mu0)) <= 0:
            raise ProfileError("material parameters must be positive")

    @property
    def n_shells(self) -> int:
        return len(self.radii)

    @property
    def outer_radius(self) -> float:
        return self.radii[-1] if self.radii else 0.0

    def shell_eps(self) -> np.ndarray:
        """Shell permittivities with the exterior appended."""
        return np.asarray(self.eps + (self.eps0,), dtype=float)

    def shell_mu(self) -> np.ndarray:
        return np.asarray(self.mu + (self.mu0,), dtype=float)

    def wavenumbers(self, omega: float) -> np.ndarray:
        return omega * np.sqrt(self.shell_eps() * self.shell_mu())

    def shell_index(self, r: np.ndarray) -> np.ndarray:
        """Shell owning each radius; interface points belong to the inner shell."""
        return np.searchsorted(np.asarray(self.radii, dtype=float), r, side="left")


@dataclass(frozen=True)
class PlaneWaveIncidence:
    """Plane wave with direction d, polarization A and frequency omega."""
    direction: np.ndarray
    polarization: np.ndarray
    omega: float

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        a = np.asarray(self.polarization, dtype=float)
        if abs(np.linalg.norm(d) - 1.0) > 1e-10 or abs(np.linalg.norm(a) - 1.0) > 1e-10:
            raise ValueError("direction and polarization must be unit vectors")
        if abs(d @ a) > 1e-10:
            raise ValueError("polarization must be orthogonal to direction")
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "polarization", a)

    def frame(self) -> np.ndarray:
        """Rows (A, d x A, d): maps global coordinates to the incidence frame."""
        a, d = self.polarization, self.direction
        return np.vstack([a, np.cross(d, a), d])

    def with_omega(self, omega: float) -> "PlaneWaveIncidence":
        return PlaneWaveIncidence(self.direction, self.polarization, omega)


@dataclass(frozen=True)
class SphericalBesselTable:
    """j_n, y_n, h_n = j_n + i y_n and derivatives for n = 0..order_max; arrays (N+1, m)."""
    order_max: int
    z: np.ndarray
    j: np.ndarray
    y: np.ndarray
    dj: np.ndarray
    dy: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return self.j + 1j * self.y

    @property
    def dh(self) -> np.ndarray:
        return self.dj + 1j * self.dy

    def wronskian_residual(self) -> np.ndarray:
        """Relative deviation of j y' - j' y from 1/z**2 (inf where y overflowed)."""
        w = self.j * self.dy - self.dj * self.y
        with np.errstate(invalid="ignore", over="ignore"):
            return np.abs(w * self.z**2 - 1.0)


@dataclass(frozen=True)
class RiccatiTable:
    """psi_n = z j_n, xi_n = z h_n and their derivatives."""
    psi: np.ndarray
    dpsi: np.ndarray
    xi: np.ndarray
    dxi: np.ndarray


@dataclass(frozen=True)
class RiccatiLogTable:
    """
    Scaled Riccati functions for n = 0..order_max at one argument z.

    D = psi'/psi and G = xi'/xi are logarithmic derivatives; log_psi and
    log_xi are complex logarithms, finite where psi_n underflows or xi_n overflows.
    """
    order_max: int
    z: float
    D: np.ndarray
    G: np.ndarray
    log_psi: np.ndarray
    log_xi: np.ndarray


@dataclass(frozen=True)
class MultipoleSolution:
    """
    Per-shell expansion of the transmission solution.

    coefficients has shape (L+1, 2, 2, N): shell, channel (0 = TE / magnetic
    multipoles, 1 = TM / electric multipoles), (regular, outgoing), order n-1.
    The exterior shell holds (1, -b_n) and (1, -a_n).
    """
    medium: LayeredMedium
    incidence: PlaneWaveIncidence
    order: int
    coefficients: np.ndarray
    a: np.ndarray
    b: np.ndarray
    tail: float


@dataclass(frozen=True)
class BallRule:
    """Product rule on a ball or shell: Gauss-Legendre radial panels x Gauss in cos(polar) x uniform azimuth."""
    points: np.ndarray
    weights: np.ndarray
    r_inner: float
    r_outer: float
    breakpoints: Tuple[float, ...]
    counts: Tuple[int, int, int]

    @property
    def volume(self) -> float:
        return 4.0 * np.pi * (self.r_outer**3 - self.r_inner**3) / 3.0

    def integrate(self, values: np.ndarray) -> complex:
        return np.tensordot(self.weights, values, axes=(0, 0))


@dataclass(frozen=True)
class SphereRule:
    points: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    radius: float

    def integrate(self, values: np.ndarray) -> complex:
        return np.tensordot(self.weights, values, axes=(0, 0))


@dataclass
class FieldSample:
    """
    Point data for the identity evaluators; every array has a leading axis m.

    grad_eps / grad_mu are optional full gradients [i, j, k] = d_k eps_ij used
    to cross-check the stored divergences.
    """
    x: np.ndarray
    E: np.ndarray
    H: np.ndarray
    curlE: np.ndarray
    curlH: np.ndarray
    jacE: np.ndarray
    jacH: np.ndarray
    eps: np.ndarray
    mu: np.ndarray
    deps_dir: np.ndarray
    dmu_dir: np.ndarray
    div_eps_E: np.ndarray
    div_mu_H: np.ndarray
    beta: np.ndarray
    grad_beta: np.ndarray
    omega: float = 1.0
    grad_eps: Optional[np.ndarray] = None
    grad_mu: Optional[np.ndarray] = None


@dataclass(frozen=True)
class MollifierConfig:
    delta: float
    R: float
    grid: Tuple[int, int, int] = (256, 128, 128)

    def __post_init__(self):
        upper = min(0.5, self.R / 2.0)
        if not (0.0 < self.delta < upper):
            raise MollifierError(f"delta={self.delta} outside (0, {upper})")
        if min(self.grid) < 4:
            raise MollifierError("mollifier grid needs at least 4 points per axis")


@dataclass(frozen=True)
class CutoffFamily:
    """chi(|x|) times the plane wave; chi is the first Dirichlet eigenfunction of B_R or a smooth bump."""
    R: float
    direction: np.ndarray
    polarization: np.ndarray
    omega: float
    chi_kind: ChiKind = ChiKind.J0_EIGENFUNCTION
    eps0: float = 1.0
    mu0: float = 1.0
    bump_fraction: float = 0.9

    def incidence(self) -> PlaneWaveIncidence:
        return PlaneWaveIncidence(np.asarray(self.direction, float), np.asarray(self.polarization, float), self.omega)


@dataclass(frozen=True)
class FieldEvaluation:
    """Quadrature-node data shared by every bound report at one frequency."""
    solution: MultipoleSolution
    rule: BallRule
    E_total: np.ndarray
    H_total: np.ndarray
    E_inc: np.ndarray
    H_inc: np.ndarray
    eps: np.ndarray
    mu: np.ndarray
    R: float
    R_scat: float
    notes: Tuple[str, ...] = field(default_factory=tuple)

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from ..core.config import settings


class ProfileKind(str, Enum):
    CONSTANT = "constant"
    RADIAL_SCALAR = "radial_scalar"
    RADIAL_MATRIX = "radial_matrix"


class Smoothness(str, Enum):
    LINFTY = "Linfty"
    W1INFTY = "W1infty"


class MediumKind(str, Enum):
    UNIFORM = "uniform"
    LAYERS = "layers"
    EXAMPLE1 = "example1"
    EXAMPLE2 = "example2"
    EXAMPLE3 = "example3"


class BoundId(str, Enum):
    THM21 = "thm21"
    THM22 = "thm22"
    WEIGHTED_HDIV = "weighted_hdiv"
    UNWEIGHTED = "unweighted"
    SCAT = "scat"
    IMPEDANCE = "impedance"
    SMALL_CONTRAST = "small_contrast"


# Bound ids that can be checked against an exact layered-sphere solution.
SWEEPABLE_BOUNDS = (
    BoundId.THM21,
    BoundId.THM22,
    BoundId.WEIGHTED_HDIV,
    BoundId.SCAT,
    BoundId.SMALL_CONTRAST,
)


class ChiKind(str, Enum):
    SMOOTH_BUMP = "smooth_bump"
    J0_EIGENFUNCTION = "j0_eigenfunction"


class SuiteSelector(str, Enum):
    IDENTITIES = "identities"
    MOLLIFIER = "mollifier"
    SHARPNESS = "sharpness"
    ALL = "all"


class PlotKind(str, Enum):
    RATIO_VS_OMEGA = "ratio_vs_omega"
    MARGIN_VS_OMEGA = "margin_vs_omega"
    MOLLIFIER_TRACE = "mollifier_trace"


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"


# ============= Coefficient Schemas =============

class CoeffSummary(BaseModel):
    """Constants of a pair of coefficient profiles entering every bound"""
    eps_min: float = Field(..., gt=0)
    eps_max: float = Field(..., gt=0)
    mu_min: float = Field(..., gt=0)
    mu_max: float = Field(..., gt=0)
    gamma_eps: float = Field(1.0, le=1.0)
    gamma_mu: float = Field(1.0, le=1.0)
    eps_star: float = 1.0
    mu_star: float = 1.0
    eps_star_valid: bool = True
    mu_star_valid: bool = True
    gamma_eps_valid: bool = True
    gamma_mu_valid: bool = True
    eps_monotone: bool = True
    mu_monotone: bool = True
    eps0: float = Field(1.0, gt=0)
    mu0: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def _ordered(self):
        if self.eps_min > self.eps_max or self.mu_min > self.mu_max:
            raise ValueError("minimum exceeds maximum in coefficient summary")
        return self

    @property
    def monotone(self) -> bool:
        return self.eps_monotone and self.mu_monotone

    @property
    def gammas_valid(self) -> bool:
        return self.gamma_eps_valid and self.gamma_mu_valid and self.gamma_eps > 0 and self.gamma_mu > 0


# ============= Bound Report Schemas =============

class BoundReport(BaseModel):
    """One sweep row: a bound right-hand side checked against a solution energy"""
    omega: float
    bound_id: BoundId
    lhs: float
    rhs: float
    margin: float
    passed: bool
    n_trunc: int = 0
    tail: float = 0.0
    notes: str = ""
    monotone: bool = True
    summary: Optional[CoeffSummary] = None

    @classmethod
    def from_values(
        cls,
        omega: float,
        bound_id: BoundId,
        lhs: float,
        rhs: float,
        **extra,
    ) -> "BoundReport":
        margin = rhs - lhs
        passed = bool(margin >= -settings.PASS_TOLERANCE * abs(rhs))
        return cls(omega=omega, bound_id=bound_id, lhs=lhs, rhs=rhs, margin=margin, passed=passed, **extra)

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else float("inf")

    def csv_row(self) -> dict:
        return {
            "omega": self.omega,
            "bound_id": self.bound_id.value,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "pass": int(self.passed),
            "n_trunc": self.n_trunc,
            "tail": self.tail,
            "notes": self.notes,
        }


REPORT_COLUMNS = ["omega", "bound_id", "lhs", "rhs", "margin", "pass", "n_trunc", "tail", "notes"]


# ============= Suite Schemas =============

class CheckResult(BaseModel):
    """Outcome of one acceptance check"""
    id: str
    value: float
    tolerance: str
    status: CheckStatus
    detail: Optional[str] = None

    def line(self) -> str:
        return f"{self.id} {self.value:.12g} {self.tolerance} {self.status.value}"


class SuiteSummary(BaseModel):
    """Ordered list of checks for a suite selector"""
    selector: SuiteSelector
    checks: List[CheckResult] = []

    @property
    def passed(self) -> bool:
        return all(c.status == CheckStatus.PASS for c in self.checks)


# ============= Sweep Config Schemas =============

class MediumSpec(BaseModel):
    """Layered medium description; named kinds expand to fixed families"""
    kind: MediumKind
    radii: Optional[List[float]] = None
    eps: Optional[List[float]] = None
    mu: Optional[List[float]] = None
    eps_minus: float = Field(0.5, gt=0)
    mu_minus: float = Field(0.5, gt=0)
    radius: float = Field(1.0, gt=0)
    mu_constant: bool = False

    @model_validator(mode="after")
    def _check_layers(self):
        if self.kind in (MediumKind.LAYERS, MediumKind.EXAMPLE2):
            if self.kind == MediumKind.EXAMPLE2 and self.radii is None:
                self.radii = [0.5, 1.0]
                self.eps = self.eps or [0.25, 0.5]
                self.mu = self.mu or [0.25, 0.5]
            if not self.radii or self.eps is None or self.mu is None:
                raise ValueError("radii, eps and mu are required for explicit layers")
            if not (len(self.radii) == len(self.eps) == len(self.mu)):
                raise ValueError("radii, eps and mu must have the same length")
            if any(r <= 0 for r in self.radii):
                raise ValueError("radii must be positive")
            if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
                raise ValueError("radii must be strictly increasing")
            if any(v <= 0 for v in self.eps + self.mu):
                raise ValueError("eps and mu must be positive")
        return self

    def support_radius(self) -> float:
        if self.kind == MediumKind.UNIFORM:
            return 0.0
        if self.kind in (MediumKind.LAYERS, MediumKind.EXAMPLE2):
            return float(self.radii[-1])
        if self.kind == MediumKind.EXAMPLE3:
            return 1.0
        return float(self.radius)


class IncidenceSpec(BaseModel):
    """Plane-wave direction d and polarization A"""
    direction: List[float] = Field(default_factory=lambda: [0.0, 0.0, 1.0], min_length=3, max_length=3)
    polarization: List[float] = Field(default_factory=lambda: [1.0, 0.0, 0.0], min_length=3, max_length=3)

    @model_validator(mode="after")
    def _unit_and_orthogonal(self):
        d, a = self.direction, self.polarization
        norm_d = sum(c * c for c in d) ** 0.5
        norm_a = sum(c * c for c in a) ** 0.5
        if abs(norm_d - 1.0) > 1e-8 or abs(norm_a - 1.0) > 1e-8:
            raise ValueError("direction and polarization must be unit vectors")
        if abs(sum(x * y for x, y in zip(d, a))) > 1e-8:
            raise ValueError("polarization must be orthogonal to direction")
        return self


class OmegaRange(BaseModel):
    start: float = Field(..., gt=0)
    stop: float = Field(..., gt=0)
    num: int = Field(..., ge=1)
    log: bool = True


class QuadratureSpec(BaseModel):
    n_r: int = Field(settings.QUAD_N_R, ge=2)
    n_phi: int = Field(settings.QUAD_N_PHI, ge=2)
    n_theta: int = Field(settings.QUAD_N_THETA, ge=2)


class OutputSpec(BaseModel):
    csv: Optional[str] = None


class SweepConfig(BaseModel):
    """Frequency sweep configuration (JSON file)"""
    medium: MediumSpec
    eps0: float = Field(1.0, gt=0)
    mu0: float = Field(1.0, gt=0)
    R: float = Field(2.0, gt=0)
    R_scat: Optional[float] = Field(None, gt=0)
    incidence: IncidenceSpec = Field(default_factory=IncidenceSpec)
    omegas: Optional[List[float]] = None
    omega_range: Optional[OmegaRange] = None
    bounds: List[BoundId] = Field(default_factory=lambda: [BoundId.THM22, BoundId.SCAT], min_length=1)
    quadrature: QuadratureSpec = Field(default_factory=QuadratureSpec)
    output: OutputSpec = Field(default_factory=OutputSpec)
    seed: int = settings.RANDOM_SEED

    @field_validator("omegas")
    @classmethod
    def _positive_omegas(cls, value):
        if value is not None:
            if not value:
                raise ValueError("omegas must not be empty")
            if any(w <= 0 for w in value):
                raise ValueError("omega values must be positive")
        return value

    @field_validator("bounds")
    @classmethod
    def _sweepable(cls, value):
        bad = [b.value for b in value if b not in SWEEPABLE_BOUNDS]
        if bad:
            raise ValueError(f"bound ids {bad} cannot be checked in a sweep")
        return value

    @model_validator(mode="after")
    def _geometry(self):
        if (self.omegas is None) == (self.omega_range is None):
            raise ValueError("give exactly one of omegas or omega_range")
        support = self.medium.support_radius()
        if self.R_scat is None:
            self.R_scat = support if support > 0 else self.R / 2.0
        if self.R_scat < support:
            raise ValueError(f"R_scat={self.R_scat} is inside the scatterer (support radius {support})")
        if self.R <= self.R_scat:
            raise ValueError("R must exceed R_scat")
        return self

    def omega_values(self) -> List[float]:
        if self.omegas is not None:
            return [float(w) for w in self.omegas]
        rng = self.omega_range
        if rng.num == 1:
            return [float(rng.start)]
        if rng.log:
            ratio = (rng.stop / rng.start) ** (1.0 / (rng.num - 1))
            return [float(rng.start * ratio**k) for k in range(rng.num)]
        step = (rng.stop - rng.start) / (rng.num - 1)
        return [float(rng.start + step * k) for k in range(rng.num)]

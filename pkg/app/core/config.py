"""
Toolkit configuration settings.
"""
import os
from typing import Tuple
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _int_triple(raw: str) -> Tuple[int, int, int]:
    parts = [int(p) for p in raw.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated integers, got {raw!r}")
    return parts[0], parts[1], parts[2]


class Settings:
    """Toolkit settings and configuration."""

    TOOLKIT_VERSION: str = "1.0.0"

    # Runtime
    THREADS: int = int(os.getenv("MAXSTAB_THREADS", "4"))
    LOG_LEVEL: str = os.getenv("MAXSTAB_LOG_LEVEL", "WARNING")
    RANDOM_SEED: int = int(os.getenv("RANDOM_SEED", "20240607"))

    # Special functions / Mie solver
    BESSEL_ORDER_CAP: int = int(os.getenv("BESSEL_ORDER_CAP", "256"))
    MIE_TAIL_TOLERANCE: float = float(os.getenv("MIE_TAIL_TOLERANCE", "1e-12"))
    FIELD_CHUNK: int = int(os.getenv("FIELD_CHUNK", "8192"))

    # Quadrature defaults
    QUAD_N_R: int = int(os.getenv("QUAD_N_R", "32"))
    QUAD_N_PHI: int = int(os.getenv("QUAD_N_PHI", "32"))
    QUAD_N_THETA: int = int(os.getenv("QUAD_N_THETA", "64"))

    # Identity checks
    FD_STEP: float = float(os.getenv("FD_STEP", "1e-3"))
    MATRIX_TOL: float = float(os.getenv("MATRIX_TOL", "1e-10"))
    PASS_TOLERANCE: float = float(os.getenv("PASS_TOLERANCE", "1e-9"))

    # Mollifier grid (n_rho, n_theta, n_phi)
    MOLLIFIER_GRID: Tuple[int, int, int] = _int_triple(os.getenv("MOLLIFIER_GRID", "256,128,128"))


settings = Settings()

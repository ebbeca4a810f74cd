"""
Diagnostic: compare the bound ratio of a high-contrast ball against the
monotone reference, scanning for quasi-resonant frequencies.

Usage: python -m scripts.nonmonotone_contrast [omega_max]
"""
import sys

import numpy as np

from app.data.schemas import BoundId
from app.services.bound_service import reports_for_bounds
from app.services.mie_service import default_incidence, example1_medium
from app.services.sweep_service import probe_quasi_resonances

OMEGAS = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0)
omega_max = float(sys.argv[1]) if len(sys.argv) > 1 else 64.0

print("=" * 80)
print("MONOTONE REFERENCE: eps_- = mu_- = 0.5, R = 2, R_scat = 1")
print("=" * 80)
monotone = example1_medium(0.5, 0.5)
reference = 0.0
for omega in OMEGAS:
    (report,) = reports_for_bounds(monotone, default_incidence(omega), 2.0, 1.0, [BoundId.THM22])
    reference = max(reference, report.ratio)
    print(f"omega={omega:<6g} lhs={report.lhs:.6e} rhs={report.rhs:.6e} ratio={report.ratio:.3e}")
print(f"\nreference max ratio: {reference:.6e}")

print("\n" + "=" * 80)
print(f"NON-MONOTONE BALL: eps_- = 4, mu_- = 1, omega up to {omega_max:g}")
print("=" * 80)
grid = np.linspace(0.5, omega_max, int(8 * omega_max) + 1)
probe = probe_quasi_resonances(
    example1_medium(4.0, 1.0),
    default_incidence(1.0),
    2.0,
    1.0,
    grid,
    reference_ratio=reference,
    top=5,
)
for report in probe.reports:
    print(f"omega={report.omega:<12.9g} ratio={report.ratio:.3e} n_trunc={report.n_trunc}")
print(f"\n{probe.message}")
print("found" if probe.found else "not found")

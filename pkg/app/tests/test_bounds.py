import math

import numpy as np
import pytest

from app.core.errors import BoundInputError, UnweightedHypothesisError
from app.data.schemas import BoundId, BoundReport, CoeffSummary, REPORT_COLUMNS
from app.services.bound_service import (
    GAMMA_UNAVAILABLE_NOTE,
    cutoff_profile,
    impedance_constant,
    reports_for_bounds,
    rhs_impedance,
    rhs_impedance_weighted,
    rhs_scattering,
    rhs_thm21,
    rhs_thm22,
    rhs_unweighted,
    rhs_weighted_hdiv,
    verify_transmission_bound,
)
from app.services.mie_service import default_incidence, example1_medium, uniform_medium


def _unit(**overrides) -> CoeffSummary:
    values = dict(eps_min=1.0, eps_max=1.0, mu_min=1.0, mu_max=1.0)
    values.update(overrides)
    return CoeffSummary(**values)


# ============= Closed Forms =============

def test_thm21_unit_case_one_source():
    assert rhs_thm21(_unit(), 1.0, 1.0, 1.0, 0.0) == pytest.approx(16.0)


def test_thm21_both_sources():
    assert rhs_thm21(_unit(), 1.0, 1.0, 1.0, 1.0) == pytest.approx(64.0)


def test_thm22_values():
    assert rhs_thm22(1.0, 1.0, 1.0, 1.0, 0.5, 0.5) == pytest.approx(32.0)
    assert rhs_thm22(1.0, 1.0, 1.0, 1.0, 1.0, 0.0) == pytest.approx(16.0)


def test_thm22_low_frequency_branch():
    assert rhs_thm22(1.0, 1.0, 1.0, 0.1, 1.0, 0.0) == pytest.approx(200.0)


def test_thm21_reduces_to_thm22_for_matched_media():
    rng = np.random.default_rng(21)
    for _ in range(100):
        eps0, mu0 = rng.uniform(0.2, 3.0, size=2)
        R, omega = rng.uniform(0.1, 3.0), rng.uniform(0.05, 10.0)
        J, K = rng.uniform(0.0, 2.0, size=2)
        summary = CoeffSummary(
            eps_min=eps0 / 2, eps_max=eps0, mu_min=mu0 / 3, mu_max=mu0, eps0=eps0, mu0=mu0
        )
        assert rhs_thm21(summary, R, omega, J, K) == pytest.approx(rhs_thm22(eps0, mu0, R, omega, J, K), rel=1e-12)


def test_impedance_values():
    assert impedance_constant(1.0, 1.0, 1.0) == pytest.approx(4.0)
    assert rhs_impedance(_unit(), 1.0, 4.0, 1.0, 1.0, 0.0, 0.0) == pytest.approx(136.0)
    assert rhs_impedance(_unit(), 1.0, 4.0, 1.0, 0.0, 0.0, 1.0) == pytest.approx(16.0)


def test_impedance_constant_uses_worst_boundary_point():
    assert impedance_constant([1.0, 2.0], [1.0, 1.0], [1.0, 3.0], rho=0.5) == pytest.approx(5.0 * 6.0)


@pytest.mark.parametrize("theta, rho", [(0.0, 1.0), (1.0, 0.0), (1.0, 1.5)])
def test_impedance_constant_rejects_bad_inputs(theta, rho):
    with pytest.raises(BoundInputError):
        impedance_constant(theta, 1.0, 1.0, rho)


def test_impedance_weighted_g_term():
    assert rhs_impedance_weighted(_unit(), 1.0, 4.0, 1.0, 0, 0, 0, 0, 0, 0, 1.0) == pytest.approx(8.0)


def test_weighted_hdiv_unit_case():
    assert rhs_weighted_hdiv(_unit(), 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0) == pytest.approx(4.0)


def test_unweighted_unit_case():
    assert rhs_unweighted(_unit(), 1.0, 1.0, 0.5, 0.5) == pytest.approx(32.0)


def test_unweighted_requires_positive_star_constants():
    with pytest.raises(UnweightedHypothesisError):
        rhs_unweighted(_unit(eps_star=0.0, eps_star_valid=False), 1.0, 1.0, 1.0, 1.0)


def test_scattering_blows_up_as_cutoff_shell_closes():
    values = [rhs_scattering(_unit(), 2.0, r, 1.0, 1.0, 1.0, 1.0, 1.0) for r in (1.0, 1.9, 1.99, 1.999)]
    assert all(b > 50 * a for a, b in zip(values[1:], values[2:]))
    assert values[-1] > 1e6


def test_scattering_rejects_r_inside_cutoff():
    with pytest.raises(BoundInputError):
        rhs_scattering(_unit(), 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)


@pytest.mark.parametrize(
    "call",
    [
        lambda: rhs_thm22(1.0, 1.0, 0.0, 1.0, 1.0, 1.0),
        lambda: rhs_thm22(1.0, 1.0, 1.0, -1.0, 1.0, 1.0),
        lambda: rhs_thm22(1.0, 1.0, 1.0, 1.0, -1.0, 1.0),
        lambda: rhs_thm21(_unit(gamma_eps=0.0), 1.0, 1.0, 1.0, 1.0),
    ],
    ids=["radius", "omega", "norm", "gamma"],
)
def test_invalid_inputs(call):
    with pytest.raises(BoundInputError):
        call()


def test_rhs_monotone_in_norms():
    s = _unit(eps_min=0.5, mu_min=0.25, gamma_eps=0.8, gamma_mu=0.6)
    base = (0.3, 0.4)
    for i in range(2):
        bigger = list(base)
        bigger[i] *= 2.0
        assert rhs_thm21(s, 1.0, 2.0, *bigger) > rhs_thm21(s, 1.0, 2.0, *base)
        assert rhs_thm22(1.0, 1.0, 1.0, 2.0, *bigger) > rhs_thm22(1.0, 1.0, 1.0, 2.0, *base)
        assert rhs_unweighted(s, 1.0, 2.0, *bigger) > rhs_unweighted(s, 1.0, 2.0, *base)
    hdiv = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]
    for i in range(6):
        bigger = list(hdiv)
        bigger[i] *= 2.0
        assert rhs_weighted_hdiv(s, 1.0, 2.0, *bigger) > rhs_weighted_hdiv(s, 1.0, 2.0, *hdiv)
    scat = [0.1, 0.2, 0.3, 0.4]
    for i in range(4):
        bigger = list(scat)
        bigger[i] *= 2.0
        assert rhs_scattering(s, 2.0, 1.0, 2.0, *bigger) > rhs_scattering(s, 2.0, 1.0, 2.0, *scat)


# ============= Frequency Saturation =============

def _all_rhs(summary: CoeffSummary, R: float, omega: float) -> dict:
    J, K = 0.7, 0.4
    M = impedance_constant(1.0, summary.eps0, summary.mu0)
    return {
        "thm21": rhs_thm21(summary, R, omega, J, K),
        "thm22": rhs_thm22(summary.eps0, summary.mu0, R, omega, J, K),
        "unweighted": rhs_unweighted(summary, R, omega, J, K),
        "weighted_hdiv": rhs_weighted_hdiv(summary, R, omega, 0.3, 0.5, 0.0, 0.2, 0.6, 0.0),
        "scat": rhs_scattering(summary, R, R / 2.0, omega, 0.3, 0.4, 0.1, 0.2),
        "impedance": rhs_impedance(summary, R, M, omega, J, K, 0.25),
        "impedance_weighted": rhs_impedance_weighted(summary, R, M, omega, 0.3, 0.5, 0.0, 0.2, 0.6, 0.0, 0.25),
    }


@pytest.mark.parametrize("R, eps0, mu0", [(1.0, 1.0, 1.0), (0.5, 2.0, 0.75), (3.0, 0.4, 1.5)])
def test_rhs_independent_of_frequency_above_threshold(R, eps0, mu0):
    summary = CoeffSummary(
        eps_min=0.5 * eps0,
        eps_max=eps0,
        mu_min=0.6 * mu0,
        mu_max=mu0,
        eps0=eps0,
        mu0=mu0,
        gamma_eps=0.8,
        gamma_mu=0.9,
        eps_star=0.25 * eps0,
        mu_star=0.3 * mu0,
    )
    threshold = 1.0 / (4.0 * R * np.sqrt(eps0 * mu0))
    at_threshold = _all_rhs(summary, R, threshold)
    for omega in (threshold, 2.0 * threshold, 10.0, 1e3, 1e6):
        values = _all_rhs(summary, R, omega)
        for name, value in values.items():
            assert value == pytest.approx(at_threshold[name], rel=1e-12), (name, omega)
    # below the threshold the omega^-2 branch of the transmission bound takes over
    assert rhs_thm22(eps0, mu0, R, threshold / 2.0, 0.7, 0.4) > at_threshold["thm22"]


@pytest.mark.parametrize("omega", [0.25, 1.0, 10.0, 1e3, 1e8])
def test_thm21_per_source_coefficient_saturates_at_32(omega):
    per_J = rhs_thm21(_unit(), 1.0, omega, 2.0, 1.0) - rhs_thm21(_unit(), 1.0, omega, 1.0, 1.0)
    per_K = rhs_thm21(_unit(), 1.0, omega, 1.0, 2.0) - rhs_thm21(_unit(), 1.0, omega, 1.0, 1.0)
    assert per_J == pytest.approx(32.0)
    assert per_K == pytest.approx(32.0)


def test_thm21_per_source_coefficient_grows_at_low_frequency():
    per_J = rhs_thm21(_unit(), 1.0, 0.1, 2.0, 1.0) - rhs_thm21(_unit(), 1.0, 0.1, 1.0, 1.0)
    assert per_J == pytest.approx(200.0)


# ============= Reports =============

def test_report_margin_and_csv_row():
    report = BoundReport.from_values(2.0, BoundId.THM22, 1.0, 4.0, n_trunc=7)
    assert report.passed
    assert report.margin == 3.0
    assert report.ratio == 0.25
    assert list(report.csv_row()) == REPORT_COLUMNS
    failing = BoundReport.from_values(2.0, BoundId.THM22, 5.0, 4.0)
    assert not failing.passed


def test_cutoff_profile_shape():
    chi, slope = cutoff_profile(np.array([0.0, 1.0, 1.5, 2.0, 3.0]), 2.0, 1.0)
    assert chi.tolist() == [1.0, 1.0, 0.5, 0.0, 0.0]
    assert slope.tolist() == [0.0, 0.0, -1.0, 0.0, 0.0]


@pytest.mark.parametrize("bound_id", [BoundId.THM22, BoundId.THM21, BoundId.SCAT])
def test_uniform_medium_passes(bound_id):
    report = verify_transmission_bound(uniform_medium(), default_incidence(2.0), 2.0, bound_id)
    assert report.passed
    assert report.lhs > 0


@pytest.mark.parametrize("omega", [0.5, 2.0, 6.0])
def test_monotone_ball_passes_all_sweepable_bounds(omega):
    reports = reports_for_bounds(
        example1_medium(0.5, 0.5),
        default_incidence(omega),
        2.0,
        1.0,
        [BoundId.THM21, BoundId.THM22, BoundId.WEIGHTED_HDIV, BoundId.SCAT],
    )
    for report in reports:
        assert report.passed, report.bound_id
        assert report.monotone
        assert 0 < report.ratio <= 1.0


def test_non_monotone_ball_carries_note():
    report = verify_transmission_bound(example1_medium(4.0, 1.0), default_incidence(1.0), 2.0)
    assert not report.monotone
    assert "non-monotone medium" in report.notes


@pytest.mark.parametrize("bound_id", [BoundId.THM21, BoundId.SCAT])
def test_non_monotone_ball_reports_missing_growth_constant(bound_id):
    report = verify_transmission_bound(example1_medium(4.0, 1.0), default_incidence(1.0), 2.0, bound_id)
    assert not report.monotone
    assert math.isnan(report.rhs)
    assert not report.passed
    assert report.lhs > 0
    assert GAMMA_UNAVAILABLE_NOTE in report.notes


def test_verify_rejects_cutoff_inside_scatterer():
    with pytest.raises(BoundInputError):
        verify_transmission_bound(example1_medium(0.5, 0.5), default_incidence(1.0), 2.0, R_scat=0.5)

import numpy as np
import pytest

from app.core.errors import MollifierError
from app.data.models import MollifierConfig
from app.data.schemas import CheckStatus
from app.services.coefficient_service import (
    check_radial_monotonicity,
    constant_profile,
    eval_coeff,
    example1_profile,
    gamma_lower_bound,
)
from app.services.mollifier_service import (
    bump,
    candy_membership,
    cartesian_counterexample,
    cartesian_ray_trace,
    convergence_table,
    mollifier_config,
    spherical_mollify,
)
from app.services.suite_service import mollifier_checks

GRID = (96, 32, 32)


@pytest.fixture(scope="module")
def smoothed_ball():
    return spherical_mollify(example1_profile(0.5), mollifier_config(0.2, 1.0, GRID))


def _spherical(rho, polar, azimuth=0.3):
    return np.array([rho * np.sin(polar) * np.cos(azimuth), rho * np.sin(polar) * np.sin(azimuth), rho * np.cos(polar)])


# ============= Candy Region =============

@pytest.mark.parametrize(
    "point, expected",
    [
        ([0.0, 0.0, 0.0], True),
        ([0.05, 0.05, 0.0], True),
        ([0.0, 0.0, 0.9], True),
        ([0.0, 0.0, -0.9], True),
        ([0.5, 0.0, 0.0], False),
        ([0.0, 0.0, 1.5], False),
    ],
)
def test_candy_membership(point, expected):
    assert candy_membership(np.array(point), MollifierConfig(0.2, 1.0)) is expected


def test_candy_membership_stack():
    pts = np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]])
    assert candy_membership(pts, MollifierConfig(0.2, 1.0)).tolist() == [True, False]


# ============= Configuration =============

@pytest.mark.parametrize(
    "delta, R, grid",
    [(0.6, 2.0, (8, 8, 8)), (0.3, 0.5, (8, 8, 8)), (0.0, 1.0, (8, 8, 8)), (0.1, 1.0, (3, 8, 8))],
)
def test_config_rejects_bad_values(delta, R, grid):
    with pytest.raises(MollifierError):
        MollifierConfig(delta, R, grid)


def test_support_beyond_r_rejected():
    with pytest.raises(MollifierError):
        spherical_mollify(example1_profile(0.5), mollifier_config(0.1, 0.8, GRID))


def test_bump_support():
    values = bump(np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))
    assert values[0] == pytest.approx(np.exp(-1.0))
    assert values[1] > 0
    assert values[2] == 0
    assert values[3] == 0


# ============= Spherical Mollification =============

@pytest.mark.parametrize("rho", [0.0, 0.05, 0.5, 0.9])
def test_clamped_on_candy_interior(smoothed_ball, rho):
    for polar in (0.05, np.pi - 0.05):
        value = eval_coeff(smoothed_ball, _spherical(rho, polar))
        assert np.allclose(value, 0.5 * np.eye(3), atol=1e-12)


def test_values_within_profile_range(smoothed_ball):
    pts = np.random.default_rng(3).uniform(-1.8, 1.8, size=(2000, 3))
    eig = np.linalg.eigvalsh(eval_coeff(smoothed_ball, pts))
    assert eig.min() >= 0.5 - 1e-12
    assert eig.max() <= 1.0 + 1e-12


def test_background_beyond_support(smoothed_ball):
    assert smoothed_ball.support_radius == pytest.approx(1.6)
    assert np.allclose(eval_coeff(smoothed_ball, np.array([1.7, 0.0, 0.0])), np.eye(3))


def test_monotone_profile_stays_monotone(smoothed_ball):
    assert check_radial_monotonicity(smoothed_ball).passed


def test_gamma_stays_at_least_one_after_smoothing(smoothed_ball):
    assert gamma_lower_bound(smoothed_ball) >= 1.0 - 1e-6


def test_suite_reports_growth_constant_of_smoothed_ball():
    results = {c.id: c for c in mollifier_checks(grid=GRID)}
    assert results["mollifier.gamma.example1"].status == CheckStatus.PASS
    assert results["mollifier.gamma.example1"].value >= 1.0 - 1e-6


def test_smoothed_profile_is_lipschitz_class(smoothed_ball):
    assert smoothed_ball.radial_derivative_fn is not None
    d = smoothed_ball.radial_derivative_fn(np.array([[0.0, 1.0, 0.0], [0.0, 0.3, 0.0]]))
    assert d.shape == (2, 3, 3)
    assert d[0, 0, 0] > 0
    assert d[1, 0, 0] == pytest.approx(0.0, abs=1e-12)


def test_constant_profile_unchanged():
    smoothed = spherical_mollify(constant_profile(2.0), mollifier_config(0.1, 1.0, GRID))
    pts = np.random.default_rng(4).uniform(-1.5, 1.5, size=(300, 3))
    assert np.allclose(eval_coeff(smoothed, pts), 2.0 * np.eye(3), atol=1e-12)


def test_error_shrinks_with_delta():
    table = convergence_table(example1_profile(0.5), 1.0, [0.2, 0.1], grid=(192, 64, 64))
    assert table.shape == (2, 2)
    assert table[1, 1] < table[0, 1]


# ============= Cartesian Counterexample =============

def test_cartesian_counterexample_values():
    at_origin, at_half = cartesian_counterexample(0.25)
    assert at_origin == pytest.approx(0.75, abs=1e-12)
    assert at_half == pytest.approx(0.5, abs=1e-12)
    assert at_origin > at_half


@pytest.mark.parametrize("delta", [0.0, 0.5, 0.7])
def test_cartesian_counterexample_rejects_delta(delta):
    with pytest.raises(MollifierError):
        cartesian_counterexample(delta)


def test_cartesian_ray_trace_not_monotone():
    trace = cartesian_ray_trace(0.25, np.array([0.0, 0.5]))
    assert trace[0] > trace[1]

import math

import numpy as np
import pytest

from app.core.errors import QuadratureError
from app.services.quadrature_service import ball_rule, radial_panels, refined, shell_rule, sphere_rule


def test_unit_ball_volume():
    rule = ball_rule(1.0)
    assert rule.weights.sum() == pytest.approx(4.0 * math.pi / 3.0, rel=1e-13)


def test_second_moment():
    rule = ball_rule(1.0)
    r2 = np.sum(rule.points**2, axis=1)
    assert rule.integrate(r2) == pytest.approx(4.0 * math.pi / 5.0, abs=1e-12)


@pytest.mark.parametrize("R", [1.0, 1.5])
def test_j0_cutoff_squared(R):
    rule = ball_rule(R)
    chi = np.sinc(np.linalg.norm(rule.points, axis=1) / R)
    assert rule.integrate(chi**2) == pytest.approx(2.0 * R**3 / math.pi, abs=1e-10)


def test_shell_volume_with_breakpoints():
    rule = shell_rule(0.5, 2.0, breakpoints=(0.75, 1.0, 1.5))
    assert rule.breakpoints == (0.75, 1.0, 1.5)
    assert rule.weights.sum() == pytest.approx(4.0 * math.pi * (8.0 - 0.125) / 3.0, rel=1e-13)


def test_split_rule_integrates_piecewise_exactly():
    rule = ball_rule(2.0, breakpoints=(1.0,))
    r = np.linalg.norm(rule.points, axis=1)
    values = np.where(r <= 1.0, 0.5, 1.0)
    expected = 0.5 * 4.0 * math.pi / 3.0 + 4.0 * math.pi * (8.0 - 1.0) / 3.0
    assert rule.integrate(values) == pytest.approx(expected, rel=1e-13)


def test_close_breakpoints_are_merged():
    edges = radial_panels(0.0, 1.0, (0.5, 0.5 + 1e-8, 1.0 - 1e-9))
    assert list(edges) == [0.0, 0.5, 1.0]


def test_unit_sphere_area():
    assert sphere_rule(1.0).weights.sum() == pytest.approx(4.0 * math.pi, rel=1e-13)


def test_sphere_cross_product_average():
    rule = sphere_rule(1.0)
    a = np.array([0.0, 0.6, 0.8])
    values = np.sum(np.cross(rule.normals, a) ** 2, axis=1)
    assert rule.integrate(values) == pytest.approx(8.0 * math.pi / 3.0, rel=1e-13)


def test_y20_normalization():
    rule = sphere_rule(1.0)
    cos_polar = rule.normals[:, 2]
    y20 = math.sqrt(5.0 / (16.0 * math.pi)) * (3.0 * cos_polar**2 - 1.0)
    assert rule.integrate(y20 * y20) == pytest.approx(1.0, rel=1e-13)


def test_sphere_normals_are_unit():
    rule = sphere_rule(2.5, 8, 12)
    assert np.allclose(np.linalg.norm(rule.normals, axis=1), 1.0)
    assert np.allclose(np.linalg.norm(rule.points, axis=1), 2.5)


def test_refinement_changes_smooth_integral_little():
    rule = ball_rule(1.0)
    f = lambda p: np.exp(-np.sum(p**2, axis=1)) * np.cos(p[:, 0])  # noqa: E731
    coarse = rule.integrate(f(rule.points))
    fine_rule = refined(rule)
    fine = fine_rule.integrate(f(fine_rule.points))
    assert abs(fine - coarse) < 1e-9 * abs(fine)


@pytest.mark.parametrize("kwargs", [{"n_r": 1}, {"n_phi": 1}, {"n_theta": 0}])
def test_rejects_small_counts(kwargs):
    with pytest.raises(QuadratureError):
        ball_rule(1.0, **kwargs)


def test_rejects_empty_shell():
    with pytest.raises(QuadratureError):
        shell_rule(1.0, 1.0)

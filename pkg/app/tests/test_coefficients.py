import numpy as np
import pytest

from app.core.errors import BoundInputError, ProfileError
from app.services.bound_service import rhs_thm21
from app.services.coefficient_service import (
    check_radial_monotonicity,
    constant_profile,
    eval_coeff,
    example1_profile,
    example2_profile,
    example3_profile,
    example3_shells,
    gamma_lower_bound,
    piecewise_radial_profile,
    radial_matrix_profile,
    smooth_radial_profile,
    star_lower_bound,
    summarize,
)


def _decreasing():
    return smooth_radial_profile(lambda r: 2.0 - r, lambda r: -np.ones_like(r), 1.0, 1.0, name="decreasing")


def _increasing():
    return smooth_radial_profile(lambda r: 0.5 + 0.5 * r**2, lambda r: r, 1.0, 1.0, name="increasing")


# ============= Evaluation =============

def test_constant_profile_is_identity():
    assert np.array_equal(eval_coeff(constant_profile(1.0), np.array([0.3, -2.0, 7.0])), np.eye(3))


def test_example1_inside_value():
    assert np.allclose(eval_coeff(example1_profile(0.5), np.array([0.3, 0.0, 0.0])), 0.5 * np.eye(3))


def test_example3_second_shell():
    x = 0.55 * np.array([0.0, 0.6, 0.8])
    assert np.allclose(eval_coeff(example3_profile(), x), 0.75 * np.eye(3))


def test_example3_shells_truncated_and_merged():
    radii, values = example3_shells()
    assert radii[-1] == 1.0
    assert values[0] == pytest.approx(0.5)
    assert all(b > a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("profile", [example1_profile(0.5), example3_profile(), _decreasing()])
def test_background_just_beyond_support(profile):
    x = np.array([1.0, 0.0, 0.0]) * profile.support_radius * (1.0 + 1e-6)
    assert np.array_equal(eval_coeff(profile, x), profile.background * np.eye(3))


def test_interface_uses_inner_shell():
    assert eval_coeff(example1_profile(0.5), np.array([0.0, 0.0, 1.0]))[0, 0] == 0.5


def test_stack_evaluation_shape():
    pts = np.random.default_rng(0).normal(size=(17, 3))
    assert eval_coeff(example3_profile(), pts).shape == (17, 3, 3)


# ============= Construction Errors =============

def test_rejects_non_increasing_radii():
    with pytest.raises(ProfileError):
        piecewise_radial_profile([0.5, 0.5], [0.5, 0.7], 1.0)


def test_rejects_non_positive_value():
    with pytest.raises(ProfileError):
        piecewise_radial_profile([1.0], [-0.5], 1.0)


def test_rejects_non_symmetric_matrix():
    skew = np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(ProfileError):
        radial_matrix_profile(lambda p: np.broadcast_to(skew, (len(p), 3, 3)).copy(), None, 1.0, 1.0)


def test_example2_requires_outward_growth():
    with pytest.raises(ProfileError):
        example2_profile([0.5, 1.0], [0.5, 0.25])


# ============= Growth Constants =============

def test_gamma_constant_profile():
    assert gamma_lower_bound(constant_profile(1.0)) == pytest.approx(1.0, abs=1e-12)


def test_gamma_increasing_profile():
    assert gamma_lower_bound(_increasing()) == pytest.approx(1.0, abs=1e-12)


def test_gamma_decreasing_profile_reaches_zero():
    gamma = gamma_lower_bound(_decreasing(), radial_grid=np.linspace(0.0, 1.0, 1001), direction_grid=np.eye(3)[:1])
    assert gamma == pytest.approx(0.0, abs=1e-9)


def test_gamma_requires_derivative():
    with pytest.raises(ProfileError):
        gamma_lower_bound(example1_profile(0.5))


def test_star_of_decreasing_profile():
    assert star_lower_bound(_decreasing()) == pytest.approx(0.0, abs=1e-9)


# ============= Monotonicity =============

@pytest.mark.parametrize("profile", [example1_profile(0.5), constant_profile(2.0), example3_profile(), _increasing()])
def test_monotone_profiles_pass(profile):
    assert check_radial_monotonicity(profile).passed


def test_monotone_smooth_profile_has_unit_gamma():
    profile = _increasing()
    assert check_radial_monotonicity(profile).passed
    assert gamma_lower_bound(profile) >= 1.0 - 1e-9


def test_non_monotone_ball_gives_witness():
    result = check_radial_monotonicity(example1_profile(4.0))
    assert not result.passed
    w = result.witness
    r = np.linalg.norm(w.x)
    assert r <= 1.0
    assert (1.0 + w.h) * r > 1.0
    assert w.drop < 0


def test_negative_dilation_rejected():
    with pytest.raises(ProfileError):
        check_radial_monotonicity(example1_profile(0.5), dilation_factors=[-0.1])


# ============= Summary =============

def test_summary_identity_media():
    s = summarize(constant_profile(1.0), constant_profile(1.0))
    assert (s.eps_min, s.eps_max, s.mu_min, s.mu_max) == (1.0, 1.0, 1.0, 1.0)
    assert s.gamma_eps == pytest.approx(1.0)
    assert s.gamma_mu == pytest.approx(1.0)
    assert s.eps_star == pytest.approx(1.0)
    assert s.mu_star == pytest.approx(1.0)


def test_summary_example1():
    s = summarize(example1_profile(0.5), example1_profile(0.5))
    assert s.eps_min == 0.5
    assert s.eps_max == 1.0
    assert s.monotone
    assert s.eps_star == 0.5


def test_summary_flags_invalid_star():
    s = summarize(_decreasing(), constant_profile(1.0))
    assert s.eps_star == pytest.approx(0.0, abs=1e-9)
    assert not s.eps_star_valid
    assert not s.eps_monotone


def test_summary_non_monotone_jump_has_no_growth_constant():
    s = summarize(example1_profile(4.0), constant_profile(1.0))
    assert not s.eps_monotone
    assert s.gamma_eps == 0.0
    assert not s.gamma_eps_valid
    assert s.gamma_mu == 1.0
    assert not s.gammas_valid
    with pytest.raises(BoundInputError):
        rhs_thm21(s, 2.0, 1.0, 1.0, 1.0)


def test_summary_monotone_jump_keeps_unit_growth_constant():
    s = summarize(example1_profile(0.5), example1_profile(0.5))
    assert s.gamma_eps == 1.0
    assert s.gammas_valid


def test_summary_extrema_bracket_random_samples():
    profile = example2_profile([0.5, 1.0], [0.25, 0.5])
    s = summarize(profile, profile)
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1.2, 1.2, size=(10_000, 3))
    eig = np.linalg.eigvalsh(eval_coeff(profile, pts))
    assert eig.min() >= s.eps_min - 1e-12
    assert eig.max() <= s.eps_max + 1e-12

import numpy as np
import pytest

from app.services.manufactured_service import (
    RadialBeta,
    constant_trio,
    curl_gaussian_trio,
    divergence_consistency,
    gaussian_wave_trio,
    mixed_trio,
    random_points,
    vacuum_trio,
    zero_trio,
)
from app.utils.helpers import fd_curl, fd_divergence, fd_jacobian

H_STEP = 1e-3
TRIOS = [gaussian_wave_trio(), curl_gaussian_trio(), mixed_trio(), vacuum_trio()]


@pytest.mark.parametrize("trio", TRIOS, ids=lambda t: t.name)
def test_exact_curl_matches_finite_differences(trio):
    pts = random_points(25, radius=0.8, seed=3)
    sample = trio.sample(pts)
    curl_e = fd_curl(lambda p: trio.E.evaluate(p)[0], pts, H_STEP)
    curl_h = fd_curl(lambda p: trio.H.evaluate(p)[0], pts, H_STEP)
    assert np.max(np.abs(sample.curlE - curl_e)) < 1e-6
    assert np.max(np.abs(sample.curlH - curl_h)) < 1e-6


@pytest.mark.parametrize("trio", TRIOS, ids=lambda t: t.name)
def test_exact_jacobian_matches_finite_differences(trio):
    pts = random_points(25, radius=0.8, seed=4)
    sample = trio.sample(pts)
    assert np.max(np.abs(sample.jacE - fd_jacobian(lambda p: trio.E.evaluate(p)[0], pts, H_STEP))) < 1e-6


@pytest.mark.parametrize("trio", TRIOS, ids=lambda t: t.name)
def test_divergence_of_weighted_field(trio):
    pts = random_points(25, radius=0.8, seed=5)
    sample = trio.sample(pts)

    def eps_e(p):
        return np.einsum("mij,mj->mi", trio.eps.evaluate(p)[0], trio.E.evaluate(p)[0])

    def mu_h(p):
        return np.einsum("mij,mj->mi", trio.mu.evaluate(p)[0], trio.H.evaluate(p)[0])

    assert np.max(np.abs(sample.div_eps_E - fd_divergence(eps_e, pts, H_STEP))) < 1e-6
    assert np.max(np.abs(sample.div_mu_H - fd_divergence(mu_h, pts, H_STEP))) < 1e-6
    assert divergence_consistency(sample) < 1e-12


@pytest.mark.parametrize("trio", [gaussian_wave_trio(), curl_gaussian_trio(), mixed_trio()], ids=lambda t: t.name)
def test_directional_coefficient_derivative(trio):
    pts = random_points(20, radius=0.8, seed=6)
    sample = trio.sample(pts)
    jac = fd_jacobian(lambda p: trio.eps.evaluate(p)[0].reshape(len(p), 9)[:, :3], pts, H_STEP)
    # first row of eps differentiated along x
    expected = np.einsum("mij,mj->mi", jac, pts)
    assert np.allclose(sample.deps_dir[:, 0, :], expected, atol=1e-7)


def test_curl_gaussian_is_divergence_free():
    trio = curl_gaussian_trio()
    pts = random_points(30, seed=8)
    jac = trio.sample(pts).jacE
    assert np.max(np.abs(np.trace(jac, axis1=1, axis2=2))) < 1e-12


def test_constant_and_zero_trios():
    pts = random_points(5, seed=1)
    const = constant_trio(beta=0.5).sample(pts)
    assert np.array_equal(const.E, np.tile([1.0, 0.0, 0.0], (5, 1)).astype(complex))
    assert np.all(const.curlE == 0)
    assert np.all(const.beta == 0.5)
    zero = zero_trio().sample(pts)
    assert np.all(zero.E == 0) and np.all(zero.H == 0)


def test_radial_beta_gradient_at_origin():
    beta, grad = RadialBeta(2.0).evaluate(np.array([[0.0, 0.0, 0.0], [0.0, 3.0, 4.0]]))
    assert beta.tolist() == [0.0, 10.0]
    assert np.array_equal(grad[0], np.zeros(3))
    assert np.allclose(grad[1], [0.0, 1.2, 1.6])


def test_random_points_inside_ball_and_reproducible():
    a = random_points(500, radius=0.9, seed=11)
    b = random_points(500, radius=0.9, seed=11)
    assert np.array_equal(a, b)
    assert np.max(np.linalg.norm(a, axis=1)) <= 0.9

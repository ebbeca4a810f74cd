import math

import numpy as np
import pytest
from scipy.special import spherical_jn, spherical_yn

from app.core.errors import BesselArgumentError
from app.services.bessel_service import (
    bessel_table,
    riccati_derivatives,
    riccati_log_table,
    series_jn,
    series_table,
)


def test_j0_at_pi():
    assert bessel_table(4, math.pi).j[0] == pytest.approx(0.0, abs=1e-14)


def test_j1_at_two():
    expected = math.sin(2.0) / 4.0 - math.cos(2.0) / 2.0
    assert bessel_table(3, 2.0).j[1] == pytest.approx(expected, rel=1e-13)
    assert expected == pytest.approx(0.435398, abs=1e-6)


def test_h0_at_one():
    assert bessel_table(2, 1.0).h[0] == pytest.approx(-1j * np.exp(1j), abs=1e-14)


@pytest.mark.parametrize("z", [0.3, 1.0, 5.0, 20.0, 75.0])
def test_matches_scipy(z):
    table = bessel_table(20, z)
    n = np.arange(21)
    assert np.allclose(table.j, spherical_jn(n, z), rtol=1e-11, atol=1e-14)
    assert np.allclose(table.y, spherical_yn(n, z), rtol=1e-11, atol=1e-14)
    assert np.allclose(table.dj, spherical_jn(n, z, derivative=True), rtol=1e-10, atol=1e-14)
    assert np.allclose(table.dy, spherical_yn(n, z, derivative=True), rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("z", [0.5, 1.0, 5.0, 20.0])
def test_wronskian(z):
    assert np.max(bessel_table(20, z).wronskian_residual()) < 1e-10


def test_array_argument_shape():
    z = np.linspace(0.5, 4.0, 7)
    table = bessel_table(5, z)
    assert table.j.shape == (6, 7)
    assert np.allclose(table.j[2], spherical_jn(2, z), rtol=1e-12)


def test_riccati_closed_forms():
    rt = riccati_derivatives(bessel_table(3, 1.0))
    assert rt.psi[0] == pytest.approx(math.sin(1.0), rel=1e-14)
    assert rt.dpsi[0] == pytest.approx(math.cos(1.0), rel=1e-14)
    assert rt.xi[0] == pytest.approx(-1j * np.exp(1j), abs=1e-14)


def test_riccati_derivative_against_finite_difference():
    h = 1e-5
    psi = lambda z: riccati_derivatives(bessel_table(3, z)).psi[3]  # noqa: E731
    fd = (psi(5.0 + h) - psi(5.0 - h)) / (2.0 * h)
    assert riccati_derivatives(bessel_table(3, 5.0)).dpsi[3] == pytest.approx(fd, abs=1e-8)


def test_riccati_product_rule():
    table = bessel_table(10, 3.7)
    rt = riccati_derivatives(table)
    assert np.allclose(rt.dpsi, table.j + 3.7 * table.dj, atol=1e-12)
    assert np.allclose(rt.dxi, table.h + 3.7 * table.dh, atol=1e-12)


@pytest.mark.parametrize("z", [0.7, 5.0, 30.0])
def test_log_table_matches_riccati_functions(z):
    lt = riccati_log_table(20, z)
    rt = riccati_derivatives(bessel_table(20, z))
    assert np.allclose(np.exp(lt.log_psi), rt.psi, rtol=1e-10, atol=0.0)
    assert np.allclose(np.exp(lt.log_xi), rt.xi, rtol=1e-10, atol=0.0)
    assert np.allclose(lt.D * rt.psi, rt.dpsi, rtol=1e-9, atol=1e-12)
    assert np.allclose(lt.G * rt.xi, rt.dxi, rtol=1e-10, atol=0.0)


def test_log_table_finite_where_y_overflows():
    z = 0.02
    with np.errstate(over="ignore", invalid="ignore"):
        assert not np.all(np.isfinite(bessel_table(120, z).y))
    lt = riccati_log_table(120, z)
    for values in (lt.D, lt.G, lt.log_psi, lt.log_xi):
        assert np.all(np.isfinite(values))
    # psi_n xi_n (G_n - D_n) is the Riccati Wronskian i at every order
    assert np.allclose(np.exp(lt.log_psi + lt.log_xi) * (lt.G - lt.D), 1j, rtol=1e-10, atol=0.0)


def test_log_table_rejects_array_argument():
    with pytest.raises(BesselArgumentError):
        riccati_log_table(4, np.array([1.0, 2.0]))


@pytest.mark.parametrize("z", [1e-3, 0.05, 0.2, 0.5])
def test_recurrence_matches_power_series(z):
    j_series, dj_series = series_table(10, z)
    table = bessel_table(10, z)
    assert np.allclose(table.j, j_series, rtol=1e-12, atol=0.0)
    assert np.allclose(table.dj, dj_series, rtol=1e-11, atol=1e-300)


def test_series_jn_single_order():
    assert series_jn(2, 0.3) == pytest.approx(spherical_jn(2, 0.3), rel=1e-13)


@pytest.mark.parametrize(
    "order, z",
    [(4, 1e-9), (4, 0.0), (4, 1.0 + 0.5j), (-1, 1.0), (10_000, 1.0)],
)
def test_rejects_bad_requests(order, z):
    with pytest.raises(BesselArgumentError):
        bessel_table(order, z)

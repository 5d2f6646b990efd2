"""Quadrature rules, probe frames and the shared Fourier conventions."""

import numpy as np
import pytest

import emsourcelab as em
from emsourcelab.errors import BandwidthError, GeometryError
from emsourcelab.geometry import simpson_weights
from emsourcelab.sources import BumpProfile


def test_gauss_legendre_polynomial_exactness():
    # n-point rule is exact through degree 2n - 1
    nodes, weights = em.gauss_legendre(5, 0.0, 2.0)
    for k in range(10):
        exact = 2.0 ** (k + 1) / (k + 1)
        np.testing.assert_allclose(weights @ nodes ** k, exact, rtol=1e-13)


def test_gauss_legendre_interval_scaling():
    nodes, weights = em.gauss_legendre(8, -1.5, 3.0)
    assert np.all(nodes > -1.5) and np.all(nodes < 3.0)
    np.testing.assert_allclose(weights.sum(), 4.5, rtol=1e-14)


@pytest.mark.parametrize("n_polar,n_azimuth", [(4, 8), (8, 16), (16, 32)])
def test_direction_grid_measure(n_polar, n_azimuth):
    dirs, w = em.direction_grid(n_polar, n_azimuth)
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0, atol=1e-14)
    np.testing.assert_allclose(w.sum(), 4.0 * np.pi, rtol=1e-13)
    # second moments of the uniform measure: int (d.e)^2 = 4 pi / 3
    for axis in np.eye(3):
        np.testing.assert_allclose(w @ (dirs @ axis) ** 2, 4.0 * np.pi / 3.0,
                                   rtol=1e-12)


def test_direction_grid_antipodally_closed():
    dirs, _ = em.direction_grid(6, 12)
    for d in dirs:
        gap = np.min(np.linalg.norm(dirs + d, axis=1))
        assert gap < 1e-13


def test_direction_grid_rejects_empty():
    with pytest.raises(GeometryError):
        em.direction_grid(0, 8)


def test_sphere_grid_scales_with_radius():
    grid = em.SphereGrid.build(2.5, 6, 12)
    assert grid.size == 72
    np.testing.assert_allclose(np.linalg.norm(grid.nodes, axis=1), 2.5,
                               atol=1e-13)
    np.testing.assert_allclose(grid.weights.sum(), 4.0 * np.pi * 2.5 ** 2,
                               rtol=1e-13)
    np.testing.assert_allclose(grid.nodes, 2.5 * grid.normals, atol=1e-14)
    with pytest.raises(GeometryError):
        em.SphereGrid.build(0.0, 6, 12)


@pytest.mark.parametrize("count", [2, 3, 4, 5, 9, 10, 64, 101])
def test_simpson_weights_constant_and_cubic(count):
    w = simpson_weights(count, 3.0)
    nodes = np.linspace(0.0, 3.0, count)
    np.testing.assert_allclose(w.sum(), 3.0, rtol=1e-13)
    if count >= 4:
        # Simpson and 3/8 segments are both exact on cubics
        np.testing.assert_allclose(w @ nodes ** 3, 3.0 ** 4 / 4.0, rtol=1e-12)


def test_time_grid_basics():
    tg = em.TimeGrid.build(5.0, 11)
    assert tg.count == 11
    np.testing.assert_allclose(tg.step, 0.5)
    np.testing.assert_allclose(tg.nodes[[0, -1]], [0.0, 5.0])
    with pytest.raises(GeometryError):
        em.TimeGrid.build(-1.0, 11)


def test_medium_params():
    med = em.MediumParams(n=4.0)
    assert med.sqrt_n == 2.0
    assert med.wave_speed == 0.5
    assert med.sigma == 0.0
    with pytest.raises(GeometryError):
        em.MediumParams(n=0.0)


def test_make_probe_orthonormal_frame():
    med = em.MediumParams(n=2.0)
    d = np.array([1.0, 2.0, -0.5])
    d /= np.linalg.norm(d)
    probe = em.make_probe(d, 1.7, med)
    np.testing.assert_allclose(probe.kappa, np.sqrt(2.0) * 1.7, rtol=1e-15)
    for u, v in [(probe.d, probe.p), (probe.d, probe.q), (probe.p, probe.q)]:
        assert abs(u @ v) < 1e-14
    np.testing.assert_allclose(np.cross(probe.d, probe.p), probe.q,
                               atol=1e-14)
    np.testing.assert_allclose([np.linalg.norm(probe.p),
                                np.linalg.norm(probe.q)], 1.0, atol=1e-14)


def test_make_probe_reference_axis_switch():
    med = em.MediumParams(n=1.0)
    # nearly parallel to e1: frame must fall back to the e2 reference
    probe = em.make_probe(np.array([1.0, 0.0, 0.0]), 1.0, med)
    np.testing.assert_allclose(probe.p, [0.0, 1.0, 0.0], atol=1e-14)
    probe = em.make_probe(np.array([0.0, 0.0, 1.0]), 1.0, med)
    np.testing.assert_allclose(probe.p, [1.0, 0.0, 0.0], atol=1e-14)


def test_make_probe_frame_even_in_direction():
    med = em.MediumParams(n=1.0)
    d = np.array([0.3, -0.5, 0.6])
    d /= np.linalg.norm(d)
    fwd = em.make_probe(d, 2.0, med)
    bwd = em.make_probe(-d, 2.0, med)
    np.testing.assert_allclose(bwd.p, fwd.p, atol=1e-14)
    np.testing.assert_allclose(bwd.q, -fwd.q, atol=1e-14)


def test_make_probe_validation():
    med = em.MediumParams(n=1.0)
    with pytest.raises(GeometryError):
        em.make_probe(np.array([1.0, 1.0, 0.0]), 1.0, med)
    with pytest.raises(GeometryError):
        em.make_probe(np.array([0.0, 0.0, 1.0]), -1.0, med)


def test_swap_polarization_right_handed():
    med = em.MediumParams(n=1.0)
    d = np.array([0.0, 0.6, 0.8])
    probe = em.make_probe(d, 1.0, med)
    swapped = probe.swap_polarization()
    np.testing.assert_allclose(swapped.p, probe.q, atol=1e-15)
    np.testing.assert_allclose(swapped.q, -probe.p, atol=1e-14)
    assert swapped.omega == probe.omega


def test_fourier_time_profile_frozen_values():
    profile = BumpProfile()
    ghat0 = em.fourier_time_profile(profile, 0.0)
    np.testing.assert_allclose(ghat0, 0.1581138829682639 + 0j, rtol=1e-12)
    ghat = em.fourier_time_profile(profile, 1.5)
    np.testing.assert_allclose(
        ghat, 0.010874351009836797 - 0.15334379024265957j, rtol=1e-11)


def test_fourier_time_profile_conjugate_symmetry():
    profile = BumpProfile()
    plus = em.fourier_time_profile(profile, 2.3)
    minus = em.fourier_time_profile(profile, -2.3)
    np.testing.assert_allclose(minus, np.conj(plus), rtol=1e-12)


def test_fourier_time_profile_explicit_support():
    val = em.fourier_time_profile(np.cos, 0.0, support=(0.0, np.pi / 2))
    np.testing.assert_allclose(val, 1.0 / np.sqrt(2.0 * np.pi), rtol=1e-12)


def test_bandwidth_condition_holds_for_bump():
    report = em.verify_bandwidth_condition(BumpProfile(), 2.0, 1e-8)
    assert report.ok
    assert report.min_abs > 1e-3


def test_bandwidth_condition_detects_transform_zero():
    # ghat of the indicator of (0, 2) vanishes at omega = pi
    report = em.verify_bandwidth_condition(lambda t: np.ones_like(t), 4.0,
                                           1e-3, support=(0.0, 2.0))
    assert not report.ok
    assert abs(report.argmin_omega - np.pi) < 0.05
    with pytest.raises(BandwidthError):
        em.require_bandwidth(lambda t: np.ones_like(t), 4.0, 1e-3,
                             support=(0.0, 2.0))


def test_plane_wave_and_curl_consistency():
    med = em.MediumParams(n=3.0)
    d = np.array([0.0, 0.8, -0.6])
    probe = em.make_probe(d, 2.0, med)
    x = np.array([[0.1, -0.2, 0.3]])
    t = 0.7
    field = em.plane_wave_field(probe, x, t)[0]
    curl = em.curl_plane_wave(probe, x, t)[0]
    # curl E = -i kappa d x E for a plane wave
    np.testing.assert_allclose(curl, -1j * probe.kappa * np.cross(probe.d,
                                                                  field),
                               rtol=1e-13)
    np.testing.assert_allclose(np.linalg.norm(curl),
                               med.sqrt_n * probe.omega, rtol=1e-13)

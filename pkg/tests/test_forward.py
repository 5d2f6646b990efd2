"""Retarded-potential solver: wave equation, causality, curl kernel."""

import numpy as np
import pytest

import emsourcelab as em
from emsourcelab.errors import GeometryError

MED = em.MediumParams(n=2.0)


def _pde_residual(source, medium, x, t, h, k, resolution):
    """n d2_t E - lap E via a 7-point space stencil and 3-point time
    stencil; equals the source term where the field is resolved."""
    pts = [x]
    for c in range(3):
        for sgn in (1.0, -1.0):
            p = np.array(x)
            p[c] += sgn * h
            pts.append(p)
    field = em.retarded_field(source, np.array(pts), [t - k, t, t + k],
                              medium, resolution=resolution)
    lap = (field[1:, 1].sum(axis=0) - 6.0 * field[0, 1]) / h ** 2
    dtt = (field[0, 0] - 2.0 * field[0, 1] + field[0, 2]) / k ** 2
    return medium.n * dtt - lap


def test_wave_equation_outside_support(reference_source):
    # source-free region: the homogeneous equation holds to stencil accuracy
    x = np.array([0.65, 0.0, 0.1])
    res = _pde_residual(reference_source, MED, x, 2.0, 1e-3, 1e-3, 48)
    scale = np.linalg.norm(
        em.retarded_field(reference_source, x[None, :], [2.0], MED,
                          resolution=48))
    assert np.linalg.norm(res) < 1e-3 * scale


def test_wave_equation_recovers_source(reference_source):
    # inside the support the residual reproduces F(x, t); the stencil step
    # must stay above the quadrature cell so the kernel singularity is
    # resolved rather than summed term by term
    x = np.array([0.2, 0.1, 0.0])
    t = 1.0
    res = _pde_residual(reference_source, MED, x, t, 0.08, 0.01, 64)
    f_val = reference_source.evaluate(x[None, :], t)[0]
    np.testing.assert_allclose(res, f_val,
                               atol=0.02 * np.linalg.norm(f_val))


def test_causality_exact_zero(reference_source):
    x = np.array([0.9, 0.0, 0.0])
    # travel time from the nearest support point
    t_first = MED.sqrt_n * (0.9 - reference_source.support_radius)
    field = em.retarded_field(reference_source, x[None, :],
                              [0.5 * t_first, 0.99 * t_first], MED,
                              resolution=32)
    np.testing.assert_array_equal(field, 0.0)
    after = em.retarded_field(reference_source, x[None, :],
                              [t_first + 0.5], MED, resolution=32)
    assert np.linalg.norm(after) > 0.0


def test_field_linear_in_source(reference_source):
    x = np.array([[0.7, 0.2, -0.1]])
    ts = [1.5, 2.0]
    base = em.retarded_field(reference_source, x, ts, MED, resolution=24)
    scaled = em.retarded_field(reference_source.scaled(3.0), x, ts, MED,
                               resolution=24)
    np.testing.assert_allclose(scaled, 3.0 * base, rtol=1e-13)


def test_field_time_translation(reference_source):
    x = np.array([[0.7, 0.2, -0.1]])
    base = em.retarded_field(reference_source, x, [1.7], MED, resolution=24)
    moved = em.retarded_field(reference_source.time_shifted(0.4), x, [2.1],
                              MED, resolution=24)
    np.testing.assert_allclose(moved, base, rtol=1e-12)


def test_retarded_curl_matches_finite_difference(reference_source):
    med = em.MediumParams(n=1.5)
    x = np.array([0.75, -0.2, 0.3])
    t = 2.2
    h = 1e-4
    curl = em.retarded_curl(reference_source, x[None, :], [t], med,
                            resolution=48)[0, 0]
    partial = []
    for c in range(3):
        plus = np.array(x)
        minus = np.array(x)
        plus[c] += h
        minus[c] -= h
        ep = em.retarded_field(reference_source, plus[None, :], [t], med,
                               resolution=48)[0, 0]
        em_ = em.retarded_field(reference_source, minus[None, :], [t], med,
                                resolution=48)[0, 0]
        partial.append((ep - em_) / (2.0 * h))
    fd = np.array([partial[1][2] - partial[2][1],
                   partial[2][0] - partial[0][2],
                   partial[0][1] - partial[1][0]])
    np.testing.assert_allclose(curl, fd, rtol=1e-6)


def test_sphere_snapshot_matches_pointwise_field(reference_source):
    pts, snap = em.sphere_snapshot(reference_source, MED, 1.0, 2.0,
                                   n_polar=4, n_azimuth=8, resolution=24)
    direct = em.retarded_field(reference_source, pts, [2.0], MED,
                               resolution=24)[:, 0, :]
    np.testing.assert_array_equal(snap, direct)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-14)


def test_huygens_horizon_value(reference_source):
    med = em.MediumParams(n=4.0)
    horizon = em.huygens_horizon(reference_source, med, 1.0)
    np.testing.assert_allclose(horizon, reference_source.duration + 4.0)


def test_huygens_residual_needs_late_time(reference_source):
    horizon = em.huygens_horizon(reference_source, MED, 1.0)
    pts = em.sample_ball_points(1.0, 10)
    with pytest.raises(GeometryError):
        em.huygens_residual(reference_source, MED, pts, 0.9 * horizon,
                            resolution=16)


def test_huygens_residual_small_after_passage(reference_source):
    med = em.MediumParams(n=1.0)
    horizon = em.huygens_horizon(reference_source, med, 1.0)
    pts = em.sample_ball_points(1.0, 20, seed=11)
    residual, peak = em.huygens_residual(reference_source, med, pts,
                                         horizon + 0.5, n_scan=6,
                                         resolution=24)
    assert peak > 0.0
    assert residual < 1e-10 * peak


def test_sample_ball_points_layout():
    pts = em.sample_ball_points(2.0, 40, seed=3)
    again = em.sample_ball_points(2.0, 40, seed=3)
    np.testing.assert_array_equal(pts, again)
    radii = np.linalg.norm(pts, axis=1)
    assert radii.max() <= 2.0 + 1e-12
    # half the budget probes the bounding sphere itself
    assert np.sum(np.abs(radii - 2.0) < 1e-12) == 20
    other = em.sample_ball_points(2.0, 40, seed=4)
    assert not np.array_equal(pts, other)

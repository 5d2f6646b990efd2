"""Source families: support, smoothness, divergence and serialization."""

import numpy as np
import pytest

import emsourcelab as em
from emsourcelab.errors import ConfigError
from emsourcelab.sources import (BumpProfile, build_source, combine,
                                 profile_from_descriptor,
                                 ring_current_source, two_term_general_source,
                                 x3_factored_source)


def _numerical_divergence(source, point, t, h=1e-5):
    div = 0.0
    for c in range(3):
        plus = np.array(point)
        minus = np.array(point)
        plus[c] += h
        minus[c] -= h
        div += (source.evaluate(plus[None, :], t)[0, c]
                - source.evaluate(minus[None, :], t)[0, c]) / (2.0 * h)
    return div


@pytest.fixture(params=["gaussian_curl", "ring", "two_term", "x3"])
def any_source(request):
    if request.param == "gaussian_curl":
        return em.gaussian_curl_source(amplitude=0.65, width=0.15,
                                       support_radius=0.5, core_fraction=0.7)
    if request.param == "ring":
        return ring_current_source(tube_width=0.02)
    if request.param == "two_term":
        return two_term_general_source(width=0.1)
    return x3_factored_source(width=0.1)


def test_divergence_free_at_interior_points(any_source, rng):
    t = 1.0
    # random points well inside the support where the field is smooth
    pts = rng.uniform(-0.2, 0.2, size=(12, 3)) + np.array([0.25, 0.0, 0.0])
    scale = np.max(np.abs(any_source.evaluate(pts, t))) + 1e-30
    for point in pts:
        div = _numerical_divergence(any_source, point, t)
        assert abs(div) < 2e-6 * max(scale, 1.0)


def test_exact_zero_outside_support(any_source, rng):
    t = 1.0
    dirs = rng.standard_normal((8, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = dirs * (any_source.support_radius * 1.0001)
    np.testing.assert_array_equal(any_source.evaluate(pts, t), 0.0)
    # and in time: outside the profile window the source is off everywhere
    inside = np.array([[0.1, 0.05, -0.02]])
    np.testing.assert_array_equal(
        any_source.evaluate(inside, any_source.duration + 1e-9), 0.0)


def test_bump_profile_window_and_derivative():
    prof = BumpProfile(amplitude=2.0, center=1.0, eta=0.05)
    assert prof.support == (0.0, 2.0)
    assert prof(-0.1) == 0.0 and prof(2.1) == 0.0
    np.testing.assert_allclose(prof(1.0), 2.0)
    ts = np.linspace(0.2, 1.8, 9)
    h = 1e-6
    fd = (prof(ts + h) - prof(ts - h)) / (2.0 * h)
    np.testing.assert_allclose(prof.derivative(ts), fd, rtol=1e-7, atol=1e-9)


def test_bump_profile_smooth_margin_derivative():
    prof = BumpProfile(margin=0.3)
    ts = np.linspace(0.05, 1.95, 25)
    h = 1e-6
    fd = (prof(ts + h) - prof(ts - h)) / (2.0 * h)
    np.testing.assert_allclose(prof.derivative(ts), fd, rtol=2e-6, atol=1e-10)


def test_bump_profile_validation():
    with pytest.raises(ConfigError):
        BumpProfile(eta=0.0)
    with pytest.raises(ConfigError):
        BumpProfile(win_a=1.0, win_b=0.5)
    with pytest.raises(ConfigError):
        BumpProfile(margin=1.5)


def test_profile_shift_and_scale():
    prof = BumpProfile(amplitude=1.5)
    shifted = prof.shifted(0.7)
    np.testing.assert_allclose(shifted(1.7), prof(1.0), rtol=1e-15)
    assert shifted.support == (0.7, 2.7)
    scaled = prof.scaled(2.0)
    np.testing.assert_allclose(scaled(0.9), 2.0 * prof(0.9), rtol=1e-15)


def test_source_scaling_is_linear(rng):
    src = em.gaussian_curl_source(width=0.1)
    pts = rng.uniform(-0.3, 0.3, size=(5, 3))
    np.testing.assert_allclose(src.scaled(3.0).evaluate(pts, 0.9),
                               3.0 * src.evaluate(pts, 0.9), rtol=1e-14)


def test_source_time_shift(rng):
    src = em.gaussian_curl_source(width=0.1)
    moved = src.time_shifted(0.4)
    pts = rng.uniform(-0.3, 0.3, size=(5, 3))
    np.testing.assert_allclose(moved.evaluate(pts, 1.4),
                               src.evaluate(pts, 1.0), rtol=1e-14)
    assert moved.duration == src.duration + 0.4


def test_evaluate_dt_matches_finite_difference(rng):
    src = em.gaussian_curl_source(width=0.1)
    pts = rng.uniform(-0.3, 0.3, size=(4, 3))
    h = 1e-6
    fd = (src.evaluate(pts, 1.1 + h) - src.evaluate(pts, 1.1 - h)) / (2 * h)
    np.testing.assert_allclose(src.evaluate_dt(pts, 1.1), fd, rtol=1e-7,
                               atol=1e-12)


def test_gaussian_curl_field_is_azimuthal():
    src = em.gaussian_curl_source(width=0.15, axis=(0.0, 0.0, 1.0))
    pts = np.array([[0.2, 0.1, -0.05], [0.0, 0.25, 0.1]])
    vals = src.term_spatial_values(pts)[0]
    # f = slope(r) (x cross e3) has no vertical component and is orthogonal
    # to the transverse position
    np.testing.assert_array_equal(vals[:, 2], 0.0)
    np.testing.assert_allclose(np.einsum("nc,nc->n", vals[:, :2],
                                         pts[:, :2]), 0.0, atol=1e-16)


def test_ring_current_is_azimuthal_and_localized():
    src = ring_current_source(tube_width=0.02)
    on_ring = np.array([[0.25, 0.0, 0.0]])
    val = src.evaluate(on_ring, 1.0)[0]
    assert abs(val[1]) > 0.0 and abs(val[0]) < 1e-15 and abs(val[2]) < 1e-15
    far = np.array([[0.25, 0.0, 0.21]])
    np.testing.assert_array_equal(src.evaluate(far, 1.0), 0.0)
    with pytest.raises(ConfigError):
        ring_current_source(ring_radius=0.1, tube_radius=0.2)


def test_two_term_superposition_and_axes():
    src = two_term_general_source(width=0.1)
    assert len(src.terms) == 2
    assert src.kind == "general"
    with pytest.raises(ConfigError):
        _ = src.profile
    pt = np.array([[0.2, 0.1, 0.0]])
    for t in (0.7, 1.3):
        total = src.evaluate(pt, t)
        by_term = sum(term.spatial(pt) * float(term.profile(t))
                      for term in src.terms)
        np.testing.assert_allclose(total, by_term, rtol=1e-14)
    # distinct rotation axes: term 0 circulates about e3, term 1 about e1
    assert src.terms[0].spatial(pt)[0, 2] == 0.0
    assert src.terms[1].spatial(pt)[0, 0] == 0.0
    # by t = 1.3 the early profile has decayed well under the late one
    early = np.linalg.norm(src.terms[0].spatial(pt) * float(src.terms[0].profile(1.3)))
    late = np.linalg.norm(src.terms[1].spatial(pt) * float(src.terms[1].profile(1.3)))
    assert early < 0.02 * late


def test_x3_factored_structure():
    src = x3_factored_source(width=0.1)
    assert src.kind == "x3-factored"
    assert src.x3_profile is not None
    pts = np.array([[0.2, -0.1, 0.3], [0.2, -0.1, 0.0]])
    vals = src.evaluate(pts, 1.0)
    tv = src.transverse_evaluate(pts[:, :2], 1.0)
    g3 = np.asarray(src.x3_profile(pts[:, 2]))
    np.testing.assert_allclose(vals, tv * g3[:, None], rtol=1e-14)
    # outside the axial window the factor cuts the field to zero
    np.testing.assert_array_equal(
        src.evaluate(np.array([[0.2, -0.1, 0.51]]), 1.0), 0.0)


def test_combine_superposes_terms(rng):
    a = em.gaussian_curl_source(width=0.1)
    b = ring_current_source(tube_width=0.02)
    both = combine(a, b)
    assert both.kind == "general"
    pts = rng.uniform(-0.2, 0.2, size=(6, 3))
    np.testing.assert_allclose(both.evaluate(pts, 1.0),
                               a.evaluate(pts, 1.0) + b.evaluate(pts, 1.0),
                               rtol=1e-14)


def test_build_source_round_trip(rng):
    src = em.gaussian_curl_source(amplitude=0.65, width=0.15,
                                  support_radius=0.5, core_fraction=0.7)
    rebuilt = build_source(src.descriptor)
    pts = rng.uniform(-0.4, 0.4, size=(10, 3))
    np.testing.assert_allclose(rebuilt.evaluate(pts, 0.8),
                               src.evaluate(pts, 0.8), rtol=1e-15)
    assert rebuilt.descriptor == src.descriptor


@pytest.mark.parametrize("factory", [two_term_general_source,
                                     x3_factored_source])
def test_build_source_round_trip_multiterm(factory, rng):
    src = factory(width=0.1)
    rebuilt = build_source(src.descriptor)
    pts = rng.uniform(-0.3, 0.3, size=(6, 3))
    np.testing.assert_allclose(rebuilt.evaluate(pts, 1.1),
                               src.evaluate(pts, 1.1), rtol=1e-15)


def test_build_source_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="family"):
        build_source({"amplitude": 1.0})
    with pytest.raises(ConfigError, match="unknown source family"):
        build_source({"family": "plasma_torus"})
    with pytest.raises(ConfigError, match="unknown source keys"):
        build_source({"family": "gaussian_curl", "widht": 0.1})
    with pytest.raises(ConfigError, match="unknown time profile keys"):
        profile_from_descriptor({"amplitude": 1.0, "centre": 0.9})


def test_source_model_validation():
    with pytest.raises(ConfigError):
        em.SourceModel(kind="mystery", support_radius=1.0, duration=1.0,
                       terms=(None,))
    with pytest.raises(ConfigError):
        em.SourceModel(kind="separable", support_radius=1.0, duration=1.0,
                       terms=())


def test_box_half_defaults_to_cube():
    src = em.gaussian_curl_source(support_radius=0.4)
    assert src.box_half == (0.4, 0.4, 0.4)
    ring = ring_current_source(tube_width=0.02)
    assert ring.box_half[2] < ring.box_half[0]

"""Boundary records: traces, discrepancy norm, noise and serialization."""

import json

import numpy as np
import pytest

import emsourcelab as em
from emsourcelab.errors import ConfigError, GeometryError, RegionError


def test_record_requires_interior_support(reference_source, medium1):
    sphere = em.SphereGrid.build(0.4, 4, 8)
    tgrid = em.TimeGrid.build(5.0, 32)
    with pytest.raises(GeometryError, match="support"):
        em.record_boundary_data(reference_source, medium1, sphere, tgrid,
                                resolution=8)


def test_record_requires_long_horizon(reference_source):
    med = em.MediumParams(n=4.0)
    sphere = em.SphereGrid.build(1.0, 4, 8)
    # needs horizon > duration + 2 sqrt(n) R = 6
    tgrid = em.TimeGrid.build(5.5, 32)
    with pytest.raises(GeometryError, match="horizon"):
        em.record_boundary_data(reference_source, med, sphere, tgrid,
                                resolution=8)


def test_traces_are_tangential(coarse_record):
    for trace in (coarse_record.trace_e, coarse_record.trace_curl):
        radial = np.einsum("xtc,xc->xt", trace, coarse_record.sphere.normals)
        assert np.max(np.abs(radial)) < 1e-14 * max(np.max(np.abs(trace)),
                                                    1e-30)


def test_trace_shape_validation(coarse_record):
    bad = np.zeros((3, 4, 3))
    with pytest.raises(ConfigError, match="shape"):
        coarse_record.with_traces(bad, bad)


def test_records_are_read_only(coarse_record):
    with pytest.raises(ValueError):
        coarse_record.trace_e[0, 0, 0] = 1.0


def test_measurement_epsilon_homogeneous(coarse_record):
    eps = em.measurement_epsilon(coarse_record)
    assert eps > 0.0
    np.testing.assert_allclose(em.measurement_epsilon(coarse_record.scaled(2.0)),
                               2.0 * eps, rtol=1e-14)


def test_record_difference_zero_for_identical(coarse_record):
    diff = em.record_difference(coarse_record, coarse_record)
    assert em.measurement_epsilon(diff) == 0.0
    other = coarse_record.with_traces(
        np.zeros_like(coarse_record.trace_e),
        np.zeros_like(coarse_record.trace_curl))
    np.testing.assert_allclose(
        em.measurement_epsilon(em.record_difference(coarse_record, other)),
        em.measurement_epsilon(coarse_record), rtol=1e-15)


def test_noise_hits_target_discrepancy(coarse_record):
    spec = em.NoiseSpec(target_epsilon=0.05, seed=21)
    noisy = em.add_noise(coarse_record, spec)
    perturbation = em.record_difference(noisy, coarse_record)
    np.testing.assert_allclose(em.measurement_epsilon(perturbation), 0.05,
                               rtol=1e-12)


def test_noise_is_tangential_and_deterministic(coarse_record):
    spec = em.NoiseSpec(target_epsilon=0.02, seed=5)
    a = em.add_noise(coarse_record, spec)
    b = em.add_noise(coarse_record, spec)
    np.testing.assert_array_equal(a.trace_e, b.trace_e)
    np.testing.assert_array_equal(a.trace_curl, b.trace_curl)
    delta = a.trace_e - coarse_record.trace_e
    radial = np.einsum("xtc,xc->xt", delta, coarse_record.sphere.normals)
    assert np.max(np.abs(radial)) < 1e-14 * np.max(np.abs(delta))
    c = em.add_noise(coarse_record, em.NoiseSpec(target_epsilon=0.02, seed=6))
    assert not np.array_equal(a.trace_e, c.trace_e)
    assert a.provenance["noise"]["seed"] == 5


def test_noise_spec_validation():
    with pytest.raises(ConfigError):
        em.NoiseSpec(target_epsilon=0.0, seed=1)
    with pytest.raises(ConfigError):
        em.NoiseSpec(target_epsilon=0.1, seed=1, model="uniform")


def test_record_round_trip_bit_exact(coarse_record, tmp_path):
    path = tmp_path / "record"
    em.save_record(coarse_record, path)
    loaded = em.load_record(path)
    np.testing.assert_array_equal(loaded.trace_e, coarse_record.trace_e)
    np.testing.assert_array_equal(loaded.trace_curl, coarse_record.trace_curl)
    assert loaded.medium.n == coarse_record.medium.n
    assert loaded.sphere.n_polar == coarse_record.sphere.n_polar
    assert loaded.tgrid.count == coarse_record.tgrid.count
    assert loaded.provenance == coarse_record.provenance


def test_load_record_missing_path(tmp_path):
    with pytest.raises(FileNotFoundError):
        em.load_record(tmp_path / "nothing_here")


def test_load_record_corrupt_manifest(coarse_record, tmp_path):
    path = tmp_path / "record"
    em.save_record(coarse_record, path)
    (path / "manifest.json").write_text("{not json")
    with pytest.raises(ConfigError, match="corrupt"):
        em.load_record(path)


def test_load_record_format_version(coarse_record, tmp_path):
    path = tmp_path / "record"
    em.save_record(coarse_record, path)
    manifest = json.loads((path / "manifest.json").read_text())
    manifest["format_version"] = 99
    (path / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(ConfigError, match="format"):
        em.load_record(path)


def test_record_family_lookup(ip2_family):
    assert ip2_family.n_values == (0.5, 1.0, 2.0, 3.5)
    rec = ip2_family.record_for(2.0)
    assert rec.medium.n == 2.0
    # a tiny perturbation still resolves to the same sheet
    assert ip2_family.record_for(2.0 * (1.0 + 1e-9)) is rec
    with pytest.raises(RegionError, match="no record"):
        ip2_family.record_for(1.7)
    eps_all = [em.measurement_epsilon(r) for r in ip2_family.records]
    np.testing.assert_allclose(ip2_family.sup_epsilon, max(eps_all))


def test_record_family_validation(coarse_record):
    with pytest.raises(ConfigError):
        em.RecordFamily(n_values=(1.0, 2.0), records=(coarse_record,))


def test_family_records_scale_with_medium(ip2_family):
    # slower media trap the field longer; all sheets carry signal
    for rec in ip2_family.records:
        assert em.measurement_epsilon(rec) > 0.0


def test_record_difference_grid_mismatch(coarse_record, reference_source,
                                         medium1):
    sphere = em.SphereGrid.build(1.0, 4, 8)
    tgrid = em.TimeGrid.build(5.0, 32)
    other = em.record_boundary_data(reference_source, medium1, sphere, tgrid,
                                    resolution=8)
    with pytest.raises(ConfigError):
        em.record_difference(coarse_record, other)

"""Shared fixtures: sources, media and boundary records reused across the
suite.  Records are expensive (minutes at the reference grids), so they are
session scoped and built lazily on first use."""

import numpy as np
import pytest

import emsourcelab as em
from emsourcelab.sources import two_term_general_source, x3_factored_source

# pass/fail lines from the acceptance gate, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


@pytest.fixture(scope="session")
def medium1():
    return em.MediumParams(n=1.0)


@pytest.fixture(scope="session")
def reference_source():
    """Moderate-width curl bump in the half-unit ball; amplitude tuned so
    the clean boundary record measures about 0.15."""
    return em.gaussian_curl_source(amplitude=0.65, width=0.15,
                                   support_radius=0.5, core_fraction=0.7)


@pytest.fixture(scope="session")
def smooth_source():
    """Wider-support curl bump whose spectrum is concentrated far inside
    band 28 (tail energy beyond 22.4 is a few 1e-5 of the total)."""
    return em.gaussian_curl_source(amplitude=1.0, width=0.06,
                                   support_radius=0.75, core_fraction=0.7)


@pytest.fixture(scope="session")
def reference_record(reference_source, medium1):
    sphere = em.SphereGrid.build(1.0, 24, 48)
    tgrid = em.TimeGrid.build(5.0, 384)
    return em.record_boundary_data(reference_source, medium1, sphere, tgrid,
                                   resolution=40)


@pytest.fixture(scope="session")
def smooth_record(smooth_source, medium1):
    sphere = em.SphereGrid.build(1.0, 24, 48)
    tgrid = em.TimeGrid.build(5.0, 384)
    return em.record_boundary_data(smooth_source, medium1, sphere, tgrid,
                                   resolution=40)


@pytest.fixture(scope="session")
def coarse_record(reference_source, medium1):
    """Small record for unit tests of the probing identities; still accurate
    to a few 1e-4 against the oracles."""
    sphere = em.SphereGrid.build(1.0, 12, 24)
    tgrid = em.TimeGrid.build(5.0, 160)
    return em.record_boundary_data(reference_source, medium1, sphere, tgrid,
                                   resolution=24)


@pytest.fixture(scope="session")
def ip2_source():
    return two_term_general_source()


@pytest.fixture(scope="session")
def ip2_family(ip2_source):
    sphere = em.SphereGrid.build(1.0, 16, 32)
    tgrid = em.TimeGrid.build(6.0, 320)
    return em.record_family(ip2_source, [0.5, 1.0, 2.0, 3.5], sphere, tgrid,
                            resolution=36)


@pytest.fixture(scope="session")
def ip3_source():
    return x3_factored_source()


@pytest.fixture(scope="session")
def ip3_record(ip3_source, medium1):
    sphere = em.SphereGrid.build(1.0, 16, 32)
    tgrid = em.TimeGrid.build(5.0, 320)
    return em.record_boundary_data(ip3_source, medium1, sphere, tgrid,
                                   resolution=36)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)

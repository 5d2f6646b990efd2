"""Boundary measurements: tangential field traces on the sphere.

A record holds E x nu and (curl E) x nu sampled on a sphere-time grid.
The measurement discrepancy is the L2(sphere x (0,T)) norm of both traces
combined; noise injection draws i.i.d. Gaussians, projects them tangential
and rescales the realization so the discrepancy of the perturbation hits
the requested target exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import ConfigError, GeometryError, RegionError
from .geometry import MediumParams, SphereGrid, TimeGrid
from .oracle import support_grid
from .sources import SourceModel

_FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class BoundaryRecord:
    """Sampled tangential traces on the measurement sphere.

    trace_e holds E x nu and trace_curl holds (curl E) x nu, both with
    shape (n_nodes, n_times, 3).
    """

    sphere: SphereGrid
    tgrid: TimeGrid
    medium: MediumParams
    trace_e: np.ndarray = field(repr=False)
    trace_curl: np.ndarray = field(repr=False)
    provenance: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        shape = (self.sphere.size, self.tgrid.count, 3)
        for name in ("trace_e", "trace_curl"):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ConfigError(
                    f"{name} has shape {arr.shape}, grids imply {shape}")
            arr.setflags(write=False)

    def with_traces(self, trace_e, trace_curl, provenance=None):
        return BoundaryRecord(self.sphere, self.tgrid, self.medium,
                              trace_e, trace_curl,
                              provenance if provenance is not None
                              else dict(self.provenance))

    def scaled(self, factor: float) -> "BoundaryRecord":
        return self.with_traces(factor * self.trace_e,
                                factor * self.trace_curl)


def record_boundary_data(source: SourceModel, medium: MediumParams,
                         sphere: SphereGrid, tgrid: TimeGrid,
                         resolution: int = 48) -> BoundaryRecord:
    """Fill a boundary record by retarded-potential evaluation at every
    (node, time) sample.

    Requires the source support strictly inside the sphere and a horizon
    long enough that the field has left the ball again (otherwise the
    probing identity of the inversion step acquires a volume remainder).
    """
    if source.support_radius >= sphere.radius:
        raise GeometryError(
            f"source support radius {source.support_radius} must lie inside "
            f"the measurement sphere radius {sphere.radius}")
    needed = source.duration + 2.0 * medium.sqrt_n * sphere.radius
    if not tgrid.horizon > needed:
        raise GeometryError(
            f"time horizon {tgrid.horizon} too short: need horizon > "
            f"duration + 2 sqrt(n) R = {needed:.6g}")
    points, w, values = support_grid(source, resolution)
    yfw = np.ascontiguousarray(w * values)
    gparams = np.ascontiguousarray(source.profile_params())
    trace_e = np.zeros((sphere.size, tgrid.count, 3))
    trace_curl = np.zeros_like(trace_e)
    _kernels.fill_boundary_record(sphere.nodes, sphere.normals, tgrid.nodes,
                                  points, yfw, gparams, medium.sqrt_n,
                                  trace_e, trace_curl)
    provenance = {"source": dict(source.descriptor), "medium_n": medium.n,
                  "volume_resolution": resolution, "noise": None}
    return BoundaryRecord(sphere, tgrid, medium, trace_e, trace_curl,
                          provenance)


def measurement_epsilon(record: BoundaryRecord) -> float:
    """Discrepancy norm
    (int_0^T int_sphere |curlE x nu|^2 + |E x nu|^2 ds dt)^(1/2)."""
    sq = (np.sum(record.trace_e * record.trace_e, axis=2)
          + np.sum(record.trace_curl * record.trace_curl, axis=2))
    total = record.sphere.weights @ sq @ record.tgrid.weights
    return float(np.sqrt(total))


def record_difference(a: BoundaryRecord, b: BoundaryRecord) -> BoundaryRecord:
    if a.trace_e.shape != b.trace_e.shape:
        raise ConfigError("records live on different grids")
    return a.with_traces(a.trace_e - b.trace_e, a.trace_curl - b.trace_curl,
                         {"difference": [a.provenance, b.provenance]})


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian perturbation with a target discrepancy."""

    target_epsilon: float
    seed: int
    model: str = "gaussian"

    def __post_init__(self):
        if self.model != "gaussian":
            raise ConfigError(f"unknown noise model {self.model!r}")
        if not self.target_epsilon > 0.0:
            raise ConfigError("target_epsilon must be positive")


def _tangential(noise: np.ndarray, normals: np.ndarray) -> np.ndarray:
    radial = np.einsum("xtc,xc->xt", noise, normals)
    return noise - radial[:, :, None] * normals[:, None, :]


def add_noise(record: BoundaryRecord, spec: NoiseSpec) -> BoundaryRecord:
    """Perturbed copy of the record; the perturbation alone has measurement
    discrepancy exactly spec.target_epsilon.  Deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    noise_e = _tangential(rng.standard_normal(record.trace_e.shape),
                          record.sphere.normals)
    noise_c = _tangential(rng.standard_normal(record.trace_curl.shape),
                          record.sphere.normals)
    raw = record.with_traces(noise_e, noise_c)
    scale = spec.target_epsilon / measurement_epsilon(raw)
    provenance = dict(record.provenance)
    provenance["noise"] = {"model": spec.model, "seed": spec.seed,
                           "target_epsilon": spec.target_epsilon}
    return record.with_traces(record.trace_e + scale * noise_e,
                              record.trace_curl + scale * noise_c,
                              provenance)


@dataclass(frozen=True, eq=False)
class RecordFamily:
    """Per-medium records of the same source on shared grids, for problems
    probed across a family of media."""

    n_values: tuple
    records: tuple

    def __post_init__(self):
        if len(self.n_values) != len(self.records):
            raise ConfigError("n_values and records length mismatch")

    @property
    def sup_epsilon(self) -> float:
        return max(measurement_epsilon(r) for r in self.records)

    def record_for(self, n: float, rtol: float = 1e-6) -> BoundaryRecord:
        values = np.asarray(self.n_values, dtype=float)
        idx = int(np.argmin(np.abs(values - n)))
        if abs(values[idx] - n) > rtol * max(1.0, abs(n)):
            raise RegionError(
                f"no record for medium n = {n:.9g}; sampled sheets are "
                f"{list(values)}")
        return self.records[idx]


def record_family(source: SourceModel, n_values, sphere: SphereGrid,
                  tgrid: TimeGrid, resolution: int = 48) -> RecordFamily:
    records = tuple(record_boundary_data(source, MediumParams(n=float(n)),
                                         sphere, tgrid, resolution)
                    for n in n_values)
    return RecordFamily(n_values=tuple(float(n) for n in n_values),
                        records=records)


def save_record(record: BoundaryRecord, path) -> None:
    """Serialize to a directory: manifest.json plus binary trace tables.
    The round-trip through load_record is bit-exact."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": _FORMAT_VERSION,
        "sphere": {"radius": record.sphere.radius,
                   "n_polar": record.sphere.n_polar,
                   "n_azimuth": record.sphere.n_azimuth},
        "time": {"horizon": record.tgrid.horizon,
                 "count": record.tgrid.count},
        "medium_n": record.medium.n,
        "provenance": record.provenance,
    }
    with open(root / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    np.save(root / "trace_e.npy", record.trace_e)
    np.save(root / "trace_curl.npy", record.trace_curl)


def load_record(path) -> BoundaryRecord:
    root = Path(path)
    try:
        with open(root / "manifest.json") as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise ConfigError(f"corrupt record manifest: {exc}") from exc
    if manifest.get("format_version") != _FORMAT_VERSION:
        raise ConfigError(
            f"unsupported record format {manifest.get('format_version')!r}")
    sphere = SphereGrid.build(manifest["sphere"]["radius"],
                              manifest["sphere"]["n_polar"],
                              manifest["sphere"]["n_azimuth"])
    tgrid = TimeGrid.build(manifest["time"]["horizon"],
                           manifest["time"]["count"])
    trace_e = np.load(root / "trace_e.npy")
    trace_curl = np.load(root / "trace_curl.npy")
    return BoundaryRecord(sphere, tgrid, MediumParams(n=manifest["medium_n"]),
                          trace_e, trace_curl, manifest["provenance"])

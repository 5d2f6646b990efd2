"""Plane-wave probing of boundary records.

Pairing a record with an incident plane wave collapses the boundary data to
one Fourier coefficient of the source, up to the transform of the time
profile.  Sweeping probe directions and frequencies fills a quadrature rule
over the resolvable frequency ball, and a weighted back-synthesis of those
samples gives the band-limited reconstruction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .boundary import BoundaryRecord, RecordFamily
from .errors import BandwidthError, ConfigError, RegionError
from .geometry import (MediumParams, PolarizationProbe, SpectralNodeSet,
                       direction_grid, fourier_time_profile, gauss_legendre,
                       make_probe, require_bandwidth)
from .sources import SourceModel

TWO_PI = 2.0 * np.pi
DELTA_MIN = 1e-8
_PAIR_FACTOR = TWO_PI ** 2


def probing_functional(record: BoundaryRecord,
                       probe: PolarizationProbe) -> complex:
    """Space-time quadrature of
    ``-int (curlE x nu).E_inc + (E x nu).curl(E_inc) ds dt``
    for one incident plane wave."""
    x_arg = probe.kappa * (record.sphere.nodes @ probe.d)
    phase_x = (np.cos(x_arg) - 1j * np.sin(x_arg)) * record.sphere.weights
    t_arg = probe.omega * record.tgrid.nodes
    phase_t = (np.cos(t_arg) - 1j * np.sin(t_arg)) * record.tgrid.weights
    cp = record.trace_curl @ probe.p
    eq = record.trace_e @ probe.q
    total = phase_x @ (cp - 1j * probe.kappa * eq) @ phase_t
    return complex(-total)


def spectral_sample_ip1(record: BoundaryRecord, probe: PolarizationProbe,
                        ghat: complex, delta: float = DELTA_MIN) -> complex:
    """One Fourier sample p.fhat(kappa d) of the spatial factor, obtained by
    dividing the probing functional by (2 pi)^2 ghat(omega)."""
    if abs(ghat) < delta:
        raise BandwidthError(
            f"|ghat| = {abs(ghat):.3e} below the floor {delta:.3e} at "
            f"omega = {probe.omega:.6g}")
    return probing_functional(record, probe) / (_PAIR_FACTOR * ghat)


def spectral_sample_ip2(family: RecordFamily, xi, omega: float,
                        component: str = "p") -> complex:
    """One Fourier sample p.Fhat(xi, omega) of the full space-time source,
    from the record whose medium puts (xi, omega) on its dispersion sheet."""
    xi = np.asarray(xi, dtype=float)
    if omega < 0.0:
        return np.conj(spectral_sample_ip2(family, -xi, -omega, component))
    kappa = float(np.linalg.norm(xi))
    if omega <= 0.0 or kappa == 0.0:
        raise RegionError("nodes on the sampled sheets have omega > 0 and "
                          "xi != 0")
    n = kappa ** 2 / omega ** 2
    record = family.record_for(n)
    probe = make_probe(xi / kappa, omega, record.medium)
    if component == "q":
        probe = probe.swap_polarization()
    elif component != "p":
        raise ConfigError(f"component must be 'p' or 'q', got {component!r}")
    return probing_functional(record, probe) / _PAIR_FACTOR


def spectral_sample_ip3(record: BoundaryRecord, probe: PolarizationProbe,
                        ghat_x3: complex, band: float | None = None,
                        delta: float = DELTA_MIN) -> complex:
    """One transverse-plane Fourier sample p.fhat(xi1, xi2, omega) for a
    source factored along the third axis; ghat_x3 is the transform of the
    axial profile at xi3 = kappa d3."""
    xi3 = probe.kappa * probe.d[2]
    if band is not None and abs(xi3) > band:
        raise RegionError(
            f"|xi3| = {abs(xi3):.6g} outside the axial band {band:.6g}")
    if abs(ghat_x3) < delta:
        raise BandwidthError(
            f"|ghat_x3| = {abs(ghat_x3):.3e} below the floor {delta:.3e} at "
            f"xi3 = {xi3:.6g}")
    return probing_functional(record, probe) / (_PAIR_FACTOR * ghat_x3)


@dataclass(frozen=True, eq=False)
class SpectralSamples:
    """Fourier samples of the source over a quadrature node set."""

    nodes: SpectralNodeSet
    p_component: np.ndarray = field(repr=False)
    q_component: np.ndarray = field(repr=False)
    band: float
    problem: str
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for name in ("p_component", "q_component"):
            arr = getattr(self, name)
            if arr.shape != (self.nodes.size,):
                raise ConfigError(f"{name} length {arr.shape} does not match "
                                  f"{self.nodes.size} nodes")
            arr.setflags(write=False)


def _time_transform(record: BoundaryRecord, omega_nodes: np.ndarray):
    """DFT of both traces against the record's time quadrature, one row per
    frequency; returns complex arrays of shape (K, Nx, 3)."""
    times = record.tgrid.nodes
    wt = record.tgrid.weights
    n_x = record.sphere.size
    arg = np.outer(omega_nodes, times)
    ct = np.cos(arg) * wt
    st = np.sin(arg) * wt
    out = []
    for trace in (record.trace_e, record.trace_curl):
        flat = np.ascontiguousarray(trace.transpose(1, 0, 2)
                                    ).reshape(len(times), 3 * n_x)
        hat = (ct @ flat) - 1j * (st @ flat)
        out.append(hat.reshape(len(omega_nodes), n_x, 3))
    return out


def _antipode_map(dirs: np.ndarray) -> np.ndarray:
    """Index of -d for each direction, or -1 when the grid does not contain
    it to round-off."""
    anti = np.full(len(dirs), -1, dtype=np.int64)
    for i in range(len(dirs)):
        j = int(np.argmin(np.sum((dirs + dirs[i]) ** 2, axis=1)))
        if np.max(np.abs(dirs[j] + dirs[i])) < 1e-12:
            anti[i] = j
    return anti


def assemble_spectrum_ip1(record: BoundaryRecord, profile, band: float,
                          n_polar: int = 16, n_azimuth: int = 32,
                          n_radial: int = 24, delta: float = DELTA_MIN,
                          check_bandwidth: bool = True,
                          bandwidth_grid: int = 128) -> SpectralSamples:
    """Probe the record over a product rule (directions x radial frequencies)
    covering the ball |xi| <= sqrt(n) band.

    Each direction is probed once; the antipodal partner is filled by
    conjugate symmetry of the transform of a real source.  Node weights
    carry the spherical volume element, so weighted sums over the samples
    approximate frequency-ball integrals.
    """
    if band <= 0.0:
        raise ConfigError("band must be positive")
    if check_bandwidth:
        require_bandwidth(profile, band, delta, grid=bandwidth_grid)
    medium = record.medium
    omega_nodes, omega_w = gauss_legendre(n_radial, 0.0, band)
    ghat = np.array([fourier_time_profile(profile, om) for om in omega_nodes])
    if np.min(np.abs(ghat)) < delta:
        k = int(np.argmin(np.abs(ghat)))
        raise BandwidthError(
            f"|ghat| = {np.abs(ghat[k]):.3e} below the floor {delta:.3e} at "
            f"omega = {omega_nodes[k]:.6g}")
    dirs, w_dir = direction_grid(n_polar, n_azimuth)
    anti = _antipode_map(dirs)
    kappa = medium.sqrt_n * omega_nodes
    e_hat, c_hat = _time_transform(record, omega_nodes)

    n_dir = len(dirs)
    n_k = n_radial
    p_comp = np.zeros((n_dir, n_k), dtype=complex)
    q_comp = np.zeros((n_dir, n_k), dtype=complex)
    p_vecs = np.zeros((n_dir, 3))
    q_vecs = np.zeros((n_dir, 3))
    done = np.zeros(n_dir, dtype=bool)
    divisor = _PAIR_FACTOR * ghat
    sw = record.sphere.weights
    nodes_x = record.sphere.nodes
    for l in range(n_dir):
        if done[l]:
            continue
        probe = make_probe(dirs[l], 1.0, medium)
        p, q = probe.p, probe.q
        p_vecs[l] = p
        q_vecs[l] = q
        cp = c_hat @ p
        cq = c_hat @ q
        ep = e_hat @ p
        eq = e_hat @ q
        x_arg = np.outer(kappa, nodes_x @ dirs[l])
        phase = (np.cos(x_arg) - 1j * np.sin(x_arg)) * sw
        kk = kappa[:, None]
        p_raw = -np.sum(phase * (cp - 1j * kk * eq), axis=1)
        q_raw = -np.sum(phase * (cq + 1j * kk * ep), axis=1)
        p_comp[l] = p_raw / divisor
        q_comp[l] = q_raw / divisor
        done[l] = True
        m = anti[l]
        if m >= 0 and not done[m]:
            p_comp[m] = np.conj(p_comp[l])
            q_comp[m] = -np.conj(q_comp[l])
            p_vecs[m] = p
            q_vecs[m] = -q
            done[m] = True

    xi = dirs[:, None, :] * kappa[None, :, None]
    weight = (w_dir[:, None] * omega_w[None, :]
              * medium.n ** 1.5 * omega_nodes[None, :] ** 2)
    n_total = n_dir * n_k
    node_set = SpectralNodeSet(
        region="ball",
        xi=xi.reshape(n_total, 3),
        omega=np.tile(omega_nodes, n_dir),
        weight=weight.reshape(n_total),
        d=np.repeat(dirs, n_k, axis=0),
        p=np.repeat(p_vecs, n_k, axis=0),
        q=np.repeat(q_vecs, n_k, axis=0),
        kappa=np.tile(kappa, n_dir),
        n_values=np.full(n_total, medium.n),
    )
    meta = {"delta": delta, "n_polar": n_polar, "n_azimuth": n_azimuth,
            "n_radial": n_radial}
    return SpectralSamples(node_set, p_comp.reshape(n_total),
                           q_comp.reshape(n_total), band=float(band),
                           problem="ip1", meta=meta)


def band_energy(samples: SpectralSamples, s: float | None = None,
                component: str = "both") -> float:
    """Weighted sample energy over the frequency ball |xi| <= sqrt(n) s
    (whole node set when s is None)."""
    kappa = samples.nodes.kappa
    if s is None:
        mask = np.ones(kappa.shape, dtype=bool)
    else:
        mask = kappa <= np.sqrt(samples.nodes.n_values) * s + 1e-14
    w = samples.nodes.weight[mask]
    total = 0.0
    if component in ("p", "both"):
        total += float(w @ np.abs(samples.p_component[mask]) ** 2)
    if component in ("q", "both"):
        total += float(w @ np.abs(samples.q_component[mask]) ** 2)
    if component not in ("p", "q", "both"):
        raise ConfigError(f"unknown component {component!r}")
    return total


def ip2_band_energy(family: RecordFamily, band: float, n_radial: int = 12,
                    n_polar: int = 8, n_azimuth: int = 16) -> float:
    """Data-side energy of p.Fhat over the double cone |xi| < s|omega|,
    |omega| < s swept out by the sampled dispersion sheets.

    The medium grid of the family is used as the quadrature in n with
    trapezoid weights, frequencies and directions use product rules, and the
    omega < 0 half contributes by conjugate symmetry.
    """
    n_vals = np.asarray(family.n_values, dtype=float)
    if len(n_vals) < 2:
        raise ConfigError("band energy needs at least two medium sheets")
    order = np.argsort(n_vals)
    n_sorted = n_vals[order]
    wn = np.gradient(n_sorted)
    omega_nodes, omega_w = gauss_legendre(n_radial, 0.0, band)
    dirs, w_dir = direction_grid(n_polar, n_azimuth)
    total = 0.0
    for pos, idx in enumerate(order):
        record = family.records[idx]
        n = n_sorted[pos]
        medium = record.medium
        kappa = medium.sqrt_n * omega_nodes
        e_hat, c_hat = _time_transform(record, omega_nodes)
        sw = record.sphere.weights
        nodes_x = record.sphere.nodes
        sheet = 0.0
        for l in range(len(dirs)):
            probe = make_probe(dirs[l], 1.0, medium)
            cp = c_hat @ probe.p
            eq = e_hat @ probe.q
            x_arg = np.outer(kappa, nodes_x @ dirs[l])
            phase = (np.cos(x_arg) - 1j * np.sin(x_arg)) * sw
            p_raw = -np.sum(phase * (cp - 1j * kappa[:, None] * eq), axis=1)
            samples = np.abs(p_raw / _PAIR_FACTOR) ** 2
            sheet += w_dir[l] * np.sum(
                omega_w * 0.5 * np.sqrt(n) * omega_nodes ** 3 * samples)
        total += wn[pos] * sheet
    return 2.0 * total


@dataclass(frozen=True, eq=False)
class ReconstructionGrid:
    """Midpoint evaluation grid over the source support box."""

    box_half: tuple
    shape: tuple
    points: np.ndarray = field(repr=False)
    cell_weight: float

    @classmethod
    def build(cls, box_half, resolution: int) -> "ReconstructionGrid":
        if resolution < 2:
            raise ConfigError("grid resolution must be at least 2")
        half = tuple(float(h) for h in np.atleast_1d(box_half))
        if len(half) == 1:
            half = half * 3
        axes = [(-h + (2.0 * h / resolution) * (np.arange(resolution) + 0.5))
                for h in half]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"),
                       axis=-1).reshape(-1, 3)
        w = float(np.prod([2.0 * h / resolution for h in half]))
        return cls(box_half=half, shape=(resolution,) * 3,
                   points=np.ascontiguousarray(pts), cell_weight=w)


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    """Band-limited source reconstruction on an evaluation grid."""

    grid: ReconstructionGrid
    fields: np.ndarray = field(repr=False)
    band_energy: float
    l2_error: float | None = None
    rel_error: float | None = None
    reference_norm: float | None = None


def reconstruct_source(samples: SpectralSamples, grid: ReconstructionGrid,
                       reference: SourceModel | None = None
                       ) -> ReconstructionResult:
    """Back-synthesize the sampled band to a real vector field on the grid;
    when a reference source is given, also report the L2 distance of the
    reconstruction to its spatial factor over the grid box."""
    nodes = samples.nodes
    fhat = (samples.p_component[:, None] * nodes.p
            + samples.q_component[:, None] * nodes.q)
    coef = np.ascontiguousarray(
        nodes.weight[:, None] * fhat * TWO_PI ** -1.5)
    out = np.zeros((len(grid.points), 3), dtype=complex)
    _kernels.synthesize_band(grid.points, np.ascontiguousarray(nodes.xi),
                             coef, out)
    rec = np.ascontiguousarray(out.real)
    energy = band_energy(samples)
    if reference is None:
        return ReconstructionResult(grid, rec, energy)
    ref_vals = reference.term_spatial_values(grid.points).sum(axis=0)
    diff_sq = float(np.sum((rec - ref_vals) ** 2) * grid.cell_weight)
    ref_sq = float(np.sum(ref_vals ** 2) * grid.cell_weight)
    l2 = np.sqrt(diff_sq)
    return ReconstructionResult(grid, rec, energy, l2_error=l2,
                                rel_error=l2 / np.sqrt(ref_sq),
                                reference_norm=np.sqrt(ref_sq))


def save_samples(samples: SpectralSamples, path) -> None:
    """One CSV of nodes and components plus a manifest; 17 significant
    digits so the float64 payload round-trips exactly."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    nodes = samples.nodes
    cols = np.column_stack([
        nodes.xi, nodes.omega, nodes.weight, nodes.n_values,
        samples.p_component.real, samples.p_component.imag,
        samples.q_component.real, samples.q_component.imag,
    ])
    header = ("xi1,xi2,xi3,omega,weight,n,"
              "p_re,p_im,q_re,q_im")
    np.savetxt(root / "samples.csv", cols, fmt="%.17g", delimiter=",",
               header=header, comments="")
    manifest = {"problem": samples.problem, "band": samples.band,
                "region": nodes.region, "count": int(nodes.size),
                "meta": samples.meta}
    with open(root / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_samples(path) -> SpectralSamples:
    root = Path(path)
    try:
        with open(root / "manifest.json") as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"corrupt samples manifest: {exc}") from exc
    data = np.loadtxt(root / "samples.csv", delimiter=",", skiprows=1,
                      ndmin=2)
    xi = np.ascontiguousarray(data[:, 0:3])
    omega = data[:, 3]
    weight = data[:, 4]
    n_values = data[:, 5]
    p_comp = data[:, 6] + 1j * data[:, 7]
    q_comp = data[:, 8] + 1j * data[:, 9]
    kappa = np.linalg.norm(xi, axis=1)
    d = np.zeros_like(xi)
    p = np.zeros_like(xi)
    q = np.zeros_like(xi)
    for i in range(len(xi)):
        if kappa[i] == 0.0:
            d[i] = (0.0, 0.0, 1.0)
        else:
            d[i] = xi[i] / kappa[i]
        probe = make_probe(d[i] / np.linalg.norm(d[i]), max(omega[i], 0.0),
                           MediumParams(n=float(n_values[i])))
        p[i], q[i] = probe.p, probe.q
    node_set = SpectralNodeSet(region=manifest["region"], xi=xi, omega=omega,
                               weight=weight, d=d, p=p, q=q, kappa=kappa,
                               n_values=n_values)
    return SpectralSamples(node_set, p_comp, q_comp,
                           band=float(manifest["band"]),
                           problem=manifest["problem"],
                           meta=manifest.get("meta", {}))

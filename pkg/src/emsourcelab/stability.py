"""Stability toolkit for band-limited source recovery.

Quantitative ingredients behind the increasing-stability picture: growth
bounds for the low-pass energy along complex frequencies, analytic
continuation exponents, spectral tail estimates, and the two-term (or
three-term) error envelopes in the noise level and the band.  Constants in
front of envelopes and continuation bounds are always fitted from computed
values, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundaryRecord, NoiseSpec, add_noise
from .errors import AccuracyError, BandwidthError, ConfigError, RegionError
from .geometry import (MediumParams, direction_grid, fourier_time_profile,
                       gauss_legendre, make_probe)
from .oracle import _spatial_transform_batch, sobolev_h1_norm, support_grid
from .probing import (ReconstructionGrid, assemble_spectrum_ip1,
                      reconstruct_source)
from .sources import SourceModel

_EPS_CEILING = math.exp(-1.0)


def _sector_complex(s) -> complex:
    s = complex(s)
    if s == 0 or not (s.real > 0.0 and abs(s.imag) < s.real):
        raise RegionError(
            f"s = {s} lies outside the sector |arg s| < pi/4 where the "
            "low-pass energy continues analytically")
    return s


def _single_spatial_weights(source: SourceModel, resolution: int):
    if len(source.terms) != 1:
        raise ConfigError("low-pass energy needs a single separable term")
    points, w, values = support_grid(source, resolution)
    return points, w * values[0]


def _probe_frames(dirs: np.ndarray, medium: MediumParams):
    p = np.empty_like(dirs)
    q = np.empty_like(dirs)
    for i, d in enumerate(dirs):
        pr = make_probe(d, 1.0, medium)
        p[i] = pr.p
        q[i] = pr.q
    return p, q


def lowpass_energy(source: SourceModel, medium: MediumParams, s,
                   n_radial: int = 16, n_polar: int = 8, n_azimuth: int = 16,
                   resolution: int = 32) -> complex:
    """Low-pass energy of the polarized spectrum,
    ``I(s) = int_{|xi| <= sqrt(n) s} |p(xi/|xi|).fhat(xi)|^2 dxi``,
    continued to complex s.

    The radial integral is rewritten along the scaled path
    ``xi = sqrt(n) s l theta`` with ``l`` in (0,1), which makes the same
    (l, theta) quadrature rule serve every real or complex ``s`` in the
    sector and keeps the result an entire function of ``s`` sampled
    consistently.
    """
    s = _sector_complex(s)
    points, fw = _single_spatial_weights(source, resolution)
    l_nodes, l_weights = gauss_legendre(n_radial, 0.0, 1.0)
    dirs, w_dir = direction_grid(n_polar, n_azimuth)
    pvecs, _ = _probe_frames(dirs, medium)
    scale = medium.sqrt_n * s
    xi = scale * l_nodes[:, None, None] * dirs[None, :, :]
    flat = xi.reshape(-1, 3)
    both = np.concatenate([flat, -flat], axis=0)
    vals = _spatial_transform_batch(points, fw, both)
    half = flat.shape[0]
    fwd = vals[:half].reshape(n_radial, len(dirs), 3)
    bwd = vals[half:].reshape(n_radial, len(dirs), 3)
    pf = np.einsum("klc,lc->kl", fwd, pvecs)
    pb = np.einsum("klc,lc->kl", bwd, pvecs)
    radial = l_weights * l_nodes ** 2
    total = np.einsum("k,l,kl->", radial, w_dir, pf * pb)
    return complex(scale ** 3 * total)


def lowpass_energy_bound(s, radius: float, n: float,
                         f_norm_sq: float) -> float:
    """Entire-function growth bound for the low-pass energy:
    ``(4 pi / 3)^2 R^3 n^(3/2) |s|^3 exp(2 R sqrt(n) |Im s|) |f|^2``."""
    s = complex(s)
    return ((4.0 * np.pi / 3.0) ** 2 * radius ** 3 * n ** 1.5
            * abs(s) ** 3 * np.exp(2.0 * radius * np.sqrt(n) * abs(s.imag))
            * f_norm_sq)


def continuation_exponent(z: float, threshold: float) -> float:
    """Holder exponent mu(z) transported from the sector to the real axis:
    1/2 up to 2^(1/4) threshold, then (1/pi) ((z/threshold)^4 - 1)^(-1/2).
    Defined for z strictly beyond the threshold."""
    if threshold <= 0.0:
        raise ConfigError("threshold must be positive")
    if z <= threshold:
        raise RegionError(
            f"mu(z) is defined for z > {threshold:.6g}, got z = {z:.6g}")
    if z <= 2.0 ** 0.25 * threshold:
        return 0.5
    return (1.0 / np.pi) / np.sqrt((z / threshold) ** 4 - 1.0)


def continuation_profile(source: SourceModel, medium: MediumParams,
                         radius: float, band: float, s,
                         **lowpass_kwargs) -> complex:
    """The sector-bounded profile ``J(s) = band^-2 I(s) exp(-(2 R sqrt(n)
    + 1) s)`` whose smallness on (0, band] propagates to (band, infinity)."""
    s = _sector_complex(s)
    energy = lowpass_energy(source, medium, s, **lowpass_kwargs)
    lam = 2.0 * radius * medium.sqrt_n + 1.0
    return complex(energy * np.exp(-lam * s) / band ** 2)


@dataclass(frozen=True, eq=False)
class ContinuationReport:
    """Two-constants continuation inequality sampled beyond the band:

        |J(z)| <= V^(1 - 2 mu(z)) (eps^2)^(2 mu(z)),

    where V is the sector bound fitted from ray samples and eps^2 is the
    hypothesis level of J on (0, band] (J is quadratic in the data, so a
    data discrepancy eps controls J at the eps^2 scale)."""

    band: float
    eps: float
    z: np.ndarray = field(repr=False)
    j_abs: np.ndarray = field(repr=False)
    mu: np.ndarray = field(repr=False)
    bound: np.ndarray = field(repr=False)
    holds: np.ndarray = field(repr=False)
    sector_bound: float
    hypothesis_sup: float
    hypothesis_ratio: float

    @property
    def all_hold(self) -> bool:
        return bool(np.all(self.holds))


def continuation_check(source: SourceModel, medium: MediumParams,
                       radius: float, band: float, eps: float,
                       n_z: int = 16, n_rays: int = 5, n_mags: int = 10,
                       ray_margin: float = 0.95, slack: float = 1e-9,
                       **lowpass_kwargs) -> ContinuationReport:
    """Fit the sector bound V of J from ray samples, then test the
    propagated smallness |J(z)| <= V^(1-2 mu) (eps^2)^(2 mu) on (band,
    4 band].  ``eps`` is the measurement discrepancy of the underlying
    record; the induced hypothesis level for the quadratic profile J is
    eps^2, reported via ``hypothesis_ratio``."""
    if not 0.0 < eps < _EPS_CEILING:
        raise RegionError(
            f"eps = {eps:.6g} must lie in (0, e^-1) for the continuation "
            "bound to be meaningful")
    if band <= 0.0:
        raise ConfigError("band must be positive")

    def j_at(s):
        return continuation_profile(source, medium, radius, band, s,
                                    **lowpass_kwargs)

    angles = np.linspace(-ray_margin * np.pi / 4.0,
                         ray_margin * np.pi / 4.0, n_rays)
    mags = np.geomspace(0.25 * band, 4.5 * band, n_mags)
    sector_bound = 0.0
    for ang in angles:
        ph = complex(np.cos(ang), np.sin(ang))
        for m in mags:
            sector_bound = max(sector_bound, abs(j_at(m * ph)))

    hyp_grid = np.linspace(band / 8.0, band, 8)
    hyp_vals = np.array([abs(j_at(s)) for s in hyp_grid])
    hypothesis_sup = float(np.max(hyp_vals))

    z = band * (1.0 + 3.0 * (np.arange(n_z) + 1.0) / n_z)
    j_abs = np.array([abs(j_at(zz)) for zz in z])
    mu = np.array([continuation_exponent(zz, band) for zz in z])
    bound = sector_bound ** (1.0 - 2.0 * mu) * (eps ** 2) ** (2.0 * mu)
    holds = j_abs <= bound * (1.0 + slack)
    return ContinuationReport(band=band, eps=eps, z=z, j_abs=j_abs, mu=mu,
                              bound=bound, holds=holds,
                              sector_bound=sector_bound,
                              hypothesis_sup=hypothesis_sup,
                              hypothesis_ratio=hypothesis_sup / eps ** 2)


@dataclass(frozen=True)
class TailEstimate:
    """Truncated spectral tail integral with a geometric remainder guess."""

    region: str
    s: float
    value: float
    remainder: float

    @property
    def total(self) -> float:
        return self.value + self.remainder


def _geometric_remainder(segments) -> float:
    if len(segments) < 2 or segments[-2] <= 0.0:
        return 0.0
    ratio = segments[-1] / segments[-2]
    if ratio >= 0.95:
        raise AccuracyError(
            f"tail segments do not decay (last ratio {ratio:.3f}); extend "
            "the truncation radius")
    return segments[-1] * ratio / (1.0 - ratio)


def _time_factors(source: SourceModel, omegas: np.ndarray) -> np.ndarray:
    return np.array([[fourier_time_profile(term.profile, om)
                      for om in omegas] for term in source.terms])


def tail_energy(source: SourceModel, medium: MediumParams, s: float,
                region: str = "ip1_ball", outer_factor: float = 8.0,
                n_radial: int = 8, n_polar: int = 8, n_azimuth: int = 16,
                n_time: int = 8, resolution: int = 32,
                tol: float | None = None) -> TailEstimate:
    """Energy of the polarized spectrum outside the resolved set.

    Regions: ``ip1_ball`` (spatial frequencies beyond the ball),
    ``ip2_e1`` / ``ip2_e2`` (high-frequency cone and low-frequency wedge of
    the space-time spectrum), ``ip3_e1`` / ``ip3_e23`` (their transverse
    analogues for axially factored sources; off the dispersion sheets the
    probe frame is taken at zero axial frequency).

    The unbounded coordinate is truncated at ``outer_factor`` times the
    inner radius, split into geometric segments whose last ratio
    extrapolates the remainder; a remainder above ``tol`` raises an
    accuracy error.
    """
    if s <= 0.0:
        raise RegionError("tail radius s must be positive")
    n_oct = max(2, int(round(np.log2(outer_factor))))
    if region == "ip1_ball":
        value, segs = _tail_ip1(source, medium, s, n_oct, n_radial,
                                n_polar, n_azimuth, resolution)
    elif region == "ip2_e1":
        value, segs = _tail_ip2_high(source, medium, s, n_oct, n_radial,
                                     n_polar, n_azimuth, n_time, resolution)
    elif region == "ip2_e2":
        value, segs = _tail_ip2_low(source, medium, s, n_oct, n_radial,
                                    n_polar, n_azimuth, n_time, resolution)
    elif region == "ip3_e1":
        value, segs = _tail_ip3_high(source, medium, s, n_oct, n_radial,
                                     n_azimuth, n_time, resolution)
    elif region == "ip3_e23":
        value, segs = _tail_ip3_rest(source, medium, s, n_oct, n_radial,
                                     n_azimuth, n_time, resolution)
    else:
        raise ConfigError(f"unknown tail region {region!r}")
    remainder = _geometric_remainder(segs)
    if tol is not None and remainder > tol:
        raise AccuracyError(
            f"tail remainder estimate {remainder:.3e} exceeds tol {tol:.3e}")
    return TailEstimate(region=region, s=float(s), value=float(value),
                        remainder=float(remainder))


def _tail_ip1(source, medium, s, n_oct, n_radial, n_polar, n_azimuth,
              resolution):
    points, fw = _single_spatial_weights(source, resolution)
    dirs, w_dir = direction_grid(n_polar, n_azimuth)
    pvecs, _ = _probe_frames(dirs, medium)
    inner = medium.sqrt_n * s
    segs = []
    for j in range(n_oct):
        kap, w_k = gauss_legendre(n_radial, inner * 2.0 ** j,
                                  inner * 2.0 ** (j + 1))
        xi = (kap[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
        vals = _spatial_transform_batch(points, fw, xi)
        pf = np.einsum("klc,lc->kl",
                       vals.reshape(n_radial, len(dirs), 3), pvecs)
        seg = np.einsum("k,l,kl->", w_k * kap ** 2, w_dir,
                        np.abs(pf) ** 2)
        segs.append(float(seg))
    return sum(segs), segs


def _tail_ip2_high(source, medium, s, n_oct, n_radial, n_polar, n_azimuth,
                   n_time, resolution):
    points, w, values = support_grid(source, resolution)
    fws = [w * values[m] for m in range(len(source.terms))]
    dirs, w_dir = direction_grid(n_polar, n_azimuth)
    pvecs, _ = _probe_frames(dirs, medium)
    segs = []
    for j in range(n_oct):
        om, w_om = gauss_legendre(n_time, s * 2.0 ** j, s * 2.0 ** (j + 1))
        ghat = _time_factors(source, om)
        seg = 0.0
        for a, omega in enumerate(om):
            kap, w_k = gauss_legendre(n_radial, 0.0, s * omega)
            xi = (kap[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
            vals_sum = np.zeros((n_radial, len(dirs)), dtype=complex)
            for m, fw in enumerate(fws):
                vals = _spatial_transform_batch(points, fw, xi)
                pf = np.einsum("klc,lc->kl",
                               vals.reshape(n_radial, len(dirs), 3), pvecs)
                vals_sum += pf * ghat[m, a]
            inner = np.einsum("k,l,kl->", w_k * kap ** 2, w_dir,
                              np.abs(vals_sum) ** 2)
            seg += 2.0 * w_om[a] * inner
        segs.append(float(seg))
    return sum(segs), segs


def _tail_ip2_low(source, medium, s, n_oct, n_radial, n_polar, n_azimuth,
                  n_time, resolution):
    points, w, values = support_grid(source, resolution)
    fws = [w * values[m] for m in range(len(source.terms))]
    dirs, w_dir = direction_grid(n_polar, n_azimuth)
    pvecs, _ = _probe_frames(dirs, medium)
    edges = [0.0, s] + [s * 2.0 ** (j + 1) for j in range(n_oct)]
    segs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        rho, w_rho = gauss_legendre(n_radial, lo, hi)
        seg = 0.0
        for r_val, r_w in zip(rho, w_rho):
            xi = (r_val * dirs).reshape(-1, 3)
            om, w_om = gauss_legendre(n_time, 0.0, r_val / s)
            ghat = _time_factors(source, om)
            pf = np.zeros((len(dirs), len(om)), dtype=complex)
            for m, fw in enumerate(fws):
                vals = _spatial_transform_batch(points, fw, xi)
                proj = np.einsum("lc,lc->l", vals, pvecs)
                pf += proj[:, None] * ghat[m][None, :]
            inner = np.einsum("l,a,la->", w_dir, w_om, np.abs(pf) ** 2)
            seg += 2.0 * r_w * r_val ** 2 * inner
        segs.append(float(seg))
    head = segs[0]
    octave_segs = segs[1:]
    return head + sum(octave_segs), octave_segs


def _transverse_spatial_batch(source, xi12, resolution):
    """Per-term 2D transforms of the transverse factors at nodes (N,2);
    returns (M, N, 3) complex without any 2 pi normalization."""
    if source.kind != "x3-factored":
        raise ConfigError("transverse tails need an x3-factored source")
    half = source.box_half[0]
    h = 2.0 * half / resolution
    ax = -half + (np.arange(resolution) + 0.5) * h
    gx, gy = np.meshgrid(ax, ax, indexing="ij")
    pts2 = np.stack([gx.ravel(), gy.ravel()], axis=1)
    ph = xi12 @ pts2.T
    phase = (np.cos(ph) - 1j * np.sin(ph)) * h * h
    out = []
    for vt, _prof in source.transverse:
        vals = vt(pts2)
        out.append(phase @ vals)
    return np.stack(out)


def _transverse_time_factors(source, omegas):
    return np.array([[fourier_time_profile(prof, om) for om in omegas]
                     for _vt, prof in source.transverse])


_TRANSVERSE_NORM = (2.0 * np.pi) ** -1.5


def _tail_ip3_high(source, medium, s, n_oct, n_radial, n_azimuth, n_time,
                   resolution):
    sqrt_n = medium.sqrt_n
    psi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    w_psi = 2.0 * np.pi / n_azimuth
    start = s / sqrt_n
    segs = []
    for j in range(n_oct):
        om, w_om = gauss_legendre(n_time, start * 2.0 ** j,
                                  start * 2.0 ** (j + 1))
        ghat = _transverse_time_factors(source, om)
        seg = 0.0
        for a, omega in enumerate(om):
            kap, w_k = gauss_legendre(n_radial, 0.0, sqrt_n * omega)
            k2 = np.repeat(kap, n_azimuth)
            ps = np.tile(psi, n_radial)
            xi12 = np.stack([k2 * np.cos(ps), k2 * np.sin(ps)], axis=1)
            xi3 = np.sqrt(np.maximum(medium.n * omega ** 2 - k2 ** 2, 0.0))
            d = np.stack([xi12[:, 0], xi12[:, 1], xi3], axis=1)
            d /= np.linalg.norm(d, axis=1, keepdims=True)
            pv = np.array([make_probe(dd, 1.0, medium).p for dd in d])
            spat = _transverse_spatial_batch(source, xi12, resolution)
            val = np.zeros(len(xi12), dtype=complex)
            for m in range(spat.shape[0]):
                val += np.einsum("nc,nc->n", spat[m], pv) * ghat[m, a]
            val *= _TRANSVERSE_NORM
            sq = (np.abs(val) ** 2).reshape(n_radial, n_azimuth)
            inner = np.einsum("k,kl->", w_k * kap, sq) * w_psi
            seg += 2.0 * w_om[a] * inner
        segs.append(float(seg))
    return sum(segs), segs


def _tail_ip3_rest(source, medium, s, n_oct, n_radial, n_azimuth, n_time,
                   resolution):
    sqrt_n = medium.sqrt_n
    psi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    w_psi = 2.0 * np.pi / n_azimuth
    scale = s / sqrt_n
    edges = [0.0, scale] + [scale * 2.0 ** (j + 1) for j in range(n_oct)]
    segs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        kap, w_k = gauss_legendre(n_radial, lo, hi)
        seg = 0.0
        for k_val, k_w in zip(kap, w_k):
            xi12 = np.stack([k_val * np.cos(psi), k_val * np.sin(psi)],
                            axis=1)
            d = np.stack([np.cos(psi), np.sin(psi), np.zeros_like(psi)],
                         axis=1)
            pv = np.array([make_probe(dd, 1.0, medium).p for dd in d])
            om, w_om = gauss_legendre(n_time, 0.0, k_val / sqrt_n)
            ghat = _transverse_time_factors(source, om)
            spat = _transverse_spatial_batch(source, xi12, resolution)
            pf = np.zeros((n_azimuth, len(om)), dtype=complex)
            for m in range(spat.shape[0]):
                proj = np.einsum("nc,nc->n", spat[m], pv)
                pf += proj[:, None] * ghat[m][None, :]
            pf *= _TRANSVERSE_NORM
            inner = np.einsum("a,la->", w_om, np.abs(pf) ** 2) * w_psi
            seg += 2.0 * k_w * k_val * inner
        segs.append(float(seg))
    head = segs[0]
    return head + sum(segs[1:]), segs[1:]


def envelope(problem: str, band: float, eps: float, m_norm: float,
             alpha: float | None = None) -> np.ndarray:
    """Terms of the reconstruction-error envelope, without the fitted front
    constant.

    ip1: (band^5 eps^2, M^2 band^(-4/3) |ln eps|^(-1/2));
    ip2: (band^11 eps^2, M^2 band^(-1) |ln eps|^(-2/5));
    ip3: adds the intermediate term band^5 exp(2 band (1-alpha)) eps^(2 alpha)
    and reads |alpha ln eps| in the tail.
    """
    if not 0.0 < eps < _EPS_CEILING:
        raise RegionError(
            f"eps = {eps:.6g} outside (0, e^-1); the log-tail term is not "
            "monotone there")
    if band <= 1.0:
        raise BandwidthError(f"band must exceed 1, got {band:.6g}")
    if m_norm <= 0.0:
        raise ConfigError("m_norm must be positive")
    log_eps = abs(np.log(eps))
    if problem == "ip1":
        return np.array([band ** 5 * eps ** 2,
                         m_norm ** 2 / (band ** (4.0 / 3.0)
                                        * np.sqrt(log_eps))])
    if problem == "ip2":
        return np.array([band ** 11 * eps ** 2,
                         m_norm ** 2 / (band * log_eps ** 0.4)])
    if problem == "ip3":
        if alpha is None or not 0.0 < alpha < 1.0:
            raise ConfigError("ip3 envelope needs alpha in (0, 1)")
        return np.array([
            band ** 7 * eps ** 2,
            band ** 5 * np.exp(2.0 * band * (1.0 - alpha)) * eps ** (2 * alpha),
            m_norm ** 2 / (band ** (4.0 / 3.0) * np.sqrt(alpha * log_eps)),
        ])
    raise ConfigError(f"unknown problem {problem!r}")


@dataclass(frozen=True)
class BandSplit:
    """Resolution radius for the continuation step, with the regime tag:
    case 'i' when the log term is strong enough to push s beyond the band,
    case 'ii' when it saturates at the band."""

    s: float
    case: str
    threshold: float
    log_term: float


def choose_s(problem: str, band: float, eps: float, radius: float = 1.0,
             n: float = 1.0, horizon: float | None = None,
             alpha: float | None = None) -> BandSplit:
    """Split radius between the stable low-pass part and the continued part
    of the spectrum, per problem."""
    if not 0.0 < eps < _EPS_CEILING:
        raise RegionError(f"eps = {eps:.6g} outside (0, e^-1)")
    if band <= 1.0:
        raise BandwidthError(f"band must exceed 1, got {band:.6g}")
    log_eps = abs(np.log(eps))
    if alpha is not None:
        if not 0.0 < alpha < 1.0:
            raise ConfigError("alpha must lie in (0, 1)")
        if problem != "ip3":
            raise ConfigError("alpha only enters the ip3 split")
        log_eps = alpha * log_eps
    sqrt_n = np.sqrt(n)
    if problem == "ip1":
        a_const = (2.0 * radius * sqrt_n + 3.0) * np.pi
        log_term = log_eps ** 0.25
        threshold = 2.0 ** 0.25 * a_const ** (1.0 / 3.0) * band ** (1.0 / 3.0)
        if log_term > threshold:
            return BandSplit(band ** (2.0 / 3.0) * log_term
                             / a_const ** (1.0 / 3.0), "i", threshold,
                             log_term)
        return BandSplit(float(band), "ii", threshold, log_term)
    if problem == "ip2":
        if horizon is None:
            raise ConfigError("ip2 split needs the record horizon")
        delta = max(2.0 * radius, horizon)
        a_const = 2.0 * (delta + 2.0) * np.pi
        log_term = log_eps ** 0.2
        threshold = 2.0 ** 0.25 * band ** 0.5 * a_const ** 0.25
        if log_term > threshold:
            return BandSplit(band ** 0.5 * log_term / a_const ** 0.25, "i",
                             threshold, log_term)
        return BandSplit(float(band), "ii", threshold, log_term)
    if problem == "ip3":
        if horizon is None:
            raise ConfigError("ip3 split needs the record horizon")
        a_const = (radius + horizon / sqrt_n + 3.0) * np.pi
        log_term = log_eps ** 0.25
        threshold = 2.0 ** 0.25 * band ** (1.0 / 3.0) * a_const ** (1.0 / 3.0)
        if log_term > threshold:
            return BandSplit(band ** (2.0 / 3.0) * log_term
                             / a_const ** (1.0 / 3.0), "i", threshold,
                             log_term)
        return BandSplit(float(band), "ii", threshold, log_term)
    raise ConfigError(f"unknown problem {problem!r}")


def fit_constant(observed, predicted) -> float:
    """Smallest C with observed <= C predicted pointwise."""
    observed = np.asarray(observed, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if observed.shape != predicted.shape or observed.size == 0:
        raise ConfigError("fit needs matching nonempty samples")
    if np.any(predicted <= 0.0):
        raise ConfigError("predicted envelope values must be positive")
    return float(np.max(observed / predicted))


def split_fit_constants(observed, predicted):
    """Front constants fitted on the two alternating halves of the sample
    list; their ratio gauges how stable the fit is."""
    observed = np.asarray(observed, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if observed.size < 2:
        raise ConfigError("need at least two samples to split")
    c_even = fit_constant(observed[0::2], predicted[0::2])
    c_odd = fit_constant(observed[1::2], predicted[1::2])
    ratio = max(c_even, c_odd) / min(c_even, c_odd)
    return c_even, c_odd, ratio


def _ball_radius_from_measure(measure: float, dim: int) -> float:
    unit = np.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)
    return (measure / unit) ** (1.0 / dim)


def ball_continuation_estimate(m0: float, eta: float, region_measure: float,
                               dim: int = 3):
    """Calibrated Holder pair (mu, N) for propagating smallness from a
    subregion to the unit ball, for functions analytic on the double ball
    with Taylor growth ``M0 |gamma|! eta^(-|gamma|)``.

    The subregion enters through its measure only and is modelled as the
    concentric ball of the same volume.  The pair is fitted on closed-form
    families saturating the Taylor budget (directional exponentials, cosh
    profiles, separated Gaussians, capped monomials): mu is the slack-scaled
    least log-ratio over the family, N the matching max-ratio, exactly
    (1, 1) when the region fills the unit ball.
    """
    if m0 <= 0.0 or eta <= 0.0:
        raise ConfigError("m0 and eta must be positive")
    if dim < 1:
        raise ConfigError("dim must be at least 1")
    if region_measure <= 0.0:
        raise RegionError("region measure must be positive")
    r0 = _ball_radius_from_measure(region_measure, dim)
    if r0 >= 1.0:
        return 1.0, 1.0
    ratios = []
    # directional exponentials M0 exp(lambda (u.x - 2)), lambda <= 1/eta
    ratios.append(1.0 / (2.0 - r0))
    # cosh profiles M0 exp(-2 lambda) cosh(lambda u.x)
    for lam in np.geomspace(1e-3, 1.0 / eta, 25):
        num = 2.0 * lam - np.log(np.cosh(lam))
        den = 2.0 * lam - np.log(np.cosh(lam * r0))
        ratios.append(num / den)
    # capped monomials M0 (u.x / 2)^k: the log-ratio is k-independent
    ratios.append(np.log(2.0) / np.log(2.0 / r0))
    # separated Gaussians M0 exp(-lam |x - c u|^2), lam <= 1/(2 eta^2)
    for center in (1.25, 1.5, 1.75):
        ratios.append(((center - 1.0) / (center - r0)) ** 2)
    mu = 0.98 * float(np.min(ratios))
    mu = min(max(mu, 1e-6), 1.0 - 1e-9)
    # with mu below every member's log-ratio the max-ratio constant is 1
    n_const = 1.0
    return mu, n_const


@dataclass(frozen=True)
class SweepPoint:
    band: float
    eps: float
    rel_error: float
    err_sq: float
    data_term: float
    tail_term: float
    model: float
    case: str
    seed: int


@dataclass(frozen=True, eq=False)
class SweepReport:
    """Reconstruction error against the two-term envelope over a (band,
    noise) grid, with the front constant fitted globally and on alternating
    halves."""

    problem: str
    points: tuple
    m_norm: float
    fitted_c: float
    c_even: float
    c_odd: float
    stability_ratio: float

    def rows(self):
        """Plot-ready rows (b, eps, err, data_term, tail_term, fitted_C,
        case_tag); fitted_C is the per-cell ratio whose maximum is the
        globally fitted constant."""
        for pt in self.points:
            yield (pt.band, pt.eps, float(np.sqrt(pt.err_sq)), pt.data_term,
                   pt.tail_term, pt.err_sq / pt.model, pt.case)


def sweep_envelope(record: BoundaryRecord, profile, source: SourceModel,
                   bands, eps_values, grid_resolution: int = 20,
                   n_polar: int = 16, n_azimuth: int = 32,
                   n_radial: int = 24, m_norm: float | None = None,
                   base_seed: int = 101) -> SweepReport:
    """Noise-and-band sweep of the reconstruction error.

    Every grid point perturbs the clean record with a fresh seeded noise
    draw at the requested discrepancy, reassembles the spectrum over the
    requested band and reconstructs; the squared errors are then fitted
    against the envelope terms.
    """
    bands = [float(b) for b in bands]
    eps_values = [float(e) for e in eps_values]
    if len(bands) < 2 or len(eps_values) < 2:
        raise ConfigError("sweep needs at least two bands and two noise "
                          "levels")
    if m_norm is None:
        m_norm = sobolev_h1_norm(source)
    grid = ReconstructionGrid.build(source.box_half, grid_resolution)
    radius = record.sphere.radius
    points = []
    for i, band in enumerate(bands):
        for j, eps in enumerate(eps_values):
            seed = base_seed + 1009 * i + j
            noisy = add_noise(record, NoiseSpec(target_epsilon=eps,
                                                seed=seed))
            samples = assemble_spectrum_ip1(noisy, profile, band,
                                            n_polar=n_polar,
                                            n_azimuth=n_azimuth,
                                            n_radial=n_radial,
                                            check_bandwidth=False)
            result = reconstruct_source(samples, grid, reference=source)
            terms = envelope("ip1", band, eps, m_norm)
            split = choose_s("ip1", band, eps, radius=radius,
                             n=record.medium.n)
            points.append(SweepPoint(
                band=band, eps=eps, rel_error=float(result.rel_error),
                err_sq=float(result.l2_error) ** 2,
                data_term=float(terms[0]), tail_term=float(terms[1]),
                model=float(terms.sum()), case=split.case, seed=seed))
    observed = np.array([pt.err_sq for pt in points])
    predicted = np.array([pt.model for pt in points])
    fitted_c = fit_constant(observed, predicted)
    c_even, c_odd, ratio = split_fit_constants(observed, predicted)
    return SweepReport(problem="ip1", points=tuple(points), m_norm=m_norm,
                       fitted_c=fitted_c, c_even=c_even, c_odd=c_odd,
                       stability_ratio=ratio)

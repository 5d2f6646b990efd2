"""Media, plane-wave probes, quadrature grids and the shared Fourier setup.

Every transform in the package uses one fixed convention:

* time profiles:    ghat(omega) = (2 pi)^(-1/2) * int g(t) e^(-i omega t) dt
* spatial fields:   fhat(xi)    = (2 pi)^(-3/2) * int f(x) e^(-i xi.x) dx
* space-time:       Fhat(xi,w)  = (2 pi)^(-2)   * int F e^(-i(xi.x + w t)) dx dt

A probing plane wave in a medium with refraction parameter ``n`` is
``E_inc = p exp(-i(kappa x.d + omega t))`` with ``kappa = sqrt(n) omega``,
unit direction ``d`` and unit polarizations ``p, q = d x p`` forming a
right-handed orthonormal triple.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import BandwidthError, GeometryError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class MediumParams:
    """Non-dispersive, non-conducting medium; ``n`` is permittivity over
    permeability and the wave speed is ``1/sqrt(n)``."""

    n: float

    def __post_init__(self):
        if not (self.n > 0.0 and np.isfinite(self.n)):
            raise GeometryError(f"medium parameter n must be positive, got {self.n}")

    @property
    def sqrt_n(self) -> float:
        return float(np.sqrt(self.n))

    @property
    def wave_speed(self) -> float:
        return 1.0 / self.sqrt_n

    @property
    def sigma(self) -> float:
        return 0.0


@dataclass(frozen=True, eq=False)
class PolarizationProbe:
    """One plane-wave probe: direction, polarization pair and frequency."""

    d: np.ndarray
    p: np.ndarray
    q: np.ndarray
    omega: float
    kappa: float

    def __post_init__(self):
        for name in ("d", "p", "q"):
            v = np.asarray(getattr(self, name), dtype=float)
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    def swap_polarization(self) -> "PolarizationProbe":
        """Probe with the roles of p and q exchanged (q, d x q = -p)."""
        return PolarizationProbe(
            d=self.d.copy(), p=self.q.copy(), q=np.cross(self.d, self.q),
            omega=self.omega, kappa=self.kappa,
        )


def make_probe(d, omega: float, medium: MediumParams) -> PolarizationProbe:
    """Build the probe for direction ``d`` and frequency ``omega``.

    The first polarization is the fixed reference axis ``e`` orthogonalized
    against ``d``, with ``e = (1,0,0)`` unless ``|d.(1,0,0)| >= 0.9`` in which
    case ``e = (0,1,0)``; the second is ``q = d x p``.  This makes the
    polarization frame a deterministic function of ``d`` alone.
    """
    d = np.asarray(d, dtype=float)
    if d.shape != (3,):
        raise GeometryError(f"direction must be a 3-vector, got shape {d.shape}")
    if abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise GeometryError(f"direction must be unit length, |d| = {np.linalg.norm(d)!r}")
    if not (omega >= 0.0 and np.isfinite(omega)):
        raise GeometryError(f"omega must be nonnegative and finite, got {omega}")
    e = np.array([1.0, 0.0, 0.0])
    if abs(d @ e) >= 0.9:
        e = np.array([0.0, 1.0, 0.0])
    p = e - (e @ d) * d
    p /= np.linalg.norm(p)
    q = np.cross(d, p)
    return PolarizationProbe(d=d, p=p, q=q, omega=float(omega),
                             kappa=medium.sqrt_n * float(omega))


def gauss_legendre(n: int, a: float, b: float):
    """Gauss-Legendre nodes and weights on (a, b)."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def direction_grid(n_polar: int, n_azimuth: int):
    """Unit-sphere product design: Gauss-Legendre in the polar cosine times
    a uniform trapezoid in azimuth.  Weights sum to 4 pi (exactly, up to
    round-off) and the node set is closed under the antipodal map when
    ``n_azimuth`` is even.

    Returns (directions (N,3), weights (N,)).
    """
    if n_polar < 1 or n_azimuth < 1:
        raise GeometryError("direction grid needs at least one node per angle")
    cos_t, w_t = np.polynomial.legendre.leggauss(n_polar)
    sin_t = np.sqrt(1.0 - cos_t**2)
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    w_phi = 2.0 * np.pi / n_azimuth
    ct = np.repeat(cos_t, n_azimuth)
    st = np.repeat(sin_t, n_azimuth)
    ph = np.tile(phi, n_polar)
    dirs = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=1)
    weights = np.repeat(w_t, n_azimuth) * w_phi
    return dirs, weights


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Quadrature nodes on the measurement sphere of radius R."""

    radius: float
    n_polar: int
    n_azimuth: int
    nodes: np.ndarray = field(repr=False)
    normals: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("nodes", "normals", "weights"):
            getattr(self, name).setflags(write=False)

    @classmethod
    def build(cls, radius: float, n_polar: int, n_azimuth: int) -> "SphereGrid":
        if radius <= 0.0:
            raise GeometryError(f"sphere radius must be positive, got {radius}")
        dirs, w = direction_grid(n_polar, n_azimuth)
        return cls(radius=float(radius), n_polar=n_polar, n_azimuth=n_azimuth,
                   nodes=radius * dirs, normals=dirs, weights=radius**2 * w)

    @property
    def size(self) -> int:
        return self.nodes.shape[0]


def simpson_weights(count: int, horizon: float) -> np.ndarray:
    """Composite Simpson weights on ``count`` uniform nodes over [0, horizon].

    When the interval count is odd the last three intervals use the 3/8 rule
    so any node count >= 2 is accepted without changing it.
    """
    if count < 2:
        raise GeometryError("time grid needs at least two nodes")
    h = horizon / (count - 1)
    w = np.zeros(count)
    intervals = count - 1
    if intervals == 1:
        return np.array([0.5, 0.5]) * h
    if intervals % 2 == 0:
        w[0] = w[-1] = 1.0
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * (h / 3.0)
    if intervals == 3:
        return np.array([3.0, 9.0, 9.0, 3.0]) * (h / 8.0)
    # even-interval Simpson head, 3/8 tail over the last three intervals
    head = simpson_weights(count - 3, horizon - 3 * h)
    w[: count - 3] = head
    w[count - 4 :] += np.array([3.0, 9.0, 9.0, 3.0]) * (h / 8.0)
    return w


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Uniform time nodes on [0, horizon] with composite Simpson weights."""

    horizon: float
    count: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def build(cls, horizon: float, count: int) -> "TimeGrid":
        if horizon <= 0.0:
            raise GeometryError(f"time horizon must be positive, got {horizon}")
        return cls(horizon=float(horizon), count=int(count),
                   nodes=np.linspace(0.0, horizon, count),
                   weights=simpson_weights(int(count), float(horizon)))

    @property
    def step(self) -> float:
        return self.horizon / (self.count - 1)


@dataclass(frozen=True, eq=False)
class SpectralNodeSet:
    """Frequency-domain sample locations with quadrature weights.

    ``xi`` holds the spatial frequencies (N,3), ``omega`` the matching time
    frequencies, ``weight`` the measure weights of the region being sampled,
    and ``d,p,q,kappa`` the probe frames used to acquire each node.
    """

    region: str
    xi: np.ndarray
    omega: np.ndarray
    weight: np.ndarray
    d: np.ndarray
    p: np.ndarray
    q: np.ndarray
    kappa: np.ndarray
    n_values: np.ndarray

    def __post_init__(self):
        for name in ("xi", "omega", "weight", "d", "p", "q", "kappa", "n_values"):
            getattr(self, name).setflags(write=False)

    @property
    def size(self) -> int:
        return self.xi.shape[0]


def fourier_time_profile(g, omega: float, support=None) -> complex:
    """Adaptive quadrature of the half-line transform
    ``(2 pi)^(-1/2) int g(t) exp(-i omega t) dt`` over the support of ``g``.

    ``g`` is any callable; its integration window is ``g.support`` unless
    ``support=(a, b)`` is passed explicitly.
    """
    if support is None:
        support = g.support
    a, b = float(support[0]), float(support[1])
    om = float(omega)
    re, _ = quad(lambda t: g(t) * np.cos(om * t), a, b, limit=200)
    im, _ = quad(lambda t: g(t) * np.sin(om * t), a, b, limit=200)
    return (re - 1j * im) / np.sqrt(TWO_PI)


@dataclass(frozen=True)
class BandwidthReport:
    ok: bool
    b: float
    delta: float
    min_abs: float
    argmin_omega: float


def verify_bandwidth_condition(g, b: float, delta: float, grid: int = 512,
                               support=None) -> BandwidthReport:
    """Scan |ghat| on (0, b) and report whether it stays >= delta.

    The scan grid is uniform and open at 0; offending frequency reported at
    the grid argmin.  Raise-on-failure is left to callers.
    """
    if b <= 0.0 or delta <= 0.0:
        raise GeometryError("bandwidth check needs b > 0 and delta > 0")
    omegas = np.linspace(0.0, b, grid + 1)[1:]
    vals = np.array([abs(fourier_time_profile(g, om, support=support))
                     for om in omegas])
    k = int(np.argmin(vals))
    return BandwidthReport(ok=bool(vals[k] >= delta), b=b, delta=delta,
                           min_abs=float(vals[k]), argmin_omega=float(omegas[k]))


def require_bandwidth(g, b: float, delta: float, grid: int = 512, support=None):
    rep = verify_bandwidth_condition(g, b, delta, grid=grid, support=support)
    if not rep.ok:
        raise BandwidthError(
            f"|ghat| dips to {rep.min_abs:.3e} < delta={rep.delta:.3e} "
            f"at omega={rep.argmin_omega:.6g}")
    return rep


def plane_wave_field(probe: PolarizationProbe, x, t):
    """Incident plane wave ``p exp(-i(kappa x.d + omega t))`` at points x,
    times t (broadcast over leading axes)."""
    x = np.asarray(x, dtype=float)
    phase = np.exp(-1j * (probe.kappa * (x @ probe.d) + probe.omega * np.asarray(t)))
    return np.multiply.outer(phase, probe.p)


def curl_plane_wave(probe: PolarizationProbe, x, t):
    """Curl of the incident wave: ``-i kappa (d x p) exp(-i(...))``."""
    x = np.asarray(x, dtype=float)
    phase = np.exp(-1j * (probe.kappa * (x @ probe.d) + probe.omega * np.asarray(t)))
    return np.multiply.outer(-1j * probe.kappa * phase, np.cross(probe.d, probe.p))

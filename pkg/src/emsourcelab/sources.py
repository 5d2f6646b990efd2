"""Closed-form source models.

Every built-in source is a finite sum of separable terms

    F(x, t) = sum_m f_m(x) g_m(t)

with smooth, exactly compactly supported factors.  Spatial factors are
curls (3D) or rotated gradients (planar), so each term is divergence free
by construction; time factors are windowed Gaussian bumps.  Evaluation
outside the declared support returns exact zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, GeometryError


def _smoothstep(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape)
    out[u >= 1.0] = 1.0
    mid = (u > 0.0) & (u < 1.0)
    um = u[mid]
    h = np.exp(-1.0 / um)
    h1 = np.exp(-1.0 / (1.0 - um))
    out[mid] = h / (h + h1)
    return out


def _smoothstep_deriv(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape)
    mid = (u > 0.0) & (u < 1.0)
    um = u[mid]
    h = np.exp(-1.0 / um)
    h1 = np.exp(-1.0 / (1.0 - um))
    dh = h / um**2
    dh1 = h1 / (1.0 - um) ** 2
    out[mid] = (dh * h1 + h * dh1) / (h + h1) ** 2
    return out


@dataclass(frozen=True)
class BumpProfile:
    """Windowed Gaussian bump ``amp * exp(-(t-center)^2/eta) * win(t)``.

    ``win`` is an exact-support C-infinity window over ``(win_a, win_b)``
    ramping over ``margin`` at each end; ``margin = 0`` degenerates to the
    sharp indicator of the window.
    """

    amplitude: float = 1.0
    center: float = 1.0
    eta: float = 0.05
    win_a: float = 0.0
    win_b: float = 2.0
    margin: float = 0.0

    def __post_init__(self):
        if self.eta <= 0.0:
            raise ConfigError(f"profile eta must be positive, got {self.eta}")
        if not self.win_a < self.win_b:
            raise ConfigError("profile window must satisfy win_a < win_b")
        if self.margin < 0.0 or 2.0 * self.margin > self.win_b - self.win_a:
            raise ConfigError("profile margin must fit inside the window")

    @property
    def support(self):
        return (self.win_a, self.win_b)

    def _window(self, t):
        if self.margin == 0.0:
            return ((t > self.win_a) & (t < self.win_b)).astype(float)
        ua = (t - self.win_a) / self.margin
        ub = (self.win_b - t) / self.margin
        return _smoothstep(ua) * _smoothstep(ub)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        core = self.amplitude * np.exp(-((t - self.center) ** 2) / self.eta)
        return core * self._window(t)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        core = self.amplitude * np.exp(-((t - self.center) ** 2) / self.eta)
        dcore = core * (-2.0 * (t - self.center) / self.eta)
        if self.margin == 0.0:
            return dcore * self._window(t)
        ua = (t - self.win_a) / self.margin
        ub = (self.win_b - t) / self.margin
        win = _smoothstep(ua) * _smoothstep(ub)
        dwin = (_smoothstep_deriv(ua) * _smoothstep(ub)
                - _smoothstep(ua) * _smoothstep_deriv(ub)) / self.margin
        return dcore * win + core * dwin

    def shifted(self, tau: float) -> "BumpProfile":
        return BumpProfile(self.amplitude, self.center + tau, self.eta,
                           self.win_a + tau, self.win_b + tau, self.margin)

    def scaled(self, factor: float) -> "BumpProfile":
        return BumpProfile(self.amplitude * factor, self.center, self.eta,
                           self.win_a, self.win_b, self.margin)

    def params_array(self) -> np.ndarray:
        """Parameter vector consumed by the compiled record kernels."""
        return np.array([self.amplitude, self.center, self.eta,
                         self.win_a, self.win_b, self.margin])


def _radial_bump_and_slope(r, amplitude, width, r_out, core_fraction):
    """Radial profile ``phi(r) = amp exp(-r^2/width) cut(r)`` and the ratio
    ``phi'(r)/r`` (finite at r = 0).  ``cut`` is 1 inside ``core_fraction *
    r_out`` and 0 beyond ``r_out``."""
    r = np.asarray(r, dtype=float)
    ramp = r_out * (1.0 - core_fraction)
    u = (r_out - r) / ramp
    cut = _smoothstep(u)
    dcut = -_smoothstep_deriv(u) / ramp
    core = amplitude * np.exp(-(r**2) / width)
    phi = core * cut
    with np.errstate(invalid="ignore", divide="ignore"):
        dcut_over_r = np.where(r > 0.0, dcut / np.where(r > 0.0, r, 1.0), 0.0)
    slope = core * (-2.0 / width * cut + dcut_over_r)
    return phi, slope


@dataclass(frozen=True, eq=False)
class SeparableTerm:
    spatial: Callable = field(repr=False)
    profile: BumpProfile = field()


@dataclass(frozen=True, eq=False)
class SourceModel:
    """Sum-of-separable-terms source current.

    kind:
      * ``"separable"``   single term f(x) g(t), profile known to the probe
      * ``"general"``     arbitrary term sum, probed across a family of media
      * ``"x3-factored"`` spatial factor v(x1,x2) times a known profile of x3
    """

    kind: str
    support_radius: float
    duration: float
    terms: tuple
    divergence_free: bool = True
    descriptor: dict = field(default_factory=dict, repr=False)
    # x3-factored extras: transverse spatial factors and the vertical profile
    transverse: tuple = ()
    x3_profile: BumpProfile | None = None
    # per-axis half extents of the support box (defaults to a cube)
    box_half: tuple = ()

    def __post_init__(self):
        if self.kind not in ("separable", "general", "x3-factored"):
            raise ConfigError(f"unknown source kind {self.kind!r}")
        if not self.terms:
            raise ConfigError("source needs at least one term")
        if not self.box_half:
            r = self.support_radius
            object.__setattr__(self, "box_half", (r, r, r))

    @property
    def profile(self) -> BumpProfile:
        if self.kind != "separable" or len(self.terms) != 1:
            raise ConfigError("only single-term separable sources expose a "
                              "unique time profile")
        return self.terms[0].profile

    def evaluate(self, points, t):
        """F(x, t) for points (N,3) at scalar time t; exact zero outside
        the support."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros((points.shape[0], 3))
        for term in self.terms:
            g = float(term.profile(t))
            if g != 0.0:
                out += term.spatial(points) * g
        return out

    def evaluate_dt(self, points, t):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros((points.shape[0], 3))
        for term in self.terms:
            gd = float(term.profile.derivative(t))
            if gd != 0.0:
                out += term.spatial(points) * gd
        return out

    def transverse_evaluate(self, points2d, t):
        """x3-factored sources: v(x1,x2,t) = sum_m v_m(x1,x2) h_m(t)."""
        if self.kind != "x3-factored":
            raise ConfigError("transverse evaluation needs an x3-factored source")
        points2d = np.atleast_2d(np.asarray(points2d, dtype=float))
        out = np.zeros((points2d.shape[0], 3))
        for vt, prof in self.transverse:
            g = float(prof(t))
            if g != 0.0:
                out += vt(points2d) * g
        return out

    def term_spatial_values(self, points) -> np.ndarray:
        """(M, N, 3) spatial factors on a point cloud, for the kernels."""
        points = np.asarray(points, dtype=float)
        return np.stack([term.spatial(points) for term in self.terms])

    def profile_params(self) -> np.ndarray:
        return np.stack([term.profile.params_array() for term in self.terms])

    def scaled(self, factor: float) -> "SourceModel":
        terms = tuple(SeparableTerm(t.spatial, t.profile.scaled(factor))
                      for t in self.terms)
        transverse = tuple((vt, prof.scaled(factor)) for vt, prof in self.transverse)
        desc = dict(self.descriptor)
        desc["scaled_by"] = desc.get("scaled_by", 1.0) * factor
        return SourceModel(self.kind, self.support_radius, self.duration, terms,
                           self.divergence_free, desc, transverse,
                           self.x3_profile, self.box_half)

    def time_shifted(self, tau: float) -> "SourceModel":
        terms = tuple(SeparableTerm(t.spatial, t.profile.shifted(tau))
                      for t in self.terms)
        transverse = tuple((vt, prof.shifted(tau)) for vt, prof in self.transverse)
        return SourceModel(self.kind, self.support_radius, self.duration + tau,
                           terms, self.divergence_free, dict(self.descriptor),
                           transverse, self.x3_profile, self.box_half)


def combine(a: SourceModel, b: SourceModel) -> SourceModel:
    """Superpose two sources (term concatenation)."""
    return SourceModel(
        kind="general",
        support_radius=max(a.support_radius, b.support_radius),
        duration=max(a.duration, b.duration),
        terms=a.terms + b.terms,
        divergence_free=a.divergence_free and b.divergence_free,
        descriptor={"family": "superposition",
                    "parts": [a.descriptor, b.descriptor]},
    )


def _curl_bump_spatial(amplitude, width, support_radius, core_fraction, axis):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)

    def spatial(points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.linalg.norm(points, axis=1)
        _, slope = _radial_bump_and_slope(r, amplitude, width,
                                          support_radius, core_fraction)
        return slope[:, None] * np.cross(points, axis)

    return spatial, axis


def gaussian_curl_source(amplitude=1.0, width=0.02, support_radius=0.5,
                         core_fraction=0.7, axis=(0.0, 0.0, 1.0),
                         profile: BumpProfile | None = None) -> SourceModel:
    """Curl of an axis-aligned Gaussian bump potential: f = curl(phi(|x|) a).

    Divergence free for any radial profile; smooth with exact support.
    """
    if profile is None:
        profile = BumpProfile()
    spatial, axis = _curl_bump_spatial(amplitude, width, support_radius,
                                       core_fraction, axis)
    desc = {"family": "gaussian_curl", "amplitude": amplitude, "width": width,
            "support_radius": support_radius, "core_fraction": core_fraction,
            "axis": list(axis), "time_profile": _profile_descriptor(profile)}
    return SourceModel("separable", support_radius, profile.win_b,
                       (SeparableTerm(spatial, profile),), True, desc)


def ring_current_source(amplitude=1.0, ring_radius=0.25, tube_width=0.004,
                        tube_radius=0.2, core_fraction=0.6,
                        profile: BumpProfile | None = None) -> SourceModel:
    """Azimuthal current bump around a horizontal ring; divergence free
    because the density has no azimuthal dependence."""
    if profile is None:
        profile = BumpProfile()
    if ring_radius <= tube_radius:
        raise ConfigError("ring_radius must exceed tube_radius to keep the "
                          "axis singularity outside the support")

    def spatial(points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        rho = np.hypot(points[:, 0], points[:, 1])
        s = np.hypot(rho - ring_radius, points[:, 2])
        val, _ = _radial_bump_and_slope(s, amplitude, tube_width,
                                        tube_radius, core_fraction)
        safe_rho = np.where(rho > 0.0, rho, 1.0)
        e_phi = np.stack([-points[:, 1] / safe_rho,
                          points[:, 0] / safe_rho,
                          np.zeros(points.shape[0])], axis=1)
        return val[:, None] * e_phi

    support_radius = ring_radius + tube_radius
    desc = {"family": "ring_current", "amplitude": amplitude,
            "ring_radius": ring_radius, "tube_width": tube_width,
            "tube_radius": tube_radius, "core_fraction": core_fraction,
            "time_profile": _profile_descriptor(profile)}
    return SourceModel("separable", support_radius, profile.win_b,
                       (SeparableTerm(spatial, profile),), True, desc,
                       box_half=(support_radius, support_radius, tube_radius))


def two_term_general_source(amplitude=1.0, width=0.02, support_radius=0.5,
                            core_fraction=0.7,
                            profile_a: BumpProfile | None = None,
                            profile_b: BumpProfile | None = None) -> SourceModel:
    """General space-time source built from two separable divergence-free
    terms with distinct axes and time profiles."""
    if profile_a is None:
        profile_a = BumpProfile(center=0.8, eta=0.04)
    if profile_b is None:
        profile_b = BumpProfile(amplitude=0.7, center=1.3, eta=0.07)
    sp_a, _ = _curl_bump_spatial(amplitude, width, support_radius,
                                 core_fraction, (0.0, 0.0, 1.0))
    sp_b, _ = _curl_bump_spatial(0.8 * amplitude, 1.5 * width, support_radius,
                                 core_fraction, (1.0, 0.0, 0.0))
    desc = {"family": "two_term_general", "amplitude": amplitude,
            "width": width, "support_radius": support_radius,
            "core_fraction": core_fraction,
            "time_profile_a": _profile_descriptor(profile_a),
            "time_profile_b": _profile_descriptor(profile_b)}
    return SourceModel("general", support_radius,
                       max(profile_a.win_b, profile_b.win_b),
                       (SeparableTerm(sp_a, profile_a),
                        SeparableTerm(sp_b, profile_b)), True, desc)


def _planar_curl_spatial(amplitude, width, transverse_radius, core_fraction):
    def transverse(points2d):
        points2d = np.atleast_2d(np.asarray(points2d, dtype=float))
        rho = np.hypot(points2d[:, 0], points2d[:, 1])
        _, slope = _radial_bump_and_slope(rho, amplitude, width,
                                          transverse_radius, core_fraction)
        return np.stack([slope * points2d[:, 1],
                         -slope * points2d[:, 0],
                         np.zeros(points2d.shape[0])], axis=1)

    return transverse


def x3_factored_source(amplitude=1.0, width=0.02, transverse_radius=0.5,
                       core_fraction=0.7,
                       profile: BumpProfile | None = None,
                       x3_profile: BumpProfile | None = None) -> SourceModel:
    """Source F(x,t) = v(x1,x2) h(t) g(x3) with a planar rotated-gradient
    factor v (so div F = 0 for any g) and a known vertical profile g."""
    if profile is None:
        profile = BumpProfile()
    if x3_profile is None:
        x3_profile = BumpProfile(amplitude=1.0, center=0.0, eta=0.05,
                                 win_a=-0.5, win_b=0.5, margin=0.1)
    transverse = _planar_curl_spatial(amplitude, width, transverse_radius,
                                      core_fraction)

    def spatial(points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        v = transverse(points[:, :2])
        return v * np.asarray(x3_profile(points[:, 2]))[:, None]

    half_span = max(abs(x3_profile.win_a), abs(x3_profile.win_b))
    support_radius = float(np.hypot(transverse_radius, half_span))
    desc = {"family": "x3_factored", "amplitude": amplitude, "width": width,
            "transverse_radius": transverse_radius,
            "core_fraction": core_fraction,
            "time_profile": _profile_descriptor(profile),
            "x3_profile": _profile_descriptor(x3_profile)}
    return SourceModel("x3-factored", support_radius, profile.win_b,
                       (SeparableTerm(spatial, profile),), True, desc,
                       transverse=((transverse, profile),),
                       x3_profile=x3_profile,
                       box_half=(transverse_radius, transverse_radius, half_span))


def _profile_descriptor(profile: BumpProfile) -> dict:
    return {"amplitude": profile.amplitude, "center": profile.center,
            "eta": profile.eta, "window": [profile.win_a, profile.win_b],
            "margin": profile.margin}


def profile_from_descriptor(desc: dict) -> BumpProfile:
    known = {"amplitude", "center", "eta", "window", "margin"}
    unknown = set(desc) - known
    if unknown:
        raise ConfigError(f"unknown time profile keys: {sorted(unknown)}")
    win = desc.get("window", [0.0, 2.0])
    return BumpProfile(amplitude=desc.get("amplitude", 1.0),
                       center=desc.get("center", 1.0),
                       eta=desc.get("eta", 0.05),
                       win_a=win[0], win_b=win[1],
                       margin=desc.get("margin", 0.0))


_FAMILY_KEYS = {
    "gaussian_curl": {"amplitude", "width", "support_radius", "core_fraction",
                      "axis", "time_profile"},
    "ring_current": {"amplitude", "ring_radius", "tube_width", "tube_radius",
                     "core_fraction", "time_profile"},
    "two_term_general": {"amplitude", "width", "support_radius",
                         "core_fraction", "time_profile_a", "time_profile_b"},
    "x3_factored": {"amplitude", "width", "transverse_radius", "core_fraction",
                    "time_profile", "x3_profile"},
}


def build_source(desc: dict) -> SourceModel:
    """Construct a source from a configuration mapping; unknown keys fail."""
    if "family" not in desc:
        raise ConfigError("source configuration needs a 'family' key")
    family = desc["family"]
    if family not in _FAMILY_KEYS:
        raise ConfigError(f"unknown source family {family!r}; expected one of "
                          f"{sorted(_FAMILY_KEYS)}")
    extra = set(desc) - _FAMILY_KEYS[family] - {"family"}
    if extra:
        raise ConfigError(f"unknown source keys for {family}: {sorted(extra)}")
    kwargs = {k: v for k, v in desc.items() if k != "family"}
    rename = {"time_profile": "profile", "time_profile_a": "profile_a",
              "time_profile_b": "profile_b", "x3_profile": "x3_profile"}
    for key, target in rename.items():
        if key in kwargs:
            kwargs[target] = profile_from_descriptor(kwargs.pop(key))
    if family == "gaussian_curl":
        return gaussian_curl_source(**kwargs)
    if family == "ring_current":
        return ring_current_source(**kwargs)
    if family == "two_term_general":
        return two_term_general_source(**kwargs)
    return x3_factored_source(**kwargs)

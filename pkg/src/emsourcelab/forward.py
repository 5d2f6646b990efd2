"""Retarded-potential forward solver.

For a divergence-free source each field component solves a scalar wave
equation with speed 1/sqrt(n), so the electric field is the retarded
volume potential

    E(x, t) = (4 pi)^(-1) int F(y, t - sqrt(n) |x - y|) / |x - y| dy

and its curl follows from differentiating the kernel explicitly.  Retarded
times are evaluated exactly at every quadrature node; no interpolation in
time is performed anywhere.
"""

from __future__ import annotations

import numpy as np

from .errors import GeometryError
from .geometry import MediumParams, SphereGrid
from .oracle import support_grid
from .sources import SourceModel

_FOUR_PI = 4.0 * np.pi


def _prepared_grid(source: SourceModel, resolution: int):
    points, w, values = support_grid(source, resolution)
    h = max(2.0 * half / resolution for half in source.box_half)
    return points, w, values, h


def retarded_field(source: SourceModel, points, times,
                   medium: MediumParams, resolution: int = 48):
    """Electric field at the given points and times, shape (Np, Nt, 3).

    Quadrature nodes closer than one cell to an evaluation point are
    dropped and replaced by the analytic small-ball value F(x,t) h^2 / 2.
    """
    ypts, w, vals, h = _prepared_grid(source, resolution)
    sqrt_n = medium.sqrt_n
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.zeros((pts.shape[0], ts.size, 3))
    for i, x in enumerate(pts):
        diff = x - ypts
        r = np.sqrt(np.sum(diff * diff, axis=1))
        keep = r >= h
        inv_r = 1.0 / r[keep]
        term_vals = [vals[m][keep] for m in range(len(source.terms))]
        excluded = not np.all(keep)
        for j, t in enumerate(ts):
            tau = t - sqrt_n * r[keep]
            acc = np.zeros(3)
            for m, term in enumerate(source.terms):
                g = np.asarray(term.profile(tau))
                if not np.any(g):
                    continue
                acc += (g * inv_r) @ term_vals[m]
            out[i, j] = (w / _FOUR_PI) * acc
            if excluded:
                out[i, j] += source.evaluate(x[None, :], t)[0] * (0.5 * h * h)
    return out


def retarded_curl(source: SourceModel, points, times,
                  medium: MediumParams, resolution: int = 48):
    """curl E at the given points and times, shape (Np, Nt, 3).

    Uses the differentiated kernel
    -(4 pi)^(-1) int rhat x [F/r^2 + sqrt(n) dF/dt / r] dy.
    The near-singular cell exclusion needs no correction here because the
    kernel is odd around the evaluation point.
    """
    ypts, w, vals, h = _prepared_grid(source, resolution)
    sqrt_n = medium.sqrt_n
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.zeros((pts.shape[0], ts.size, 3))
    for i, x in enumerate(pts):
        diff = x - ypts
        r = np.sqrt(np.sum(diff * diff, axis=1))
        keep = r >= h
        inv_r = 1.0 / r[keep]
        rhat = diff[keep] * inv_r[:, None]
        cross = [np.cross(rhat, vals[m][keep]) for m in range(len(source.terms))]
        for j, t in enumerate(ts):
            tau = t - sqrt_n * r[keep]
            acc = np.zeros(3)
            for m, term in enumerate(source.terms):
                g = np.asarray(term.profile(tau))
                gp = np.asarray(term.profile.derivative(tau))
                if not (np.any(g) or np.any(gp)):
                    continue
                coef = g * inv_r * inv_r + sqrt_n * gp * inv_r
                acc += coef @ cross[m]
            out[i, j] = -(w / _FOUR_PI) * acc
    return out


def huygens_horizon(source: SourceModel, medium: MediumParams,
                    ball_radius: float) -> float:
    """Time after which the field vanishes identically inside the ball:
    source duration plus the two-way travel time across the ball."""
    return source.duration + 2.0 * medium.sqrt_n * ball_radius


def sample_ball_points(ball_radius: float, n_points: int, seed: int = 7,
                       shell_fraction: float = 0.5) -> np.ndarray:
    """Deterministic sample points inside a ball: a fraction on the bounding
    sphere, the rest spread through the interior."""
    rng = np.random.default_rng(seed)
    n_shell = int(round(shell_fraction * n_points))
    u = rng.normal(size=(n_shell, 3))
    shell = ball_radius * u / np.linalg.norm(u, axis=1, keepdims=True)
    v = rng.normal(size=(n_points - n_shell, 3))
    radii = ball_radius * rng.uniform(0.05, 1.0,
                                      size=n_points - n_shell) ** (1.0 / 3.0)
    interior = radii[:, None] * v / np.linalg.norm(v, axis=1, keepdims=True)
    return np.vstack([shell, interior])


def huygens_residual(source: SourceModel, medium: MediumParams,
                     probe_points, time: float, n_scan: int = 10,
                     resolution: int = 40):
    """Max |E| over the probe points at a time past the propagation horizon,
    with the in-window peak over the same points for scale.

    Returns (residual, peak).  The horizon is taken for the smallest origin
    ball containing the probe points; asking for a time at or before it is a
    geometry error.
    """
    pts = np.atleast_2d(np.asarray(probe_points, dtype=float))
    ball_radius = float(np.max(np.linalg.norm(pts, axis=1)))
    horizon = huygens_horizon(source, medium, ball_radius)
    if time <= horizon:
        raise GeometryError(
            f"check time {time} is inside the horizon {horizon:.6g}")
    scan = np.linspace(0.3 * horizon, horizon, n_scan)
    field = retarded_field(source, pts, scan, medium, resolution=resolution)
    peak = float(np.max(np.linalg.norm(field, axis=2)))
    late = retarded_field(source, pts, [time], medium, resolution=resolution)
    residual = float(np.max(np.linalg.norm(late, axis=2)))
    return residual, peak


def sphere_snapshot(source: SourceModel, medium: MediumParams, radius: float,
                    time: float, n_polar: int = 16, n_azimuth: int = 32,
                    resolution: int = 48):
    """Field values on a sphere at one time; returns (points, E (N,3))."""
    grid = SphereGrid.build(radius, n_polar, n_azimuth)
    field = retarded_field(source, grid.nodes, [time], medium,
                           resolution=resolution)
    return grid.nodes, field[:, 0, :]

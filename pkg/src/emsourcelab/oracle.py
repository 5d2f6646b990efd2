"""Direct-quadrature Fourier oracles.

These routines evaluate source transforms by brute-force tensor-product
quadrature and serve as the independent reference for everything the
probing pipeline produces.  Spatial integrals use a midpoint grid over the
support box (the integrands are smooth with exact compact support, so the
midpoint rule converges super-algebraically); time factors use adaptive
quadrature.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import AccuracyError, ConfigError
from .geometry import TWO_PI, fourier_time_profile
from .sources import SourceModel

_NORM3 = TWO_PI ** -1.5
_NORM1 = TWO_PI ** -0.5


def support_grid(source: SourceModel, resolution: int):
    """Midpoint quadrature points over the support box, pruned to the cells
    where some spatial factor is nonzero.

    Returns (points (Na,3), cell_weight, spatial_values (M,Na,3)).
    """
    if resolution < 2:
        raise ConfigError("volume resolution must be at least 2")
    axes = []
    weight = 1.0
    for half in source.box_half:
        h = 2.0 * half / resolution
        axes.append(-half + (np.arange(resolution) + 0.5) * h)
        weight *= h
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    points = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    values = source.term_spatial_values(points)
    mask = np.any(values != 0.0, axis=(0, 2))
    return np.ascontiguousarray(points[mask]), weight, \
        np.ascontiguousarray(values[:, mask, :])


def _spatial_transform_batch(points, fw, xi):
    """(2 pi)^(-3/2) sum_y w f(y) exp(-i xi.y) for a batch of (complex)
    frequencies xi of shape (N,3); fw carries the quadrature weight."""
    xi = np.atleast_2d(np.asarray(xi, dtype=complex))
    out = np.empty((xi.shape[0], 3), dtype=np.complex128)
    _kernels.fourier_batch(points,
                           np.ascontiguousarray(fw),
                           np.ascontiguousarray(xi.real),
                           np.ascontiguousarray(xi.imag),
                           out)
    return _NORM3 * out


def spatial_transform(source: SourceModel, xi, resolution: int = 64,
                      term: int = 0):
    """Transform of one spatial factor at frequencies xi ((N,3) or (3,),
    real or complex)."""
    points, w, values = support_grid(source, resolution)
    xi = np.asarray(xi, dtype=complex)
    single = xi.ndim == 1
    out = _spatial_transform_batch(points, w * values[term], xi)
    return out[0] if single else out


def direct_fourier_oracle(source: SourceModel, xi, omega: float | None = None,
                          resolution: int = 64, estimate_error: bool = False,
                          tol: float | None = None):
    """Reference transform of the source.

    Without ``omega``: the 3D transform of the (single) spatial factor,
    ``(2 pi)^(-3/2) int f(x) exp(-i xi.x) dx``.  With ``omega``: the full
    space-time transform ``(2 pi)^(-2) int F exp(-i(xi.x + omega t)) dx dt``,
    evaluated term by term (the exact factorization of the tensor-product
    integral for separable terms).

    With ``estimate_error=True`` returns ``(value, err)`` where ``err`` is
    the discrepancy against a half-resolution evaluation; if ``tol`` is set
    an estimate above it raises AccuracyError.
    """
    def evaluate(res):
        points, w, values = support_grid(source, res)
        xi_arr = np.asarray(xi, dtype=complex).reshape(1, 3)
        if omega is None:
            if source.kind != "separable" or len(source.terms) != 1:
                raise ConfigError(
                    "the 3D spatial transform needs a single-term separable "
                    "source; pass omega for the space-time transform")
            return _spatial_transform_batch(points, w * values[0], xi_arr)[0]
        total = np.zeros(3, dtype=complex)
        for m, term in enumerate(source.terms):
            s_m = _spatial_transform_batch(points, w * values[m], xi_arr)[0]
            t_m = fourier_time_profile(term.profile, omega)
            total += s_m * t_m
        # (2 pi)^(-3/2) * (2 pi)^(-1/2) = (2 pi)^(-2)
        return total

    val = evaluate(resolution)
    if not (estimate_error or tol is not None):
        return val
    coarse = evaluate(max(2, resolution // 2))
    err = float(np.linalg.norm(val - coarse))
    if tol is not None and err > tol:
        raise AccuracyError(
            f"oracle refinement estimate {err:.3e} exceeds tol {tol:.3e}; "
            f"raise the resolution (currently {resolution})")
    return (val, err) if estimate_error else val


def transverse_fourier_oracle(source: SourceModel, xi1: float, xi2: float,
                              omega: float, resolution: int = 96):
    """Transform of the transverse factor of an x3-factored source:
    ``(2 pi)^(-3/2) int v(x1,x2,t) exp(-i(xi1 x1 + xi2 x2 + omega t)) dx dt``.
    """
    if source.kind != "x3-factored":
        raise ConfigError("transverse transform needs an x3-factored source")
    half = source.box_half[0]
    h = 2.0 * half / resolution
    ax = -half + (np.arange(resolution) + 0.5) * h
    gx, gy = np.meshgrid(ax, ax, indexing="ij")
    pts2 = np.stack([gx.ravel(), gy.ravel()], axis=1)
    total = np.zeros(3, dtype=complex)
    ph = pts2[:, 0] * xi1 + pts2[:, 1] * xi2
    phase = np.cos(ph) - 1j * np.sin(ph)
    for vt, prof in source.transverse:
        vals = vt(pts2)
        s_m = h * h * (phase @ vals)
        t_m = fourier_time_profile(prof, omega)
        total += s_m * t_m
    # (2 pi)^(-3/2) over (x1, x2, t); fourier_time_profile already carries
    # one factor of (2 pi)^(-1/2).
    return _NORM3 * np.sqrt(TWO_PI) * total


def spatial_l2_norm(source: SourceModel, resolution: int = 96) -> float:
    """L2 norm of the spatial factor f of a single-term separable source."""
    if len(source.terms) != 1:
        raise ConfigError("spatial L2 norm is defined for single-term sources")
    points, w, values = support_grid(source, resolution)
    return float(np.sqrt(w * np.sum(values[0] ** 2)))


def sobolev_h1_norm(source: SourceModel, resolution: int = 96,
                    fd_step: float = 1e-4) -> float:
    """H1 norm of the spatial factor via central differences on the support
    grid: sqrt(int |f|^2 + |grad f|^2)."""
    if len(source.terms) != 1:
        raise ConfigError("H1 norm is defined for single-term sources")
    points, w, _ = support_grid(source, resolution)
    spatial = source.terms[0].spatial
    total = np.sum(spatial(points) ** 2)
    for ax in range(3):
        shift = np.zeros(3)
        shift[ax] = fd_step
        diff = (spatial(points + shift) - spatial(points - shift)) / (2 * fd_step)
        total += np.sum(diff ** 2)
    return float(np.sqrt(w * total))

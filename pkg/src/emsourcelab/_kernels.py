"""Compiled inner loops.

Retarded times are always evaluated exactly; the kernels only restrict the
time loop to the window where the bump profile is nonzero.  Each output
element is accumulated by a single sequential reduction, so results do not
depend on the parallel schedule.
"""

import numpy as np
from numba import njit, prange

_FOUR_PI = 4.0 * np.pi


@njit(cache=True)
def _step_eval(u):
    """C-infinity smoothstep and its derivative."""
    if u <= 0.0:
        return 0.0, 0.0
    if u >= 1.0:
        return 1.0, 0.0
    h = np.exp(-1.0 / u)
    k = np.exp(-1.0 / (1.0 - u))
    den = h + k
    s = h / den
    ds = h * k * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u))) / (den * den)
    return s, ds


@njit(cache=True)
def _bump_eval(tau, amp, center, eta, win_a, win_b, margin):
    """Windowed Gaussian bump value and time derivative at tau."""
    if tau <= win_a or tau >= win_b:
        return 0.0, 0.0
    core = amp * np.exp(-((tau - center) ** 2) / eta)
    dcore = core * (-2.0 * (tau - center) / eta)
    if margin == 0.0:
        return core, dcore
    sa, da = _step_eval((tau - win_a) / margin)
    sb, db = _step_eval((win_b - tau) / margin)
    win = sa * sb
    dwin = (da * sb - sa * db) / margin
    return core * win, dcore * win + core * dwin


@njit(cache=True, parallel=True)
def fill_boundary_record(nodes, normals, times, ypts, yfw, gparams, sqrt_n,
                         trace_e, trace_curl):
    """Tangential traces of the retarded volume potential on the sphere.

    nodes/normals: (Nx,3); times: (Nt,) uniform; ypts: (Na,3) volume nodes;
    yfw: (M,Na,3) spatial factors with quadrature weights folded in;
    gparams: (M,6) bump parameters per term.  Outputs trace_e (E x nu) and
    trace_curl ((curl E) x nu), both (Nx,Nt,3).
    """
    n_nodes = nodes.shape[0]
    n_t = times.shape[0]
    n_y = ypts.shape[0]
    n_m = gparams.shape[0]
    dt = times[1] - times[0]
    for i in prange(n_nodes):
        acc_e = np.zeros((n_t, 3))
        acc_k = np.zeros((n_t, 3))
        for a in range(n_y):
            dx0 = nodes[i, 0] - ypts[a, 0]
            dx1 = nodes[i, 1] - ypts[a, 1]
            dx2 = nodes[i, 2] - ypts[a, 2]
            r = np.sqrt(dx0 * dx0 + dx1 * dx1 + dx2 * dx2)
            inv_r = 1.0 / r
            u = sqrt_n * r
            rh0 = dx0 * inv_r
            rh1 = dx1 * inv_r
            rh2 = dx2 * inv_r
            for m in range(n_m):
                f0 = yfw[m, a, 0]
                f1 = yfw[m, a, 1]
                f2 = yfw[m, a, 2]
                cx0 = rh1 * f2 - rh2 * f1
                cx1 = rh2 * f0 - rh0 * f2
                cx2 = rh0 * f1 - rh1 * f0
                ce = inv_r / _FOUR_PI
                cb = inv_r * inv_r / _FOUR_PI
                cc = sqrt_n * inv_r / _FOUR_PI
                j_lo = int(np.floor((u + gparams[m, 3]) / dt))
                j_hi = int(np.ceil((u + gparams[m, 4]) / dt))
                if j_lo < 0:
                    j_lo = 0
                if j_hi > n_t - 1:
                    j_hi = n_t - 1
                for j in range(j_lo, j_hi + 1):
                    tau = times[j] - u
                    g, gd = _bump_eval(tau, gparams[m, 0], gparams[m, 1],
                                       gparams[m, 2], gparams[m, 3],
                                       gparams[m, 4], gparams[m, 5])
                    if g != 0.0 or gd != 0.0:
                        acc_e[j, 0] += ce * g * f0
                        acc_e[j, 1] += ce * g * f1
                        acc_e[j, 2] += ce * g * f2
                        w = cb * g + cc * gd
                        acc_k[j, 0] += w * cx0
                        acc_k[j, 1] += w * cx1
                        acc_k[j, 2] += w * cx2
        nu0 = normals[i, 0]
        nu1 = normals[i, 1]
        nu2 = normals[i, 2]
        for j in range(n_t):
            e0 = acc_e[j, 0]
            e1 = acc_e[j, 1]
            e2 = acc_e[j, 2]
            trace_e[i, j, 0] = e1 * nu2 - e2 * nu1
            trace_e[i, j, 1] = e2 * nu0 - e0 * nu2
            trace_e[i, j, 2] = e0 * nu1 - e1 * nu0
            # curl E = -acc_k
            k0 = -acc_k[j, 0]
            k1 = -acc_k[j, 1]
            k2 = -acc_k[j, 2]
            trace_curl[i, j, 0] = k1 * nu2 - k2 * nu1
            trace_curl[i, j, 1] = k2 * nu0 - k0 * nu2
            trace_curl[i, j, 2] = k0 * nu1 - k1 * nu0


@njit(cache=True, parallel=True)
def fourier_batch(ypts, yfw, xi_re, xi_im, out):
    """Direct quadrature of (unnormalized) int f(y) exp(-i xi.y) dy for a
    batch of complex frequencies xi = xi_re + i xi_im; out is (Nk,3)
    complex128 and the (2 pi)^(-3/2) factor is applied by the caller."""
    n_k = xi_re.shape[0]
    n_y = ypts.shape[0]
    for k in prange(n_k):
        re0 = 0.0
        im0 = 0.0
        re1 = 0.0
        im1 = 0.0
        re2 = 0.0
        im2 = 0.0
        for a in range(n_y):
            ph = (xi_re[k, 0] * ypts[a, 0] + xi_re[k, 1] * ypts[a, 1]
                  + xi_re[k, 2] * ypts[a, 2])
            dm = (xi_im[k, 0] * ypts[a, 0] + xi_im[k, 1] * ypts[a, 1]
                  + xi_im[k, 2] * ypts[a, 2])
            amp = np.exp(dm)
            c = amp * np.cos(ph)
            s = -amp * np.sin(ph)
            re0 += c * yfw[a, 0]
            im0 += s * yfw[a, 0]
            re1 += c * yfw[a, 1]
            im1 += s * yfw[a, 1]
            re2 += c * yfw[a, 2]
            im2 += s * yfw[a, 2]
        out[k, 0] = re0 + 1j * im0
        out[k, 1] = re1 + 1j * im1
        out[k, 2] = re2 + 1j * im2


@njit(cache=True, parallel=True)
def synthesize_band(grid, xi, coef, out):
    """Weighted band synthesis sum_k coef_k exp(+i xi_k.x) on grid points;
    coef and out are complex128 arrays of shape (Nn,3) and (Ng,3)."""
    n_g = grid.shape[0]
    n_k = xi.shape[0]
    for g in prange(n_g):
        a0 = 0.0 + 0.0j
        a1 = 0.0 + 0.0j
        a2 = 0.0 + 0.0j
        for k in range(n_k):
            ph = (xi[k, 0] * grid[g, 0] + xi[k, 1] * grid[g, 1]
                  + xi[k, 2] * grid[g, 2])
            w = np.cos(ph) + 1j * np.sin(ph)
            a0 += w * coef[k, 0]
            a1 += w * coef[k, 1]
            a2 += w * coef[k, 2]
        out[g, 0] = a0
        out[g, 1] = a1
        out[g, 2] = a2

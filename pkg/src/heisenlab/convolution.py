"""Group convolution on H^n grids.

    (f * g)(eta) = int f(eta o xi^{-1}) g(xi) dxi

with ``xi`` running over the grid nodes (cell volume as the measure, which is
Lebesgue = Haar measure) and ``f`` read off-grid by trilinear interpolation
with zero extension outside the box.

Because ``eta o xi^{-1} = (x - x', y - y', tau - tau' - s)`` with the twist
``s = 2(x.y' - x'.y)``, the xy part of the argument lands on the grid (or on
half cells for even point counts), and only the tau coordinate needs
interpolation. For each pair of xy nodes the tau sum is a 1-D discrete
convolution of two tau lines read at a fractional shift; linear interpolation
of that shift is a two-tap filter. All of it is carried out in tau-Fourier
space with enough zero padding that no shifted window can wrap around.
"""
from __future__ import annotations

import numba
import numpy as np
from scipy import fft as sfft
from scipy.ndimage import map_coordinates

from .grid import GridField, GridSpec
from .errors import GridError

__all__ = ["heisenberg_convolve", "heisenberg_convolve_reference"]


@numba.njit(cache=True)
def _twisted_accumulate(Fhat, Ghat, f_active, g_active, node_idx, node_xy,
                        off, ne, n_tau, h_tau, P, W):
    K = node_idx.shape[0]
    d = node_idx.shape[1]
    n = d // 2
    nf = Fhat.shape[1]
    c = 0.5 * (n_tau - 1)
    out = np.zeros((K, nf), dtype=np.complex128)
    for io in range(K):
        for jj in range(g_active.shape[0]):
            js = g_active[jj]
            a = 0
            ok = True
            for ax in range(d):
                q = node_idx[io, ax] - node_idx[js, ax] + off
                if q < 0 or q >= ne:
                    ok = False
                    break
                a = a * ne + q
            if not ok or not f_active[a]:
                continue
            s = 0.0
            for ax in range(n):
                s += node_xy[io, ax] * node_xy[js, n + ax] - node_xy[js, ax] * node_xy[io, n + ax]
            beta = c - 2.0 * s / h_tau
            m = int(np.floor(beta))
            theta = beta - m
            if m > 2 * n_tau - 2 or m + n_tau < 0:
                continue
            for w in range(nf):
                k = (w * m) % P
                if k < 0:
                    k += P
                ph = W[k] * ((1.0 - theta) + theta * W[w])
                out[io, w] += Fhat[a, w] * Ghat[js, w] * ph
    return out


def _effective_f(values: np.ndarray, spec: GridSpec):
    """f on the index lattice of xy differences; averages half cells for even N."""
    N = spec.points_per_xy_axis
    if N % 2 == 1:
        return values, (N - 1) // 2, N
    v = values
    for ax in range(2 * spec.n):
        pad = [(0, 0)] * v.ndim
        pad[ax] = (1, 1)
        g = np.pad(v, pad)
        lo = [slice(None)] * v.ndim
        hi = [slice(None)] * v.ndim
        lo[ax] = slice(None, -1)
        hi[ax] = slice(1, None)
        v = 0.5 * (g[tuple(lo)] + g[tuple(hi)])
    return v, N // 2, N + 1


def _node_tables(spec: GridSpec):
    N = spec.points_per_xy_axis
    d = 2 * spec.n
    idx = np.indices((N,) * d).reshape(d, -1).T.astype(np.int64)
    xy = spec.xy_nodes()[idx]
    return np.ascontiguousarray(idx), np.ascontiguousarray(xy)


def heisenberg_convolve(f: GridField, g: GridField, support_tol: float = 1e-14) -> GridField:
    """Group convolution ``f * g`` sampled on the common grid.

    Parameters
    ----------
    f, g : GridField
        Fields on the same grid. ``f`` is the one interpolated off-grid.
    support_tol : float
        tau lines of ``f`` or ``g`` whose peak is below ``support_tol`` times the
        field's peak are skipped. ``0`` gives the full O(N^2) sum.
    """
    f.check_compatible(g)
    spec = f.spec
    nt = spec.points_per_tau_axis

    fe, off, ne = _effective_f(f.values, spec)
    f_lines = fe.reshape(-1, nt)
    g_lines = g.values.reshape(-1, nt)

    def active(lines):
        peak = np.max(np.abs(lines), axis=1)
        top = peak.max()
        if top == 0.0:
            return np.zeros(lines.shape[0], dtype=bool)
        return peak > support_tol * top

    f_act = active(f_lines)
    g_act = np.flatnonzero(active(g_lines)).astype(np.int64)
    if not f_act.any() or g_act.size == 0:
        return GridField.zeros(spec)

    P = sfft.next_fast_len(3 * nt, real=True)
    Fhat = sfft.rfft(f_lines, n=P, axis=1)
    Ghat = sfft.rfft(g_lines, n=P, axis=1)
    W = np.exp(2j * np.pi * np.arange(P) / P)
    idx, xy = _node_tables(spec)
    acc = _twisted_accumulate(Fhat, Ghat, f_act, g_act, idx, xy,
                              off, ne, nt, spec.h_tau, P, W)
    out = sfft.irfft(acc, n=P, axis=1)[:, :nt] * spec.cell_volume
    out = out.reshape(spec.shape)
    if f.values.min() >= 0.0 and g.values.min() >= 0.0:
        # exact result is nonnegative; anything below is FFT roundoff
        np.maximum(out, 0.0, out=out)
    return GridField(spec, out)


def heisenberg_convolve_reference(f: GridField, g: GridField) -> GridField:
    """Direct O(N^2) convolution with explicit trilinear interpolation.

    Independent of :func:`heisenberg_convolve`; meant for small grids.
    """
    f.check_compatible(g)
    spec = f.spec
    if spec.size > 20000:
        raise GridError("reference convolution is limited to small grids")
    n = spec.n
    xs, ys, tau = spec.coordinates()
    full = [np.broadcast_to(c, spec.shape).ravel() for c in xs + ys + [tau]]
    pts = np.stack(full, axis=1)
    gv = g.values.ravel()
    lo = np.array([-spec.half_width_xy] * (2 * n) + [-spec.half_width_tau])
    h = np.array([spec.h_xy] * (2 * n) + [spec.h_tau])
    out = np.empty(spec.size)
    for k, eta in enumerate(pts):
        # eta o xi^{-1} for every node xi
        arg = eta[None, :] - pts
        xe, ye = eta[:n], eta[n : 2 * n]
        xi_x, xi_y = pts[:, :n], pts[:, n : 2 * n]
        arg[:, -1] -= 2.0 * (xi_y @ xe - xi_x @ ye)
        coords = ((arg - lo) / h).T
        fv = map_coordinates(f.values, coords, order=1, mode="grid-constant", cval=0.0)
        out[k] = np.dot(fv, gv)
    return GridField(spec, out.reshape(spec.shape) * spec.cell_volume)

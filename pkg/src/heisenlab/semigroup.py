"""The heat semigroup ``S(t) = exp(t Delta_H)`` on grids.

Two backends realize it:

``kernel_convolution``
    ``S(t) f = h_t * f`` with the sampled heat kernel. Exact in time; accurate
    once the kernel at time ``t`` is resolved by the grid.
``fd_stepping``
    Forward-Euler substeps ``u <- u + dt Delta_H u`` with the Dirichlet
    stencil and ``dt`` below :func:`~heisenlab.stencils.stability_bound`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .convolution import heisenberg_convolve
from .errors import GridError, UnderflowError
from .grid import GridField, GridSpec
from .kernel import KernelQuadrature, sample_kernel
from .stencils import stability_bound, sub_laplacian_array

__all__ = [
    "SemigroupBackend",
    "apply_semigroup",
    "fd_substeps",
    "lp_lq_decay_fit",
    "standard_kernel_grid",
]


@dataclass(frozen=True)
class SemigroupBackend:
    """How ``S(t)`` is computed.

    ``safety`` scales the explicit stability bound for ``fd_stepping``;
    ``max_substep`` optionally caps the substep further.
    """

    kind: str = "fd_stepping"
    safety: float = 0.9
    max_substep: float | None = None
    quadrature: KernelQuadrature | None = None
    support_tol: float = 1e-14

    def __post_init__(self):
        if self.kind not in ("kernel_convolution", "fd_stepping"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if not 0 < self.safety <= 1:
            raise ValueError("safety must lie in (0, 1]")


def fd_substeps(t: float, spec: GridSpec, backend: SemigroupBackend) -> tuple[int, float]:
    """Number and length of Euler substeps covering ``[0, t]``."""
    dt_max = stability_bound(spec, backend.safety)
    if backend.max_substep is not None:
        dt_max = min(dt_max, backend.max_substep)
    if not dt_max > 0:
        raise GridError("stability bound is unsatisfiable on this grid")
    k = max(1, math.ceil(t / dt_max - 1e-12))
    return k, t / k


@numba.njit(cache=True)
def _euler_n1(u, out, dt, h, ht, xs, ys):
    """One Euler step of the Dirichlet stencil for n = 1 (same formulas as
    :func:`sub_laplacian_array`, fused into one pass)."""
    nx, ny, nt = u.shape
    ih2 = 1.0 / (h * h)
    it2 = 1.0 / (ht * ht)
    imix = 1.0 / (4.0 * h * ht)
    for i in range(nx):
        x = xs[i]
        for j in range(ny):
            y = ys[j]
            c_tt = 4.0 * (x * x + y * y) * it2
            c_yt = 4.0 * x * imix
            c_xt = -4.0 * y * imix
            for k in range(nt):
                c = u[i, j, k]
                xm = u[i - 1, j, k] if i > 0 else 0.0
                xp = u[i + 1, j, k] if i < nx - 1 else 0.0
                ym = u[i, j - 1, k] if j > 0 else 0.0
                yp = u[i, j + 1, k] if j < ny - 1 else 0.0
                tm = u[i, j, k - 1] if k > 0 else 0.0
                tp = u[i, j, k + 1] if k < nt - 1 else 0.0
                lap = (xm + xp + ym + yp - 4.0 * c) * ih2 + c_tt * (tm - 2.0 * c + tp)
                # cross differences; zero outside the box
                mix_x = 0.0
                mix_y = 0.0
                if k > 0 and k < nt - 1:
                    if i < nx - 1:
                        mix_x += u[i + 1, j, k + 1] - u[i + 1, j, k - 1]
                    if i > 0:
                        mix_x -= u[i - 1, j, k + 1] - u[i - 1, j, k - 1]
                    if j < ny - 1:
                        mix_y += u[i, j + 1, k + 1] - u[i, j + 1, k - 1]
                    if j > 0:
                        mix_y -= u[i, j - 1, k + 1] - u[i, j - 1, k - 1]
                elif k == 0:
                    if i < nx - 1:
                        mix_x += u[i + 1, j, k + 1]
                    if i > 0:
                        mix_x -= u[i - 1, j, k + 1]
                    if j < ny - 1:
                        mix_y += u[i, j + 1, k + 1]
                    if j > 0:
                        mix_y -= u[i, j - 1, k + 1]
                else:
                    if i < nx - 1:
                        mix_x -= u[i + 1, j, k - 1]
                    if i > 0:
                        mix_x += u[i - 1, j, k - 1]
                    if j < ny - 1:
                        mix_y -= u[i, j + 1, k - 1]
                    if j > 0:
                        mix_y += u[i, j - 1, k - 1]
                out[i, j, k] = c + dt * (lap + c_yt * mix_y + c_xt * mix_x)


def _fd_flow(v: np.ndarray, spec: GridSpec, t: float, backend: SemigroupBackend) -> np.ndarray:
    k, dt = fd_substeps(t, spec, backend)
    u = np.array(v, dtype=float, copy=True)
    if spec.n == 1:
        g = spec.xy_nodes()
        buf = np.empty_like(u)
        for _ in range(k):
            _euler_n1(u, buf, dt, spec.h_xy, spec.h_tau, g, g)
            u, buf = buf, u
        return u
    for _ in range(k):
        u = u + dt * sub_laplacian_array(u, spec, "dirichlet")
    return u


def apply_semigroup(f: GridField, t: float, backend: SemigroupBackend | None = None) -> GridField:
    """``S(t) f``; ``t = 0`` returns a copy of ``f``."""
    backend = backend or SemigroupBackend()
    t = float(t)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return f.like(f.values.copy())
    if backend.kind == "kernel_convolution":
        h = sample_kernel(t, f.spec, backend.quadrature)
        return heisenberg_convolve(h, f, backend.support_tol)
    return f.like(_fd_flow(f.values, f.spec, t, backend))


def standard_kernel_grid(t: float, points_xy: int = 41, points_tau: int = 193) -> GridSpec:
    """Box adequate for kernels up to time ``t``: ``L = 6 sqrt(t)``, ``L_tau = 24 t``."""
    return GridSpec(1, 6.0 * math.sqrt(t), 24.0 * t, points_xy, points_tau)


def lp_lq_decay_fit(f: GridField, p: float, qexp: float, times, backend: SemigroupBackend | None = None,
                    mass_floor: float = 0.5) -> dict:
    """Fit the decay exponent of ``||S(t) f||_q`` against ``log t``.

    Returns the fitted slope, the theoretical ``-(Q/2)(1/p - 1/q)``, and the
    norms. Raises :class:`UnderflowError` if a norm vanishes or the L^1 mass of
    a nonnegative field drops below ``mass_floor`` of its initial value, both
    signs that the field has left the box.
    """
    backend = backend or SemigroupBackend("kernel_convolution")
    times = np.asarray(times, dtype=float)
    if not (1 <= p <= qexp):
        raise ValueError("need 1 <= p <= q")
    if times.size < 2 or np.any(np.diff(times) <= 0) or times[0] <= 0:
        raise ValueError("times must be positive and increasing")
    if times[-1] / times[0] < 10 * (1 - 1e-12):
        raise ValueError("times must span at least one decade")
    m0 = f.lp_norm(1)
    norms = []
    for t in times:
        u = apply_semigroup(f, t, backend)
        nq = u.lp_norm(qexp)
        if not nq > 0 or not np.isfinite(nq):
            raise UnderflowError(f"||S({t})f||_{qexp} vanished; enlarge the box")
        if f.values.min() >= 0 and u.lp_norm(1) < mass_floor * m0:
            raise UnderflowError(f"S({t})f lost more than {1 - mass_floor:.0%} of its mass; enlarge the box")
        norms.append(nq)
    norms = np.array(norms)
    slope, _ = np.polyfit(np.log(times), np.log(norms), 1)
    inv_q = 0.0 if np.isinf(qexp) else 1.0 / qexp
    theory = -0.5 * f.spec.Q * (1.0 / p - inv_q)
    return {"slope": float(slope), "theory": float(theory), "times": times, "norms": norms}

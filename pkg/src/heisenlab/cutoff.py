"""Smooth transition functions and the radial cut-offs built from them."""
from __future__ import annotations

import numpy as np

from .grid import GridField, GridSpec

__all__ = ["smooth_step", "cutoff_field", "cutoff_star_field"]


def _psi(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    pos = r > 0
    out[pos] = np.exp(-1.0 / r[pos])
    return out


def smooth_step(s):
    """C^infinity transition: 1 on ``s <= 1/2``, 0 on ``s >= 1``, monotone between."""
    s = np.asarray(s, dtype=float)
    a = _psi(1.0 - s)
    b = _psi(s - 0.5)
    with np.errstate(invalid="ignore"):
        out = a / (a + b)
    out = np.where(s <= 0.5, 1.0, out)
    return np.where(s >= 1.0, 0.0, out)


def _ell(p: float) -> float:
    if not p > 1:
        raise ValueError("p must exceed 1")
    return 2.0 * p / (p - 1.0)


def cutoff_field(spec: GridSpec, R: float, p: float) -> GridField:
    """``phi_R = smooth_step(|eta|_H^2 / R)^ell`` with ``ell = 2p/(p-1)``."""
    xi = np.broadcast_to(spec.koranyi_sq(), spec.shape) / R
    return GridField(spec, smooth_step(xi) ** _ell(p))


def cutoff_star_field(spec: GridSpec, R: float, p: float) -> GridField:
    """Same as :func:`cutoff_field` restricted to the annulus ``1/2 <= xi_R <= 1``."""
    xi = np.broadcast_to(spec.koranyi_sq(), spec.shape) / R
    v = smooth_step(xi) ** _ell(p)
    v = np.where((xi >= 0.5) & (xi <= 1.0), v, 0.0)
    return GridField(spec, v)

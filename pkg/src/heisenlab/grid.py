"""Truncated uniform grids on H^n and scalar fields sampled on them.

Layout
------
A :class:`GridField` stores its samples in an ndarray of shape
``(N,)*n + (N,)*n + (M,)`` for the axes ``x_1..x_n, y_1..y_n, tau``, where
``N = points_per_xy_axis`` and ``M = points_per_tau_axis``. The flat
linearization is C order: x-major, then y, then tau fastest. All reductions
sum the flattened array in that order with numpy's pairwise summation, so
repeated runs are bit-identical.

Binary dump (little endian)::

    5 bytes   magic b"HHGF1"
    3 x u8    n, points_per_xy_axis, points_per_tau_axis
    2 x f8    half_width_xy, half_width_tau
    1 x u8    overflow flag (0 or 1)
    N^{2n} M x f8 values in linearization order
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import GridError
from .group import homogeneous_dimension

__all__ = ["GridSpec", "GridField", "MAGIC"]

MAGIC = b"HHGF1"
_HEADER = struct.Struct("<5sQQQddQ")


@dataclass(frozen=True)
class GridSpec:
    """Uniform box ``[-L, L]^{2n} x [-L_tau, L_tau]``."""

    n: int = 1
    half_width_xy: float = 4.0
    half_width_tau: float = 16.0
    points_per_xy_axis: int = 33
    points_per_tau_axis: int = 33

    def __post_init__(self):
        if int(self.n) < 1:
            raise GridError(f"n must be >= 1, got {self.n}")
        if not (self.half_width_xy > 0 and self.half_width_tau > 0):
            raise GridError("half widths must be positive")
        if int(self.points_per_xy_axis) < 3 or int(self.points_per_tau_axis) < 3:
            raise GridError("need at least 3 points per axis")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "points_per_xy_axis", int(self.points_per_xy_axis))
        object.__setattr__(self, "points_per_tau_axis", int(self.points_per_tau_axis))
        object.__setattr__(self, "half_width_xy", float(self.half_width_xy))
        object.__setattr__(self, "half_width_tau", float(self.half_width_tau))

    @classmethod
    def cube(cls, n: int, half_width_xy: float, points: int) -> "GridSpec":
        """Equal point counts per axis and a parabolically scaled box (L_tau = L^2)."""
        return cls(n, half_width_xy, half_width_xy**2, points, points)

    @property
    def Q(self) -> int:
        return homogeneous_dimension(self.n)

    @property
    def h_xy(self) -> float:
        return 2.0 * self.half_width_xy / (self.points_per_xy_axis - 1)

    @property
    def h_tau(self) -> float:
        return 2.0 * self.half_width_tau / (self.points_per_tau_axis - 1)

    @property
    def cell_volume(self) -> float:
        return self.h_xy ** (2 * self.n) * self.h_tau

    @property
    def shape(self) -> tuple:
        return (self.points_per_xy_axis,) * (2 * self.n) + (self.points_per_tau_axis,)

    @property
    def size(self) -> int:
        return self.points_per_xy_axis ** (2 * self.n) * self.points_per_tau_axis

    @property
    def ndim(self) -> int:
        return 2 * self.n + 1

    def xy_nodes(self) -> np.ndarray:
        return np.linspace(-self.half_width_xy, self.half_width_xy, self.points_per_xy_axis)

    def tau_nodes(self) -> np.ndarray:
        return np.linspace(-self.half_width_tau, self.half_width_tau, self.points_per_tau_axis)

    def coordinates(self) -> tuple[list, list, np.ndarray]:
        """Broadcastable coordinate arrays ``(xs, ys, tau)``.

        ``xs[i]`` and ``ys[i]`` have size along their own axis only.
        """
        d = self.ndim
        g = self.xy_nodes()
        xs, ys = [], []
        for i in range(self.n):
            sh = [1] * d
            sh[i] = -1
            xs.append(g.reshape(sh))
            sh = [1] * d
            sh[self.n + i] = -1
            ys.append(g.reshape(sh))
        sh = [1] * d
        sh[-1] = -1
        return xs, ys, self.tau_nodes().reshape(sh)

    def radius_sq(self) -> np.ndarray:
        """``|x|^2 + |y|^2`` broadcast over the xy axes."""
        xs, ys, _ = self.coordinates()
        r2 = 0.0
        for c in xs + ys:
            r2 = r2 + c * c
        return r2

    def koranyi_sq(self) -> np.ndarray:
        """``|eta|_H^2`` on the full grid."""
        _, _, tau = self.coordinates()
        r2 = self.radius_sq()
        return np.sqrt(r2 * r2 + tau * tau)

    def trapezoid_weights(self) -> np.ndarray:
        """Broadcastable product trapezoid weights (including the cell volume)."""
        wxy = np.full(self.points_per_xy_axis, self.h_xy)
        wxy[[0, -1]] *= 0.5
        wt = np.full(self.points_per_tau_axis, self.h_tau)
        wt[[0, -1]] *= 0.5
        w = wt.reshape((1,) * (2 * self.n) + (-1,))
        for i in range(2 * self.n):
            sh = [1] * self.ndim
            sh[i] = -1
            w = w * wxy.reshape(sh)
        return w

    def center_index(self) -> tuple:
        """Index of the node nearest the identity."""
        c = (self.points_per_xy_axis - 1) // 2
        ct = (self.points_per_tau_axis - 1) // 2
        return (c,) * (2 * self.n) + (ct,)

    def has_identity_node(self) -> bool:
        return self.points_per_xy_axis % 2 == 1 and self.points_per_tau_axis % 2 == 1

    def interior_mask(self, margin: int = 1) -> np.ndarray:
        """Boolean mask of nodes at least ``margin`` cells from every face."""
        m = np.zeros(self.shape, dtype=bool)
        sl = tuple(slice(margin, s - margin) for s in self.shape)
        m[sl] = True
        return m


def _tree_sum(a: np.ndarray) -> float:
    return float(np.sum(np.ascontiguousarray(a, dtype=float).ravel()))


@dataclass
class GridField:
    """Scalar samples on a :class:`GridSpec`."""

    spec: GridSpec
    values: np.ndarray
    overflowed: bool = field(default=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size != self.spec.size:
            raise GridError(f"expected {self.spec.size} values, got {v.size}")
        self.values = np.ascontiguousarray(v.reshape(self.spec.shape))
        if not self.overflowed and not np.all(np.isfinite(self.values)):
            raise GridError("non-finite values in a field not flagged as overflowed")

    @classmethod
    def zeros(cls, spec: GridSpec) -> "GridField":
        return cls(spec, np.zeros(spec.shape))

    @classmethod
    def from_function(cls, spec: GridSpec, func: Callable) -> "GridField":
        """Sample ``func(xs, ys, tau)`` with broadcastable coordinate lists."""
        xs, ys, tau = spec.coordinates()
        vals = np.broadcast_to(func(xs, ys, tau), spec.shape)
        return cls(spec, np.array(vals, dtype=float))

    def like(self, values) -> "GridField":
        return GridField(self.spec, values)

    def check_compatible(self, other: "GridField") -> None:
        if self.spec != other.spec:
            raise GridError("fields live on different grids")

    # reductions

    def integrate(self, rule: str = "trapezoid") -> float:
        if rule == "trapezoid":
            return _tree_sum(self.values * self.spec.trapezoid_weights())
        if rule == "rectangle":
            return _tree_sum(self.values) * self.spec.cell_volume
        raise ValueError(f"unknown rule {rule!r}")

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def lp_norm(self, p: float) -> float:
        if np.isinf(p):
            return self.sup_norm()
        if p < 1:
            raise ValueError("p must be >= 1")
        a = np.abs(self.values)
        if p == 1:
            return _tree_sum(a) * self.spec.cell_volume
        return (_tree_sum(a**p) * self.spec.cell_volume) ** (1.0 / p)

    # serialization

    def to_bytes(self) -> bytes:
        s = self.spec
        head = _HEADER.pack(
            MAGIC, s.n, s.points_per_xy_axis, s.points_per_tau_axis,
            s.half_width_xy, s.half_width_tau, int(self.overflowed),
        )
        return head + self.values.astype("<f8").tobytes(order="C")

    @classmethod
    def from_bytes(cls, data: bytes) -> "GridField":
        if len(data) < _HEADER.size:
            raise GridError("truncated GridField dump")
        magic, n, nxy, nt, lxy, lt, flag = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise GridError(f"bad magic {magic!r}")
        spec = GridSpec(n, lxy, lt, nxy, nt)
        body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
        if body.size != spec.size:
            raise GridError(f"dump holds {body.size} values, header implies {spec.size}")
        return cls(spec, body.astype(float), overflowed=bool(flag))

    def dump(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "GridField":
        return cls.from_bytes(Path(path).read_bytes())

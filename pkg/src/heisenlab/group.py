"""Arithmetic on the Heisenberg group H^n.

Points are ``(x, y, tau)`` with ``x, y`` in R^n and ``tau`` real. The group
law is

    (x, y, tau) o (x', y', tau') = (x + x', y + y', tau + tau' + 2(x.y' - x'.y))

with identity 0 and inverse ``-eta``. Dilations act as (lx, ly, l^2 tau).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError

__all__ = [
    "GroupPoint",
    "group_multiply",
    "group_inverse",
    "dilate",
    "koranyi_norm",
    "koranyi_distance",
    "homogeneous_dimension",
]


def homogeneous_dimension(n: int) -> int:
    """Return Q = 2n + 2."""
    return 2 * int(n) + 2


@dataclass(frozen=True)
class GroupPoint:
    """A point of H^n.

    Parameters
    ----------
    x, y : array_like, shape (n,)
    tau : float
    """

    x: np.ndarray
    y: np.ndarray
    tau: float

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float)).copy()
        y = np.atleast_1d(np.asarray(self.y, dtype=float)).copy()
        if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape or x.size < 1:
            raise DimensionMismatchError(
                f"x and y must be 1-D of equal length >= 1, got {x.shape} and {y.shape}"
            )
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def n(self) -> int:
        return self.x.size

    @classmethod
    def identity(cls, n: int = 1) -> "GroupPoint":
        return cls(np.zeros(n), np.zeros(n), 0.0)

    @classmethod
    def from_array(cls, arr) -> "GroupPoint":
        """Build from a flat ``(x_1..x_n, y_1..y_n, tau)`` vector."""
        arr = np.asarray(arr, dtype=float).ravel()
        if arr.size < 3 or arr.size % 2 == 0:
            raise DimensionMismatchError(f"expected 2n+1 coordinates, got {arr.size}")
        n = (arr.size - 1) // 2
        return cls(arr[:n], arr[n : 2 * n], arr[-1])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.y, [self.tau]])

    def allclose(self, other: "GroupPoint", atol: float = 1e-12) -> bool:
        return self.n == other.n and bool(
            np.allclose(self.as_array(), other.as_array(), rtol=0.0, atol=atol)
        )


def _check_same_n(a: GroupPoint, b: GroupPoint) -> None:
    if a.n != b.n:
        raise DimensionMismatchError(f"points live in H^{a.n} and H^{b.n}")


def group_multiply(a: GroupPoint, b: GroupPoint) -> GroupPoint:
    """Group product ``a o b``."""
    _check_same_n(a, b)
    twist = 2.0 * (float(np.dot(a.x, b.y)) - float(np.dot(b.x, a.y)))
    return GroupPoint(a.x + b.x, a.y + b.y, a.tau + b.tau + twist)


def group_inverse(a: GroupPoint) -> GroupPoint:
    return GroupPoint(-a.x, -a.y, -a.tau)


def dilate(a: GroupPoint, lam: float) -> GroupPoint:
    """Parabolic dilation ``(lam x, lam y, lam^2 tau)``."""
    lam = float(lam)
    if not lam > 0.0:
        raise ValueError(f"dilation factor must be positive, got {lam}")
    return GroupPoint(lam * a.x, lam * a.y, lam * lam * a.tau)


def koranyi_norm(a: GroupPoint) -> float:
    """Koranyi norm ``((|x|^2 + |y|^2)^2 + tau^2)^(1/4)``."""
    z = np.concatenate([a.x, a.y])
    s = max(float(np.max(np.abs(z), initial=0.0)), abs(a.tau) ** 0.5)
    if s == 0.0:
        return 0.0
    # rescale first so the fourth powers neither overflow nor underflow
    r2 = float(np.dot(z / s, z / s))
    t = a.tau / s / s
    return s * (r2 * r2 + t * t) ** 0.25


def koranyi_distance(a: GroupPoint, b: GroupPoint) -> float:
    """``d(a, b) = |b^{-1} o a|``."""
    return koranyi_norm(group_multiply(group_inverse(b), a))

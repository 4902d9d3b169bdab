"""Riemann-Liouville fractional integrals and derivatives on uniform grids.

All integrals use product integration: the weakly singular factor is
integrated exactly on each cell against a piecewise-constant density. For a
left integral the density on ``[t_j, t_{j+1}]`` is the left value ``f(t_j)``;
for a right integral it is the right value ``f(t_{j+1})``, the mirror image.
Both are first order in the step.

Cell weights for ``int (t_k - s)^{-g} ds`` depend only on ``k - j``:

    b_m = dt^{1-g} (m^{1-g} - (m-1)^{1-g}) / (1-g),   m = k - j >= 1,

and telescope to ``sum_{j<k} b_{k-j} = t_k^{1-g}/(1-g)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as Gamma

__all__ = [
    "FracScheme",
    "TimeSeries",
    "abel_weights",
    "rl_integral_left",
    "rl_integral_right",
    "rl_derivative_left",
    "rl_derivative_right",
    "w1_exact",
    "integration_by_parts_defect",
    "memory_term",
]


def abel_weights(g: float, dt: float, steps: int) -> np.ndarray:
    """``b[m] = int_{t_{k-m}}^{t_{k-m+1}} (t_k - s)^{-g} ds`` for ``m = 0..steps``.

    ``b[0]`` is 0 so that ``b`` can be indexed by ``k - j`` directly.
    """
    if not 0 <= g < 1:
        raise ValueError(f"exponent must lie in [0, 1), got {g}")
    a = 1.0 - g
    m = np.arange(steps + 1, dtype=float)
    b = np.zeros(steps + 1)
    b[1:] = dt**a * (m[1:] ** a - m[:-1] ** a) / a
    return b


@dataclass(frozen=True)
class FracScheme:
    """Product-integration weights for the memory kernel ``(t - s)^{-gamma}``."""

    gamma: float
    time_step: float
    steps: int
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.gamma < 1:
            raise ValueError("gamma must lie in [0, 1)")
        if not self.time_step > 0 or self.steps < 1:
            raise ValueError("need time_step > 0 and steps >= 1")
        w = abel_weights(self.gamma, self.time_step, self.steps)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def alpha(self) -> float:
        return 1.0 - self.gamma

    def times(self) -> np.ndarray:
        return self.time_step * np.arange(self.steps + 1)

    def row(self, k: int) -> np.ndarray:
        """Weights ``w_{k,j}`` for ``j = 0..k-1``."""
        if not 0 <= k <= self.steps:
            raise IndexError(k)
        return self.weights[k:0:-1]


@dataclass
class TimeSeries:
    """Samples on ``t_j = t0 + j dt``; the first axis of ``values`` is time."""

    dt: float
    values: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 0 or self.values.shape[0] < 2:
            raise ValueError("a time series needs at least two nodes")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @classmethod
    def sample(cls, func, t_end: float, steps: int, t0: float = 0.0) -> "TimeSeries":
        t = np.linspace(t0, t_end, steps + 1)
        return cls((t_end - t0) / steps, func(t), t0)

    @property
    def steps(self) -> int:
        return self.values.shape[0] - 1

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.steps + 1)

    def like(self, values) -> "TimeSeries":
        return TimeSeries(self.dt, values, self.t0)


def _check_order(order: float) -> None:
    if not 0 < order < 1:
        raise ValueError(f"order must lie in (0, 1), got {order}")


def _causal_sum(b: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``out[k] = sum_{j<k} b[k-j] v[j]`` along the first axis."""
    K = v.shape[0]
    if v.ndim == 1:
        return np.convolve(v, b)[:K]
    out = np.zeros_like(v)
    for k in range(1, K):
        out[k] = np.tensordot(b[k:0:-1], v[:k], axes=1)
    return out


def rl_integral_left(f: TimeSeries, order: float) -> TimeSeries:
    """``I^a_{0|t} f`` at every node (first node 0)."""
    _check_order(order)
    b = abel_weights(1.0 - order, f.dt, f.steps)
    return f.like(_causal_sum(b, f.values) / Gamma(order))


def rl_integral_right(f: TimeSeries, order: float) -> TimeSeries:
    """``I^a_{t|T} f`` at every node, ``T`` the last node (last value 0)."""
    _check_order(order)
    b = abel_weights(1.0 - order, f.dt, f.steps)
    # mirror time: the right integral of f is the left integral of f reversed,
    # with the density taken at the cell end farther from the singularity
    rev = f.values[::-1]
    return f.like(_causal_sum(b, rev)[::-1] / Gamma(order))


def _ddt(v: np.ndarray, dt: float) -> np.ndarray:
    return np.gradient(v, dt, axis=0, edge_order=2)


def rl_derivative_left(f: TimeSeries, order: float) -> TimeSeries:
    """``D^a_{0|t} f = d/dt I^{1-a}_{0|t} f`` (central differences)."""
    _check_order(order)
    return f.like(_ddt(rl_integral_left(f, 1.0 - order).values, f.dt))


def rl_derivative_right(f: TimeSeries, order: float) -> TimeSeries:
    """``D^a_{t|T} f = -d/dt I^{1-a}_{t|T} f`` (central differences)."""
    _check_order(order)
    return f.like(-_ddt(rl_integral_right(f, 1.0 - order).values, f.dt))


def w1_exact(t, T: float, sigma: float, alpha: float, order_kind: str = "alpha"):
    """Closed-form right derivatives of ``w_1(t) = (1 - t/T)^sigma``.

    ``order_kind="alpha"`` gives ``D^a_{t|T} w_1``; ``"one_plus_alpha"`` gives
    ``D^{1+a}_{t|T} w_1`` and needs ``sigma > alpha + 1``.
    """
    _check_order(alpha)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > T):
        raise ValueError("t must lie in [0, T]")
    s = 1.0 - t / T
    if order_kind == "alpha":
        return Gamma(sigma + 1) / Gamma(sigma + 1 - alpha) * T**-alpha * s ** (sigma - alpha)
    if order_kind == "one_plus_alpha":
        if not sigma > alpha + 1:
            raise ValueError("need sigma > alpha + 1")
        return Gamma(sigma + 1) / Gamma(sigma - alpha) * T ** -(1 + alpha) * s ** (sigma - alpha - 1)
    raise ValueError(f"unknown order_kind {order_kind!r}")


def _trapz(v: np.ndarray, dt: float) -> float:
    return float(np.trapezoid(v, dx=dt))


def integration_by_parts_defect(f: TimeSeries, g: TimeSeries, order: float,
                                right_derivative_of_f=None) -> float:
    """``|int f D^a_{c|t} g dt - int g D^a_{t|d} f dt|`` by the trapezoid rule.

    ``right_derivative_of_f`` may supply ``D^a_{t|d} f`` in closed form.
    """
    if f.values.shape != g.values.shape or f.dt != g.dt:
        raise ValueError("f and g must share a time grid")
    lhs = _trapz(f.values * rl_derivative_left(g, order).values, f.dt)
    rd = rl_derivative_right(f, order).values if right_derivative_of_f is None else right_derivative_of_f
    rhs = _trapz(g.values * np.asarray(rd, dtype=float), f.dt)
    return abs(lhs - rhs)


def memory_term(history: np.ndarray, scheme: FracScheme, k: int) -> np.ndarray:
    """``sum_{j<k} w_{k,j} history[j]`` (left-endpoint product rule).

    ``history`` holds ``|u|^{p-1} u`` at nodes ``0..k-1`` (extra rows ignored).
    Returns zeros for ``k = 0``.
    """
    history = np.asarray(history)
    if k < 0 or k > scheme.steps:
        raise IndexError(k)
    if history.shape[0] < k:
        raise ValueError(f"history has {history.shape[0]} nodes, need {k}")
    if k == 0:
        return np.zeros(history.shape[1:])
    return np.tensordot(scheme.row(k), history[:k], axes=1)

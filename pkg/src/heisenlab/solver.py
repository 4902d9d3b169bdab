"""Mild-form time stepping for the heat equation with a memory nonlinearity

    u_t - Delta_H u = int_0^t (t - s)^{-gamma} |u|^{p-1} u(s) ds,   u(0) = u0,

on H^n. One step is a Lie splitting of the Duhamel formula with the memory
term frozen over the step:

    u^{k+1} = S(dt) (u^k + dt F^k),   F^k = sum_{j<k} w_{k,j} |u^j|^{p-1} u^j,

with the product-integration weights of :class:`~heisenlab.fractional.FracScheme`.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .cutoff import smooth_step
from .errors import HeisenlabError
from .fractional import FracScheme
from .grid import GridField, GridSpec
from .semigroup import SemigroupBackend, apply_semigroup

logger = logging.getLogger(__name__)

__all__ = [
    "PROFILES",
    "MemoryBudgetError",
    "SolveConfig",
    "SolveResult",
    "MildSolver",
    "initial_field",
    "local_window",
    "theta_field",
    "moment_residuals",
    "solve",
    "write_artifacts",
]

PROFILES = ("koranyi_gaussian", "plateau_bump", "power_decay")
MONITORS = ("positivity", "local_window", "moment_inequality")

COMPLETED = "completed"
BLOWUP = "blowup_detected"
ABORTED = "instability_aborted"


class MemoryBudgetError(HeisenlabError, MemoryError):
    """The stored history would exceed the configured budget."""


@dataclass(frozen=True)
class SolveConfig:
    """Everything a run depends on.

    ``initial_data`` is a profile name from :data:`PROFILES` or the path of a
    GridField dump; ``amplitude`` scales either one. ``growth_window`` is the
    number of consecutive strictly increasing sup norms required to call a
    threshold crossing a blow-up.
    """

    p: float = 1.5
    gamma: float = 0.5
    grid: GridSpec = field(default_factory=lambda: GridSpec(1, 6.0, 24.0, 48, 48))
    initial_data: str = "koranyi_gaussian"
    amplitude: float = 1.0
    kappa: float = 1.0
    plateau_radius: float = 1.0
    time_step: float = 0.05
    t_end: float = 20.0
    blowup_threshold: float = 1e6
    backend: SemigroupBackend = field(default_factory=SemigroupBackend)
    monitors: tuple = MONITORS
    q: float = 2.0
    growth_window: int = 10
    window_slack: float = 1.1
    max_history_bytes: int = 1 << 30
    snapshot_times: tuple = ()
    nonlinear: bool = True

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if not 0 <= self.gamma < 1:
            raise ValueError("gamma must lie in [0, 1)")
        if not (self.time_step > 0 and self.t_end > 0):
            raise ValueError("time_step and t_end must be positive")
        if not self.q >= 1:
            raise ValueError("q must be >= 1")
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if self.growth_window < 1:
            raise ValueError("growth_window must be >= 1")
        unknown = set(self.monitors) - set(MONITORS)
        if unknown:
            raise ValueError(f"unknown monitors {sorted(unknown)}")
        if self.initial_data in PROFILES:
            if self.initial_data == "power_decay" and not self.kappa > 0:
                raise ValueError("power_decay needs kappa > 0")
        elif not Path(self.initial_data).suffix:
            raise ValueError(f"unknown profile {self.initial_data!r}")

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def steps(self) -> int:
        return max(1, math.ceil(self.t_end / self.time_step - 1e-9))

    def with_(self, **changes) -> "SolveConfig":
        return replace(self, **changes)


def initial_field(config: SolveConfig) -> GridField:
    """``u0`` on the configured grid, scaled by the amplitude."""
    spec = config.grid
    if config.initial_data not in PROFILES:
        base = GridField.load(config.initial_data)
        if base.spec != spec:
            raise ValueError("initial-data dump was written on a different grid")
        return base.like(config.amplitude * base.values)
    rho2 = np.broadcast_to(spec.koranyi_sq(), spec.shape)
    if config.initial_data == "koranyi_gaussian":
        v = np.exp(-rho2)
    elif config.initial_data == "plateau_bump":
        v = smooth_step(np.sqrt(rho2) / (2.0 * config.plateau_radius))
    else:
        v = (1.0 + np.sqrt(rho2)) ** (-config.kappa)
    return GridField(spec, config.amplitude * v)


def local_window(config: SolveConfig, u0: GridField | None = None) -> float:
    """Guaranteed existence time ``[(1-g)(2-g) / (2^p ||u0||^{p-1})]^{1/(2-g)}``.

    Returns ``inf`` for vanishing data.
    """
    u0 = u0 if u0 is not None else initial_field(config)
    m = u0.sup_norm()
    if m == 0:
        return math.inf
    g, p = config.gamma, config.p
    return ((1 - g) * (2 - g) / (2.0**p * m ** (p - 1))) ** (1.0 / (2 - g))


def theta_field(spec: GridSpec, A: float = 1.0, eps: float | None = None) -> GridField:
    """``c exp(-eps sqrt(A + r^4 + tau^2))`` with grid integral 1.

    ``eps`` defaults to ``1/(2Q+4)``.
    """
    if eps is None:
        eps = 1.0 / (2 * spec.Q + 4)
    if not (A > 0 and eps > 0):
        raise ValueError("A and eps must be positive")
    _, _, tau = spec.coordinates()
    r2 = spec.radius_sq()
    v = np.broadcast_to(np.exp(-eps * np.sqrt(A + r2**2 + tau**2)), spec.shape)
    f = GridField(spec, np.array(v))
    return f.like(f.values / f.integrate())


def moment_residuals(times, f, scheme: FracScheme, p: float) -> np.ndarray:
    """``f' + f - sum_{j<k} w_{k,j} f_j^p`` along a recorded trajectory.

    ``f'`` uses central differences (one-sided at the ends).
    """
    f = np.asarray(f, dtype=float)
    if f.size < 2:
        return np.zeros_like(f)
    df = np.gradient(f, np.asarray(times, dtype=float))
    fp = np.abs(f) ** p
    mem = np.array([np.dot(scheme.row(k), fp[:k]) if k else 0.0 for k in range(f.size)])
    return df + f - mem


@dataclass
class SolveResult:
    """Trajectory summary of one run.

    ``t_est`` is the first time the sup norm exceeded the threshold on a
    blow-up run and ``nan`` otherwise.
    """

    config: SolveConfig
    status: str
    times: np.ndarray
    sup_norms: np.ndarray
    l1_norms: np.ndarray
    l2_norms: np.ndarray
    lq_norms: np.ndarray
    min_values: np.ndarray
    moment_f: np.ndarray
    moment_residual: np.ndarray
    t_est: float = math.nan
    window: float = math.inf
    verdicts: dict = field(default_factory=dict)
    message: str = ""
    snapshots: dict = field(default_factory=dict)
    final: GridField | None = None

    @property
    def blew_up(self) -> bool:
        return self.status == BLOWUP


class MildSolver:
    """Stateful stepper; :meth:`step` advances one ``time_step``.

    For ``gamma = 0`` every weight equals ``time_step``, so the memory term is
    a running sum and no history is stored.
    """

    def __init__(self, config: SolveConfig, u0: GridField | None = None):
        self.config = config
        self.u0 = u0 if u0 is not None else initial_field(config)
        if self.u0.spec != config.grid:
            raise ValueError("initial data lives on a different grid")
        m0 = self.u0.sup_norm()
        if not config.blowup_threshold > 10 * m0:
            raise ValueError("blowup_threshold must exceed 10 ||u0||_inf")
        K = config.steps
        self.scheme = FracScheme(config.gamma, config.time_step, K)
        self.running = config.gamma == 0
        rows = 1 if self.running else K + 1
        need = rows * config.grid.size * 8
        if need > config.max_history_bytes:
            raise MemoryBudgetError(
                f"history needs {need / 2**20:.0f} MiB, budget is "
                f"{config.max_history_bytes / 2**20:.0f} MiB; coarsen time_step or the grid")
        self.history = np.zeros((rows, config.grid.size))
        self._power = np.empty(config.grid.size)
        self.k = 0
        self.u = self.u0.values.copy()
        self._store()

    def _store(self) -> None:
        if self.running and self.k > 0:
            # lagged so that the sum only covers nodes j < k
            self.history[0] += self._power
        v = self.u.ravel()
        if self.config.nonlinear:
            np.multiply(np.abs(v) ** (self.config.p - 1.0), v, out=self._power)
        else:
            self._power[:] = 0.0
        if not self.running:
            self.history[self.k] = self._power

    @property
    def t(self) -> float:
        return self.k * self.config.time_step

    def memory(self) -> np.ndarray:
        """``F^k`` for the current step, shaped like the grid."""
        shape = self.config.grid.shape
        if self.k == 0:
            return np.zeros(shape)
        if self.running:
            return (self.config.time_step * self.history[0]).reshape(shape)
        return (self.scheme.row(self.k) @ self.history[: self.k]).reshape(shape)

    def step(self) -> np.ndarray:
        """Advance ``u`` by one step and store its nonlinearity."""
        if self.k >= self.scheme.steps:
            raise IndexError("final time reached")
        dt = self.config.time_step
        v = self.u + dt * self.memory()
        self.u = apply_semigroup(GridField(self.config.grid, v), dt, self.config.backend).values
        self.k += 1
        self._store()
        return self.u


def _monotone_tail(sups: list, window: int) -> bool:
    if len(sups) < window + 1:
        return False
    tail = np.asarray(sups[-(window + 1):])
    return bool(np.all(np.diff(tail) > 0))


def solve(config: SolveConfig, u0: GridField | None = None) -> SolveResult:
    """Run to ``t_end``, a blow-up, or an abort; records norms every step."""
    solver = MildSolver(config, u0)
    spec = config.grid
    theta = theta_field(spec) if "moment_inequality" in config.monitors else None
    window = local_window(config, solver.u0)
    snap_targets = sorted(float(s) for s in config.snapshot_times)
    rec = {k: [] for k in ("t", "sup", "l1", "l2", "lq", "min", "f")}
    snapshots = {}

    def record(u):
        g = GridField(spec, u)
        rec["t"].append(solver.t)
        rec["sup"].append(g.sup_norm())
        rec["l1"].append(g.lp_norm(1))
        rec["l2"].append(g.lp_norm(2))
        rec["lq"].append(g.lp_norm(config.q))
        rec["min"].append(float(u.min()))
        rec["f"].append(g.like(u * theta.values).integrate() if theta is not None else math.nan)
        while snap_targets and solver.t >= snap_targets[0] - 1e-12:
            snapshots[snap_targets.pop(0)] = g.like(u.copy())

    status, t_est, message = COMPLETED, math.nan, ""
    record(solver.u)
    M = config.blowup_threshold
    with np.errstate(over="ignore", invalid="ignore"):
        while solver.k < solver.scheme.steps:
            u = solver.step()
            if not np.all(np.isfinite(u)):
                status, message = ABORTED, f"non-finite values at t={solver.t:.6g}"
                break
            record(u)
            if rec["sup"][-1] > M:
                if _monotone_tail(rec["sup"], config.growth_window):
                    status, t_est = BLOWUP, solver.t
                    message = f"sup norm crossed {M:g} with monotone growth"
                else:
                    status = ABORTED
                    message = f"sup norm crossed {M:g} without {config.growth_window} steps of monotone growth"
                break

    arr = {k: np.asarray(v, dtype=float) for k, v in rec.items()}
    if theta is not None:
        resid = moment_residuals(arr["t"], arr["f"], solver.scheme, config.p)
    else:
        resid = np.full(arr["t"].size, math.nan)
    result = SolveResult(
        config=config, status=status, times=arr["t"], sup_norms=arr["sup"],
        l1_norms=arr["l1"], l2_norms=arr["l2"], lq_norms=arr["lq"], min_values=arr["min"],
        moment_f=arr["f"], moment_residual=resid, t_est=t_est, window=window,
        message=message, snapshots=snapshots, final=GridField(spec, solver.u.copy()),
    )
    result.verdicts = _verdicts(result, solver.u0.sup_norm())
    return result


def _verdicts(r: SolveResult, m0: float) -> dict:
    cfg = r.config
    out = {}
    if "positivity" in cfg.monitors:
        out["positivity"] = {"min_value": float(r.min_values.min()),
                             "ok": bool(r.min_values.min() >= -1e-12 * max(1.0, m0))}
    if "local_window" in cfg.monitors:
        inside = r.times <= r.window
        bound = 2.0 * cfg.window_slack * m0
        worst = float(r.sup_norms[inside].max()) if inside.any() else 0.0
        out["local_window"] = {"window": r.window, "max_sup": worst, "bound": bound,
                               "ok": bool(worst <= bound)}
    if "moment_inequality" in cfg.monitors:
        # before the threshold crossing; the last sample straddles it
        res = r.moment_residual[:-1] if r.status == BLOWUP else r.moment_residual
        fpow = np.abs(r.moment_f) ** cfg.p
        scale = max(1.0, float(np.max(fpow)) if fpow.size else 1.0)
        worst = float(res.min()) if res.size else 0.0
        out["moment_inequality"] = {"min_residual": worst, "scale": scale,
                                    "ok": bool(worst >= -1e-3 * scale)}
    return out


_TRACE_COLUMNS = ("t", "sup_norm", "l1_norm", "l2_norm", "lq_norm", "moment_f",
                  "moment_residual", "min_value")


def write_artifacts(result: SolveResult, out_dir) -> dict:
    """Write ``trace.csv``, ``summary.txt`` and any snapshots into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trace = out / "trace.csv"
    cols = (result.times, result.sup_norms, result.l1_norms, result.l2_norms,
            result.lq_norms, result.moment_f, result.moment_residual, result.min_values)
    with trace.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_TRACE_COLUMNS)
        for row in zip(*cols):
            w.writerow([repr(float(x)) for x in row])
    summary = out / "summary.txt"
    summary.write_text(summary_text(result))
    paths = {"trace": trace, "summary": summary}
    for t, g in sorted(result.snapshots.items()):
        path = out / f"snapshot_t{t:.6g}.hhgf"
        g.dump(path)
        paths[f"snapshot_{t:.6g}"] = path
    return paths


def summary_text(result: SolveResult) -> str:
    cfg = result.config
    lines = [
        f"status = {result.status}",
        f"t_est = {result.t_est!r}",
        f"window_T_guaranteed = {result.window!r}",
        f"steps_taken = {result.times.size - 1}",
        f"final_sup_norm = {float(result.sup_norms[-1])!r}",
        f"message = {result.message}",
    ]
    for name, v in result.verdicts.items():
        lines.append(f"monitor.{name} = {'ok' if v['ok'] else 'VIOLATED'}")
    lines.append("[config]")
    lines.extend(config_lines(cfg))
    return "\n".join(lines) + "\n"


def config_lines(cfg: SolveConfig) -> list[str]:
    """Flat ``key = value`` echo of a config, in declaration order."""
    out = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, GridSpec):
            out += [f"grid.{g.name} = {getattr(v, g.name)!r}" for g in fields(v)]
        elif isinstance(v, SemigroupBackend):
            out += [f"backend.{g.name} = {getattr(v, g.name)!r}" for g in fields(v)
                    if g.name != "quadrature"]
        else:
            out.append(f"{f.name} = {v!r}")
    return out

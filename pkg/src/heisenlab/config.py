"""Key-value run configuration.

An INI-style file with optional sections; every key mirrors a field of the
corresponding dataclass::

    [solve]        SolveConfig scalars (p, gamma, amplitude, time_step, ...)
    [grid]         GridSpec fields
    [backend]      SemigroupBackend fields (kind, safety, max_substep)
    [quadrature]   KernelQuadrature fields (lambda_max, lambda_points, rule)
    [scan]         p_list, amplitude_list, eps_list, R_list, profile, kappa
    [verify]       settings of the verify-all suite

Lists are comma separated; an empty value means ``None``.
"""
from __future__ import annotations

import configparser
from dataclasses import MISSING, dataclass, field, fields
from pathlib import Path

from .grid import GridSpec
from .kernel import KernelQuadrature
from .semigroup import SemigroupBackend
from .solver import SolveConfig

__all__ = ["RunConfig", "ScanSettings", "VerifySettings", "load_config", "parse_config"]

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(raw: str, like):
    raw = raw.strip()
    if raw == "" or raw.lower() == "none":
        return None
    if isinstance(like, bool):
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(like, int):
        return int(float(raw)) if "e" in raw.lower() else int(raw)
    if isinstance(like, float):
        return float(raw)
    if isinstance(like, tuple):
        items = [x.strip() for x in raw.split(",") if x.strip()]
        if like and isinstance(like[0], str):
            return tuple(items)
        try:
            return tuple(float(x) for x in items)
        except ValueError:
            return tuple(items)
    return raw


def _defaults(cls) -> dict:
    out = {}
    for f in fields(cls):
        if f.default is not MISSING:
            out[f.name] = f.default
        elif f.default_factory is not MISSING:
            out[f.name] = f.default_factory()
    return out


def _section(cp, name: str, cls, skip=(), hints=None) -> dict:
    if not cp.has_section(name):
        return {}
    known = _defaults(cls)
    known.update(hints or {})
    out = {}
    for key, raw in cp.items(name):
        if key in skip or key not in known:
            raise KeyError(f"[{name}] unknown key {key!r}")
        out[key] = _coerce(raw, known[key])
    return out


@dataclass(frozen=True)
class ScanSettings:
    p_list: tuple = (1.5, 3.0)
    amplitude_list: tuple = (0.01, 0.1, 1.0)
    eps_list: tuple = tuple(2.0**-k for k in range(7))
    R_list: tuple = (4.0, 8.0, 16.0)
    profile: str = "integrable"
    kappa: float = 1.0


@dataclass(frozen=True)
class VerifySettings:
    """Sizes of the verify-all suite; the defaults run in a few minutes."""

    frac_steps: int = 4096
    cutoff_points_per_annulus: int = 24
    theta_points_xy: int = 49
    theta_points_tau: int = 97
    random_draws: int = 100
    solver_check: bool = True


@dataclass(frozen=True)
class RunConfig:
    solve: SolveConfig = field(default_factory=SolveConfig)
    quadrature: KernelQuadrature = field(default_factory=KernelQuadrature)
    scan: ScanSettings = field(default_factory=ScanSettings)
    verify: VerifySettings = field(default_factory=VerifySettings)

    def lines(self) -> list[str]:
        from .solver import config_lines

        out = config_lines(self.solve)
        out += [f"quadrature.{f.name} = {getattr(self.quadrature, f.name)!r}" for f in fields(self.quadrature)]
        out += [f"scan.{f.name} = {getattr(self.scan, f.name)!r}" for f in fields(self.scan)]
        out += [f"verify.{f.name} = {getattr(self.verify, f.name)!r}" for f in fields(self.verify)]
        return out


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    cp.read_string(text)
    allowed = {"solve", "grid", "backend", "quadrature", "scan", "verify"}
    extra = set(cp.sections()) - allowed
    if extra:
        raise KeyError(f"unknown sections {sorted(extra)}")
    quad = KernelQuadrature(**_section(cp, "quadrature", KernelQuadrature, hints={"lambda_max": 1.0}))
    grid_kw = _section(cp, "grid", GridSpec)
    grid = GridSpec(**grid_kw) if grid_kw else SolveConfig().grid
    backend = SemigroupBackend(quadrature=quad if cp.has_section("quadrature") else None, **_section(
        cp, "backend", SemigroupBackend, skip=("quadrature",), hints={"max_substep": 1.0}))
    solve_kw = _section(cp, "solve", SolveConfig, skip=("grid", "backend"))
    if "monitors" in solve_kw and solve_kw["monitors"] is None:
        solve_kw["monitors"] = ()
    solve = SolveConfig(grid=grid, backend=backend, **solve_kw)
    scan = ScanSettings(**_section(cp, "scan", ScanSettings))
    verify = VerifySettings(**_section(cp, "verify", VerifySettings))
    return RunConfig(solve, quad, scan, verify)


def load_config(path=None) -> RunConfig:
    """Read a config file; ``None`` gives all defaults."""
    if path is None:
        return RunConfig()
    return parse_config(Path(path).read_text())

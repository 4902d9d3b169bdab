"""The aggregate self-check behind ``verify-all``.

Every check returns a :class:`Check`; the report is plain text with fixed
number formatting so that identical inputs give byte-identical reports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analysis import verify_cutoff, verify_theta
from .config import RunConfig
from .exponents import exponents
from .fractional import (
    TimeSeries,
    integration_by_parts_defect,
    rl_derivative_left,
    rl_derivative_right,
    rl_integral_left,
    w1_exact,
)
from .grid import GridField, GridSpec
from .group import GroupPoint, dilate, group_inverse
from .kernel import kernel_peak, kernel_value, sample_kernel, semigroup_defect
from .semigroup import SemigroupBackend, lp_lq_decay_fit, standard_kernel_grid
from .solver import solve

__all__ = ["Check", "run_checks", "verify_all", "format_report", "CHECKS"]


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str


def _e(x) -> str:
    return f"{float(x):.6e}"


def check_kernel_mass(cfg: RunConfig, rng) -> Check:
    t = 1.0
    spec = GridSpec(1, 9.0 * math.sqrt(t), 40.0 * t, 65, 97)
    try:
        mass = sample_kernel(t, spec, cfg.quadrature).integrate()
    except Exception as exc:
        return Check("kernel_mass", False, f"error {type(exc).__name__}")
    err = abs(mass - 1.0)
    return Check("kernel_mass", err <= 1e-3, f"|mass-1| = {_e(err)} (tol 1e-3)")


def check_kernel_center(cfg: RunConfig, rng) -> Check:
    lit = kernel_peak(1.0, 1, cfg.quadrature, "literal")
    grp = kernel_peak(1.0, 1, cfg.quadrature, "group")
    e1 = abs(lit * 32 * math.pi - 1.0)
    e2 = abs(grp * 64 - 1.0)
    return Check("kernel_center", max(e1, e2) <= 1e-6,
                 f"rel err literal {_e(e1)}, group {_e(e2)} (tol 1e-6)")


def check_kernel_scaling(cfg: RunConfig, rng) -> Check:
    worst = 0.0
    for r in (0.5, 2.0):
        for _ in range(25):
            x, y, tau = rng.uniform(-1.5, 1.5, 3)
            eta = GroupPoint([x], [y], tau)
            t = float(rng.uniform(0.5, 1.5))
            h = kernel_value(eta, t, cfg.quadrature)
            hs = kernel_value(dilate(eta, r), r * r * t, cfg.quadrature)
            hi = kernel_value(group_inverse(eta), t, cfg.quadrature)
            worst = max(worst, abs(hs * r**4 / h - 1), abs(hi / h - 1))
    return Check("kernel_scaling_symmetry", worst <= 1e-6, f"max rel err {_e(worst)} (tol 1e-6)")


def check_semigroup_law(cfg: RunConfig, rng) -> Check:
    spec = standard_kernel_grid(1.0)
    d = semigroup_defect(0.5, 0.5, spec, cfg.quadrature) / kernel_peak(1.0, 1, cfg.quadrature)
    return Check("semigroup_law", d <= 5e-3, f"defect/peak {_e(d)} (tol 5e-3)")


def check_frac_oracle(cfg: RunConfig, rng) -> Check:
    T, sigma, K = 2.0, 3.0, cfg.verify.frac_steps
    parts, ok = [], True
    for a in (0.3, 0.5, 0.7):
        errs = []
        for steps in (K // 2, K):
            f = TimeSeries.sample(lambda t: (1 - t / T) ** sigma, T, steps)
            t = f.times()
            m = (t >= 0.1 * T) & (t <= 0.9 * T)
            ex = w1_exact(t[m], T, sigma, a)
            errs.append(np.max(np.abs(rl_derivative_right(f, a).values[m] - ex) / np.abs(ex)))
        ratio = errs[0] / errs[1]
        ok &= errs[1] <= 1e-2 and 1.6 <= ratio <= 2.4
        parts.append(f"a={a}: err {_e(errs[1])} ratio {ratio:.4f}")
    return Check("frac_oracle", bool(ok), "; ".join(parts))


def check_frac_identities(cfg: RunConfig, rng) -> Check:
    K, a, T = cfg.verify.frac_steps, 0.5, 2.0
    f = TimeSeries.sample(lambda t: t, 1.0, K)
    back = rl_derivative_left(rl_integral_left(f, a), a).values
    t = f.times()
    m = (t >= 0.1) & (t <= 0.9)
    rt = float(np.max(np.abs(back[m] - f.values[m])) / np.max(np.abs(f.values)))
    g = TimeSeries.sample(lambda s: np.sin(np.pi * s / T) ** 2, T, K)
    ip = integration_by_parts_defect(g, g, a)
    return Check("frac_roundtrip_ip", rt <= 1e-3 and ip <= 1e-3,
                 f"round trip {_e(rt)}, parts defect {_e(ip)} (tol 1e-3)")


def check_cutoff(cfg: RunConfig, rng) -> Check:
    r = verify_cutoff(cfg.scan.R_list, 1.5, points_per_annulus=cfg.verify.cutoff_points_per_annulus)
    cs = ", ".join(f"R={row['R']:g}: {_e(row['C_hat'])}" for row in r["rows"])
    return Check("cutoff_lemma", r["ok"], f"{cs}; spread {r['spread']:.6f} (tol < 2)")


def check_theta(cfg: RunConfig, rng) -> Check:
    v = cfg.verify
    spec = GridSpec(1, 4.0, 16.0, v.theta_points_xy, v.theta_points_tau)
    r = verify_theta(spec, 1.0, 1.0 / 12.0)
    return Check("theta_lemma", r["ok"], f"min margin {_e(r['min_margin'])}, truncation {_e(r['max_truncation'])}")


def check_lp_lq(cfg: RunConfig, rng) -> Check:
    spec = GridSpec(1, 14.0, 120.0, 41, 121)
    f = GridField(spec, np.exp(-np.broadcast_to(spec.koranyi_sq(), spec.shape) / 0.25))
    backend = SemigroupBackend("kernel_convolution", quadrature=cfg.quadrature)
    times = np.geomspace(0.5, 5.0, 6)
    parts, ok = [], True
    for q in (math.inf, 2.0):
        r = lp_lq_decay_fit(f, 1.0, q, times, backend)
        ok &= abs(r["slope"] - r["theory"]) <= 0.15
        parts.append(f"(1,{q:g}) slope {r['slope']:.4f} vs {r['theory']:.4f}")
    return Check("lp_lq_decay", bool(ok), "; ".join(parts))


def check_exponents(cfg: RunConfig, rng) -> Check:
    worst, ok = 0.0, True
    for _ in range(cfg.verify.random_draws):
        n = int(rng.integers(1, 6))
        g = float(rng.uniform(0.0, 0.999))
        rep = exponents(n, g)
        worst = max(worst, abs(rep.p_gamma - rep.p_gamma_alt))
        ok &= rep.p_c >= rep.p_sc
        if math.isfinite(rep.p_c):
            p = rep.p_c * (1 + float(rng.uniform(1e-6, 2.0)))
            ok &= exponents(n, g, p).q_sc > 1
    ok &= worst <= 1e-12
    return Check("exponent_identities", bool(ok), f"max |p_gamma forms| {_e(worst)}")


def check_solver(cfg: RunConfig, rng) -> Check:
    if not cfg.verify.solver_check:
        return Check("solver_window", True, "skipped")
    base = cfg.solve
    probe = base.with_(t_end=1.0, monitors=("positivity", "local_window"))
    r = solve(probe)
    w = r.verdicts["local_window"]
    pos = r.verdicts["positivity"]
    return Check("solver_window", w["ok"] and pos["ok"],
                 f"max sup {_e(w['max_sup'])} <= {_e(w['bound'])} on t <= {_e(min(w['window'], 1.0))}; "
                 f"min {_e(pos['min_value'])}")


CHECKS = (check_kernel_mass, check_kernel_center, check_kernel_scaling, check_semigroup_law,
          check_frac_oracle, check_frac_identities, check_cutoff, check_theta, check_lp_lq,
          check_exponents, check_solver)


def run_checks(cfg: RunConfig, seed: int = 0, checks=CHECKS) -> list[Check]:
    out = []
    for fn in checks:
        rng = np.random.default_rng(seed)
        try:
            out.append(fn(cfg, rng))
        except Exception as exc:
            name = fn.__name__.removeprefix("check_")
            out.append(Check(name, False, f"raised {type(exc).__name__}: {exc}"))
    return out


def format_report(cfg: RunConfig, seed: int, results: list[Check]) -> str:
    lines = [f"heisenlab {__version__} verify-all", f"seed = {seed}", "[config]"]
    lines += cfg.lines()
    lines.append("[checks]")
    for c in results:
        lines.append(f"{'PASS' if c.ok else 'FAIL'} {c.name}: {c.detail}")
    failed = [c.name for c in results if not c.ok]
    lines.append(f"result = {'PASS' if not failed else 'FAIL ' + ', '.join(failed)}")
    return "\n".join(lines) + "\n"


def verify_all(cfg: RunConfig | None = None, seed: int = 0) -> tuple[int, str]:
    """Run every check; returns ``(exit_code, report)``."""
    cfg = cfg or RunConfig()
    results = run_checks(cfg, seed)
    report = format_report(cfg, seed, results)
    return (0 if all(c.ok for c in results) else 1), report

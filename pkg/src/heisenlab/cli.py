"""Command-line front end.

Global flags (accepted before or after the subcommand): ``--config`` (see
:mod:`heisenlab.config`), ``--out`` (artifact directory), ``--seed`` and
``--jobs`` (scan worker count).
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import scan_dichotomy, scan_lifespan, verify_cutoff
from .config import load_config
from .exponents import exponents
from .grid import GridSpec
from .group import GroupPoint, dilate
from .kernel import KernelQuadrature, kernel_value, sample_kernel
from .solver import solve, write_artifacts
from .verify import verify_all

__all__ = ["main", "build_parser"]


def _floats(s: str) -> tuple:
    return tuple(float(x) for x in s.split(",") if x.strip())


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="key-value config file")
    p.add_argument("--out", default=S, help="directory for artifacts")
    p.add_argument("--seed", type=int, default=S, help="seed for randomized checks")
    p.add_argument("--jobs", type=int, default=S, help="worker processes for scans")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="heisenlab", parents=[common],
                                 description="Heat flow with memory on the Heisenberg group.")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("exponents", parents=[common], help="critical and lifespan exponents")
    e.add_argument("--n", type=int, default=1)
    e.add_argument("--gamma", type=float, required=True)
    e.add_argument("--p", type=float)
    e.add_argument("--kappa", type=float)

    k = sub.add_parser("kernel", parents=[common], help="sample the heat kernel")
    k.add_argument("--n", type=int, default=1)
    k.add_argument("--t", type=float, default=1.0)
    k.add_argument("--half-width-xy", type=float)
    k.add_argument("--half-width-tau", type=float)
    k.add_argument("--points-xy", type=int, default=41)
    k.add_argument("--points-tau", type=int, default=97)
    k.add_argument("--lambda-points", type=int)
    k.add_argument("--lambda-max", type=float)
    k.add_argument("--rule", choices=("trapezoid", "gauss"))
    k.add_argument("--normalization", choices=("group", "literal"), default="group")

    s = sub.add_parser("solve", parents=[common], help="run one solve")
    for name in ("p", "gamma", "amplitude", "time-step", "t-end"):
        s.add_argument(f"--{name}", type=float)

    d = sub.add_parser("scan-dichotomy", parents=[common], help="status over p and amplitude")
    d.add_argument("--p-list", type=_floats)
    d.add_argument("--amplitudes", type=_floats)

    L = sub.add_parser("scan-lifespan", parents=[common], help="blow-up time against amplitude")
    L.add_argument("--eps-list", type=_floats)
    L.add_argument("--profile", choices=("integrable", "power_decay"))
    L.add_argument("--kappa", type=float)

    c = sub.add_parser("verify-cutoff", parents=[common], help="cut-off lemma constants")
    c.add_argument("--R-list", type=_floats)
    c.add_argument("--p", type=float, default=1.5)

    sub.add_parser("verify-all", parents=[common], help="run the full self-check")
    return ap


def _out(args) -> Path | None:
    out = getattr(args, "out", None)
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(text: str, out: Path | None, name: str) -> None:
    sys.stdout.write(text)
    if out is not None:
        (out / name).write_text(text)


def _cmd_exponents(args, cfg) -> int:
    rep = exponents(args.n, args.gamma, args.p, args.kappa)
    _emit("\n".join(rep.lines()) + "\n", _out(args), "exponents.txt")
    return 0


def _cmd_kernel(args, cfg) -> int:
    q = cfg.quadrature
    over = {k: v for k, v in (("lambda_points", args.lambda_points), ("lambda_max", args.lambda_max),
                              ("rule", args.rule)) if v is not None}
    q = replace(q, **over) if over else q
    t = args.t
    L = args.half_width_xy or 9.0 * math.sqrt(t)
    Lt = args.half_width_tau or 40.0 * t
    spec = GridSpec(args.n, L, Lt, args.points_xy, args.points_tau)
    h, clamped = sample_kernel(t, spec, q, args.normalization, return_clamped=True)
    eta = GroupPoint([0.3] * args.n, [-0.2] * args.n, 0.4)
    ref = kernel_value(eta, t, q, args.normalization)
    scaled = kernel_value(dilate(eta, 2.0), 4.0 * t, q, args.normalization) * 2.0 ** spec.Q
    lines = [
        f"n = {args.n}", f"t = {t!r}", f"normalization = {args.normalization}",
        f"grid = {spec}",
        f"mass = {h.integrate()!r}",
        f"peak = {float(h.values.max())!r}",
        f"clamped_negative_nodes = {clamped}",
        f"scaling_rel_err = {abs(scaled / ref - 1.0)!r}",
    ]
    out = _out(args)
    if out is not None:
        h.dump(out / "kernel.hhgf")
    _emit("\n".join(lines) + "\n", out, "kernel_report.txt")
    return 0


def _solve_config(args, cfg):
    base = cfg.solve
    over = {}
    for attr in ("p", "gamma", "amplitude", "time_step", "t_end"):
        v = getattr(args, attr, None)
        if v is not None:
            over[attr] = v
    return base.with_(**over) if over else base


def _cmd_solve(args, cfg) -> int:
    r = solve(_solve_config(args, cfg))
    out = _out(args)
    if out is not None:
        write_artifacts(r, out)
    from .solver import summary_text

    sys.stdout.write(summary_text(r))
    return 0 if r.status != "instability_aborted" else 2


def _cmd_dichotomy(args, cfg) -> int:
    p_list = args.p_list or cfg.scan.p_list
    amps = args.amplitudes or cfg.scan.amplitude_list
    out = _out(args)
    res = scan_dichotomy(p_list, amps, cfg.solve, getattr(args, "jobs", 1), out)
    for r in res.rows:
        sys.stdout.write(f"p={r['p']!r} amplitude={r['amplitude']!r} status={r['status']} t_est={r['t_est']!r}\n")
    sys.stdout.write(f"monotone_in_amplitude = {res.fit['monotone_in_amplitude']}\n")
    return 0


def _cmd_lifespan(args, cfg) -> int:
    eps = args.eps_list or cfg.scan.eps_list
    profile = args.profile or cfg.scan.profile
    kappa = args.kappa or cfg.scan.kappa
    base = cfg.solve
    rep = exponents(base.n, base.gamma, base.p, kappa if profile == "power_decay" else None)
    if profile == "power_decay":
        base = base.with_(initial_data="power_decay", kappa=kappa)
        theory = rep.lifespan_exponent_kappa
    else:
        theory = rep.lifespan_exponent_L1
    out = _out(args)
    res = scan_lifespan(eps, base, theory, getattr(args, "jobs", 1), out)
    for r in res.rows:
        sys.stdout.write(f"eps={r['eps']!r} status={r['status']} t_est={r['t_est']!r}\n")
    for k in ("slope", "half_width", "theory", "points", "censored", "monotone", "status"):
        sys.stdout.write(f"{k} = {res.fit.get(k)!r}\n")
    return 0


def _cmd_cutoff(args, cfg) -> int:
    R = args.R_list or cfg.scan.R_list
    r = verify_cutoff(R, args.p, points_per_annulus=cfg.verify.cutoff_points_per_annulus)
    lines = [f"p = {args.p!r}", f"C_exact = {r['C_exact']!r}"]
    for row in r["rows"]:
        lines.append(" ".join(f"{k}={v!r}" for k, v in row.items()))
    lines += [f"spread = {r['spread']!r}", f"ok = {r['ok']}"]
    _emit("\n".join(lines) + "\n", _out(args), "cutoff_report.txt")
    return 0 if r["ok"] else 1


def _cmd_verify_all(args, cfg) -> int:
    code, report = verify_all(cfg, getattr(args, "seed", 0))
    _emit(report, _out(args), "verify_report.txt")
    return code


_COMMANDS = {
    "exponents": _cmd_exponents,
    "kernel": _cmd_kernel,
    "solve": _cmd_solve,
    "scan-dichotomy": _cmd_dichotomy,
    "scan-lifespan": _cmd_lifespan,
    "verify-cutoff": _cmd_cutoff,
    "verify-all": _cmd_verify_all,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = load_config(getattr(args, "config", None))
    np.seterr(over="warn")
    return _COMMANDS[args.command](args, cfg)


if __name__ == "__main__":
    raise SystemExit(main())

"""Lemma verifiers, parameter scans and the aggregate self-check."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage, stats

from .cutoff import cutoff_field, cutoff_star_field, smooth_step
from .errors import GridError
from .grid import GridField, GridSpec
from .solver import BLOWUP, COMPLETED, SolveConfig, solve, theta_field, write_artifacts
from .stencils import sub_laplacian_array

__all__ = [
    "CSV_STATUS",
    "ScanResult",
    "cutoff_grid",
    "cutoff_constant_exact",
    "verify_cutoff",
    "verify_theta",
    "scan_dichotomy",
    "scan_lifespan",
    "fit_loglog",
]

# closed status vocabulary of every CSV written here
CSV_STATUS = {"completed": "completed", "blowup_detected": "blowup",
              "instability_aborted": "aborted"}


def cutoff_grid(R: float, points_per_annulus: int = 24, margin: float = 1.1) -> GridSpec:
    """n=1 grid covering ``supp phi_R`` with a fixed number of cells across
    the transition annulus ``1/2 <= |eta|_H^2 / R <= 1``.

    The annulus has width ``(1 - 2^{-1/2}) sqrt(R)`` in ``|z|`` and ``R/2`` in
    ``tau``; grids for different ``R`` are dilates of one another.
    """
    L, Lt = margin * math.sqrt(R), margin * R
    hx = (1 - 2**-0.5) * math.sqrt(R) / points_per_annulus
    ht = 0.5 * R / points_per_annulus
    N = 2 * math.ceil(L / hx) + 1
    M = 2 * math.ceil(Lt / ht) + 1
    return GridSpec(1, L, Lt, N, M)


def _annulus_cells(spec: GridSpec, R: float) -> float:
    return min((1 - 2**-0.5) * math.sqrt(R) / spec.h_xy, 0.5 * R / spec.h_tau)


def cutoff_constant_exact(p: float, Q: int = 4, samples: int = 200001, floor: float = 1e-12) -> float:
    """``sup R |Delta_H phi_R| / (phi*_R)^{1/p}`` from the chain rule.

    For ``u = |eta|_H^2`` one has ``|grad_H u|^2 = 4 r^2`` and
    ``Delta_H u = 2 Q r^2 / u``, so with ``F = smooth_step^ell`` and
    ``xi = u/R`` the ratio is ``4 xi |F'' + Q F'/(2 xi)| / F^{1/p}`` at ``tau = 0``,
    independent of ``R``. Derivatives of ``F`` are taken on a fine 1-D grid.
    """
    ell = 2 * p / (p - 1)
    s = np.linspace(0.5, 1.0, samples)
    F = smooth_step(s) ** ell
    d1 = np.gradient(F, s)
    d2 = np.gradient(d1, s)
    m = F > floor
    return float(np.max(4 * s[m] * np.abs(d2[m] + Q / (2 * s[m]) * d1[m]) / F[m] ** (1.0 / p)))


def verify_cutoff(R_list, p: float, spec: GridSpec | None = None, floor: float = 1e-12,
                  points_per_annulus: int = 24) -> dict:
    """Smallest ``C(R)`` with ``|Delta_H phi_R| <= (C/R) (phi*_R)^{1/p}`` on the grid.

    Only interior nodes with ``phi*_R > floor`` enter the constant. Without a
    ``spec`` each ``R`` gets its own :func:`cutoff_grid`. Also reports the
    largest ``|Delta_H phi_R|`` where ``phi_R`` is identically 1 (and 0) on the
    whole stencil neighbourhood, and the chain-rule constant for comparison.
    """
    R_list = [float(R) for R in R_list]
    if not R_list:
        raise ValueError("need at least one R")
    rows = []
    for R in R_list:
        g = spec or cutoff_grid(R, points_per_annulus)
        cells = _annulus_cells(g, R)
        if cells < 8:
            raise GridError(f"R={R:g}: only {cells:.1f} cells across the transition annulus (need 8)")
        if math.sqrt(R) > g.half_width_xy or R > g.half_width_tau:
            raise GridError(f"R={R:g}: the support of phi_R leaves the box")
        interior = g.interior_mask(1)
        phi = cutoff_field(g, R, p).values
        star = cutoff_star_field(g, R, p).values
        lap = sub_laplacian_array(phi, g, "one_sided")
        m = interior & (star > floor)
        ratio = np.abs(lap[m]) / star[m] ** (1.0 / p)
        flat1 = ndimage.minimum_filter(phi, size=3, mode="nearest") == 1.0
        flat0 = ndimage.maximum_filter(phi, size=3, mode="nearest") == 0.0
        rows.append({
            "R": R,
            "C_hat": float(R * ratio.max()),
            "plateau_max": float(np.abs(lap[interior & flat1]).max(initial=0.0)),
            "outside_max": float(np.abs(lap[interior & flat0]).max(initial=0.0)),
            "cells_across": float(cells),
        })
    C = [r["C_hat"] for r in rows]
    spread = max(C) / min(C)
    return {"p": p, "rows": rows, "spread": spread, "C_exact": cutoff_constant_exact(p),
            "ok": bool(spread < 2.0)}


def _coarsen(spec: GridSpec) -> GridSpec:
    if spec.points_per_xy_axis % 2 == 0 or spec.points_per_tau_axis % 2 == 0:
        raise GridError("coarsening needs odd point counts")
    return GridSpec(spec.n, spec.half_width_xy, spec.half_width_tau,
                    (spec.points_per_xy_axis + 1) // 2, (spec.points_per_tau_axis + 1) // 2)


def verify_theta(spec: GridSpec, A: float = 1.0, eps: float | None = None, slack: float = 5.0) -> dict:
    """Check ``Delta_H Theta >= -2 eps (Q+2) Theta`` at interior nodes.

    The finite-difference truncation error is estimated by comparing the
    stencil on ``spec`` with the stencil on the grid of every other node
    (second order, so the error on ``spec`` is about a third of the
    difference). The check allows ``slack`` times that estimate and runs on
    the nodes shared by both grids.
    """
    if eps is None:
        eps = 1.0 / (2 * spec.Q + 4)
    coarse = _coarsen(spec)
    theta = theta_field(spec, A, eps)
    fine = sub_laplacian_array(theta.values, spec, "one_sided")
    sl = tuple(slice(None, None, 2) for _ in spec.shape)
    v_c = theta.values[sl]
    lap_c = sub_laplacian_array(v_c, coarse, "one_sided")
    lap_f = fine[sl]
    trunc = np.abs(lap_f - lap_c) / 3.0
    bound = -2.0 * eps * (spec.Q + 2) * v_c
    m = coarse.interior_mask(1)
    margin = lap_f - bound + slack * trunc
    scale = float(np.max(np.abs(bound)))
    worst = float((lap_f - bound)[m].min())
    return {
        "eps": eps, "A": A,
        "min_margin": float(margin[m].min()),
        "min_raw_margin": worst,
        "raw_margin_over_scale": worst / scale,
        "max_truncation": float(trunc[m].max()),
        "ok": bool(margin[m].min() >= 0.0),
    }


@dataclass
class ScanResult:
    """Rows of one scan plus, for lifespan scans, the fitted slope."""

    kind: str
    columns: tuple
    rows: list
    fit: dict = field(default_factory=dict)

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([_fmt(r[c]) for c in self.columns])
        return path

    def write_fit_csv(self, path) -> Path:
        cols = ("slope", "half_width", "theory", "points", "censored", "monotone", "status")
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            w.writerow([_fmt(self.fit.get(c)) for c in cols])
        return path


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _run_cell(args):
    """Worker body: one solve, reduced to a picklable summary."""
    cfg, cell_dir = args
    try:
        r = solve(cfg)
    except Exception as exc:  # a failing cell must not abort the scan
        return {"status": "aborted", "t_est": math.nan, "final_sup_norm": math.nan,
                "message": f"{type(exc).__name__}: {exc}"}
    if cell_dir is not None:
        write_artifacts(r, cell_dir)
    return {"status": CSV_STATUS[r.status], "t_est": r.t_est,
            "final_sup_norm": float(r.sup_norms[-1]), "initial_sup_norm": float(r.sup_norms[0]),
            "message": r.message, "monitors_ok": {k: v["ok"] for k, v in r.verdicts.items()},
            "window": r.window, "window_max_sup": r.verdicts.get("local_window", {}).get("max_sup")}


def _run_all(jobs_args, jobs: int):
    if jobs <= 1 or len(jobs_args) <= 1:
        return [_run_cell(a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map keeps submission order, so the merge is by axis order
        return list(pool.map(_run_cell, jobs_args))


def scan_dichotomy(p_list, amplitude_list, base: SolveConfig, jobs: int = 1, out_dir=None) -> ScanResult:
    """Solve on every ``(p, amplitude)`` pair of the two axes."""
    cells, args = [], []
    for p in p_list:
        for a in amplitude_list:
            cfg = base.with_(p=float(p), amplitude=float(a))
            cells.append((float(p), float(a)))
            d = None if out_dir is None else Path(out_dir) / "cells" / f"p{p:g}_a{a:g}"
            args.append((cfg, d))
    summaries = _run_all(args, jobs)
    rows = [{"p": p, "amplitude": a, "gamma": base.gamma, **s} for (p, a), s in zip(cells, summaries)]
    cols = ("p", "amplitude", "gamma", "status", "t_est", "final_sup_norm", "message")
    res = ScanResult("dichotomy", cols, rows)
    res.fit = {"monotone_in_amplitude": dichotomy_monotone(rows)}
    if out_dir is not None:
        res.write_csv(Path(out_dir) / "dichotomy.csv")
    return res


def dichotomy_monotone(rows) -> bool:
    """For every p: once an amplitude blows up, every larger amplitude does."""
    by_p = {}
    for r in rows:
        by_p.setdefault(r["p"], []).append(r)
    for rs in by_p.values():
        rs = sorted(rs, key=lambda r: r["amplitude"])
        seen = False
        for r in rs:
            if r["status"] == "blowup":
                seen = True
            elif seen and r["status"] == "completed":
                return False
    return True


def fit_loglog(x, y, level: float = 0.95) -> tuple[float, float]:
    """OLS slope of ``log y`` on ``log x`` and its confidence half-width."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    res = stats.linregress(lx, ly)
    dof = lx.size - 2
    half = float(stats.t.ppf(0.5 + level / 2, dof) * res.stderr) if dof > 0 else math.inf
    return float(res.slope), half


def scan_lifespan(eps_list, base: SolveConfig, theory: float | None = None,
                  jobs: int = 1, out_dir=None, min_points: int = 4) -> ScanResult:
    """Blow-up time against amplitude ``eps`` and the log-log slope.

    Completed (censored) and aborted runs are excluded from the fit.
    """
    eps_list = sorted((float(e) for e in eps_list), reverse=True)
    args = []
    for e in eps_list:
        d = None if out_dir is None else Path(out_dir) / "cells" / f"eps{e:g}"
        args.append((base.with_(amplitude=e), d))
    summaries = _run_all(args, jobs)
    rows = [{"eps": e, "p": base.p, "gamma": base.gamma, **s} for e, s in zip(eps_list, summaries)]
    cols = ("eps", "p", "gamma", "status", "t_est", "final_sup_norm", "message")
    fin = [(r["eps"], r["t_est"]) for r in rows if r["status"] == "blowup"]
    # eps decreasing along rows: T_est must not decrease
    ts = [t for _, t in fin]
    monotone = all(b >= a for a, b in zip(ts, ts[1:]))
    fit = {"theory": theory, "points": len(fin), "censored": sum(r["status"] == "completed" for r in rows),
           "monotone": monotone, "slope": None, "half_width": None}
    if len(fin) >= min_points:
        slope, half = fit_loglog([e for e, _ in fin], ts)
        fit.update(slope=slope, half_width=half, status="completed")
    else:
        fit["status"] = "nofit"
    res = ScanResult("lifespan", cols, rows, fit)
    if out_dir is not None:
        res.write_csv(Path(out_dir) / "lifespan.csv")
        res.write_fit_csv(Path(out_dir) / "lifespan_fit.csv")
    return res


__all__ += ["dichotomy_monotone", "BLOWUP", "COMPLETED"]

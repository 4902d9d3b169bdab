import csv
import math

import numpy as np
import pytest

from heisenlab.fractional import FracScheme, memory_term
from heisenlab.grid import GridField, GridSpec
from heisenlab.semigroup import apply_semigroup
from heisenlab.solver import (
    ABORTED,
    BLOWUP,
    COMPLETED,
    MemoryBudgetError,
    MildSolver,
    SolveConfig,
    initial_field,
    local_window,
    moment_residuals,
    solve,
    theta_field,
    write_artifacts,
)

SMALL = GridSpec(1, 3.0, 8.0, 13, 17)


def cfg(**kw):
    base = dict(grid=SMALL, time_step=0.1, t_end=1.0)
    base.update(kw)
    return SolveConfig(**base)


def test_zero_data_stays_zero():
    r = solve(cfg(amplitude=0.0))
    assert r.status == COMPLETED
    assert not r.final.values.any()
    assert math.isinf(r.window)
    assert all(v["ok"] for v in r.verdicts.values())


def test_linear_run_is_repeated_semigroup():
    c = cfg(nonlinear=False, t_end=0.5)
    r = solve(c)
    u = initial_field(c)
    for _ in range(c.steps):
        u = apply_semigroup(u, c.time_step, c.backend)
    assert np.array_equal(r.final.values, u.values)


def test_local_window_values():
    u0 = GridField(SMALL, np.ones(SMALL.shape))
    assert local_window(cfg(p=2.0, gamma=0.5), u0) == pytest.approx((0.75 / 4) ** (2 / 3), rel=1e-14)
    assert local_window(cfg(p=2.0, gamma=0.5), u0) == pytest.approx(0.32759, abs=1e-5)
    # doubling the data shrinks the window by 2^{-(p-1)/(2-gamma)}
    for p, g in [(1.5, 0.5), (3.0, 0.2), (2.0, 0.0)]:
        a = local_window(cfg(p=p, gamma=g), u0)
        b = local_window(cfg(p=p, gamma=g), u0.like(2 * u0.values))
        assert b / a == pytest.approx(2 ** (-(p - 1) / (2 - g)), rel=1e-12)


def test_theta_field():
    th = theta_field(SMALL)
    assert th.integrate() == pytest.approx(1.0, rel=1e-12)
    assert th.values.min() > 0
    assert th.values.argmax() == np.ravel_multi_index(SMALL.center_index(), SMALL.shape)
    wider = theta_field(SMALL, eps=1 / 24)
    assert wider.values.max() < th.values.max()
    with pytest.raises(ValueError):
        theta_field(SMALL, A=0.0)


def test_memory_budget():
    with pytest.raises(MemoryBudgetError):
        MildSolver(cfg(max_history_bytes=1000))
    # gamma = 0 keeps one row only
    MildSolver(cfg(gamma=0.0, max_history_bytes=SMALL.size * 8))


def test_threshold_must_exceed_data():
    with pytest.raises(ValueError):
        MildSolver(cfg(amplitude=1.0, blowup_threshold=5.0))


def test_comparison_principle():
    lo = solve(cfg(p=2.0, amplitude=0.5, t_end=1.0)).final.values
    hi = solve(cfg(p=2.0, amplitude=1.0, t_end=1.0)).final.values
    assert np.all(hi >= lo - 1e-14)


def test_gamma_zero_running_sum_matches_direct_memory():
    c = cfg(gamma=0.0, p=2.0, t_end=0.6)
    s = MildSolver(c)
    powers = [np.abs(s.u.ravel()) * s.u.ravel()]
    scheme = FracScheme(0.0, c.time_step, c.steps)
    while s.k < c.steps:
        direct = memory_term(np.array(powers), scheme, s.k).reshape(SMALL.shape)
        assert np.allclose(s.memory(), direct, rtol=1e-13, atol=1e-16)
        s.step()
        powers.append(np.abs(s.u.ravel()) * s.u.ravel())
    with pytest.raises(IndexError):
        s.step()


def test_blowup_detected_with_monitors():
    r = solve(cfg(p=2.0, gamma=0.0, amplitude=3.0, t_end=30.0, blowup_threshold=1e4,
                  growth_window=5))
    assert r.status == BLOWUP and r.blew_up
    assert r.t_est == pytest.approx(r.times[-1])
    assert r.sup_norms[-1] > 1e4 and r.sup_norms[-2] <= 1e4
    assert all(v["ok"] for v in r.verdicts.values()), r.verdicts


def test_crossing_without_monotone_growth_aborts():
    r = solve(cfg(p=2.0, gamma=0.0, amplitude=3.0, t_end=30.0, blowup_threshold=1e4,
                  growth_window=10_000))
    assert r.status == ABORTED and "monotone" in r.message


def test_small_data_decays():
    r = solve(cfg(p=3.0, amplitude=1e-2, t_end=2.0))
    assert r.status == COMPLETED
    assert r.sup_norms[-1] < r.sup_norms[0]
    assert r.verdicts["local_window"]["ok"] and r.verdicts["positivity"]["ok"]


def test_moment_residual_oracle():
    # f = e^{-t} solves f' + f = 0, so the residual is minus the memory sum
    scheme = FracScheme(0.0, 0.01, 200)
    t = scheme.times()
    res = moment_residuals(t, np.exp(-t), scheme, 1.0)
    mem = 0.01 * np.concatenate([[0.0], np.cumsum(np.exp(-t))[:-1]])
    assert np.allclose(res[1:-1], -mem[1:-1], atol=1e-4)
    assert moment_residuals([0.0], [1.0], scheme, 2.0).tolist() == [0.0]


def test_profiles():
    g = initial_field(cfg())
    p = initial_field(cfg(initial_data="plateau_bump", plateau_radius=1.0))
    d = initial_field(cfg(initial_data="power_decay", kappa=2.0, amplitude=0.5))
    c = SMALL.center_index()
    assert g.values[c] == pytest.approx(1.0) and p.values[c] == pytest.approx(1.0)
    assert d.values[c] == pytest.approx(0.5)
    assert np.all(d.values > 0) and np.all(p.values >= 0)
    rho = np.sqrt(np.broadcast_to(SMALL.koranyi_sq(), SMALL.shape))
    assert np.all(p.values[rho >= 2.0] == 0.0)
    assert np.allclose(p.values[rho <= 1.0], 1.0)


def test_profile_from_dump(tmp_path):
    path = tmp_path / "u0.hhgf"
    f = initial_field(cfg(initial_data="plateau_bump"))
    f.dump(path)
    g = initial_field(cfg(initial_data=str(path), amplitude=2.0))
    assert np.array_equal(g.values, 2 * f.values)
    with pytest.raises(ValueError):
        initial_field(SolveConfig(grid=GridSpec(1, 3.0, 8.0, 11, 17), initial_data=str(path)))


def test_artifacts(tmp_path):
    r = solve(cfg(snapshot_times=(0.5, 1.0)))
    paths = write_artifacts(r, tmp_path)
    with open(paths["trace"]) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "sup_norm", "l1_norm", "l2_norm", "lq_norm", "moment_f",
                       "moment_residual", "min_value"]
    assert len(rows) == r.times.size + 1
    assert float(rows[-1][0]) == pytest.approx(1.0)
    summary = paths["summary"].read_text()
    assert "status = completed" in summary and "grid.points_per_xy_axis = 13" in summary
    snap = GridField.load(tmp_path / "snapshot_t0.5.hhgf")
    assert np.array_equal(snap.values, r.snapshots[0.5].values)
    assert (tmp_path / "snapshot_t1.hhgf").exists()


@pytest.mark.parametrize("kw", [
    {"p": 1.0}, {"gamma": 1.0}, {"time_step": 0.0}, {"q": 0.5}, {"amplitude": -1.0},
    {"growth_window": 0}, {"monitors": ("energy",)}, {"initial_data": "power_decay", "kappa": 0.0},
])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        cfg(**kw)


def test_steps_rounding():
    assert cfg(time_step=0.1, t_end=1.0).steps == 10
    assert cfg(time_step=0.3, t_end=1.0).steps == 4

"""Acceptance criteria 1-10, one test each.

Full runs are cached per module so criteria that share a configuration
(norm decay, extremum principles, f_t bounds) integrate it once.
"""

import json
import math
import time
from functools import lru_cache

import numpy as np
import pytest
from scipy.optimize import brentq

from muskatlab.config import preset_config
from muskatlab.constants import K0_QUOTED, SeriesCondition, decay_margin, solve_constant
from muskatlab.diagnostics import critical_constant
from muskatlab.evolution import SchemeSpec, integrate, run
from muskatlab.grid import Grid, InterfaceField, norm_s
from muskatlab.nonlinearity import (
    DirectPath,
    LinearPath,
    SeriesBudget,
    rhs_direct,
    rhs_regularized,
    rhs_series,
)

from conftest import smooth_field

STABLE = ("zero", "single_mode", "two_mode", "bump", "near_k0", "steep_slope")


@lru_cache(maxsize=None)
def _cached(key: str):
    return run(json.loads(key))


def preset_run(name, dim, **over):
    over = {**over, "diagnostics": {"stop_on_failure": False},
            "output": {"snapshots": False, "plots": False}}
    cfg = preset_config(name, dim, **over)
    cfg["name"] = "acceptance"
    # keyed on the resolved config so equivalent requests share one run
    return _cached(json.dumps(cfg, sort_keys=True))


def _status(traj, check):
    return traj.report.check(check)


def _l2(a):
    return float(np.sqrt(np.sum(a**2)))


# ------------------------------------------------------------------ 1, 2


def test_criterion_01_constant_d2():
    start = time.perf_counter()
    cert = solve_constant(SeriesCondition(2, 0.0))
    elapsed = time.perf_counter() - start
    oracle = brentq(lambda x: math.pi * ((1 + 2 * x**2) / (1 - x**2) ** 2.5 - 1) - 1, 0.1, 0.5,
                    xtol=1e-15)
    assert cert.root == pytest.approx(oracle, abs=1e-11)
    assert cert.root == pytest.approx(float(K0_QUOTED), rel=5e-6)
    assert f"{cert.root:.5g}" == "0.24875"
    assert cert.root > 1 / 5
    assert elapsed < 1.0


def test_criterion_02_constant_d1():
    start = time.perf_counter()
    cert = solve_constant(SeriesCondition(1, 0.0))
    elapsed = time.perf_counter() - start
    assert abs(cert.root - math.sqrt((4 - math.sqrt(13)) / 3)) <= 1e-10
    assert cert.root > 1 / 3
    assert elapsed < 1.0


# ------------------------------------------------------------------ 3


def test_criterion_03_linear_regime():
    for dim, k in [(2, (1, 0)), (2, (2, 1)), (1, (3,))]:
        _check_linear_mode(dim, k)


def _check_linear_mode(dim, k):
    g = Grid(dim, 32)
    kk = float(np.linalg.norm(k))
    idx = tuple(ki % g.n for ki in k)

    def mode(a):
        return InterfaceField.from_function(g, lambda *x: a * np.cos(sum(ki * xi for ki, xi in zip(k, x))))

    # nonlinearity off: exact exponential decay
    traj = integrate(mode(0.1), LinearPath(1.0), SchemeSpec("ifrk4", None, 2.0, 1))
    for t, f in zip(traj.times, traj.fields):
        expect = mode(0.1 * math.exp(-kk * t)).values
        np.testing.assert_allclose(f.values, expect, rtol=0, atol=1e-15)

    # full nonlinearity at amplitude 1e-3
    traj = integrate(mode(1e-3), DirectPath(1.0), SchemeSpec("ifrk4", None, 1.0, 1))
    amp = np.array([abs(f.coeffs[idx]) for f in traj.fields])
    rate = -np.polyfit(traj.times, np.log(amp), 1)[0]
    assert abs(rate - kk) <= 0.02 * kk


# ------------------------------------------------------------------ 4


def test_criterion_04_direct_vs_series():
    g = Grid(2, 64)
    start = time.perf_counter()
    for seed in range(20):
        f = smooth_field(g, 1.0, seed=seed, kmax=6)
        f = f * (0.05 * (0.2 + 0.8 * (seed + 1) / 20) / norm_s(f, 1.0))
        assert norm_s(f, 1.0) <= 0.05 + 1e-15
        d = rhs_direct(f)
        s = rhs_series(f, SeriesBudget(n_max=4))
        err = _l2(d.values - s.values) / _l2(d.values)
        assert err <= 1e-3 + s.meta["tail_bound"], (seed, err, s.meta["tail_bound"])
    assert time.perf_counter() - start < 120


# ------------------------------------------------------------------ 5

DECAY_CASES = [(2, 0.1), (2, 0.2), (1, 0.1), (1, 0.3)]


def test_criterion_05_norm_decay():
    for dim, size in DECAY_CASES:
        _check_decay(dim, size)


def _check_decay(dim, size):
    traj = preset_run("single_mode", dim, initial={"preset": "single_mode", "amplitude": size})
    assert not traj.stopped_early
    assert traj.times[-1] == pytest.approx(5.0)
    n1 = np.array([r.norm_1 for r in traj.records])
    assert n1[0] == pytest.approx(size, rel=1e-12)
    assert np.all(np.diff(n1) <= 1e-8)
    for name in ("decay_budget", "decay_budget_delta0"):
        check = _status(traj, name)
        assert check.status == "pass", check
        assert check.worst_margin > 0
    mu = decay_margin(SeriesCondition(dim, 0.01), size)
    assert mu > 0 and traj.certificate["mu"] == pytest.approx(mu)


# ------------------------------------------------------------------ 6


def test_criterion_06_l2_identity():
    runs = {}
    for n in (64, 128):
        over = {"N": n, "scheme": {"t_end": 1.0}}
        runs[n] = preset_run("single_mode", 2, **over)
    worst = {}
    for n, traj in runs.items():
        assert traj.records[0].norm_1 == pytest.approx(0.2, rel=1e-12)
        res = np.array([r.identity_residual for r in traj.records])
        assert np.all(np.isfinite(res))
        worst[n] = float(res.max())
        assert worst[n] <= 1e-2
        assert all(r.dissipation >= 0 for r in traj.records)
        assert _status(traj, "dissipation_nonneg").status == "pass"
    assert worst[128] < worst[64]


# ------------------------------------------------------------------ 7


def test_criterion_07_slope_principle():
    for dim in (2, 1):
        _check_slopes(dim)


def _check_slopes(dim):
    traj = preset_run("steep_slope", dim)
    assert traj.times[-1] == pytest.approx(5.0)
    g0 = traj.records[0].grad_linf
    assert g0 == pytest.approx(0.30, rel=1e-12)
    grads = np.array([r.grad_linf for r in traj.records])
    assert np.all(grads <= g0 + 1e-6)
    factors = np.array([r.slope_factor_min for r in traj.records])
    judged = factors[np.isfinite(factors)]
    assert len(judged) > 0
    assert np.all(judged >= 0.4 - 1e-6)
    assert _status(traj, "slope_principle").status == "pass"
    assert _status(traj, "slope_factor").status == "pass"


# ------------------------------------------------------------------ 8


REGULARIZED = {"rhs": {"path": "regularized", "eps": 0.1, "c_const": 8.0}}


def test_criterion_08_extremum_principles():
    failures = []
    for dim in (2, 1):
        for over in ({}, REGULARIZED):
            for name in STABLE:
                traj = preset_run(name, dim, **over)
                label = (name, dim, over.get("rhs", {}).get("path", "direct"))
                assert not traj.stopped_early, (label, traj.stop_reason)
                hi = np.array([r.max for r in traj.records])
                lo = np.array([r.min for r in traj.records])
                if np.any(np.diff(hi) > 1e-8) or np.any(np.diff(lo) < -1e-8):
                    failures.append(label)
                if _status(traj, "extremum").status != "pass":
                    failures.append(label + ("monitor",))
    assert not failures


# ------------------------------------------------------------------ 9


def test_criterion_09_regularized_consistency():
    for dim in (2, 1):
        g = Grid(dim, 64)
        f = smooth_field(g, 0.1, seed=11, kmax=4)
        base = rhs_direct(f).values
        errs = [_l2(rhs_regularized(f, eps).values - base) for eps in (0.1, 0.05, 0.025)]
        assert errs[0] > errs[1] > errs[2] > 0, (dim, errs)


# ------------------------------------------------------------------ 10

CANDIDATE_RUNS = (
    [("single_mode", d, {"initial": {"preset": "single_mode", "amplitude": s}}) for d, s in DECAY_CASES]
    + [(name, d, {}) for d in (2, 1) for name in STABLE]
    + [("single_mode", 2, {"N": n, "scheme": {"t_end": 1.0}}) for n in (64, 128)]
)


def test_criterion_10_ft_bounds():
    # small data: ||f0||_1 below the critical constant of its dimension
    judged = []
    for name, dim, over in CANDIDATE_RUNS:
        traj = preset_run(name, dim, **over)
        if not traj.records[0].norm_1 < critical_constant(dim):
            continue
        check = _status(traj, "ft_bound")
        assert check.status == "pass", (name, dim, over, check)
        assert math.isfinite(check.cumulative)
        judged.append((name, dim))
    assert len(judged) >= 10

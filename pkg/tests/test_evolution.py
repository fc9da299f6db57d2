import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from muskatlab.config import preset_config
from muskatlab.errors import DataError, NonFiniteError, StabilityError
from muskatlab.evolution import (
    SchemeSpec,
    Stepper,
    Trajectory,
    explicit_stability_bound,
    integrate,
    mollifier_symbol,
    mollify_initial,
    run,
    step,
)
from muskatlab.grid import Grid, InterfaceField, norm_s, sup_norms
from muskatlab.nonlinearity import DirectPath, LinearPath, SeriesBudget, SeriesPath

from conftest import smooth_field


def test_zero_is_a_fixed_point():
    g = Grid(2, 16)
    f = InterfaceField(g, np.zeros(g.shape))
    for dt in (0.01, 1.0, 10.0):
        assert np.all(step(f, SchemeSpec(dt=dt), DirectPath()).values == 0)


@pytest.mark.parametrize("dim", [1, 2])
def test_linear_decay_is_exact_under_integrating_factor(dim):
    g = Grid(dim, 32)
    f0 = InterfaceField.from_function(g, lambda *x: np.cos(x[0]) + 0.5 * np.cos(3 * x[-1]))
    tr = integrate(f0, LinearPath(0.7), SchemeSpec(dt=0.3, t_end=1.5))
    expect = np.exp(-0.7 * 1.5) * np.cos(g.coords[0])
    expect = expect + 0.5 * np.exp(-0.7 * 3 * 1.5) * np.cos(3 * g.coords[-1])
    np.testing.assert_allclose(tr.fields[-1].values, expect, atol=1e-15)


def _final(f0, dt, t_end=0.5):
    return integrate(f0, DirectPath(), SchemeSpec(dt=dt, t_end=t_end)).fields[-1].values


def test_fourth_order_in_time():
    g = Grid(1, 64)
    f0 = InterfaceField.from_function(g, lambda x: 0.3 * np.exp(np.cos(x) - 1) * np.sin(x + 0.3))
    ref = _final(f0, 0.003125)
    e = [np.abs(_final(f0, dt) - ref).max() for dt in (0.1, 0.05, 0.025)]
    for a, b in zip(e, e[1:]):
        assert 14 < a / b < 18


def test_explicit_rk4_agrees_and_is_bounded():
    g = Grid(1, 32)
    f0 = smooth_field(g, 0.2, seed=1)
    bound = explicit_stability_bound(DirectPath(), g)
    assert bound == pytest.approx(2.8 / g.k_max)
    with pytest.raises(StabilityError):
        Stepper(DirectPath(), SchemeSpec("rk4", dt=1.1 * bound, t_end=11 * bound), g)
    dt = 0.01
    a = integrate(f0, DirectPath(), SchemeSpec("rk4", dt=dt, t_end=0.2)).fields[-1].values
    b = integrate(f0, DirectPath(), SchemeSpec("ifrk4", dt=dt, t_end=0.2)).fields[-1].values
    assert np.abs(a - b).max() < 1e-8


@pytest.mark.parametrize("dim,n", [(1, 128), (2, 64)])
def test_step_preserves_mean(dim, n):
    g = Grid(dim, n)
    f = InterfaceField(g, smooth_field(g, 0.2, seed=2).values + 0.4)
    out = step(f, SchemeSpec(), DirectPath())
    assert abs(out.mean() - f.mean()) < 1e-12


def test_scheme_lands_on_t_end():
    g = Grid(1, 16)
    dt, n = SchemeSpec(dt=0.3, t_end=1.0).resolve(g)
    assert n * dt == pytest.approx(1.0, abs=1e-15)
    assert dt <= 0.3
    assert SchemeSpec(t_end=1.0).resolve(g)[0] <= 0.5 * g.h
    with pytest.raises(DataError):
        SchemeSpec(dt=-1.0)
    with pytest.raises(DataError):
        SchemeSpec(kind="euler")


def test_stride_and_times():
    g = Grid(1, 16)
    f0 = smooth_field(g, 0.1)
    tr = integrate(f0, DirectPath(), SchemeSpec(dt=0.1, t_end=1.0, stride=3))
    np.testing.assert_allclose(tr.times, [0.0, 0.3, 0.6, 0.9, 1.0], atol=1e-12)
    assert all(ft is not None for ft in tr.rhs)


def test_trajectory_rejects_non_increasing_times():
    g = Grid(1, 16)
    f = InterfaceField(g, np.zeros(16))
    tr = Trajectory()
    tr.append(0.0, f)
    with pytest.raises(DataError):
        tr.append(0.0, f)


def test_runs_are_bit_reproducible():
    g = Grid(2, 16)
    f0 = smooth_field(g, 0.2, seed=3)
    a = integrate(f0, DirectPath(), SchemeSpec(t_end=0.5))
    b = integrate(f0, DirectPath(), SchemeSpec(t_end=0.5))
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a.fields, b.fields))


def test_restart_from_snapshot_is_exact():
    # the state is the physical field, so stepping from a stored sample reproduces the run
    g = Grid(1, 32)
    f0 = smooth_field(g, 0.2, seed=4)
    full = integrate(f0, DirectPath(), SchemeSpec(dt=0.1, t_end=0.4))
    again = InterfaceField(g, full.fields[2].values.copy())
    nxt = Stepper(DirectPath(), SchemeSpec(dt=0.1, t_end=0.4), g).step(again)
    assert np.array_equal(nxt.values, full.fields[3].values)


class _NaNAfterFirst(DirectPath):
    calls = 0

    def remainder(self, field):
        self.calls += 1
        out = super().remainder(field)
        return out * np.nan if self.calls > 1 else out


def test_nonfinite_stage_is_named():
    g = Grid(1, 16)
    f0 = smooth_field(g, 0.1)
    stepper = Stepper(_NaNAfterFirst(), SchemeSpec(dt=0.1), g)
    with pytest.raises(NonFiniteError, match="stage 2"):
        stepper.step(f0)


def test_nonfinite_stops_integration_with_reason():
    g = Grid(1, 16)
    tr = integrate(smooth_field(g, 0.1), _NaNAfterFirst(), SchemeSpec(dt=0.1, t_end=1.0))
    assert tr.stopped_early and "stage 2" in tr.stop_reason
    assert len(tr) == 1


def test_series_refusal_stops_run():
    g = Grid(1, 32)
    f0 = InterfaceField.from_function(g, lambda x: 0.25 * np.cos(x))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tr = integrate(f0, SeriesPath(-1.0, SeriesBudget(4, 0.3)), SchemeSpec(dt=0.1, t_end=3.0))
    assert tr.stopped_early and "0.3" in tr.stop_reason
    assert norm_s(tr.fields[-1], 1.0) <= 0.3


def test_mollifier_basic_properties():
    g = Grid(1, 64)
    const = InterfaceField(g, np.full(64, 1.3))
    np.testing.assert_allclose(mollify_initial(const, 0.3).values, 1.3, atol=1e-15)
    mode = InterfaceField.from_function(g, lambda x: np.cos(5 * x))
    m = mollifier_symbol(g, 0.2)
    out = mollify_initial(mode, 0.2)
    factor = float(np.exp(-0.5 * (0.2 * 5) ** 2))
    np.testing.assert_allclose(out.values, factor * mode.values, atol=1e-14)
    assert np.all((m > 0) & (m <= 1)) and m[0] == 1
    with pytest.raises(DataError):
        mollify_initial(mode, 0.0)
    with pytest.raises(DataError):
        mollify_initial(mode, 1.5)


def test_mollifier_converges_at_second_order():
    g = Grid(1, 128)
    f = InterfaceField.from_function(g, lambda x: np.exp(np.sin(x)))
    e = [np.abs(mollify_initial(f, eps).values - f.values).max() for eps in (0.1, 0.05, 0.025)]
    assert e[0] / e[1] == pytest.approx(4, rel=0.05)
    assert e[1] / e[2] == pytest.approx(4, rel=0.05)


@given(seed=st.integers(0, 200), eps=st.floats(0.01, 1.0), dim=st.sampled_from([1, 2]))
def test_mollifier_contracts_sup_and_slope(seed, eps, dim):
    # the periodized Gaussian is a positive unit-mass kernel
    g = Grid(dim, 32)
    f = smooth_field(g, 0.3, seed=seed, kmax=6)
    out = mollify_initial(f, eps)
    a, b = sup_norms(f, 4), sup_norms(out, 4)
    assert b.linf <= a.linf + 1e-10
    assert b.grad_linf <= a.grad_linf + 1e-10


def test_run_zero_preset_is_trivial():
    cfg = preset_config("zero", 2, N=16, scheme={"t_end": 1.0})
    tr = run(cfg)
    assert all(np.all(f.values == 0) for f in tr.fields)
    assert tr.report.passed
    assert len(tr) == int(round(1.0 / tr.certificate["dt"])) + 1


def test_run_small_data_norm_decreases():
    cfg = preset_config("single_mode", 1, N=64, initial={"preset": "single_mode", "amplitude": 0.1},
                        scheme={"t_end": 2.0})
    tr = run(cfg)
    n1 = [s.norm_1 for s in tr.records]
    assert n1[0] == pytest.approx(0.1)
    assert np.all(np.diff(n1) <= 1e-12)
    assert tr.report.passed


def test_run_unstable_grows_and_is_flagged():
    cfg = preset_config("unstable", 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tr = run(cfg)
    n1 = [s.norm_1 for s in tr.records]
    assert n1[-1] > 2 * n1[0]
    assert tr.report.check("stable_regime").status == "fail"
    assert not tr.report.passed
    assert math.isclose(n1[-1] / n1[0], math.e, rel_tol=0.05)

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from muskatlab.constants import (
    C0_RADICAL,
    K0_QUOTED,
    SeriesCondition,
    a_coeff,
    a_coeff_exact,
    closed_form,
    decay_margin,
    ft_bound_factor,
    series_value,
    solve_constant,
)
from muskatlab.errors import DataError, SeriesRefusal


def test_a_coeff_first_values():
    # (2n+1)!/(2**n n!)**2 = 1, 3/2, 15/8, 35/16
    assert [a_coeff_exact(n) for n in range(4)] == [1, Fraction(3, 2), Fraction(15, 8), Fraction(35, 16)]


@given(n=st.integers(0, 150))
def test_a_coeff_recurrence_matches_exact(n):
    assert a_coeff(n) == pytest.approx(float(a_coeff_exact(n)), rel=1e-13)


def test_a_coeff_range():
    with pytest.raises(DataError):
        a_coeff(-1)


@given(x=st.floats(0, 0.9), dim=st.sampled_from([1, 2]))
def test_series_matches_closed_form(x, dim):
    v = series_value(SeriesCondition(dim, 0.0, 2000), x)
    assert v.partial == pytest.approx(closed_form(dim, x), rel=1e-11, abs=1e-15)


@given(x=st.floats(0.01, 0.9), dim=st.sampled_from([1, 2]), n=st.integers(5, 200))
def test_tail_bound_is_an_upper_bound(x, dim, n):
    short = series_value(SeriesCondition(dim, 0.3, n), x)
    long = series_value(SeriesCondition(dim, 0.3, 5000), x)
    assert short.upper >= long.partial * (1 - 1e-13)


def test_series_refuses_divergence():
    with pytest.raises(SeriesRefusal):
        series_value(SeriesCondition(), 1.0)


def test_k0_root():
    cert = solve_constant(SeriesCondition(2, 0.0))
    assert cert.root == pytest.approx(float(K0_QUOTED), abs=1e-11)
    assert cert.root > 0.2
    assert cert.bracket[0] <= cert.root <= cert.bracket[1]
    assert abs(cert.residual) < 1e-10


def test_c0_root_is_radical():
    cert = solve_constant(SeriesCondition(1, 0.0))
    assert abs(cert.root - C0_RADICAL) < 1e-10
    assert cert.root > 1 / 3


@pytest.mark.parametrize("dim", [1, 2])
def test_root_decreases_with_delta(dim):
    roots = [solve_constant(SeriesCondition(dim, d)).root for d in (0.0, 0.1, 0.5, 0.9)]
    assert all(b < a for a, b in zip(roots, roots[1:]))


def test_closed_form_inequality_below_k0():
    k0 = solve_constant(SeriesCondition(2, 0.0)).root
    x = np.linspace(0, k0, 20001)[:-1]
    vals = np.array([(1 + 2 * t * t) / (1 - t * t) ** 2.5 - 1 for t in x])
    assert np.all(vals < 1 / math.pi)


@given(x=st.floats(0, 0.2))
def test_decay_margin_positive_below_k0(x):
    mu = decay_margin(SeriesCondition(2, 0.01), x)
    assert 0 < mu <= 1


def test_decay_margin_sign_change_at_root():
    cond = SeriesCondition(1, 0.0)
    r = solve_constant(cond).root
    assert decay_margin(cond, r - 1e-6) > 0 > decay_margin(cond, r + 1e-6)


def test_ft_bound_factor():
    assert ft_bound_factor(2, 0.0) == 1.0
    x = 0.2
    series = 1 + math.pi * sum(a_coeff(n) * x ** (2 * n) for n in range(1, 200))
    assert ft_bound_factor(2, x) == pytest.approx(series, rel=1e-14)
    assert ft_bound_factor(1, x) == pytest.approx(1 + 2 * sum(x ** (2 * n) for n in range(1, 200)))
    assert ft_bound_factor(2, 1.0) == math.inf

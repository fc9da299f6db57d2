import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from muskatlab.errors import DataError
from muskatlab.grid import (
    Grid,
    InterfaceField,
    apply_lambda,
    from_spectral,
    gradient,
    lambda_integral,
    laplacian,
    norm_s,
    norm_sp,
    sup_norms,
)

from conftest import smooth_field


def test_grid_rejects_bad_sizes():
    with pytest.raises(DataError):
        Grid(2, 48)
    with pytest.raises(DataError):
        Grid(3, 32)
    with pytest.raises(DataError):
        Grid(1, 32, -1.0)


def test_field_rejects_nonfinite():
    g = Grid(1, 16)
    v = np.zeros(16)
    v[3] = np.nan
    with pytest.raises(DataError, match="index"):
        InterfaceField(g, v)


@pytest.mark.parametrize("dim", [1, 2])
def test_spectral_roundtrip(dim):
    g = Grid(dim, 32)
    f = smooth_field(g, seed=3)
    np.testing.assert_allclose(from_spectral(g, f.coeffs), f.values, atol=1e-15)


@pytest.mark.parametrize("k", [1, 2, 5])
def test_single_mode_norms(k):
    # cos(kx) has coefficients 1/2 at +-k, so ||.||_s = k**s
    g = Grid(1, 64)
    f = InterfaceField.from_function(g, lambda x: np.cos(k * x))
    for s in (0.0, 1.0, 1.5, 2.0):
        assert norm_s(f, s) == pytest.approx(k**s, rel=1e-13)
    assert norm_sp(f, 1.0, 2.0) == pytest.approx(k * math.sqrt(0.5), rel=1e-13)


def test_lambda_and_derivatives_on_modes():
    g = Grid(2, 32)
    f = InterfaceField.from_function(g, lambda x, y: np.sin(3 * x + 4 * y))
    np.testing.assert_allclose(apply_lambda(f).values, 5 * f.values, atol=1e-12)
    gx, gy = gradient(f)
    np.testing.assert_allclose(gx, 3 * np.cos(3 * g.coords[0] + 4 * g.coords[1]), atol=1e-12)
    np.testing.assert_allclose(laplacian(f), -25 * f.values, atol=1e-11)


def test_lambda_matches_singular_integral():
    # independent oracle: periodized kernel sum versus the Fourier multiplier
    g = Grid(1, 512)
    f = InterfaceField.from_function(g, lambda x: np.exp(np.cos(x)) - 1)
    # the plain trapezoid rule is accurate for s <= 1 (error O(h**(2-s)) beyond)
    for s, tol in ((0.5, 1e-3), (1.0, 1e-6)):
        ref = apply_lambda(f, s).values
        got = lambda_integral(f, s).values
        assert np.max(np.abs(got - ref)) < tol * np.max(np.abs(ref))


def test_sup_norms_of_mode():
    g = Grid(2, 32)
    f = InterfaceField.from_function(g, lambda x, y: 0.3 * np.cos(x))
    s = sup_norms(f)
    assert s.linf == pytest.approx(0.3)
    assert s.grad_linf == pytest.approx(0.3, rel=1e-2)
    assert s.l2 == pytest.approx(0.3 * math.sqrt(0.5) * 2 * math.pi, rel=1e-12)
    # |cos| has kinks, so the Riemann sum converges slowly
    assert s.l1 == pytest.approx(0.3 * 4 * 2 * math.pi, rel=1e-2)
    assert sup_norms(f, oversample=4).grad_linf == pytest.approx(0.3, rel=1e-12)


@given(a=st.floats(-3, 3), seed=st.integers(0, 100), s=st.floats(0, 3))
def test_norm_s_is_absolutely_homogeneous(a, seed, s):
    g = Grid(1, 32)
    f = smooth_field(g, seed=seed)
    assert norm_s(f * a, s) == pytest.approx(abs(a) * norm_s(f, s), rel=1e-12, abs=1e-300)


@given(seed=st.integers(0, 100), s=st.floats(0, 2), shift=st.integers(0, 31))
def test_norm_s_translation_invariant(seed, s, shift):
    g = Grid(2, 32)
    f = smooth_field(g, seed=seed)
    moved = InterfaceField(g, np.roll(f.values, shift, axis=0))
    assert norm_s(moved, s) == pytest.approx(norm_s(f, s), rel=1e-12)


@given(seed=st.integers(0, 100))
def test_norm_s_increases_with_s_for_integer_modes(seed):
    # all nonzero integer wavevectors have |k| >= 1
    g = Grid(2, 16)
    f = smooth_field(g, seed=seed)
    vals = [norm_s(f, s) for s in (1.0, 1.5, 2.0, 3.0)]
    assert all(b >= a * (1 - 1e-14) for a, b in zip(vals, vals[1:]))

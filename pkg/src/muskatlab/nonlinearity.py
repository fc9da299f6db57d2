"""Right-hand side of the Muskat contour equation.

All paths split the right-hand side into the exact linear part, applied as a
Fourier multiplier, and a nonlinear remainder. The remainder is summed with
the closed-form kernel over the punctured, symmetric lattice ball
``0 < |y| < L/2``; lattice points farther out (all periodic images) enter
through a power series in the small slope ratio with precomputed image sums,
so the y-integral covers the whole plane (or line) of the periodic field.

Interface dimension d=2 (three-dimensional Muskat)::

    f_t = (rho/2pi) PV int (grad f(x) - grad f(x-y)).y / (|y|^2 + (f(x)-f(x-y))^2)^(3/2) dy
        = -rho Lambda f - rho N(f)

Interface dimension d=1 (two-dimensional Muskat)::

    f_t = (rho/pi) PV int (f'(x) - f'(x-y)) y / (y^2 + (f(x)-f(x-y))^2) dy

``rho`` is half the density jump, ``(rho2 - rho1)/2``; positive is stable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma, pi, sin, sqrt

import numpy as np

from . import _images, _kernels
from .constants import coefficient
from .errors import DataError, NonFiniteError, SeriesRefusal
from .grid import Grid, InterfaceField, from_spectral, gradient, laplacian, multiplier, norm_s

__all__ = [
    "QuadratureSpec",
    "SeriesBudget",
    "UnstableRegimeWarning",
    "RhsPath",
    "DirectPath",
    "SeriesPath",
    "RegularizedPath",
    "LinearPath",
    "rhs_direct",
    "rhs_series",
    "rhs_regularized",
    "slope_quotient",
    "slope_factor",
    "series_tail_bound",
]


class UnstableRegimeWarning(RuntimeWarning):
    """The density jump has the Rayleigh-Taylor unstable sign."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Lattice offsets ``y != 0`` with ``|y| < radius * L/2`` in index units.

    Only a canonical half of the symmetric offset set is stored; the other
    half is reached through the pair symmetry of every integrand.
    """

    grid: Grid
    radius: float = 1.0
    far_field: bool = True

    def __post_init__(self):
        if not 0 < self.radius <= 1:
            raise DataError(f"radius must lie in (0, 1], got {self.radius}")

    @property
    def r0(self) -> float:
        """Ball radius in index units."""
        return self.radius * self.grid.n / 2

    def far_weights(self, eps: float = 0.0):
        """Paired far-field classes and their odd image sums, shape (classes, terms[, 2])."""
        g = self.grid
        reps, mult, W, _ = _images.weights(g.dim, g.n, self.r0, FAR_TERMS, eps, g.h)
        paired = mult == 2
        return np.ascontiguousarray(reps[paired]), np.ascontiguousarray(W[paired])

    def far_dissipation_weights(self):
        """All far-field classes (half set), multiplicities and even image sums."""
        g = self.grid
        reps, mult, _, V = _images.weights(g.dim, g.n, self.r0, FAR_TERMS, 0.0, g.h)
        return reps, mult, V

    def far_spectra(self, eps: float = 0.0):
        """Fourier transforms of the far-field weights on the full torus."""
        g = self.grid
        return _images.spectra(g.dim, g.n, self.r0, FAR_TERMS, eps, g.h)

    def far_terms(self, field: InterfaceField) -> int:
        """Series length for the far field at ``field``, aiming at double precision.

        The expansion variable is bounded by ``(osc f / (h r0))**2``; fields whose
        oscillation exceeds ``sqrt(FAR_Q_MAX)`` times the ball radius are refused.
        """
        osc = float(field.values.max() - field.values.min())
        q = (osc / (self.grid.h * self.r0)) ** 2
        if q == 0:
            return 1
        if q > FAR_Q_MAX:
            raise SeriesRefusal(
                f"interface oscillation {osc:.4g} is too large for the far-field expansion "
                f"(limit {sqrt(FAR_Q_MAX) * self.cutoff:.4g})"
            )
        return min(FAR_TERMS, int(np.ceil(np.log(1e-17) / np.log(q))) + 2)

    @property
    def half_offsets(self) -> np.ndarray:
        return _half_offsets(self.grid.dim, self.grid.n, self.radius)

    def full_offsets(self) -> np.ndarray:
        half = self.half_offsets
        return np.concatenate([half, -half])

    @property
    def cutoff(self) -> float:
        """Truncation radius in length units."""
        return self.radius * self.grid.length / 2


FAR_TERMS = 64
FAR_Q_MAX = 0.5


@lru_cache(maxsize=None)
def _half_offsets(dim: int, n: int, radius: float) -> np.ndarray:
    r = np.arange(-(n // 2) + 1, n // 2)
    if dim == 1:
        m = r[r > 0].reshape(-1, 1)
        m = m[m[:, 0] < radius * n / 2]
    else:
        a, b = np.meshgrid(r, r, indexing="ij")
        a, b = a.ravel(), b.ravel()
        canonical = (a > 0) | ((a == 0) & (b > 0))
        inside = a**2 + b**2 < (radius * n / 2) ** 2
        keep = canonical & inside
        m = np.stack([a[keep], b[keep]], axis=1)
        # farthest offsets first so small terms accumulate before large ones
        m = m[np.argsort(-(m[:, 0] ** 2 + m[:, 1] ** 2), kind="stable")]
    m = np.ascontiguousarray(m, dtype=np.int64)
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class SeriesBudget:
    """Truncation ``n_max`` and the norm threshold ``theta`` the series path demands."""

    n_max: int = 4
    theta: float = 0.3

    def __post_init__(self):
        if self.n_max < 0:
            raise DataError(f"n_max must be >= 0, got {self.n_max}")
        if not 0 < self.theta < 1:
            raise DataError(f"theta must lie in (0, 1), got {self.theta}")


def series_tail_bound(dim: int, x: float, n_max: int) -> float:
    """Bound on ``sum_{n > n_max} a_n x**(2n)`` (the neglected Taylor tail).

    Term ratios ``x**2 a_{n+1}/a_n`` decrease in n, so the tail is dominated by
    a geometric series started at the first neglected term.
    """
    if x >= 1:
        return float("inf")
    n = n_max + 1
    first = coefficient(dim, n) * x ** (2 * n)
    ratio = x**2 * coefficient(dim, n + 1) / coefficient(dim, n)
    return first / (1 - ratio)


def _rho_check(rho_bar: float, field: InterfaceField) -> dict:
    meta = {"rho_bar": rho_bar}
    if rho_bar < 0:
        meta["unstable_regime"] = True
        warnings.warn(
            f"rho_bar = {rho_bar} < 0: heavier fluid on top (unstable regime)",
            UnstableRegimeWarning,
            stacklevel=3,
        )
    return meta


def _finite_or_raise(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        bad = tuple(int(i) for i in np.argwhere(~np.isfinite(values))[0])
        raise NonFiniteError(f"{what}: non-finite value at grid index {bad}")
    return values


class RhsPath:
    """A right-hand side written as ``exact linear multiplier + remainder``.

    Subclasses supply :meth:`linear_symbol` (real array over wavevectors) and
    :meth:`remainder` (physical-space array). The time integrator uses the
    split directly; :meth:`__call__` returns the assembled right-hand side.
    """

    rho_bar: float = 1.0

    def linear_symbol(self, grid: Grid) -> np.ndarray:
        raise NotImplementedError

    def remainder(self, field: InterfaceField) -> np.ndarray:
        raise NotImplementedError

    def check(self, field: InterfaceField) -> None:
        """Validate preconditions for evaluating at ``field``."""

    def __call__(self, field: InterfaceField) -> InterfaceField:
        self.check(field)
        return self.evaluate(field)

    def evaluate(self, field: InterfaceField, remainder: np.ndarray | None = None) -> InterfaceField:
        """Assemble the right-hand side, reusing a precomputed remainder if given."""
        grid = field.grid
        if remainder is None:
            remainder = self.remainder(field)
        linear = from_spectral(grid, self.linear_symbol(grid) * field.coeffs)
        values = _finite_or_raise(linear + remainder, type(self).__name__)
        out = InterfaceField(grid, values)
        out.meta.update(_rho_check(self.rho_bar, field))
        return out

    def describe(self) -> dict:
        raise NotImplementedError


def _lattice_remainder(
    field: InterfaceField,
    quad: QuadratureSpec,
    rho_bar: float,
    mode: int,
    coef: np.ndarray,
    nmax: int,
    eps: float = 0.0,
) -> np.ndarray:
    grid = field.grid
    offs = quad.half_offsets
    h = grid.h
    r = np.sqrt(np.sum(offs.astype(float) ** 2, axis=1))
    weight = (h * r) ** eps if eps else np.ones(len(offs))
    nchunk = _kernels.n_chunks(len(offs))
    fs = field.values / h
    grads = gradient(field)
    if grid.dim == 2:
        # lattice variables are in index units; the powers of h cancel exactly
        out = _kernels.remainder_2d(fs, grads[0], grads[1], offs, weight, mode, coef, nmax, nchunk)
        out = out + _far_remainder(grads, quad, mode, coef, nmax, eps, field)
        return rho_bar / (2 * pi) * out
    out = _kernels.remainder_1d(fs, grads[0], offs, weight, mode, coef, nmax, nchunk)
    out = out + _far_remainder(grads, quad, mode, coef, nmax, eps, field)
    if eps == 0.0:
        # trapezoid origin term: the integrand tends to f'' * [1/(1+f'^2) - 1]
        fx = grads[0]
        fxx = laplacian(field)
        if mode == _kernels.MODE_EXACT:
            centre = -fxx * fx**2 / (1 + fx**2)
        else:
            centre = fxx * _series_numpy(fx**2, coef, nmax)
        out = out + centre * h
    return rho_bar / pi * out


def _far_remainder(grads, quad, mode, coef, nmax, eps, field) -> np.ndarray:
    grid = field.grid
    if not quad.far_field:
        return np.zeros(grid.shape)
    nterm = nmax if mode == _kernels.MODE_SERIES else quad.far_terms(field)
    if nterm > FAR_TERMS:
        raise DataError(f"far field supports at most {FAR_TERMS} series terms, got {nterm}")
    signed = np.array([(-1) ** k * coefficient(grid.dim, k) for k in range(nterm + 1)])
    W_hat, _ = quad.far_spectra(eps)
    return _images.far_remainder(field.values, grads, W_hat, signed, nterm, quad.r0, grid.h)


def _series_numpy(q: np.ndarray, coef: np.ndarray, nmax: int) -> np.ndarray:
    acc = np.zeros_like(q)
    for n in range(1, nmax + 1):
        acc += (-1) ** n * coef[n] * q**n
    return acc


def _coef_table(dim: int, nmax: int) -> np.ndarray:
    return np.array([coefficient(dim, n) for n in range(max(nmax, 0) + 1)], dtype=float)


@dataclass
class LinearPath(RhsPath):
    """Linearized equation ``f_t = -rho Lambda f``; no remainder."""

    rho_bar: float = 1.0

    def linear_symbol(self, grid):
        return -self.rho_bar * multiplier(grid, 1.0)

    def remainder(self, field):
        return np.zeros(field.grid.shape)

    def describe(self):
        return {"path": "linear", "rho_bar": self.rho_bar}


@dataclass
class DirectPath(RhsPath):
    """Closed-form kernel on the lattice."""

    rho_bar: float = 1.0
    radius: float = 1.0

    def linear_symbol(self, grid):
        return -self.rho_bar * multiplier(grid, 1.0)

    def remainder(self, field):
        quad = QuadratureSpec(field.grid, self.radius)
        return _lattice_remainder(field, quad, self.rho_bar, _kernels.MODE_EXACT, np.zeros(1), 0)

    def describe(self):
        return {"path": "direct", "rho_bar": self.rho_bar, "radius": self.radius}


@dataclass
class SeriesPath(RhsPath):
    """Taylor-series form of the nonlinearity, truncated at ``budget.n_max``."""

    rho_bar: float = 1.0
    budget: SeriesBudget = field(default_factory=SeriesBudget)
    radius: float = 1.0

    def linear_symbol(self, grid):
        return -self.rho_bar * multiplier(grid, 1.0)

    def check(self, field):
        measured = norm_s(field, 1.0)
        if measured > self.budget.theta:
            raise SeriesRefusal(
                f"series path needs ||f||_1 <= {self.budget.theta}, measured {measured:.6g}"
            )

    def remainder(self, field):
        quad = QuadratureSpec(field.grid, self.radius)
        nmax = self.budget.n_max
        if nmax == 0:
            return np.zeros(field.grid.shape)
        coef = _coef_table(field.grid.dim, nmax)
        return _lattice_remainder(field, quad, self.rho_bar, _kernels.MODE_SERIES, coef, nmax)

    def tail_bound(self, field: InterfaceField) -> float:
        return series_tail_bound(field.grid.dim, norm_s(field, 1.0), self.budget.n_max)

    def describe(self):
        return {
            "path": "series",
            "rho_bar": self.rho_bar,
            "n_max": self.budget.n_max,
            "theta": self.budget.theta,
            "radius": self.radius,
        }


def regularized_linear_constant(dim: int, eps: float) -> float:
    """Symbol of the softened kernel's linear part, in units of ``-rho |k|**(1-eps)``.

    Tends to 1 as eps -> 0.
    """
    base = gamma(eps) * sin(pi * eps / 2)
    if dim == 1:
        return 2 / pi * base
    angular = 2 * sqrt(pi) * gamma(1 - eps / 2) / gamma((3 - eps) / 2)
    return base * angular / (2 * pi)


@dataclass
class RegularizedPath(RhsPath):
    """Softened model: kernel weight ``|y|**eps`` plus dissipation ``-eps C Lambda^(1-eps) + eps Laplacian``."""

    eps: float = 0.1
    c_const: float = 8.0
    rho_bar: float = 1.0
    radius: float = 1.0

    def __post_init__(self):
        if not 0 < self.eps <= 0.5:
            raise DataError(f"eps must lie in (0, 0.5], got {self.eps}; use the direct path for eps = 0")
        if not self.c_const > 0:
            raise DataError(f"c_const must be positive, got {self.c_const}")

    def linear_symbol(self, grid):
        e = self.eps
        kernel_part = -self.rho_bar * regularized_linear_constant(grid.dim, e) * multiplier(grid, 1 - e)
        return kernel_part - e * self.c_const * multiplier(grid, 1 - e) - e * grid.kmag**2

    def remainder(self, field):
        quad = QuadratureSpec(field.grid, self.radius)
        return _lattice_remainder(
            field, quad, self.rho_bar, _kernels.MODE_EXACT, np.zeros(1), 0, eps=self.eps
        )

    def describe(self):
        return {
            "path": "regularized",
            "rho_bar": self.rho_bar,
            "eps": self.eps,
            "c_const": self.c_const,
            "radius": self.radius,
        }


def rhs_direct(field: InterfaceField, quad: QuadratureSpec | None = None, rho_bar: float = 1.0) -> InterfaceField:
    """Evaluate ``f_t`` with the closed-form kernel."""
    radius = quad.radius if quad is not None else 1.0
    return DirectPath(rho_bar, radius)(field)


def rhs_series(
    field: InterfaceField, budget: SeriesBudget | None = None, rho_bar: float = 1.0
) -> InterfaceField:
    """Evaluate ``-rho (Lambda f + N(f))`` with N truncated at ``budget.n_max``.

    The returned field's ``meta['tail_bound']`` bounds the neglected part of
    the pointwise Taylor series (relative to the leading remainder scale).
    """
    path = SeriesPath(rho_bar, budget or SeriesBudget())
    out = path(field)
    out.meta["tail_bound"] = path.tail_bound(field)
    return out


def rhs_regularized(field: InterfaceField, eps: float, c_const: float = 8.0, rho_bar: float = 1.0) -> InterfaceField:
    return RegularizedPath(eps, c_const, rho_bar)(field)


def slope_quotient(field: InterfaceField, offset) -> np.ndarray:
    """``(f(x) - f(x - y)) / |y|`` for a lattice offset ``y`` given in index units."""
    offset = np.atleast_1d(offset).astype(int)
    if np.all(offset == 0):
        raise DataError("slope quotient is undefined at y = 0")
    grid = field.grid
    shifted = np.roll(field.values, tuple(offset), axis=tuple(range(grid.dim)))
    return (field.values - shifted) / (grid.h * np.linalg.norm(offset))


def slope_factor(delta, s):
    """``1 + 3 delta (s - delta) / (1 + delta**2)``; stays >= 0.4 when |delta|, |s| <= 1/3."""
    delta = np.asarray(delta, dtype=float)
    return 1.0 + 3.0 * delta * (s - delta) / (1.0 + delta**2)

"""Periodic grids, interface fields and Fourier-side operators.

Coefficients are normalized so that ``A*cos(k.x)`` gives ``A/2`` at ``+k`` and
``-k``; equivalently ``coeffs = fftn(values) / N**d``. All homogeneous norms
drop the ``k = 0`` mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import gamma, pi, sqrt

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from .errors import DataError

__all__ = [
    "Grid",
    "InterfaceField",
    "to_spectral",
    "from_spectral",
    "apply_lambda",
    "gradient",
    "laplacian",
    "norm_s",
    "norm_sp",
    "sup_norms",
    "SupNorms",
    "lambda_integral",
    "lambda_constant",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice with ``n`` points per axis in ``dim`` dimensions."""

    dim: int
    n: int
    length: float = 2 * pi

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DataError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 8 or self.n & (self.n - 1):
            raise DataError(f"points per axis must be a power of two >= 8, got {self.n}")
        if not self.length > 0:
            raise DataError(f"period must be positive, got {self.length}")

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def k_max(self) -> float:
        """Largest wavenumber magnitude along an axis, (N/2)(2 pi/L)."""
        return (self.n // 2) * 2 * pi / self.length

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        x = np.arange(self.n) * self.h
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Physical wavevector components in FFT order, broadcast to full shape."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n) * (2 * pi / self.length)
        return tuple(np.meshgrid(*([k] * self.dim), indexing="ij"))

    @cached_property
    def integer_wavenumbers(self) -> tuple[np.ndarray, ...]:
        m = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)
        return tuple(np.meshgrid(*([m] * self.dim), indexing="ij"))

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(sum(k**2 for k in self.wavenumbers))

    @cached_property
    def derivative_wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Wavevector components with the Nyquist entry zeroed (odd derivatives)."""
        out = []
        for axis, k in enumerate(self.wavenumbers):
            k = k.copy()
            idx = [slice(None)] * self.dim
            idx[axis] = self.n // 2
            k[tuple(idx)] = 0.0
            out.append(k)
        return tuple(out)


@dataclass(eq=False)
class InterfaceField:
    """Height ``f`` sampled on a grid, with lazily cached Fourier coefficients.

    ``meta`` carries free-form annotations (e.g. regime flags set by the
    right-hand-side evaluators).
    """

    grid: Grid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise DataError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise DataError(f"non-finite value at grid index {tuple(int(i) for i in bad)}")
        values.setflags(write=False)
        self.values = values

    @classmethod
    def from_function(cls, grid: Grid, func) -> InterfaceField:
        return cls(grid, func(*grid.coords))

    @classmethod
    def from_coeffs(cls, grid: Grid, coeffs: np.ndarray) -> InterfaceField:
        return cls(grid, from_spectral(grid, coeffs))

    @cached_property
    def coeffs(self) -> np.ndarray:
        return np.fft.fftn(self.values) / self.grid.n**self.grid.dim

    def coeff(self, k) -> complex:
        """Coefficient at integer wavevector ``k`` (components in [-N/2, N/2))."""
        k = np.atleast_1d(k)
        return complex(self.coeffs[tuple(int(ki) % self.grid.n for ki in k)])

    def with_values(self, values) -> InterfaceField:
        return InterfaceField(self.grid, values)

    def mean(self) -> float:
        return float(self.values.mean())

    def __add__(self, other):
        other = other.values if isinstance(other, InterfaceField) else other
        return InterfaceField(self.grid, self.values + other)

    def __sub__(self, other):
        other = other.values if isinstance(other, InterfaceField) else other
        return InterfaceField(self.grid, self.values - other)

    def __mul__(self, scalar):
        return InterfaceField(self.grid, self.values * scalar)

    __rmul__ = __mul__


def _as_field(field_or_values, grid: Grid | None = None) -> InterfaceField:
    if isinstance(field_or_values, InterfaceField):
        return field_or_values
    if grid is None:
        raise DataError("a grid is required when passing raw arrays")
    return InterfaceField(grid, field_or_values)


def to_spectral(field: InterfaceField) -> np.ndarray:
    """Fourier coefficients of ``field`` in FFT order (cosine convention)."""
    return field.coeffs


def from_spectral(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    """Physical values from cosine-normalized coefficients (real part kept)."""
    return np.fft.ifftn(coeffs * grid.n**grid.dim).real


def multiplier(grid: Grid, s: float) -> np.ndarray:
    """The symbol ``|k|**s`` with the mean mode sent to zero."""
    kmag = grid.kmag
    out = np.zeros_like(kmag)
    nz = kmag > 0
    out[nz] = kmag[nz] ** s
    return out


def apply_lambda(field: InterfaceField, s: float = 1.0) -> InterfaceField:
    """Fractional power ``Lambda**s`` of the square root of minus the Laplacian."""
    if s < -1:
        raise DataError(f"apply_lambda needs s >= -1, got {s}")
    grid = field.grid
    return InterfaceField(grid, from_spectral(grid, multiplier(grid, s) * field.coeffs))


def gradient(field: InterfaceField) -> tuple[np.ndarray, ...]:
    """Spectral gradient components (Nyquist mode dropped)."""
    grid = field.grid
    return tuple(from_spectral(grid, 1j * k * field.coeffs) for k in grid.derivative_wavenumbers)


def laplacian(field: InterfaceField) -> np.ndarray:
    grid = field.grid
    return from_spectral(grid, -(grid.kmag**2) * field.coeffs)


def norm_s(field: InterfaceField, s: float) -> float:
    """Discrete ``sum_k |k|**s |c_k|``; constants have zero norm for s > 0."""
    if s < 0:
        raise DataError(f"norm_s needs s >= 0, got {s}")
    weights = multiplier(field.grid, s) if s > 0 else np.ones(field.grid.shape)
    return float(np.sum(weights * np.abs(field.coeffs)))


def norm_sp(field: InterfaceField, s: float, p: float) -> float:
    """Discrete ``(sum_k |k|**(s p) |c_k|**p)**(1/p)``."""
    if p < 1:
        raise DataError(f"norm_sp needs p >= 1, got {p}")
    if p == 1:
        return norm_s(field, s)
    weights = multiplier(field.grid, s * p) if s > 0 else np.ones(field.grid.shape)
    return float(np.sum(weights * np.abs(field.coeffs) ** p) ** (1.0 / p))


@dataclass(frozen=True)
class SupNorms:
    linf: float
    grad_linf: float
    l2: float
    l1: float


def _oversampled(field: InterfaceField, factor: int) -> list[np.ndarray]:
    """Values and gradient on a grid refined ``factor`` times by zero padding."""
    grid = field.grid
    if factor == 1:
        return [field.values, *gradient(field)]
    fine = Grid(grid.dim, grid.n * factor, grid.length)
    padded = np.zeros(fine.shape, dtype=complex)
    m = grid.integer_wavenumbers
    keep = np.ones(grid.shape, dtype=bool)
    for mi in m:
        keep &= mi != -(grid.n // 2)
    idx = tuple(mi[keep] % fine.n for mi in m)
    padded[idx] = field.coeffs[keep]
    fine_field = InterfaceField.from_coeffs(fine, padded)
    return [fine_field.values, *gradient(fine_field)]


def sup_norms(field: InterfaceField, oversample: int = 1) -> SupNorms:
    """Max norms on the grid (optionally refined) and Riemann-sum L2/L1 norms."""
    values, *grads = _oversampled(field, oversample)
    grad_mag = np.sqrt(sum(g**2 for g in grads))
    dv = field.grid.cell_volume
    return SupNorms(
        linf=float(np.max(np.abs(values))),
        grad_linf=float(np.max(grad_mag)),
        l2=float(np.sqrt(np.sum(field.values**2) * dv)),
        l1=float(np.sum(np.abs(field.values)) * dv),
    )


def lambda_constant(dim: int, s: float) -> float:
    """Normalizing constant of the singular-integral form of ``Lambda**s``."""
    return 2**s * gamma((dim + s) / 2) / (pi ** (dim / 2) * abs(gamma(-s / 2)))


def lambda_integral(field: InterfaceField, s: float = 1.0) -> InterfaceField:
    """``Lambda**s`` from its singular-integral form, for 1D fields and 0 < s < 2.

    The kernel ``|y|**-(1+s)`` is periodized exactly with Hurwitz zeta
    functions, and the symmetrized integrand is summed by the trapezoid rule,
    using its ``y -> 0`` limit at the origin. Independent of the FFT path.
    """
    grid = field.grid
    if grid.dim != 1:
        raise DataError("lambda_integral is implemented for one-dimensional fields")
    if not 0 < s < 2:
        raise DataError(f"lambda_integral needs 0 < s < 2, got {s}")
    n, L, h = grid.n, grid.length, grid.h
    j = np.arange(1, n)
    t = j / n
    kernel = (hurwitz_zeta(1 + s, t) + hurwitz_zeta(1 + s, 1 - t)) / L ** (1 + s)
    f = field.values
    out = np.zeros(n)
    for jj, kern in zip(j, kernel):
        out += (f - np.roll(f, jj)) * kern
    out *= h
    if s == 1.0:
        # symmetrized integrand tends to -f''(x)/2 at the origin
        fxx = (np.roll(f, -1) - 2 * f + np.roll(f, 1)) / h**2
        out += h * (-0.5 * fxx)
    c = lambda_constant(1, s)
    return InterfaceField(grid, c * out)

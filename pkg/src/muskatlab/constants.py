"""Smallness constants for global decay of ``||f||_1``.

For interface dimension d the decay condition reads::

    P_d * sum_{n>=1} (2n+1)**(1+delta) * a_n * x**(2n) <= 1

with ``P_2 = pi``, ``a_n = (2n+1)!/(2**n n!)**2`` and ``P_1 = 2``, ``a_n = 1``.
Its root is k0 (d=2) or c0 (d=1).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from .errors import DataError, SeriesRefusal

__all__ = [
    "a_coeff",
    "a_coeff_exact",
    "coefficient",
    "SeriesCondition",
    "SeriesValue",
    "ConstantCertificate",
    "series_value",
    "closed_form",
    "solve_constant",
    "decay_margin",
    "ft_bound_factor",
    "K0_QUOTED",
    "K0_QUOTED_BODY",
    "C0_RADICAL",
]

K0_QUOTED = "0.24874641998890142626"
K0_QUOTED_BODY = "0.2487461998890142626"
C0_RADICAL = math.sqrt((4 - math.sqrt(13)) / 3)

TAIL_TOL = 1e-14


_A_TABLE = [1.0]


def a_coeff(n: int) -> float:
    """``(2n+1)! / (2**n n!)**2`` via ``a_{n+1} = a_n (2n+3)/(2n+2)``."""
    if n < 0 or n > 10_000:
        raise DataError(f"a_coeff needs 0 <= n <= 10000, got {n}")
    while len(_A_TABLE) <= n:
        m = len(_A_TABLE) - 1
        _A_TABLE.append(_A_TABLE[-1] * (2 * m + 3) / (2 * m + 2))
    return _A_TABLE[n]


def a_coeff_exact(n: int) -> Fraction:
    return Fraction(math.factorial(2 * n + 1), (2**n * math.factorial(n)) ** 2)


def coefficient(dim: int, n: int) -> float:
    """Taylor coefficient of the kernel expansion: a_n in 3D, 1 in 2D."""
    return a_coeff(n) if dim == 2 else 1.0


def _prefactor(dim: int) -> float:
    return math.pi if dim == 2 else 2.0


@dataclass(frozen=True)
class SeriesCondition:
    dimension: int = 2
    delta: float = 0.0
    n_max: int = 500

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise DataError(f"dimension must be 1 or 2, got {self.dimension}")
        if not 0 <= self.delta < 1:
            raise DataError(f"delta must lie in [0, 1), got {self.delta}")
        if self.n_max < 1:
            raise DataError(f"n_max must be >= 1, got {self.n_max}")

    def term(self, n: int, x: float) -> float:
        return (
            _prefactor(self.dimension)
            * (2 * n + 1) ** (1 + self.delta)
            * coefficient(self.dimension, n)
            * x ** (2 * n)
        )


@dataclass(frozen=True)
class SeriesValue:
    """Partial sum and a rigorous upper bound on the neglected tail."""

    partial: float
    tail_bound: float

    @property
    def certified(self) -> bool:
        return self.tail_bound < TAIL_TOL

    @property
    def upper(self) -> float:
        return self.partial + self.tail_bound


def series_value(cond: SeriesCondition, x: float) -> SeriesValue:
    """Sum the condition's series to ``cond.n_max`` terms at ``x``.

    Raises :class:`SeriesRefusal` for ``x >= 1`` where the series diverges.
    """
    if x >= 1:
        raise SeriesRefusal(f"series diverges for x = {x} >= 1")
    if x < 0:
        raise DataError(f"x must be nonnegative, got {x}")
    partial = math.fsum(cond.term(n, x) for n in range(1, cond.n_max + 1))
    if x == 0:
        return SeriesValue(partial, 0.0)
    # term ratios decrease in n, so a geometric series from the first
    # neglected term bounds the tail
    n = cond.n_max + 1
    first = cond.term(n, x)
    ratio = cond.term(n + 1, x) / first if first > 0 else 0.0
    tail = first / (1 - ratio) if ratio < 1 else math.inf
    return SeriesValue(partial, tail)


def closed_form(dimension: int, x: float) -> float:
    """Value of the delta = 0 series in closed form."""
    x2 = x * x
    if dimension == 2:
        return math.pi * ((1 + 2 * x2) / (1 - x2) ** 2.5 - 1)
    return 2 * ((1 + x2) / (1 - x2) ** 2 - 1)


@dataclass(frozen=True)
class ConstantCertificate:
    dimension: int
    delta: float
    n_max: int
    root: float
    bracket: tuple[float, float]
    residual: float
    tail_bound: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bracket"] = list(self.bracket)
        return d


def _side(cond: SeriesCondition, x: float) -> int:
    """+1 if the series certainly exceeds 1 at x, -1 if certainly below, 0 if undecided."""
    v = series_value(cond, x)
    if v.partial >= 1:
        return 1
    if v.upper < 1:
        return -1
    return 0


def solve_constant(cond: SeriesCondition, tol: float = 1e-12) -> ConstantCertificate:
    """Bisection for the root of ``series(x) = 1`` on ``[0, 1 - 1e-6]``.

    Each bisection decision uses the partial sum (a lower bound) and the
    partial sum plus tail bound (an upper bound); when neither settles the
    sign the term budget is doubled.
    """
    lo, hi = 0.0, 1.0 - 1e-6
    if _side(cond, hi) <= 0:
        raise SeriesRefusal(f"no sign change of the condition on [0, {hi}] for {cond}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        side = _side(cond, mid)
        c = cond
        while side == 0:
            c = SeriesCondition(c.dimension, c.delta, 2 * c.n_max)
            if c.n_max > 1_000_000:
                raise SeriesRefusal(f"could not certify the sign at x = {mid}")
            side = _side(c, mid)
        if side > 0:
            hi = mid
        else:
            lo = mid
    root = 0.5 * (lo + hi)
    v = series_value(cond, root)
    return ConstantCertificate(
        dimension=cond.dimension,
        delta=cond.delta,
        n_max=cond.n_max,
        root=root,
        bracket=(lo, hi),
        residual=v.partial - 1.0,
        tail_bound=v.tail_bound,
    )


def decay_margin(cond: SeriesCondition, x: float) -> float:
    """``mu = 1 - series(x)``; nonpositive values mean x is at or past the constant."""
    v = series_value(cond, x)
    if not v.certified:
        raise SeriesRefusal(f"series tail bound {v.tail_bound:.3g} too large at x = {x}")
    return 1.0 - v.partial


def ft_bound_factor(dimension: int, x: float) -> float:
    """``1 + P_d sum_{n>=1} a_n x**(2n)``, the factor multiplying ``||f||_1`` in the
    bound on ``sum_k |c_k(f_t)|``."""
    if x >= 1:
        return math.inf
    x2 = x * x
    if dimension == 2:
        # sum_{n>=0} a_n t^n = (1 - t)**(-3/2)
        return 1 + math.pi * ((1 - x2) ** -1.5 - 1)
    return 1 + 2 * x2 / (1 - x2)

"""Runtime monitors for the a priori bounds of the contour equation.

Each monitor consumes per-sample measurements (:class:`Sample`) and returns a
:class:`CheckResult` whose per-sample ``margins`` are positive when the bound
holds with slack and negative on violation. Statuses are ``pass``, ``fail``,
``not_applicable`` (precondition unmet), ``refused`` (data too coarse to
decide) or ``disabled``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache

import numpy as np

from . import _images, _kernels
from .constants import SeriesCondition, decay_margin, ft_bound_factor, solve_constant
from .errors import DataError
from .grid import Grid, InterfaceField, gradient, norm_s, sup_norms
from .nonlinearity import QuadratureSpec, slope_factor, slope_quotient

__all__ = [
    "Tolerances",
    "Sample",
    "COLUMNS",
    "CheckResult",
    "DiagnosticsReport",
    "MonitorContext",
    "MONITORS",
    "dissipation",
    "j_bound_check",
    "measure",
    "l2_identity_residual",
    "norm1_decay_check",
    "decay_budget_check",
    "slope_principle_check",
    "slope_factor_min",
    "extremum_check",
    "ft_bound_check",
    "run_checks",
    "critical_constant",
    "StrideRefusal",
]

J_FACTOR = 4 * math.pi * math.sqrt(2)
SLOPE_LIMIT = 1.0 / 3.0

MONITORS = (
    "mean_conservation",
    "dissipation_nonneg",
    "stable_regime",
    "norm1_decay",
    "decay_budget",
    "decay_budget_delta0",
    "l2_identity",
    "l2_nonincrease",
    "j_bound",
    "slope_principle",
    "slope_factor",
    "extremum",
    "ft_bound",
)

# monitors that cannot be judged before the run ends
OFFLINE_MONITORS = ("l2_identity", "stable_regime", "decay_budget", "decay_budget_delta0")


class StrideRefusal(DataError):
    """The sample spacing is too coarse to resolve a finite-difference rate."""


@dataclass(frozen=True)
class Tolerances:
    monotone: float = 1e-8
    extremum: float = 1e-8
    slope: float = 1e-6
    slope_factor: float = 1e-6
    identity: float = 1e-2
    budget: float = 1e-6
    ft_rel: float = 1e-9
    j_rel: float = 1e-9
    mean: float = 1e-10
    l2: float = 1e-6


@lru_cache(maxsize=None)
def critical_constant(dimension: int, delta: float = 0.0) -> float:
    """k0 (d=2) or c0 (d=1) for the given delta."""
    return solve_constant(SeriesCondition(dimension, delta)).root


# ---------------------------------------------------------------- dissipation


def _dissipation_coefs(dim: int, nterm: int) -> np.ndarray:
    """Signed Taylor coefficients of the far-field D integrand in the slope ratio q."""
    out = np.zeros(nterm + 1)
    b = 1.0
    for k in range(1, nterm + 1):
        if dim == 2:
            # 1 - (1+q)**-1/2 = sum (-1)**(k+1) b_k q**k, b_k = (2k)!/(4**k k!**2)
            b = 0.5 if k == 1 else b * (2 * k - 1) / (2 * k)
            out[k] = (-1) ** (k + 1) * b
        else:
            out[k] = (-1) ** (k + 1) / k
    return out


@lru_cache(maxsize=16)
def _correction_symbol(quad: QuadratureSpec) -> np.ndarray:
    """``2 pi |k| - sigma(k)``: the quadratic part the lattice sums miss.

    ``sigma(k) = sum_y w(y) (1 - cos k.y)`` is the Fourier symbol of the
    quadratic part of the ball sum plus the leading far-field term; one FFT
    of the weights gives it for every mode.
    """
    grid = quad.grid
    h = grid.h
    offs = quad.full_offsets()
    r = np.sqrt(np.sum(offs.astype(float) ** 2, axis=1)) * h
    w = h**2 / r**3 if grid.dim == 2 else 2 * h / r**2
    weights = np.zeros(grid.shape)
    weights[tuple((offs % grid.n).T)] = w
    if quad.far_field:
        reps, mult, V = quad.far_dissipation_weights()
        wf = V[:, 0] / (h * quad.r0**2) * (1.0 if grid.dim == 2 else 2.0)
        np.add.at(weights, tuple((reps % grid.n).T), wf)
        paired = mult == 2
        np.add.at(weights, tuple((-reps[paired] % grid.n).T), wf[paired])
    sigma = weights.sum() - np.fft.fftn(weights).real
    if grid.dim == 1:
        sigma = sigma + h * grid.derivative_wavenumbers[0] ** 2
    out = 2 * np.pi * grid.kmag - sigma
    out.flat[0] = 0.0
    out = np.maximum(out, 0.0)
    out.setflags(write=False)
    return out


def dissipation(field: InterfaceField, far_field: bool = True) -> float:
    """Dissipation functional D(f), nonnegative by construction.

    d=2: ``int int (1/|y|) (1 - 1/sqrt(1 + Delta_y f**2)) dx dy``.
    d=1: ``int int log(1 + Delta_y f**2) dx dy``.

    Three nonnegative parts: the closed-form integrand summed over the lattice
    ball, the far field as an even-length alternating series per image (each
    partial sum is nonnegative), and a Fourier-side top-up of the quadratic
    part to the exact ``2 pi <f, Lambda f>``.
    """
    grid = field.grid
    h = grid.h
    quad = QuadratureSpec(grid, far_field=far_field)
    offs = quad.half_offsets
    fs = np.ascontiguousarray(field.values / h)
    nchunk = _kernels.n_chunks(len(offs))
    scale = h**3 if grid.dim == 2 else h**2
    if grid.dim == 2:
        lattice = _kernels.dissipation_2d(fs, offs, nchunk)
    else:
        fx = gradient(field)[0]
        lattice = _kernels.dissipation_1d(fs, offs, nchunk) + float(np.sum(np.log1p(fx**2)))
    if far_field:
        nterm = quad.far_terms(field)
        nterm += nterm % 2
        coefs = _dissipation_coefs(grid.dim, nterm)
        _, V_hat = quad.far_spectra()
        tail = _images.far_dissipation(field.values, V_hat, coefs, nterm, quad.r0, h)
        # every image's partial sum is nonnegative, so only roundoff can go below zero
        lattice += max(tail, 0.0)
    corr = grid.length**grid.dim * float(np.sum(np.abs(field.coeffs) ** 2 * _correction_symbol(quad)))
    return scale * lattice + corr


@dataclass(frozen=True)
class JRecord:
    J: float
    bound: float
    passed: bool

    @property
    def slack(self) -> float:
        return self.bound - self.J


def j_bound_check(field: InterfaceField, rel_tol: float = 1e-9) -> JRecord:
    """Compare J = D(f) with ``4 pi sqrt(2) ||f||_{L1}`` (interface dimension 2)."""
    if field.grid.dim != 2:
        raise DataError("the J bound is stated for two-dimensional interfaces")
    J = dissipation(field)
    bound = J_FACTOR * sup_norms(field).l1
    return JRecord(J, bound, J <= bound * (1 + rel_tol) + 1e-300)


# -------------------------------------------------------------- measurements


@dataclass
class Sample:
    """Everything measured at one stored time."""

    t: float
    l2: float
    l1: float
    linf: float
    grad_linf: float
    max: float
    min: float
    mean: float
    norm_1: float
    norm_2: float
    norm_1pd: float
    norm_2pd: float
    dissipation: float
    j_bound: float
    ft_norm0: float
    ft_norm1: float
    slope_factor_min: float
    identity_residual: float = math.nan
    flags: str = ""



COLUMNS = [f.name for f in fields(Sample)]
NUMERIC_COLUMNS = [c for c in COLUMNS if c != "flags"]


def _audit_offsets(grid: Grid) -> np.ndarray:
    """Deterministic offsets for the slope-factor audit: short ones plus dyadic axis steps."""
    out = []
    if grid.dim == 1:
        steps = {1, 2, 3}
        j = 4
        while j <= grid.n // 4:
            steps.add(j)
            j *= 2
        return np.array(sorted(steps)).reshape(-1, 1)
    for a in range(0, 4):
        for b in range(-3, 4):
            if a > 0 or b > 0:
                out.append((a, b))
    j = 4
    while j <= grid.n // 4:
        out += [(j, 0), (0, j)]
        j *= 2
    return np.array(out)


def slope_factor_min(field: InterfaceField) -> float:
    """Smallest ``slope_factor(Delta_y f, grad f . u)`` over audited pairs with both slopes in [-1/3, 1/3].

    NaN if no audited pair has both slopes in range.
    """
    grid = field.grid
    grads = gradient(field)
    best = math.inf
    for m in _audit_offsets(grid):
        u = m / np.linalg.norm(m)
        delta = slope_quotient(field, m)
        s = sum(g * ui for g, ui in zip(grads, u))
        ok = (np.abs(delta) <= SLOPE_LIMIT) & (np.abs(s) <= SLOPE_LIMIT)
        if np.any(ok):
            best = min(best, float(np.min(slope_factor(delta[ok], s[ok]))))
    return best if best < math.inf else math.nan


def measure(t: float, field: InterfaceField, ft: InterfaceField | None, delta: float = 0.01,
            oversample: int = 1) -> Sample:
    """Norms, dissipation and f_t sizes of one stored field."""
    sup = sup_norms(field, oversample)
    d = dissipation(field)
    return Sample(
        t=float(t),
        l2=sup.l2,
        l1=sup.l1,
        linf=sup.linf,
        grad_linf=sup.grad_linf,
        max=float(field.values.max()),
        min=float(field.values.min()),
        mean=field.mean(),
        norm_1=norm_s(field, 1.0),
        norm_2=norm_s(field, 2.0),
        norm_1pd=norm_s(field, 1.0 + delta),
        norm_2pd=norm_s(field, 2.0 + delta),
        dissipation=d,
        j_bound=J_FACTOR * sup.l1,
        ft_norm0=norm_s(ft, 0.0) if ft is not None else math.nan,
        ft_norm1=norm_s(ft, 1.0) if ft is not None else math.nan,
        slope_factor_min=slope_factor_min(field),
    )


# -------------------------------------------------------------------- checks


@dataclass
class CheckResult:
    name: str
    status: str
    worst_margin: float | None = None
    time_of_worst: float | None = None
    detail: str = ""
    margins: np.ndarray | None = field(default=None, repr=False)
    slack: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status in ("pass", "not_applicable", "disabled")

    def summary(self) -> dict:
        return {
            "check_name": self.name,
            "status": self.status,
            "worst_margin": self.worst_margin,
            "time_of_worst": self.time_of_worst,
            "detail": self.detail,
        }


def _from_margins(name: str, times, margins, detail: str = "", slack: float = 0.0) -> CheckResult:
    """Pass iff every margin is >= -slack; report the smallest margin."""
    margins = np.asarray(margins, dtype=float)
    if margins.size == 0:
        return CheckResult(name, "pass", None, None, detail or "no samples", margins)
    finite = np.where(np.isnan(margins), np.inf, margins)
    i = int(np.argmin(finite))
    status = "pass" if finite[i] >= -slack else "fail"
    return CheckResult(name, status, float(margins[i]), float(times[i]), detail, margins, slack)


def _na(name: str, why: str) -> CheckResult:
    return CheckResult(name, "not_applicable", None, None, why)


@dataclass(frozen=True)
class MonitorContext:
    """Run facts the monitors need besides the samples themselves."""

    dimension: int
    rho_bar: float = 1.0
    path: str = "direct"
    delta: float = 0.01
    tol: Tolerances = field(default_factory=Tolerances)
    enabled: tuple[str, ...] = MONITORS


def _arr(samples, name) -> np.ndarray:
    return np.array([getattr(s, name) for s in samples], dtype=float)


def mean_check(samples, ctx: MonitorContext) -> CheckResult:
    m = _arr(samples, "mean")
    scale = max(1.0, abs(m[0])) if len(m) else 1.0
    margins = ctx.tol.mean * scale - np.abs(m - m[0]) if len(m) else m
    return _from_margins("mean_conservation", _arr(samples, "t"), margins)


def dissipation_nonneg_check(samples, ctx: MonitorContext) -> CheckResult:
    return _from_margins("dissipation_nonneg", _arr(samples, "t"), _arr(samples, "dissipation"),
                         "D(f) >= 0 exactly")


def stable_regime_check(samples, ctx: MonitorContext) -> CheckResult:
    t0 = samples[0].t if samples else 0.0
    if ctx.rho_bar < 0:
        growth = ""
        if len(samples) > 1 and samples[0].norm_1 > 0:
            growth = f"; ||f||_1 grew by a factor {samples[-1].norm_1 / samples[0].norm_1:.4g}"
        return CheckResult("stable_regime", "fail", ctx.rho_bar, t0,
                           "unstable regime: rho_bar < 0 (heavier fluid on top)" + growth)
    return CheckResult("stable_regime", "pass", ctx.rho_bar, t0, "rho_bar >= 0")


def norm1_decay_check(samples, ctx: MonitorContext) -> CheckResult:
    """``||f||_1`` must not increase by more than ``tol.monotone`` between samples."""
    name = "norm1_decay"
    if not samples:
        return _na(name, "no samples")
    x0 = samples[0].norm_1
    k = critical_constant(ctx.dimension)
    if not x0 < k:
        return _na(name, f"||f0||_1 = {x0:.6g} is not below the critical constant {k:.10f}")
    if ctx.rho_bar < 0:
        return _na(name, "decay is proved for the stable sign only")
    n1 = _arr(samples, "norm_1")
    inc = np.diff(n1, prepend=n1[0])
    return _from_margins(name, _arr(samples, "t"), ctx.tol.monotone - inc,
                         f"||f0||_1 = {x0:.6g} < {k:.10f}")


def _cumtrapz(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    if len(y) > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def _trapz_error(y: np.ndarray, t: np.ndarray) -> float:
    """Richardson estimate of the trapezoid error from a half-density rule."""
    if len(y) < 5:
        return 0.0
    fine = _cumtrapz(y, t)[::2]
    coarse = _cumtrapz(y[::2], t[::2])
    return float(np.max(np.abs(fine - coarse))) / 3.0


def decay_budget_check(samples, ctx: MonitorContext, delta: float | None = None) -> CheckResult:
    """``||f||_{1+d}(t) + mu int_0^t ||f||_{2+d} <= ||f0||_{1+d}`` with mu from the series margin.

    ``delta`` defaults to the context's; ``0`` gives the plain ``||f||_1`` form.
    """
    delta = ctx.delta if delta is None else delta
    name = "decay_budget" if delta == ctx.delta else "decay_budget_delta0"
    if not samples:
        return _na(name, "no samples")
    if ctx.rho_bar < 0:
        return _na(name, "decay is proved for the stable sign only")
    x0 = samples[0].norm_1
    mu = decay_margin(SeriesCondition(ctx.dimension, delta), x0) if x0 < 1 else -math.inf
    if not mu > 0:
        return _na(name, f"mu = {mu:.6g} <= 0 at ||f0||_1 = {x0:.6g}")
    t = _arr(samples, "t")
    if delta == ctx.delta:
        low, high = _arr(samples, "norm_1pd"), _arr(samples, "norm_2pd")
    elif delta == 0:
        low, high = _arr(samples, "norm_1"), _arr(samples, "norm_2")
    else:
        raise DataError(f"samples carry norms for delta = {ctx.delta} and 0 only, not {delta}")
    integral = _cumtrapz(high, t)
    err = _trapz_error(high, t) * mu
    margins = low[0] - (low + mu * integral)
    # equality at t = 0 is definitional; the slack of interest is over t > 0
    margins[0] = np.nan
    return _from_margins(name, t, margins,
                         f"delta = {delta}, mu = {mu:.6g}, quadrature error <= {err:.3g}",
                         slack=ctx.tol.budget + err)


def _fd_weights(z: float, x: np.ndarray) -> np.ndarray:
    """Weights of the first derivative at ``z`` of the interpolant through nodes ``x``."""
    d = x - z
    V = np.vander(d, increasing=True).T
    rhs = np.zeros(len(x))
    rhs[1] = 1.0
    return np.linalg.solve(V, rhs)


def time_derivative(t: np.ndarray, y: np.ndarray, points: int = 5) -> np.ndarray:
    """Finite-difference ``dy/dt`` from the ``points`` nearest samples (centred in the interior).

    Five points give fourth order on a uniform stride; the window is clipped
    at the ends, where the stencil becomes one-sided.
    """
    n = len(t)
    out = np.empty(n)
    for i in range(n):
        lo = min(max(i - points // 2, 0), n - points)
        x = t[lo:lo + points]
        # shift and scale the nodes so the Vandermonde system stays well conditioned
        scale = x[-1] - x[0]
        w = _fd_weights((t[i] - x[0]) / scale, (x - x[0]) / scale) / scale
        out[i] = w @ y[lo:lo + points]
    return out


IDENTITY_POINTS = 5


def l2_identity_residual(times, energy, diss, rho_bar: float, tol: float = 1e-2) -> np.ndarray:
    """Relative residual of ``d/dt ||f||^2 + (rho/pi) D(f) = 0`` at each sample.

    The rate is a five-point (fourth-order) finite difference of
    ``energy = ||f||_{L2}**2`` on the stored times. Raises
    :class:`StrideRefusal` when the same difference on every other sample
    shows the truncation error alone would use more than half of ``tol``.
    """
    t = np.asarray(times, dtype=float)
    e = np.asarray(energy, dtype=float)
    d = np.asarray(diss, dtype=float)
    p = IDENTITY_POINTS
    if len(t) < p:
        raise StrideRefusal(f"need at least {p} samples for the rate stencil, got {len(t)}")
    rate = time_derivative(t, e, p)
    sink = rho_bar / math.pi * d
    scale = np.maximum(np.abs(rate), np.abs(sink))
    if len(t) >= 2 * p - 1:
        coarse = time_derivative(t[::2], e[::2], p)
        trunc = np.abs(rate[::2] - coarse) / (2**(p - 1) - 1)
        rel = np.divide(trunc, scale[::2], out=np.zeros_like(trunc), where=scale[::2] > 0)
        worst = float(np.max(rel))
        if worst > tol / 2:
            factor = (worst / (tol / 2)) ** (1 / (p - 1))
            raise StrideRefusal(
                f"sample spacing too coarse: difference error ~{worst:.3g} relative; "
                f"reduce the stride by a factor of at least {factor:.2f}"
            )
    return np.divide(np.abs(rate + sink), scale, out=np.zeros_like(rate), where=scale > 0)


def identity_check(samples, ctx: MonitorContext) -> CheckResult:
    name = "l2_identity"
    if ctx.path == "linear":
        return CheckResult(name, "disabled", None, None, "identity holds for the full equation only")
    if ctx.path not in ("direct", "series"):
        return _na(name, f"identity not stated for the {ctx.path} path")
    t = _arr(samples, "t")
    try:
        res = l2_identity_residual(t, _arr(samples, "l2") ** 2, _arr(samples, "dissipation"),
                                   ctx.rho_bar, ctx.tol.identity)
    except StrideRefusal as exc:
        return CheckResult(name, "refused", None, None, str(exc))
    out = _from_margins(name, t, ctx.tol.identity - res, f"relative tolerance {ctx.tol.identity}")
    out.residuals = res
    return out


def l2_nonincrease_check(samples, ctx: MonitorContext) -> CheckResult:
    name = "l2_nonincrease"
    if ctx.rho_bar < 0:
        return _na(name, "energy decay needs the stable sign")
    if ctx.path == "series":
        return _na(name, "truncated series is not energy-dissipative by construction")
    l2 = _arr(samples, "l2")
    if len(l2) == 0:
        return _na(name, "no samples")
    margins = l2[0] * (1 + ctx.tol.l2) - l2
    return _from_margins(name, _arr(samples, "t"), margins)


def j_check(samples, ctx: MonitorContext) -> CheckResult:
    if ctx.dimension != 2:
        return _na("j_bound", "bound is stated for two-dimensional interfaces")
    J, bound = _arr(samples, "dissipation"), _arr(samples, "j_bound")
    margins = bound * (1 + ctx.tol.j_rel) - J
    return _from_margins("j_bound", _arr(samples, "t"), margins, "J <= 4 pi sqrt(2) ||f||_L1")


def slope_principle_check(samples, ctx: MonitorContext) -> CheckResult:
    """``grad_linf(t) < grad_linf(0) + tol`` and ``< 1/3`` at every sample."""
    name = "slope_principle"
    if not samples:
        return _na(name, "no samples")
    g0 = samples[0].grad_linf
    if not g0 < SLOPE_LIMIT:
        return _na(name, f"grad_linf(f0) = {g0:.6g} is not below 1/3")
    if ctx.rho_bar < 0:
        return _na(name, "maximum principle needs the stable sign")
    g = _arr(samples, "grad_linf")
    margins = np.minimum(g0 + ctx.tol.slope - g, SLOPE_LIMIT - g)
    return _from_margins(name, _arr(samples, "t"), margins, f"grad_linf(f0) = {g0:.6g}")


def slope_factor_check(samples, ctx: MonitorContext) -> CheckResult:
    name = "slope_factor"
    g = _arr(samples, "grad_linf")
    keep = g < SLOPE_LIMIT
    if not np.any(keep):
        return _na(name, "slopes never below 1/3")
    fmin = _arr(samples, "slope_factor_min")
    margins = np.where(keep, fmin - 0.4, np.nan)
    return _from_margins(name, _arr(samples, "t"), margins,
                         "min slope factor over audited pairs >= 0.4", slack=ctx.tol.slope_factor)


def extremum_check(samples, ctx: MonitorContext) -> CheckResult:
    """max f nonincreasing and min f nondecreasing between consecutive samples."""
    name = "extremum"
    if ctx.rho_bar < 0:
        return _na(name, "maximum principle needs the stable sign")
    hi, lo = _arr(samples, "max"), _arr(samples, "min")
    if len(hi) == 0:
        return _na(name, "no samples")
    up = np.diff(hi, prepend=hi[0])
    down = np.diff(lo, prepend=lo[0])
    margins = ctx.tol.extremum - np.maximum(up, -down)
    return _from_margins(name, _arr(samples, "t"), margins)


def ft_bound_check(samples, ctx: MonitorContext) -> CheckResult:
    """``sum_k |c_k(f_t)| <= |rho| ||f||_1 (1 + P sum a_n ||f||_1^(2n))`` at each sample."""
    name = "ft_bound"
    if ctx.path not in ("direct", "series", "linear"):
        return _na(name, f"bound not stated for the {ctx.path} path")
    t = _arr(samples, "t")
    x = _arr(samples, "norm_1")
    ft0, ft1 = _arr(samples, "ft_norm0"), _arr(samples, "ft_norm1")
    if np.any(x >= 1):
        return _na(name, "needs ||f||_1 < 1 at every sample")
    bound = np.array([abs(ctx.rho_bar) * xi * ft_bound_factor(ctx.dimension, xi) for xi in x])
    margins = bound * (1 + ctx.tol.ft_rel) - ft0
    cumulative = float(_cumtrapz(ft1, t)[-1]) if len(t) else 0.0
    out = _from_margins(name, t, margins, f"int ||f_t||_1 dt = {cumulative:.6g}")
    out.cumulative = cumulative
    return out


_CHECKS = {
    "mean_conservation": mean_check,
    "dissipation_nonneg": dissipation_nonneg_check,
    "stable_regime": stable_regime_check,
    "norm1_decay": norm1_decay_check,
    "decay_budget": lambda s, c: decay_budget_check(s, c),
    "decay_budget_delta0": lambda s, c: _renamed(decay_budget_check(s, c, 0.0), "decay_budget_delta0"),
    "l2_identity": identity_check,
    "l2_nonincrease": l2_nonincrease_check,
    "j_bound": j_check,
    "slope_principle": slope_principle_check,
    "slope_factor": slope_factor_check,
    "extremum": extremum_check,
    "ft_bound": ft_bound_check,
}


def _renamed(result: CheckResult, name: str) -> CheckResult:
    result.name = name
    return result


def run_checks(samples, ctx: MonitorContext, online: bool = False) -> list[CheckResult]:
    """Evaluate every monitor; ``online`` skips those that need the whole run."""
    out = []
    for name in MONITORS:
        if online and name in OFFLINE_MONITORS:
            continue
        if name not in ctx.enabled:
            out.append(CheckResult(name, "disabled", detail="disabled in configuration"))
            continue
        out.append(_CHECKS[name](samples, ctx))
    return out


@dataclass
class DiagnosticsReport:
    """Per-sample records plus the monitor verdicts derived from them."""

    samples: list[Sample]
    checks: list[CheckResult]
    context: MonitorContext

    @classmethod
    def build(cls, samples: list[Sample], ctx: MonitorContext) -> DiagnosticsReport:
        checks = run_checks(samples, ctx)
        for c in checks:
            if c.name == "l2_identity" and hasattr(c, "residuals"):
                for s, r in zip(samples, c.residuals):
                    s.identity_residual = float(r)
        for i, s in enumerate(samples):
            bad = [
                c.name
                for c in checks
                if c.margins is not None and i < len(c.margins) and c.margins[i] < -c.slack
            ]
            s.flags = "|".join(bad) if bad else "ok"
        return cls(samples, checks, ctx)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [c.summary() for c in self.checks],
        }

    def rows(self) -> list[dict]:
        return [asdict(s) for s in self.samples]

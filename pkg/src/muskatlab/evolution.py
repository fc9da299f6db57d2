"""Time integration of the contour equation and its regularized variant."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import ceil

import numpy as np

from .errors import DataError, NonFiniteError, SeriesRefusal, StabilityError
from .grid import Grid, InterfaceField, from_spectral
from .nonlinearity import RhsPath

log = logging.getLogger(__name__)

__all__ = ["SchemeSpec", "Trajectory", "Stepper", "step", "mollify_initial", "integrate", "run", "certificate", "c_const_scan"]

SCHEMES = ("ifrk4", "rk4")


@dataclass(frozen=True)
class SchemeSpec:
    """Time-stepping settings. ``dt=None`` means half the grid spacing."""

    kind: str = "ifrk4"
    dt: float | None = None
    t_end: float = 1.0
    stride: int = 1

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise DataError(f"unknown scheme {self.kind!r}; choose from {SCHEMES}")
        if self.dt is not None and not self.dt > 0:
            raise DataError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise DataError(f"t_end must be nonnegative, got {self.t_end}")
        if self.stride < 1:
            raise DataError(f"stride must be >= 1, got {self.stride}")

    def resolve(self, grid: Grid) -> tuple[float, int]:
        """Uniform step size and step count that land exactly on ``t_end``."""
        dt = self.dt if self.dt is not None else 0.5 * grid.h
        if self.t_end == 0:
            return dt, 0
        n_steps = max(1, ceil(self.t_end / dt - 1e-9))
        return self.t_end / n_steps, n_steps


def explicit_stability_bound(path: RhsPath, grid: Grid) -> float:
    """Largest RK4-stable step for the stiffest linear mode, 2.8 / max |symbol|."""
    top = float(np.max(np.abs(path.linear_symbol(grid))))
    return np.inf if top == 0 else 2.8 / top


class Stepper:
    """One-step map for a given right-hand side, scheme and grid.

    The state passed between steps is always the physical ``InterfaceField``;
    spectral data are recomputed from it, so a stored snapshot reproduces the
    next step exactly.
    """

    def __init__(self, path: RhsPath, scheme: SchemeSpec, grid: Grid):
        self.path = path
        self.scheme = scheme
        self.grid = grid
        self.dt, self.n_steps = scheme.resolve(grid)
        self.symbol = path.linear_symbol(grid)
        if scheme.kind == "rk4":
            bound = explicit_stability_bound(path, grid)
            if self.dt > bound:
                raise StabilityError(
                    f"dt = {self.dt:.4g} exceeds the explicit RK4 bound {bound:.4g}"
                )
        else:
            self.e_full = np.exp(self.symbol * self.dt)
            self.e_half = np.exp(self.symbol * self.dt / 2)

    def _remainder_hat(self, values: np.ndarray, stage: str) -> np.ndarray:
        try:
            field = InterfaceField(self.grid, values)
        except DataError as exc:
            raise NonFiniteError(f"stage {stage}: {exc}") from exc
        self.path.check(field)
        rem = self.path.remainder(field)
        if not np.all(np.isfinite(rem)):
            bad = tuple(int(i) for i in np.argwhere(~np.isfinite(rem))[0])
            raise NonFiniteError(f"stage {stage}: non-finite remainder at grid index {bad}")
        return np.fft.fftn(rem) / self.grid.n**self.grid.dim

    def _values(self, coeffs: np.ndarray) -> np.ndarray:
        return from_spectral(self.grid, coeffs)

    def step(self, field: InterfaceField, first_remainder: np.ndarray | None = None) -> InterfaceField:
        """Advance ``field`` by one step.

        ``first_remainder`` may carry the remainder already evaluated at
        ``field`` (physical space) to avoid recomputing the first stage.
        """
        u = field.coeffs
        dt = self.dt
        if first_remainder is None:
            self.path.check(field)
            first_remainder = self.path.remainder(field)
        k1 = np.fft.fftn(first_remainder) / self.grid.n**self.grid.dim
        if self.scheme.kind == "ifrk4":
            e1, e2 = self.e_full, self.e_half
            k2 = self._remainder_hat(self._values(e2 * (u + 0.5 * dt * k1)), "2")
            k3 = self._remainder_hat(self._values(e2 * u + 0.5 * dt * k2), "3")
            k4 = self._remainder_hat(self._values(e1 * u + dt * e2 * k3), "4")
            new = e1 * u + dt / 6 * (e1 * k1 + 2 * e2 * (k2 + k3) + k4)
        else:
            lin = self.symbol
            k1 = k1 + lin * u
            s = u + 0.5 * dt * k1
            k2 = self._remainder_hat(self._values(s), "2") + lin * s
            s = u + 0.5 * dt * k2
            k3 = self._remainder_hat(self._values(s), "3") + lin * s
            s = u + dt * k3
            k4 = self._remainder_hat(self._values(s), "4") + lin * s
            new = u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        values = self._values(new)
        if not np.all(np.isfinite(values)):
            raise NonFiniteError("stage final: non-finite field after update")
        return InterfaceField(self.grid, values)


def step(field: InterfaceField, scheme: SchemeSpec, path: RhsPath) -> InterfaceField:
    """Advance ``field`` by one step of ``scheme`` (convenience wrapper)."""
    return Stepper(path, scheme, field.grid).step(field)


def mollifier_symbol(grid: Grid, eps: float) -> np.ndarray:
    """Fourier transform of the mollifier: ``exp(-(eps |k|)**2 / 2)``."""
    return np.exp(-0.5 * (eps * grid.kmag) ** 2)


def mollify_initial(f0: InterfaceField, eps: float) -> InterfaceField:
    """Convolve with a unit-mass, even Gaussian mollifier of width ``eps``."""
    if not 0 < eps <= 1:
        raise DataError(f"eps must lie in (0, 1], got {eps}")
    grid = f0.grid
    return InterfaceField(grid, from_spectral(grid, mollifier_symbol(grid, eps) * f0.coeffs))


@dataclass
class Trajectory:
    """Stored samples ``(t, field)`` plus the right-hand side evaluated at each."""

    times: list[float] = field(default_factory=list)
    fields: list[InterfaceField] = field(default_factory=list)
    rhs: list[InterfaceField | None] = field(default_factory=list)
    records: list = field(default_factory=list)
    stopped_early: bool = False
    stop_reason: str | None = None

    def append(self, t: float, f: InterfaceField, ft: InterfaceField | None = None) -> None:
        if self.times and not t > self.times[-1]:
            raise DataError(f"trajectory times must increase; got {t} after {self.times[-1]}")
        self.times.append(float(t))
        self.fields.append(f)
        self.rhs.append(ft)

    def __len__(self) -> int:
        return len(self.times)


def integrate(f0: InterfaceField, path: RhsPath, scheme: SchemeSpec, monitor=None) -> Trajectory:
    """Integrate to ``scheme.t_end`` keeping every ``scheme.stride``-th step.

    ``monitor(trajectory)`` is called after each stored sample; a truthy
    return value (a reason string) stops the run early.
    """
    stepper = Stepper(path, scheme, f0.grid)
    traj = Trajectory()
    f = f0
    for n in range(stepper.n_steps + 1):
        t = n * stepper.dt
        last = n == stepper.n_steps
        stored = n % scheme.stride == 0 or last
        try:
            path.check(f)
            rem = path.remainder(f)
        except SeriesRefusal as exc:
            traj.stopped_early, traj.stop_reason = True, str(exc)
            break
        if stored:
            ft = path.evaluate(f, rem)
            traj.append(t, f, ft)
            if monitor is not None:
                reason = monitor(traj)
                if reason:
                    traj.stopped_early, traj.stop_reason = True, reason
                    log.warning("run stopped at t=%.4g: %s", t, reason)
                    break
        if last:
            break
        try:
            f = stepper.step(f, rem)
        except (NonFiniteError, SeriesRefusal) as exc:
            traj.stopped_early, traj.stop_reason = True, f"t={t:.6g}: {exc}"
            break
    return traj


def run(config: dict) -> Trajectory:
    """Integrate a resolved run config with diagnostics at every stored sample.

    The returned trajectory carries ``records`` (one diagnostics sample per
    stored field), ``report`` (the monitor verdicts) and ``certificate`` (the
    resolved constants and settings of the run). With
    ``diagnostics.stop_on_failure`` the run stops at the first sample where a
    monitor that can be judged online fails.
    """
    from . import config as cfgmod
    from .diagnostics import CheckResult, DiagnosticsReport, measure, run_checks

    grid = cfgmod.build_grid(config)
    path = cfgmod.build_path(config)
    scheme = cfgmod.build_scheme(config)
    ctx = cfgmod.build_context(config)
    diag = config["diagnostics"]
    f0 = cfgmod.build_initial(config, grid)
    records = []

    def monitor(traj: Trajectory):
        records.append(measure(traj.times[-1], traj.fields[-1], traj.rhs[-1], ctx.delta,
                               diag["oversample"]))
        if not diag["stop_on_failure"]:
            return None
        failed = [c for c in run_checks(records, ctx, online=True) if c.status == "fail"]
        if failed:
            return "monitor failed: " + ", ".join(c.name for c in failed)
        return None

    traj = integrate(f0, path, scheme, monitor)
    traj.records = records
    report = DiagnosticsReport.build(records, ctx)
    if traj.stopped_early:
        report.checks.append(CheckResult("integration", "fail", None,
                                         traj.times[-1] if traj.times else None,
                                         traj.stop_reason or "stopped early"))
    traj.report = report
    traj.certificate = certificate(config, grid, path, scheme, records)
    return traj


def certificate(config: dict, grid: Grid, path: RhsPath, scheme: SchemeSpec, records) -> dict:
    """Resolved constants and numerical settings recorded with every run."""
    import numba

    from .constants import SeriesCondition, decay_margin
    from .diagnostics import critical_constant
    from .nonlinearity import FAR_Q_MAX, FAR_TERMS

    dt, n_steps = scheme.resolve(grid)
    dim = grid.dim
    delta = config["diagnostics"]["delta"]
    out = {
        "rhs": path.describe(),
        "dt": dt,
        "n_steps": n_steps,
        "scheme": scheme.kind,
        "h": grid.h,
        "critical_constant": critical_constant(dim),
        "critical_constant_delta": critical_constant(dim, delta),
        "far_field_terms_max": FAR_TERMS,
        "far_field_q_max": FAR_Q_MAX,
        "threads": numba.get_num_threads(),
    }
    if records:
        x0 = records[0].norm_1
        out["norm1_initial"] = x0
        for key, d in (("mu", delta), ("mu_delta0", 0.0)):
            try:
                out[key] = decay_margin(SeriesCondition(dim, d), x0)
            except (SeriesRefusal, DataError):
                out[key] = None
    return out


def c_const_scan(config: dict, candidates=(0.5, 1.0, 2.0, 4.0, 8.0, 16.0)) -> dict:
    """Smallest regularization constant among ``candidates`` that keeps the maximum principles.

    Runs the config on the regularized path once per candidate (ascending)
    and stops at the first whose extremum and slope monitors both pass.
    Returns ``{"c_const": best or None, "tried": {C: passed}}``.
    """
    from .config import resolve_config

    tried = {}
    for c in sorted(candidates):
        cfg = resolve_config({**config, "rhs": {**config["rhs"], "path": "regularized", "c_const": c},
                              "diagnostics": {**config["diagnostics"], "stop_on_failure": False},
                              "output": {"snapshots": False, "plots": False}})
        report = run(cfg).report
        ok = all(report.check(name).ok for name in ("extremum", "slope_principle"))
        tried[c] = ok
        if ok:
            return {"c_const": c, "tried": tried}
    return {"c_const": None, "tried": tried}

"""Run directories: writing a finished run and re-verifying a stored one.

Layout of a run directory::

    config.json         resolved configuration
    run.json            certificate, stop status, snapshot list
    diagnostics.csv     one row per stored sample
    summary.json        monitor verdicts
    snapshots/*.csv     stored fields (17 significant digits)
    norms.png, interface.png
"""

from __future__ import annotations

import logging
from pathlib import Path

from . import __version__
from .config import build_context, build_path, resolve_config
from .diagnostics import CheckResult, DiagnosticsReport, measure
from .errors import ConfigError, DataError
from .io import (
    numeric_mismatches,
    read_diagnostics,
    read_json,
    read_snapshot,
    snapshot_name,
    write_diagnostics,
    write_json,
    write_snapshot,
)

log = logging.getLogger(__name__)

__all__ = ["write_run", "verify_run", "summary_dict"]


def summary_dict(report: DiagnosticsReport, extra: dict | None = None) -> dict:
    out = report.summary()
    out["exit_status"] = 0 if report.passed else 1
    out.update(extra or {})
    return out


def write_run(traj, config: dict, out_dir) -> dict:
    """Write every artifact of a finished run; returns the summary written to summary.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    if config["output"]["snapshots"]:
        for i, (t, f) in enumerate(zip(traj.times, traj.fields)):
            name = snapshot_name(i)
            write_snapshot(out_dir / name, t, f)
            names.append(name)
    rows = traj.report.rows()
    write_diagnostics(out_dir / "diagnostics.csv", rows)
    write_json(out_dir / "config.json", config)
    write_json(out_dir / "run.json", {
        "version": __version__,
        "certificate": traj.certificate,
        "stopped_early": traj.stopped_early,
        "stop_reason": traj.stop_reason,
        "samples": len(traj),
        "snapshots": names,
    })
    summary = summary_dict(traj.report, {
        "stopped_early": traj.stopped_early,
        "stop_reason": traj.stop_reason,
    })
    write_json(out_dir / "summary.json", summary)
    if config["output"]["plots"] and len(traj):
        from .plotting import render_run

        render_run(out_dir, rows, traj.fields[0], traj.fields[-1], (traj.times[0], traj.times[-1]))
    return summary


def verify_run(run_dir, rtol: float = 1e-9) -> dict:
    """Recompute diagnostics from the stored snapshots and compare with the stored table.

    Any numeric cell that differs beyond ``rtol`` (after scale-aware absolute
    slack) or any flag that changes makes the ``integrity`` check fail.
    Writes ``verify_summary.json`` and ``verify_diagnostics.csv`` into ``run_dir``.
    """
    run_dir = Path(run_dir)
    if not run_dir.is_dir() or not any(run_dir.iterdir()):
        raise ConfigError(f"{run_dir}: not a run directory (missing or empty)")
    problems = []
    for name in ("config.json", "run.json", "diagnostics.csv"):
        if not (run_dir / name).is_file():
            problems.append(f"{name}: missing")
    if problems:
        raise DataError(f"{run_dir}: " + "; ".join(problems))
    config = resolve_config(read_json(run_dir / "config.json"))
    meta = read_json(run_dir / "run.json")
    stored = read_diagnostics(run_dir / "diagnostics.csv")
    snaps = meta.get("snapshots") or []
    if not snaps:
        raise DataError(f"{run_dir}: run was written without snapshots; nothing to recompute")
    missing = [s for s in snaps if not (run_dir / s).is_file()]
    if missing:
        raise DataError(f"{run_dir}: missing snapshot files: {', '.join(missing)}")

    path = build_path(config)
    ctx = build_context(config)
    diag = config["diagnostics"]
    samples = []
    for s in snaps:
        t, f = read_snapshot(run_dir / s)
        ft = path(f)
        samples.append(measure(t, f, ft, ctx.delta, diag["oversample"]))
    report = DiagnosticsReport.build(samples, ctx)
    if meta.get("stopped_early"):
        report.checks.append(CheckResult("integration", "fail", None, samples[-1].t,
                                         meta.get("stop_reason") or "stopped early"))
    fresh = report.rows()
    bad = numeric_mismatches(stored, fresh, rtol)
    bad += [f"row {i} flags: stored {a['flags']!r}, recomputed {b['flags']!r}"
            for i, (a, b) in enumerate(zip(stored, fresh)) if a["flags"] != b["flags"]]
    if bad:
        for line in bad[:20]:
            log.error("integrity: %s", line)
        integrity = CheckResult("integrity", "fail", None, None,
                                f"{len(bad)} stored entries disagree with recomputation; first: {bad[0]}")
    else:
        integrity = CheckResult("integrity", "pass", None, None,
                                f"{len(fresh)} rows reproduced within rtol {rtol}")
    report.checks.append(integrity)
    write_diagnostics(run_dir / "verify_diagnostics.csv", fresh)
    summary = summary_dict(report, {"mismatches": bad[:100]})
    write_json(run_dir / "verify_summary.json", summary)
    return summary

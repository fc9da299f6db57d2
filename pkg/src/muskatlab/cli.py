"""Command-line entry point: ``muskatlab {run,constants,verify,presets}``.

Exit status is 0 when every enabled monitor passes, 1 when one fails and 2
for usage, configuration or I/O errors. ``run`` and ``verify`` always print a
JSON summary on stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .errors import ConfigError, DataError, MuskatError

log = logging.getLogger("muskatlab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _set_threads(n: int | None) -> None:
    if n is None:
        return
    import numba

    if not 1 <= n <= numba.config.NUMBA_NUM_THREADS:
        raise ConfigError(f"--threads must lie in [1, {numba.config.NUMBA_NUM_THREADS}], got {n}")
    numba.set_num_threads(n)


def _emit(obj: dict) -> None:
    from .io import _clean

    print(json.dumps(_clean(obj), indent=2))


def cmd_run(args) -> int:
    from .artifacts import write_run
    from .config import load_config, preset_config, resolve_config
    from .evolution import run

    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = preset_config(args.preset, args.dim or 2)
    else:
        raise ConfigError("run needs --config PATH or --preset NAME")
    if args.dim and args.config and args.dim != cfg["dimension"]:
        raise ConfigError(f"--dim {args.dim} contradicts the config's dimension {cfg['dimension']}")
    if args.delta is not None:
        cfg["diagnostics"]["delta"] = args.delta
    if args.out:
        cfg["output_dir"] = str(args.out)
    if args.threads:
        cfg["threads"] = args.threads
    cfg = resolve_config(cfg)
    _set_threads(cfg["threads"])
    start = time.perf_counter()
    traj = run(cfg)
    summary = write_run(traj, cfg, cfg["output_dir"])
    summary["output_dir"] = str(Path(cfg["output_dir"]).resolve())
    summary["wall_seconds"] = time.perf_counter() - start
    _emit(summary)
    for c in traj.report.checks:
        if not c.ok:
            log.error("%s: %s (worst margin %s at t=%s) %s", c.name, c.status, c.worst_margin,
                      c.time_of_worst, c.detail)
    return summary["exit_status"]


def cmd_constants(args) -> int:
    from .constants import C0_RADICAL, K0_QUOTED, SeriesCondition, solve_constant

    dims = [args.dim] if args.dim else [2, 1]
    out = []
    for d in dims:
        start = time.perf_counter()
        cert = solve_constant(SeriesCondition(d, args.delta or 0.0)).to_dict()
        cert["seconds"] = time.perf_counter() - start
        cert["reference"] = float(K0_QUOTED) if d == 2 else C0_RADICAL
        cert["name"] = "k0" if d == 2 else "c0"
        out.append(cert)
    _emit({"constants": out})
    if args.out:
        from .io import write_json

        write_json(args.out, {"constants": out})
    return EXIT_OK


def cmd_verify(args) -> int:
    from .artifacts import verify_run

    target = args.run_dir or args.out
    if target is None:
        raise ConfigError("verify needs a run directory")
    _set_threads(args.threads)
    summary = verify_run(target)
    _emit(summary)
    return summary["exit_status"]


def cmd_presets(args) -> int:
    from .config import PRESETS, preset_config

    dims = [args.dim] if args.dim else [2, 1]
    listing = {name: {"description": desc} for name, desc in PRESETS.items()}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        from .io import write_json

        for name in PRESETS:
            for d in dims:
                cfg = preset_config(name, d)
                if args.delta is not None:
                    cfg["diagnostics"]["delta"] = args.delta
                cfg["output_dir"] = str(out / "runs" / cfg["name"])
                p = out / f"{cfg['name']}.json"
                write_json(p, cfg)
                listing[name].setdefault("files", []).append(str(p))
    _emit({"presets": listing})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="muskatlab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=False):
        if config:
            sp.add_argument("--config", type=Path, help="run configuration (JSON)")
        sp.add_argument("--out", type=Path, help="output location")
        sp.add_argument("--threads", type=int, help="worker threads for the lattice sums")
        sp.add_argument("--delta", type=float, help="exponent offset for the higher norms")
        sp.add_argument("--dim", type=int, choices=(1, 2), help="interface dimension")

    sp = sub.add_parser("run", help="integrate a configuration and write its artifacts")
    common(sp, config=True)
    sp.add_argument("--preset", help="run a named preset instead of --config")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("constants", help="certified smallness constants")
    common(sp)
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("verify", help="recompute and check the diagnostics of a stored run")
    common(sp)
    sp.add_argument("run_dir", nargs="?", type=Path, help="directory written by run")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("presets", help="list presets, or write their configs with --out")
    common(sp)
    sp.set_defaults(func=cmd_presets)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.delta is not None and not 0 <= args.delta < 1:
        parser.error(f"--delta must lie in [0, 1), got {args.delta}")
    try:
        return args.func(args)
    except (ConfigError, DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MuskatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

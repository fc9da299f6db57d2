"""Run configuration: JSON schema, defaults, named presets and initial data."""

from __future__ import annotations

import copy
import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .diagnostics import MONITORS
from .errors import ConfigError, DataError
from .grid import Grid, InterfaceField, norm_s, sup_norms

__all__ = [
    "SCHEMA",
    "DEFAULTS",
    "PRESETS",
    "PRESET_VERSION",
    "load_config",
    "validate_config",
    "resolve_config",
    "preset_config",
    "build_initial",
    "build_grid",
    "build_path",
    "build_scheme",
    "build_context",
]

PRESET_VERSION = 1

_number = {"type": "number"}
_positive = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "dimension": {"enum": [1, 2]},
        "N": {"type": "integer", "minimum": 8},
        "L": _positive,
        "rho_bar": _number,
        "threads": {"anyOf": [{"type": "integer", "minimum": 1}, {"type": "null"}]},
        "output_dir": {"type": "string"},
        "scheme": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["ifrk4", "rk4"]},
                "dt": {"anyOf": [_positive, {"type": "null"}]},
                "t_end": {"type": "number", "minimum": 0},
                "stride": {"type": "integer", "minimum": 1},
            },
        },
        "rhs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "path": {"enum": ["direct", "series", "regularized", "linear"]},
                "eps": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5},
                "c_const": _positive,
                "n_max": {"type": "integer", "minimum": 0},
                "theta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "radius": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
        },
        "initial": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "preset": {"enum": [None, "zero", "single_mode", "two_mode", "bump", "near_k0",
                                    "steep_slope", "unstable"]},
                "amplitude": {"anyOf": [{"type": "number", "minimum": 0}, {"type": "null"}]},
                "modes": {
                    "type": ["array", "null"],
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["k", "a"],
                        "properties": {
                            "k": {"type": "array", "items": {"type": "integer"}, "minItems": 1,
                                  "maxItems": 2},
                            "a": _number,
                            "phase": _number,
                        },
                    },
                },
                "file": {"type": ["string", "null"]},
                "mollify": {"anyOf": [{"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                                      {"type": "null"}]},
            },
        },
        "diagnostics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "delta": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "oversample": {"type": "integer", "minimum": 1, "maximum": 8},
                "monitors": {"type": ["array", "null"], "items": {"enum": list(MONITORS)}},
                "stop_on_failure": {"type": "boolean"},
                "tolerances": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {k: _positive for k in (
                        "monotone", "extremum", "slope", "slope_factor", "identity", "budget",
                        "ft_rel", "j_rel", "mean", "l2")},
                },
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "snapshots": {"type": "boolean"},
                "plots": {"type": "boolean"},
            },
        },
    },
}

DEFAULTS = {
    "name": "run",
    "dimension": 2,
    "N": 64,
    "L": 2 * math.pi,
    "rho_bar": 1.0,
    "threads": None,
    "output_dir": "muskat_run",
    "scheme": {"kind": "ifrk4", "dt": None, "t_end": 1.0, "stride": 1},
    "rhs": {"path": "direct", "eps": 0.1, "c_const": 8.0, "n_max": 4, "theta": 0.3, "radius": 1.0},
    "initial": {"preset": "single_mode", "amplitude": None, "modes": None, "file": None,
                "mollify": None},
    "diagnostics": {"delta": 0.01, "oversample": 1, "monitors": None, "stop_on_failure": True,
                    "tolerances": {}},
    "output": {"snapshots": True, "plots": True},
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _line_of(text: str | None, path) -> str:
    """Best-effort source line of the deepest key in an error path."""
    if not text:
        return ""
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return ""
    needle = f'"{keys[-1]}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return f"line {i}: "
    return ""


def validate_config(cfg: dict, text: str | None = None) -> None:
    """Schema check plus the cross-field rules the schema cannot express."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.path))
    if errors:
        msgs = []
        for e in errors:
            where = "/".join(str(p) for p in e.path) or "<root>"
            msgs.append(f"{_line_of(text, e.path)}{where}: {e.message}")
        raise ConfigError("invalid config:\n  " + "\n  ".join(msgs))
    n = cfg.get("N")
    if n is not None and n & (n - 1):
        raise ConfigError(f"{_line_of(text, ['N'])}N: must be a power of two, got {n}")
    init = cfg.get("initial", {})
    given = [k for k in ("preset", "modes", "file") if init.get(k) is not None]
    if len(given) > 1:
        raise ConfigError(f"initial: give exactly one of preset, modes, file (got {given})")
    dim = cfg.get("dimension", DEFAULTS["dimension"])
    for m in init.get("modes") or []:
        if len(m["k"]) != dim:
            raise ConfigError(f"initial/modes: wavevector {m['k']} does not match dimension {dim}")


def resolve_config(cfg: dict) -> dict:
    """Validate and fill defaults; a given ``initial`` source replaces the default preset."""
    validate_config(cfg)
    out = _merge(DEFAULTS, {k: v for k, v in cfg.items() if k != "initial"})
    init = dict(DEFAULTS["initial"])
    user = cfg.get("initial", {})
    if "modes" in user or "file" in user:
        init["preset"] = None
    init.update(user)
    out["initial"] = init
    return out


def load_config(path) -> dict:
    """Read, parse and validate a JSON config; errors carry the source line."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    try:
        validate_config(cfg, text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return resolve_config(cfg)


# ------------------------------------------------------------------- presets

# shape, the quantity the amplitude fixes, and its default value per dimension
_SHAPES = {
    "zero": ("linf", {1: 0.0, 2: 0.0}),
    "single_mode": ("norm_1", {1: 0.2, 2: 0.2}),
    "two_mode": ("norm_1", {1: 0.2, 2: 0.15}),
    "bump": ("linf", {1: 0.1, 2: 0.1}),
    "near_k0": ("critical", {1: 0.95, 2: 0.95}),
    "steep_slope": ("grad_linf", {1: 0.3, 2: 0.3}),
    "unstable": ("norm_1", {1: 0.1, 2: 0.1}),
}

PRESETS = {
    "zero": "f0 = 0",
    "single_mode": "cos(x1), scaled so ||f0||_1 = amplitude",
    "two_mode": "two Fourier modes with a phase shift, scaled so ||f0||_1 = amplitude",
    "bump": "periodic Gaussian-like bump of height amplitude",
    "near_k0": "cos(x1) with ||f0||_1 = amplitude times the critical constant",
    "steep_slope": "narrow bump scaled so grad_linf(f0) = amplitude",
    "unstable": "cos(x1) with ||f0||_1 = amplitude and rho_bar = -1",
}


def _shape(name: str, coords) -> np.ndarray:
    x = coords[0]
    if name == "zero":
        return np.zeros_like(x)
    if name in ("single_mode", "near_k0", "unstable"):
        return np.cos(x)
    if name == "two_mode":
        if len(coords) == 1:
            return np.cos(x) + 0.5 * np.sin(2 * x + 0.3)
        return np.cos(x) + 0.5 * np.sin(2 * coords[1] + x + 0.3)
    width = 0.6 if name == "bump" else 0.45
    arg = sum(np.cos(c) - 1 for c in coords)
    return np.exp(arg / width**2)


def _measure(kind: str, field: InterfaceField) -> float:
    if kind in ("norm_1", "critical"):
        return norm_s(field, 1.0)
    if kind == "grad_linf":
        return sup_norms(field).grad_linf
    return sup_norms(field).linf


def preset_config(name: str, dimension: int = 2, **overrides) -> dict:
    """A complete, validated config for a named preset."""
    if name not in _SHAPES:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(_SHAPES)}")
    base = {
        "name": f"{name}_d{dimension}_v{PRESET_VERSION}",
        "dimension": dimension,
        "N": 64 if dimension == 2 else 256,
        "scheme": {"t_end": 5.0},
        "initial": {"preset": name},
    }
    if name == "unstable":
        # roundoff in mode k grows like exp(|k| t); a coarse grid keeps it below the signal
        base["rho_bar"] = -1.0
        base["N"] = 32
        base["scheme"]["t_end"] = 1.0
    cfg = _merge(base, overrides)
    return resolve_config(cfg)


def build_initial(cfg: dict, grid: Grid) -> InterfaceField:
    """Initial field described by a resolved config."""
    from .evolution import mollify_initial
    from .io import read_snapshot

    init = cfg["initial"]
    if init.get("file"):
        t, field = read_snapshot(init["file"])
        if field.grid != grid:
            raise ConfigError(f"initial/file: snapshot grid {field.grid} differs from run grid {grid}")
    elif init.get("modes"):
        values = np.zeros(grid.shape)
        for m in init["modes"]:
            phase = sum(k * c for k, c in zip(m["k"], grid.coords))
            values = values + m["a"] * np.cos(phase + m.get("phase", 0.0))
        field = InterfaceField(grid, values)
    else:
        name = init["preset"]
        kind, defaults = _SHAPES[name]
        amp = init.get("amplitude")
        amp = defaults[grid.dim] if amp is None else amp
        raw = InterfaceField(grid, _shape(name, grid.coords))
        if kind == "critical":
            from .diagnostics import critical_constant

            amp = amp * critical_constant(grid.dim)
        size = _measure(kind, raw)
        try:
            field = raw * (amp / size) if size > 0 else raw
        except DataError as exc:
            raise ConfigError(f"initial: cannot scale preset {name}: {exc}") from exc
    if init.get("mollify"):
        field = mollify_initial(field, init["mollify"])
    return field


def build_grid(cfg: dict) -> Grid:
    return Grid(cfg["dimension"], cfg["N"], cfg["L"])


def build_path(cfg: dict):
    """Right-hand-side path named in a resolved config."""
    from .nonlinearity import DirectPath, LinearPath, RegularizedPath, SeriesBudget, SeriesPath

    rhs, rho = cfg["rhs"], cfg["rho_bar"]
    kind = rhs["path"]
    if kind == "linear":
        return LinearPath(rho)
    if kind == "direct":
        return DirectPath(rho, rhs["radius"])
    if kind == "series":
        return SeriesPath(rho, SeriesBudget(rhs["n_max"], rhs["theta"]), rhs["radius"])
    return RegularizedPath(rhs["eps"], rhs["c_const"], rho, rhs["radius"])


def build_scheme(cfg: dict):
    from .evolution import SchemeSpec

    s = cfg["scheme"]
    return SchemeSpec(s["kind"], s["dt"], s["t_end"], s["stride"])


def build_context(cfg: dict):
    from .diagnostics import MonitorContext, Tolerances

    d = cfg["diagnostics"]
    return MonitorContext(
        dimension=cfg["dimension"],
        rho_bar=cfg["rho_bar"],
        path=cfg["rhs"]["path"],
        delta=d["delta"],
        tol=Tolerances(**d["tolerances"]),
        enabled=tuple(d["monitors"]) if d["monitors"] is not None else MONITORS,
    )

"""Run configuration: TOML file + command-line overrides, strictly validated.

The configuration is a flat two-level structure (sections of scalar keys or
small lists).  Unknown sections or keys fail fast so a typo cannot silently
fall back to a default.  A JSON run manifest written by any subcommand
embeds the fully resolved configuration and can itself be passed back as
``--config manifest.json`` to reproduce the run.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigError
from .experiments import SWEEP_KINDS, GridSettings, SweepSpec
from .propagate import AbsorberProfile
from .units import NormalizedParams


def _is_float(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_bool(v):
    return isinstance(v, bool)


def _is_float_list(v):
    return isinstance(v, list) and len(v) > 0 and all(_is_float(x) for x in v)


def _is_int_list(v):
    return isinstance(v, list) and len(v) > 0 and all(_is_int(x) for x in v)


def _is_auto_or_float(v):
    return v == "auto" or _is_float(v)


def _is_ramp_or_float(v):
    return v == "ramp" or _is_float(v)


def _is_sweep_kind(v):
    return v in SWEEP_KINDS


def _is_str(v):
    return isinstance(v, str) and len(v) > 0


# section -> key -> (validator, default, description)
SCHEMA = {
    "params": {
        "V0": (_is_float, 4.0, "barrier coefficient E_J/E_C"),
        "T": (_is_float, 800.0, "ramp duration, normalized time"),
        "N": (_is_int, 400, "number of measurements during the ramp"),
        "dt": (_is_float, 0.01, "integration step, normalized time"),
    },
    "grid": {
        "interior_left": (_is_float, -(np.pi + 2.0), "left edge of the interior domain"),
        "interior_right": (_is_float, 12.0, "right edge of the interior domain"),
        "spacing": (_is_float, 0.01, "maximum grid spacing"),
    },
    "absorber": {
        "enabled": (_is_bool, True, "absorbing layer on the right edge"),
        "width": (_is_float, 20.0, "layer width, radians"),
        "strength": (_is_float, 8.0, "peak imaginary potential, E_C"),
        "order": (_is_int, 3, "polynomial order of the layer profile"),
        "left": (_is_bool, False, "mirror the layer on the left edge"),
    },
    "initial": {
        "points": (_is_int, 2048, "periodic grid points for the ground state"),
    },
    "wkb": {
        "points": (_is_int, 1001, "gamma grid points for adiabatic distributions"),
    },
    "evolve": {
        "t1": (_is_float, 100.0, "end time of a plain evolution"),
        "bias": (_is_ramp_or_float, "ramp", '"ramp" or a fixed bias value'),
        "trace_stride": (_is_int, 50, "steps between norm-trace samples"),
    },
    "ratefit": {
        "gammas": (_is_float_list, [0.45, 0.5, 0.55, 0.6], "bias points to fit"),
        "horizon": (_is_auto_or_float, "auto", "decay horizon or 'auto'"),
        "settle": (_is_auto_or_float, "auto", "resonance settle time or 'auto'"),
        "t_over_n": (_is_float, 100.0, "interval for the prefactor probe"),
        "trace_stride": (_is_int, 50, "steps between norm-trace samples"),
    },
    "sweep": {
        "kind": (_is_sweep_kind, "N-sweep", f"one of {SWEEP_KINDS}"),
        "id": (_is_str, "sweep", "output directory name for the sweep"),
        "n_values": (_is_int_list, [50, 100, 200, 400, 800, 1600, 3200], "N values"),
        "t_values": (_is_float_list, [200.0, 800.0, 3200.0], "T values"),
    },
}


def default_config() -> dict:
    return {
        sec: {
            k: (spec[1].copy() if isinstance(spec[1], list) else spec[1])
            for k, spec in keys.items()
        }
        for sec, keys in SCHEMA.items()
    }


def _validate(cfg: dict) -> dict:
    for sec, keys in cfg.items():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown config section [{sec}]")
        if not isinstance(keys, dict):
            raise ConfigError(f"section [{sec}] must be a table of keys")
        for key, value in keys.items():
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown config key '{sec}.{key}'")
            validator, _, description = SCHEMA[sec][key]
            if not validator(value):
                raise ConfigError(
                    f"invalid value for '{sec}.{key}' ({description}): {value!r}"
                )
    return cfg


def _merge(base: dict, update: dict) -> dict:
    out = {sec: dict(keys) for sec, keys in base.items()}
    for sec, keys in update.items():
        out.setdefault(sec, {}).update(keys)
    return out


def _parse_override(text: str) -> tuple[str, str, object]:
    if "=" not in text or "." not in text.split("=", 1)[0]:
        raise ConfigError(f"override must look like section.key=value, got {text!r}")
    target, raw = text.split("=", 1)
    sec, key = target.split(".", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare strings like auto / ramp / N-sweep
    # TOML has no int/float coercion surprises; mirror that for overrides
    if isinstance(value, float) and value.is_integer() and sec + "." + key in INT_KEYS:
        value = int(value)
    return sec.strip(), key.strip(), value


INT_KEYS = {
    f"{sec}.{key}"
    for sec, keys in SCHEMA.items()
    for key, spec in keys.items()
    if spec[0] in (_is_int, _is_int_list)
}


def load_config(path=None, overrides=()) -> dict:
    """Resolve defaults + optional file + overrides into a validated dict."""
    cfg = default_config()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        if path.suffix == ".json":
            with open(path) as f:
                data = json.load(f)
            data = data.get("config", data)  # accept a run manifest directly
        else:
            try:
                with open(path, "rb") as f:
                    data = tomllib.load(f)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must contain tables of keys")
        cfg = _merge(cfg, _validate(data))
    for text in overrides:
        sec, key, value = _parse_override(text)
        cfg = _merge(cfg, _validate({sec: {key: value}}))
    return _validate(cfg)


def describe(cfg: dict) -> str:
    """Flat section.key = value listing of a resolved configuration."""
    from .io import fmt17

    lines = []
    for sec in sorted(cfg):
        for key in sorted(cfg[sec]):
            v = cfg[sec][key]
            if _is_float(v) and not _is_int(v):
                v = fmt17(v)
            lines.append(f"{sec}.{key} = {v}")
    return "\n".join(lines)


# builders for the domain objects


def params_from(cfg: dict) -> NormalizedParams:
    p = cfg["params"]
    return NormalizedParams(V0=float(p["V0"]), T=float(p["T"]), N=int(p["N"]),
                            dt=float(p["dt"]))


def grid_settings_from(cfg: dict) -> GridSettings:
    g = cfg["grid"]
    return GridSettings(interior_left=float(g["interior_left"]),
                        interior_right=float(g["interior_right"]),
                        spacing=float(g["spacing"]))


def absorber_from(cfg: dict) -> AbsorberProfile | None:
    a = cfg["absorber"]
    if not a["enabled"]:
        return None
    return AbsorberProfile(width=float(a["width"]), strength=float(a["strength"]),
                           order=int(a["order"]), left=bool(a["left"]))


def sweep_spec_from(cfg: dict) -> SweepSpec:
    s = cfg["sweep"]
    p = cfg["params"]
    return SweepSpec(
        kind=s["kind"],
        V0=float(p["V0"]),
        T_values=tuple(float(t) for t in s["t_values"]),
        N_values=tuple(int(n) for n in s["n_values"]),
        gammas=tuple(float(g) for g in cfg["ratefit"]["gammas"]),
        dt=float(p["dt"]),
        grid=grid_settings_from(cfg),
        absorber=absorber_from(cfg),
        gs_points=int(cfg["initial"]["points"]),
        sweep_id=s["id"],
    )

"""Scenario configuration: defaults, YAML loading, overrides and validation.

A config is a nested mapping.  Every scenario has a default tree; a YAML
file is merged on top of it and command-line overrides on top of that.
:func:`resolve` returns the merged tree, which is embedded verbatim in
every output file.  See ``docs/config.md`` for the schema.
"""

from __future__ import annotations

import copy
import re
from pathlib import Path

import yaml

from .errors import ConfigError

SCENARIOS = ("verify-babinet", "energy", "edge-fit", "lateral-force", "feasibility", "convergence-sweep")

_GEOMETRY = {"kind": "strips", "period": 1.0, "fill": 0.5, "offset": 0.0}
_SOLVER = {"n_basis": None, "orders": None, "tol": 1e-10, "n_kernel": None, "truncation_tol": 1e-9}
_QUAD = {
    "n_radial": 8,
    "n_bloch": 6,
    "radial_levels": 3,
    "bloch_levels": 2,
    "x_grade": 1.0,
    "x_max": 50.0,
    "ratio": 0.15,
}

DEFAULTS = {
    "energy": {
        "geometry": dict(_GEOMETRY),
        "d": 1.0,
        "channel": "em",
        "order": "both",
        "solver": dict(_SOLVER),
        "quadrature": dict(_QUAD),
    },
    "verify-babinet": {
        "geometry": dict(_GEOMETRY),
        "kappa": 1.2,
        "kx": 0.37,
        "ky": 0.5,
        "orders": 4,
        "n_basis": [4, 8, 16, 32],
        "max_residual": 1e-6,
        "matrices": {"screen": None, "complement": None},
    },
    "edge-fit": {
        "geometry": dict(_GEOMETRY),
        "d_values": [0.1, 0.08, 0.06, 0.05, 0.04],
        "order": "first",
        "truncation_tol": 1e-6,
        "quadrature": dict(_QUAD, x_max=36.0, radial_levels=1),
    },
    "lateral-force": {
        "lattice": {"spacing": 1.0, "radius": 0.1, "d_over_spacing": 2.0, "rtol": 1e-7, "n_cut": None},
        "delta_sweep": "0:1:64",
    },
    "feasibility": {
        "conductor": {"sigma": 4.5e7, "d": 1e-6, "thickness": None},
        "margin": 5.0,
    },
    "convergence-sweep": {
        "base": "energy",
        "axis": "nodes",
        "values": [2, 4, 8],
        "geometry": {"kind": "plates", "period": 1.0, "fill": 0.5, "offset": 0.0},
        "d": 1.0,
        "channel": "em",
        "kappa": 1.2,
        "kx": 0.37,
        "ky": 0.5,
        "solver": dict(_SOLVER),
        "quadrature": dict(_QUAD),
    },
}


def deep_merge(base: dict, update: dict, path: str = "") -> dict:
    """Recursive merge; keys absent from ``base`` are rejected."""
    out = copy.deepcopy(base)
    for key, val in update.items():
        where = f"{path}.{key}" if path else key
        if key not in out:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(out[key], dict) and isinstance(val, dict):
            out[key] = deep_merge(out[key], val, where)
        elif isinstance(out[key], dict) and val is not None:
            raise ConfigError(f"config key {where!r} must be a mapping")
        else:
            out[key] = val
    return out


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``4.5e7`` (no dot) as a float."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"),
    list("-+0123456789"),
)


def load_file(path) -> dict:
    try:
        data = yaml.load(Path(path).read_text(), Loader=_Loader)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping at top level")
    return data


def set_path(tree: dict, dotted: str, value) -> None:
    node = tree
    keys = dotted.split(".")
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value


def resolve(scenario: str, file_data: dict | None = None, overrides: dict | None = None) -> dict:
    """Merge defaults, file contents and dotted-key overrides.

    The file may carry a ``scenario`` key; it must match ``scenario``.
    """
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    data = dict(file_data or {})
    named = data.pop("scenario", scenario)
    if named != scenario:
        raise ConfigError(f"config is for scenario {named!r}, not {scenario!r}")
    # output/worker settings live on the command line but may be given in the file
    data.pop("output", None)
    data.pop("workers", None)
    cfg = deep_merge(DEFAULTS[scenario], data)
    patch = {}
    for key, val in (overrides or {}).items():
        if val is not None:
            set_path(patch, key, val)
    cfg = deep_merge(cfg, patch)
    cfg["scenario"] = scenario
    return cfg


def file_extras(file_data: dict | None) -> dict:
    """``output`` / ``workers`` settings from a config file, if any."""
    data = file_data or {}
    out = {}
    if isinstance(data.get("output"), dict):
        out.update({k: v for k, v in data["output"].items() if k in ("path", "format")})
    if "workers" in data:
        out["workers"] = data["workers"]
    return out


def parse_float_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"expected a list of numbers, got {text!r}") from exc


def parse_sweep(text: str):
    """``"start:stop:n"`` -> ``n + 1`` evenly spaced points including both ends."""
    try:
        start, stop, n = str(text).split(":")
        start, stop, n = float(start), float(stop), int(n)
    except ValueError as exc:
        raise ConfigError(f"sweep must look like start:stop:n, got {text!r}") from exc
    if n < 1:
        raise ConfigError("sweep needs at least one interval")
    return start, stop, n

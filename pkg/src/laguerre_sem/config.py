"""Case defaults, YAML loading and validation."""
from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import yaml

__all__ = ["ConfigError", "CASE_DEFAULTS", "SMOKE_OVERRIDES", "default_config", "merge_config",
           "load_config", "validate_config", "config_hash", "list_cases"]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


_COMMON = {
    "integrator": {"scheme": "ssprk33", "dt": 1e-3, "t_end": 1.0},
    "filter": {"enabled": False, "strength": 0.05, "cutoff": 2.0 / 3.0},
    "output": {"dir": "output", "snapshot_every": 0, "formats": ["csv"]},
    "constants": {"g": 9.81, "cp": 1005.0, "R": 287.0, "p_ref": 1.0e5},
}

CASE_DEFAULTS: dict[str, dict] = {
    "wave1d": {
        "mesh": {"x_range": [-2.5, 2.5], "nx": 50, "order": 6, "extend_to": 0.0, "periodic": False},
        "layer": {"enabled": True, "sides": ["left", "right"], "order": 50, "lam": 0.05},
        "damping": {"enabled": True, "delta_gamma": 2.0, "alpha": 0.3, "zeta_divisor": 18.0},
        "physics": {"xc": 0.0, "sigma": 0.15},
        "integrator": {"dt": 1e-3, "t_end": 9.0},
    },
    "wavetrain": {
        "mesh": {"x_range": [0.0, 5000.0], "nx": 300, "order": 4, "extend_to": 0.0},
        "layer": {"enabled": True, "sides": ["right"], "order": 50, "lam": 100.0},
        "damping": {"enabled": True, "delta_gamma": 2.0, "alpha": 0.3, "zeta_divisor": 18.0},
        "physics": {"H": 10.0, "U": 0.0, "A": 0.025, "k": 30, "T": 5000.0},
        "integrator": {"dt": 0.1, "t_end": 5000.0},
    },
    "advdiff": {
        "mesh": {"x_range": [-5.0, 5.0], "z_range": [0.0, 10.0], "nx": 12, "nz": 125, "order": 4,
                 "extend_to": 0.0},
        "layer": {"enabled": True, "sides": ["top"], "order": 40, "lam": 0.07},
        "physics": {"u": 0.5, "v": 1.0, "nu": 0.1, "xc": 0.0, "zc": 8.0},
        "integrator": {"dt": 5e-4, "t_end": 4.0},
    },
    "helmholtz": {
        "mesh": {"x_len": 5.0, "nx": 4, "ny": 4, "order": 9},
        "layer": {"order": 48, "lam": 2.5},
        "physics": {"alpha": 10.0, "L": 2.0},
        "sweep": {"lgl_orders": [4, 5, 6, 7, 8, 9, 10], "lgr_orders": [16, 32, 48, 64]},
    },
    "bubble": {
        "mesh": {"x_range": [-5000.0, 5000.0], "z_range": [0.0, 5000.0], "nx": 20, "nz": 20, "order": 4},
        "layer": {"enabled": True, "sides": ["top"], "order": 24, "lam": 200.0},
        "damping": {"enabled": False, "delta_gamma": 0.1, "damp_density": True},
        "physics": {"theta0": 300.0, "p0": 1.0e5, "theta_c": 2.0, "r0": 2000.0, "xc": 0.0, "zc": 2500.0,
                    "nu": 30.0, "kappa": 60.0},
        "integrator": {"dt": 0.02, "t_end": 1000.0},
    },
    "lhm": {
        "mesh": {"x_range": [-120e3, 120e3], "z_range": [0.0, 15e3], "nx": 120, "nz": 21, "order": 4,
                 "extend_to": 0.0},
        "terrain": {"shape": "agnesi", "h": 1.0, "a": 10e3, "x_c": 0.0, "lam_c": 1.0},
        "layer": {"enabled": True, "sides": ["top"], "order": 14, "lam": 300.0},
        "damping": {"enabled": True, "delta_gamma": 0.1, "lateral_width": 20e3, "lateral_gamma": 0.05,
                    "damp_density": True},
        "filter": {"enabled": True, "strength": 0.05, "cutoff": 2.0 / 3.0},
        "physics": {"theta0": 250.0, "p0": 1.0e5, "N": 0.0, "U": 20.0, "nu": 0.0, "kappa": 0.0},
        "integrator": {"dt": 0.1, "t_end": 30000.0},
    },
    "schar": {
        "mesh": {"x_range": [-25e3, 25e3], "z_range": [0.0, 15e3], "nx": 20, "nz": 7, "order": 10,
                 "extend_to": 0.0},
        "terrain": {"shape": "schar", "h": 250.0, "a": 5000.0, "x_c": 0.0, "lam_c": 4000.0},
        "layer": {"enabled": True, "sides": ["top"], "order": 14, "lam": 300.0},
        "damping": {"enabled": True, "delta_gamma": 0.1, "lateral_width": 10e3, "lateral_gamma": 0.05,
                    "damp_density": True},
        "filter": {"enabled": True, "strength": 0.05, "cutoff": 2.0 / 3.0},
        "physics": {"theta0": 280.0, "p0": 1.0e5, "N": 0.01, "U": 10.0, "nu": 0.0, "kappa": 0.0},
        "integrator": {"dt": 0.05, "t_end": 36000.0},
    },
}

# coarsened meshes and short runs so that every case finishes in seconds
SMOKE_OVERRIDES: dict[str, dict] = {
    "wave1d": {"mesh": {"nx": 10}, "layer": {"order": 12}, "integrator": {"dt": 2e-3, "t_end": 0.2}},
    "wavetrain": {"mesh": {"nx": 25}, "layer": {"order": 12}, "integrator": {"dt": 0.5, "t_end": 50.0}},
    "advdiff": {"mesh": {"nx": 4, "nz": 8}, "layer": {"order": 10}, "integrator": {"dt": 2e-3, "t_end": 0.1}},
    "helmholtz": {"mesh": {"order": 5}, "layer": {"order": 16},
                  "sweep": {"lgl_orders": [4, 5], "lgr_orders": [8, 16]}},
    "bubble": {"mesh": {"nx": 5, "nz": 5}, "layer": {"order": 8}, "integrator": {"dt": 0.1, "t_end": 2.0}},
    "lhm": {"mesh": {"nx": 12, "nz": 4}, "layer": {"order": 6},
            "integrator": {"dt": 0.5, "t_end": 10.0}},
    "schar": {"mesh": {"nx": 4, "nz": 2, "order": 6}, "layer": {"order": 6},
              "integrator": {"dt": 0.1, "t_end": 2.0}},
}


def list_cases() -> list[str]:
    return list(CASE_DEFAULTS)


def _deep_update(base: dict, over: dict, path: str = "") -> dict:
    for k, v in over.items():
        key = f"{path}{k}"
        if k not in base:
            raise ConfigError(f"unknown key {key!r}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"key {key!r} must be a mapping")
            _deep_update(base[k], v, key + ".")
        else:
            base[k] = v
    return base


def default_config(case: str, smoke: bool = False) -> dict:
    if case not in CASE_DEFAULTS:
        raise ConfigError(f"unknown case {case!r} (key 'case')")
    cfg = {"case": case, "workers": 1}
    if case != "helmholtz":
        cfg.update(copy.deepcopy(_COMMON))
    else:
        cfg["output"] = copy.deepcopy(_COMMON["output"])
    spec = copy.deepcopy(CASE_DEFAULTS[case])
    for k, v in spec.items():
        if k in cfg and isinstance(cfg[k], dict):
            cfg[k].update(v)
        else:
            cfg[k] = v
    if smoke:
        _deep_update(cfg, copy.deepcopy(SMOKE_OVERRIDES[case]))
    return cfg


def merge_config(user: dict | None, case: str | None = None, smoke: bool = False) -> dict:
    user = dict(user or {})
    case = user.pop("case", case)
    if case is None:
        raise ConfigError("missing key 'case'")
    cfg = default_config(case, smoke)
    _deep_update(cfg, user)
    validate_config(cfg)
    return cfg


def _positive(cfg, path):
    node = cfg
    for p in path.split("."):
        if not isinstance(node, dict) or p not in node:
            return
        node = node[p]
    try:
        ok = float(node) > 0
    except (TypeError, ValueError):
        ok = False
    if not ok:
        raise ConfigError(f"key {path!r} must be positive (got {node!r})")


def validate_config(cfg: dict) -> dict:
    for path in ("integrator.dt", "mesh.nx", "mesh.nz", "mesh.ny", "mesh.order", "layer.order", "layer.lam",
                 "constants.g", "constants.cp", "constants.R", "constants.p_ref", "mesh.x_len"):
        _positive(cfg, path)
    integ = cfg.get("integrator")
    if integ is not None:
        if float(integ["t_end"]) < 0:
            raise ConfigError("key 'integrator.t_end' must be non-negative")
        if integ["scheme"] not in ("ssprk33", "ssprk54"):
            raise ConfigError(f"key 'integrator.scheme' must be ssprk33 or ssprk54 (got {integ['scheme']!r})")
    filt = cfg.get("filter")
    if filt is not None:
        if not 0.0 < float(filt["cutoff"]) < 1.0:
            raise ConfigError("key 'filter.cutoff' must lie in (0, 1)")
        if not 0.0 <= float(filt["strength"]) <= 1.0:
            raise ConfigError("key 'filter.strength' must lie in [0, 1]")
    layer = cfg.get("layer", {})
    for s in layer.get("sides", []):
        if s not in ("left", "right", "top"):
            raise ConfigError(f"key 'layer.sides' has unknown side {s!r}")
    if int(cfg.get("workers", 1)) < 1:
        raise ConfigError("key 'workers' must be >= 1")
    return cfg


def load_config(path, case: str | None = None, smoke: bool = False) -> dict:
    """Read a YAML file (an empty file is allowed when ``case`` is given)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"parse error in {path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    return merge_config(data, case, smoke)


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()

"""Run configuration: defaults, schema validation and model construction."""
from __future__ import annotations

import copy
import json
from functools import lru_cache
from importlib import resources

import jsonschema

from .errors import ConfigError, InvalidModel
from .gluing import admissible_radii
from .model import Tolerances, TorusModel

MODEL_DEFAULTS = {
    "n": 3,
    "mu": 0.25,
    "eps": 0.5,
    "a": 1.0,
    "N": 1.0,
    "r_sing": 1.0,
    "R": None,
    "R_star": None,
    "c": None,
    "tolerances": {},
}

SAMPLE_DEFAULTS = {
    "chart": 1000,
    "flow": 100,
    "exactness": 100,
    "pullback": 200,
    "grid_xy": 50,
    "grid_t": 20,
    "proxy_grid": 21,
}

RUN_DEFAULTS = {
    "format": "json",
    "out": None,
    "hmax": None,
    "smax": 3,
    "seed": 0,
    "enumeration_limit": 200000,
}


@lru_cache(maxsize=None)
def schema():
    text = resources.files("suturedtorus").joinpath("config.schema.json").read_text()
    return json.loads(text)


def validate(config: dict):
    try:
        jsonschema.validate(config, schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid configuration at {path}: {exc.message}") from None


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from None
    validate(config)
    return config


def merged(config: dict | None = None) -> dict:
    """Defaults overlaid with ``config`` (validated first)."""
    config = copy.deepcopy(config or {})
    validate(config)
    out = copy.deepcopy(RUN_DEFAULTS)
    out.update({k: v for k, v in config.items() if k not in ("model", "samples")})
    out["model"] = {**copy.deepcopy(MODEL_DEFAULTS), **config.get("model", {})}
    out["samples"] = {**SAMPLE_DEFAULTS, **config.get("samples", {})}
    return out


@lru_cache(maxsize=64)
def _cached_model(n, mu, eps, a, N, r_sing, R, R_star, c, tol_items):
    tol = Tolerances(**dict(tol_items))
    if R is None or R_star is None:
        auto_R, auto_R_star = admissible_radii(n, mu, r_sing=r_sing, a=a, eps=eps, N=N, c=c)
        R = auto_R if R is None else R
        R_star = auto_R_star if R_star is None else R_star
    return TorusModel(n=n, mu=mu, eps=eps, a=a, N=N, r_sing=r_sing, R=R, R_star=R_star, c=c, tol=tol)


def make_model(params: dict | None = None) -> TorusModel:
    """:class:`TorusModel` from model parameters; missing radii come from the doubling search."""
    p = {**MODEL_DEFAULTS, **(params or {})}
    unknown = set(p) - set(MODEL_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown model parameters: {sorted(unknown)}")
    try:
        return _cached_model(
            int(p["n"]), float(p["mu"]), float(p["eps"]), float(p["a"]), float(p["N"]),
            float(p["r_sing"]),
            None if p["R"] is None else float(p["R"]),
            None if p["R_star"] is None else float(p["R_star"]),
            None if p["c"] is None else float(p["c"]),
            tuple(sorted(p["tolerances"].items())),
        )
    except (InvalidModel, TypeError) as exc:
        raise ConfigError(str(exc)) from None

"""Experiment configuration: JSON schema 1, parsing and validation.

Every validation failure raises :class:`ConfigError` naming the offending
key (dotted for nested entries); malformed JSON reports line and column.
"""

import json
from dataclasses import dataclass, field as dc_field, replace
from typing import Optional

from ..core import check_alpha
from ..errors import ConfigError
from ..lift import FBM_MAX_POINTS, KINDS, SignalSpec
from ..calculus import FIELDS
from ..solver import SolveConfig

SCHEMA_VERSION = 1
Z_MODES = ("identity", "integral", "custom")
FORMATS = ("csv", "json")
STABILITY_MODES = ("driver", "initial")

SCHEMA_HELP = """\
config schema (JSON object, "schema": 1):
  schema        1 (required)
  alpha         Hölder exponent in (1/3, 1/2]            default 0.45
  T             horizon > 0                              default 1.0
  n             grid cells (power of two if levels set)  default 1024
  seed          master seed, unsigned 64-bit             default 0
  trials        independent trials                       default 1
  driver        {"kind": bm|fbm|sin|poly|custom-samples, "d": 1,
                 "params": {...}, "lift": geometric|ito}
                fbm: {"hurst": H in (1/3, 1]}; sin: {"omega", "amplitude", "phase"};
                poly: {"coefficients": [...]}; custom-samples: {"samples": [[...]]}
  field         {"name": constant|linear|tanh|sin|rotation, "params": {...}}
                RDE vector field for solve/contraction/stability, integrand
                map Y = F(X) for integrate/rates. Params: "lambda" or
                "matrix" (p x q x m), "bias", "scale" (tanh), "value"
                (constant), "omega" (rotation)        default linear, lambda 1
  z_mode        identity (Z = (X, id)) | integral (Z = int G(X) dX) | custom
  z_field       G for z_mode integral, same form as field  default sin
  z_custom      {"values": (n+1) x q, "derivative": (n+1) x q x d} for custom
  levels        subsampling / relift factors, each dividing n
  y0            initial condition (list)                 default all ones
  solver        {"tol": 1e-10, "max_iters": 50, "tau_shrink": 2,
                 "min_window_cells": 4, "initial_window": null, "init": center|constant}
  local         {"min_cells": 2, "max_cells": null}  dyadic windows for rates
  stability     {"mode": driver|initial, "epsilons": [...]}
  output        {"path": null (stdout), "format": csv|json}
"""

_TOP_KEYS = {"schema", "alpha", "T", "n", "seed", "trials", "driver", "field", "z_mode",
             "z_field", "z_custom", "levels", "y0", "solver", "local", "stability", "output"}


@dataclass(frozen=True)
class ExperimentConfig:
    alpha: float = 0.45
    T: float = 1.0
    n: int = 1024
    seed: int = 0
    trials: int = 1
    driver: SignalSpec = dc_field(default_factory=lambda: SignalSpec("bm"))
    lift: str = "geometric"
    field: dict = dc_field(default_factory=lambda: {"name": "linear", "params": {}})
    z_mode: str = "identity"
    z_field: dict = dc_field(default_factory=lambda: {"name": "sin", "params": {}})
    z_custom: Optional[dict] = None
    levels: tuple = ()
    y0: Optional[tuple] = None
    solver: SolveConfig = dc_field(default_factory=SolveConfig)
    local: dict = dc_field(default_factory=lambda: {"min_cells": 2, "max_cells": None})
    stability: dict = dc_field(default_factory=lambda: {"mode": "driver", "epsilons": []})
    output_path: Optional[str] = None
    output_format: str = "csv"

    def with_overrides(self, seed=None, out=None, fmt=None):
        kw = {}
        if seed is not None:
            kw["seed"] = _u64(seed, "seed")
            kw["driver"] = replace(self.driver, seed=kw["seed"])
        if out is not None:
            kw["output_path"] = out
        if fmt is not None:
            kw["output_format"] = _choice(fmt, FORMATS, "output.format")
        return replace(self, **kw)


def _u64(value, key):
    if isinstance(value, bool) or not isinstance(value, int):
        try:
            value = int(str(value), 0)
        except ValueError:
            raise ConfigError(f"must be an unsigned 64-bit integer, got {value!r}", key) from None
    if not 0 <= value < 2 ** 64:
        raise ConfigError(f"must be an unsigned 64-bit integer, got {value}", key)
    return value


def _choice(value, options, key):
    if value not in options:
        raise ConfigError(f"must be one of {list(options)}, got {value!r}", key)
    return value


def _number(raw, key, default, positive=False):
    value = raw.get(key.rsplit(".", 1)[-1], default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"must be a number, got {value!r}", key)
    if positive and not value > 0:
        raise ConfigError(f"must be positive, got {value}", key)
    return value


def _int(raw, key, default, minimum=1):
    value = raw.get(key.rsplit(".", 1)[-1], default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"must be an integer, got {value!r}", key)
    if value < minimum:
        raise ConfigError(f"must be at least {minimum}, got {value}", key)
    return value


def _obj(raw, key, allowed=None):
    value = raw.get(key.rsplit(".", 1)[-1], {})
    if value is None:
        value = {}
    if not isinstance(value, dict):
        raise ConfigError(f"must be an object, got {type(value).__name__}", key)
    if allowed is not None:
        for k in value:
            if k not in allowed:
                raise ConfigError(f"unknown key (allowed: {sorted(allowed)})", f"{key}.{k}")
    return value


def _field_entry(raw, key, default):
    value = raw.get(key, default)
    if not isinstance(value, dict):
        raise ConfigError("must be an object with 'name' and 'params'", key)
    for k in value:
        if k not in ("name", "params"):
            raise ConfigError("unknown key (allowed: ['name', 'params'])", f"{key}.{k}")
    name = value.get("name")
    if name not in FIELDS:
        raise ConfigError(f"unknown field {name!r}; expected one of {sorted(FIELDS)}", f"{key}.name")
    params = value.get("params", {}) or {}
    if not isinstance(params, dict):
        raise ConfigError("must be an object", f"{key}.params")
    return {"name": name, "params": params}


def _driver(raw, n, seed):
    d = _obj(raw, "driver", {"kind", "d", "params", "lift"})
    kind = _choice(d.get("kind", "bm"), KINDS, "driver.kind")
    dim = _int(d, "driver.d", 1)
    params = _obj(d, "driver.params")
    lift = _choice(d.get("lift", "geometric"), ("geometric", "ito"), "driver.lift")
    if kind == "fbm":
        H = params.get("hurst", 0.5)
        if isinstance(H, bool) or not isinstance(H, (int, float)) or not 1 / 3 < H <= 1:
            raise ConfigError(f"must lie in (1/3, 1], got {H!r}", "driver.params.hurst")
        if n + 1 > FBM_MAX_POINTS:
            raise ConfigError(f"fbm sampling is capped at {FBM_MAX_POINTS} points", "n")
    if kind == "custom-samples" and "samples" not in params:
        raise ConfigError("custom-samples needs a samples array", "driver.params.samples")
    try:
        spec = SignalSpec(kind, dim, params, seed)
    except ValueError as exc:
        raise ConfigError(str(exc), "driver") from None
    return spec, lift


def _solver(raw):
    s = _obj(raw, "solver", {"tol", "max_iters", "tau_shrink", "min_window_cells",
                             "initial_window", "init"})
    iw = s.get("initial_window")
    if iw is not None:
        iw = _int(s, "solver.initial_window", None)
    try:
        return SolveConfig(
            tol=_number(s, "solver.tol", 1e-10, positive=True),
            max_iters=_int(s, "solver.max_iters", 50),
            tau_shrink=_int(s, "solver.tau_shrink", 2, minimum=2),
            min_window_cells=_int(s, "solver.min_window_cells", 4),
            initial_window=iw,
            init=_choice(s.get("init", "center"), ("center", "constant"), "solver.init"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), "solver") from None


def _float_list(value, key, positive=False):
    if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise ConfigError("must be a list of numbers", key)
    if positive and any(v <= 0 for v in value):
        raise ConfigError("entries must be positive", key)
    return tuple(float(v) for v in value)


def from_dict(raw):
    """Validated :class:`ExperimentConfig` from a decoded JSON object."""
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object", "config")
    for k in raw:
        if k not in _TOP_KEYS:
            raise ConfigError(f"unknown key (allowed: {sorted(_TOP_KEYS)})", k)
    if raw.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"must be {SCHEMA_VERSION}, got {raw.get('schema')!r}", "schema")
    alpha = _number(raw, "alpha", 0.45)
    try:
        alpha = check_alpha(alpha)
    except ValueError as exc:
        raise ConfigError(str(exc), "alpha") from None
    T = float(_number(raw, "T", 1.0, positive=True))
    n = _int(raw, "n", 1024)
    seed = _u64(raw.get("seed", 0), "seed")
    trials = _int(raw, "trials", 1)
    levels = raw.get("levels", [])
    if not isinstance(levels, list) or not all(
            isinstance(f, int) and not isinstance(f, bool) and f >= 1 for f in levels):
        raise ConfigError("must be a list of positive integers", "levels")
    if levels:
        if n & (n - 1):
            raise ConfigError(f"must be a power of two when levels are given, got {n}", "n")
        for f in levels:
            if n % f:
                raise ConfigError(f"factor {f} does not divide n = {n}", "levels")
    driver, lift = _driver(raw, n, seed)
    fld = _field_entry(raw, "field", {"name": "linear", "params": {}})
    z_mode = _choice(raw.get("z_mode", "identity"), Z_MODES, "z_mode")
    z_field = _field_entry(raw, "z_field", {"name": "sin", "params": {}})
    z_custom = None
    if z_mode == "custom":
        z_custom = _obj(raw, "z_custom", {"values", "derivative"})
        for k in ("values", "derivative"):
            if k not in z_custom:
                raise ConfigError("required for z_mode custom", f"z_custom.{k}")
    y0 = raw.get("y0")
    if y0 is not None:
        y0 = _float_list(y0, "y0")
        if not y0:
            raise ConfigError("must not be empty", "y0")
    local = _obj(raw, "local", {"min_cells", "max_cells"})
    loc = {"min_cells": _int(local, "local.min_cells", 2),
           "max_cells": None if local.get("max_cells") is None else _int(local, "local.max_cells", 1)}
    st = _obj(raw, "stability", {"mode", "epsilons"})
    stab = {"mode": _choice(st.get("mode", "driver"), STABILITY_MODES, "stability.mode"),
            "epsilons": _float_list(st.get("epsilons", []), "stability.epsilons", positive=True)}
    out = _obj(raw, "output", {"path", "format"})
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("must be a string or null", "output.path")
    fmt = _choice(out.get("format", "csv"), FORMATS, "output.format")
    return ExperimentConfig(alpha, T, n, seed, trials, driver, lift, fld, z_mode, z_field,
                            z_custom, tuple(levels), y0, _solver(raw), loc, stab, path, fmt)


def loads(text, source="<config>"):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                          source) from None
    return from_dict(raw)


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    return loads(text, str(path))

"""Experiment configuration: TOML schema and validation.

A config file has up to four tables::

    [experiment]
    kind = "step-response"   # step-response | frequency-sweep | spectrum
                             # | classify | ledger | planar-turn
    out = "runs/demo"        # output directory

    [model]                  # standard chain ...
    n = 100
    rho = 0.45
    r = 0.45                 # optional, defaults to rho
    f = -1.0                 # optional
    g = -2.0                 # optional

    [model.custom]           # ... or an explicit weight table instead
    n = 4
    leaders = [0]
    h = [0.0, -1.0, -2.0, -3.0]          # optional
    weights_rho = [[1, 0, 1.0], [2, 1, 0.5]]   # rows: agent, neighbor, weight
    weights_r   = [[1, 0, 1.0]]

    [numeric]                # only keys relevant to the kind are read
    dt = 0.01
    horizon = 1000.0
    v_leader = 0.1
    omega = { min = 1e-4, max = 1e2, points = 2000 }
    N_list = [25, 50, 100]
    slope_threshold = 0.01
    near_zero_threshold = 1e-3
    seed = 0

Unknown keys are rejected so typos cannot silently change a run.
"""

import math
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError

KINDS = (
    "step-response",
    "frequency-sweep",
    "spectrum",
    "classify",
    "ledger",
    "planar-turn",
)

_NUMERIC_KEYS = {
    "dt",
    "horizon",
    "v_leader",
    "omega",
    "N_list",
    "slope_threshold",
    "near_zero_threshold",
    "seed",
    "refine_iters",
    "record_every",
}


@dataclass
class ExperimentConfig:
    kind: str
    out: str
    model: dict = field(default_factory=dict)   # standard params or custom weights
    numeric: dict = field(default_factory=dict)

    def numeric_get(self, key, default):
        return self.numeric.get(key, default)


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _check_positive(numeric, key):
    if key in numeric:
        v = numeric[key]
        _require(
            isinstance(v, (int, float)) and math.isfinite(v) and v > 0,
            f"[numeric].{key} must be a positive number, got {v!r}",
        )


def parse_config(path) -> ExperimentConfig:
    """Load and validate a TOML experiment file."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        # tomllib already anchors syntax errors to line and column
        raise ConfigError(f"{path}: {exc}") from None
    return validate_config(doc, source=str(path))


def validate_config(doc, source="<config>") -> ExperimentConfig:
    _require(isinstance(doc, dict), f"{source}: top level must be a table")
    unknown = set(doc) - {"experiment", "model", "numeric"}
    _require(not unknown, f"{source}: unknown table(s) {sorted(unknown)}")

    exp = doc.get("experiment")
    _require(isinstance(exp, dict), f"{source}: missing [experiment] table")
    unknown = set(exp) - {"kind", "out"}
    _require(not unknown, f"{source}: unknown [experiment] key(s) {sorted(unknown)}")
    kind = exp.get("kind")
    _require(kind in KINDS, f"{source}: [experiment].kind must be one of {KINDS}, got {kind!r}")
    out = exp.get("out", "runs/out")
    _require(isinstance(out, str) and out, f"{source}: [experiment].out must be a nonempty string")

    model = doc.get("model", {})
    _require(isinstance(model, dict), f"{source}: [model] must be a table")
    custom = model.get("custom")
    if custom is not None:
        unknown = set(model) - {"custom"}
        _require(not unknown, f"{source}: [model] with custom table cannot also set {sorted(unknown)}")
        _require(isinstance(custom, dict), f"{source}: [model.custom] must be a table")
        unknown = set(custom) - {"n", "leaders", "h", "weights_rho", "weights_r", "f", "g"}
        _require(not unknown, f"{source}: unknown [model.custom] key(s) {sorted(unknown)}")
        for req in ("n", "leaders", "weights_rho"):
            _require(req in custom, f"{source}: [model.custom].{req} is required")
    elif kind != "planar-turn":
        unknown = set(model) - {"n", "rho", "r", "f", "g"}
        _require(not unknown, f"{source}: unknown [model] key(s) {sorted(unknown)}")
        if kind != "classify":
            _require("n" in model, f"{source}: [model].n is required")
        _require("rho" in model, f"{source}: [model].rho is required")

    numeric = doc.get("numeric", {})
    _require(isinstance(numeric, dict), f"{source}: [numeric] must be a table")
    unknown = set(numeric) - _NUMERIC_KEYS
    _require(not unknown, f"{source}: unknown [numeric] key(s) {sorted(unknown)}")
    for key in ("dt", "horizon", "slope_threshold", "near_zero_threshold"):
        _check_positive(numeric, key)
    if "omega" in numeric:
        om = numeric["omega"]
        _require(
            isinstance(om, dict) and {"min", "max", "points"} >= set(om),
            f"{source}: [numeric].omega must be a table with min/max/points",
        )
        lo, hi = om.get("min", 1e-4), om.get("max", 1e2)
        _require(0 < lo < hi, f"{source}: [numeric].omega needs 0 < min < max")
        _require(int(om.get("points", 2000)) >= 2, f"{source}: [numeric].omega.points must be >= 2")
    if "N_list" in numeric:
        nl = numeric["N_list"]
        _require(
            isinstance(nl, list) and len(nl) >= 3 and all(isinstance(x, int) for x in nl),
            f"{source}: [numeric].N_list must be a list of >= 3 integers",
        )
        _require(all(b > a for a, b in zip(nl, nl[1:])), f"{source}: [numeric].N_list must increase")
    if "seed" in numeric:
        _require(isinstance(numeric["seed"], int), f"{source}: [numeric].seed must be an integer")

    return ExperimentConfig(kind=kind, out=out, model=model, numeric=numeric)

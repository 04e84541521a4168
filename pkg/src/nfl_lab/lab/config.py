"""Experiment configs: schema, defaults and validation.

A config is one YAML (or JSON) mapping.  ``experiment`` selects the kind;
each kind has its own JSON schema with ``additionalProperties: false`` so
typos are rejected, and its own defaults, which are merged in so that the
resolved config written into every report has no hidden values.
"""

from __future__ import annotations

import copy
from pathlib import Path

import jsonschema
import yaml

from ..algorithms import make_algorithm
from ..core import DEFAULT_ENUMERATION_CAP, FiniteSpace, PerformanceMeasure
from ..specs import SpecError
from ..supervised import make_learner

SCHEMA_VERSION = 1

KINDS = (
    "nfl_sum_sweep",
    "inner_product",
    "prior_mc",
    "supervised_nfl",
    "cv_vs_anticv",
    "conditioning_contrast",
    "meta_induction",
    "mco_benchmark",
)

STOCHASTIC_KINDS = {"inner_product", "prior_mc", "mco_benchmark"}


class ConfigError(ValueError):
    """Config failed schema or semantic validation."""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}" if field else reason)


_space = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "x_size": {"type": "integer", "minimum": 1},
        "y_size": {"type": "integer", "minimum": 1},
        "y_values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
    },
    "required": ["x_size"],
}
_int_list = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1}
_str_list = {"type": "array", "items": {"type": "string"}, "minItems": 1}
_m = {"oneOf": [{"type": "integer", "minimum": 0}, _int_list]}
_loss = {"enum": ["zero_one", "absolute", "squared"]}
_measure = {"type": "string"}
_output = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"dir": {"type": "string"}, "name": {"type": "string"}},
}

_common = {
    "schema_version": {"const": SCHEMA_VERSION},
    "experiment": {"enum": list(KINDS)},
    "name": {"type": "string"},
    "description": {"type": "string"},
    "output": _output,
    "arithmetic": {"enum": ["rational", "float"]},
    "seed": {"type": "integer", "minimum": 0},
}

_kind_props = {
    "nfl_sum_sweep": {"space": _space, "algorithms": _str_list, "m": _m, "measures": _str_list},
    "inner_product": {
        "space": _space,
        "algorithms": _str_list,
        "m": {"type": "integer", "minimum": 1},
        "measure": _measure,
        "dirichlet_priors": {"type": "integer", "minimum": 0},
        "include_uniform": {"type": "boolean"},
    },
    "prior_mc": {
        "space": _space,
        "algorithms": _str_list,
        "m": {"type": "integer", "minimum": 1},
        "measure": _measure,
        "n_samples": {"type": "integer", "minimum": 100},
        "z": {"type": "number", "exclusiveMinimum": 0},
    },
    "supervised_nfl": {"space": _space, "m": {"type": "integer", "minimum": 0}, "learners": _str_list, "loss": _loss},
    "cv_vs_anticv": {
        "space": _space,
        "m": {"type": "integer", "minimum": 0},
        "candidates": _str_list,
        "folds": {"oneOf": [{"type": "integer", "minimum": 2}, {"const": "loo"}]},
        "loss": _loss,
    },
    "conditioning_contrast": {
        "space": _space,
        "m": {"type": "integer", "minimum": 0},
        "learner_a": {"type": "string"},
        "learner_b": {"type": "string"},
        "loss": _loss,
    },
    "meta_induction": {
        "inner_space": _space,
        "challenger": {"type": "string"},
        "baseline": {"type": "string"},
        "inner_m": {"type": "integer", "minimum": 1},
        "measure": _measure,
        "training_inputs": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "universe": {"oneOf": [{"const": "actual"}, {"type": "array", "items": {"enum": [0, 1]}}]},
    },
    "mco_benchmark": {
        "space": _space,
        "n_seeds": {"type": "integer", "minimum": 2},
        "m": {"type": "integer", "minimum": 1},
        "candidates": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "folds": {"type": "integer", "minimum": 2},
        "refit_every": {"type": "integer", "minimum": 0},
        "harmonics": {"type": "integer", "minimum": 1},
        "confidence_z": {"type": "number", "exclusiveMinimum": 0},
    },
}

_required = {
    "nfl_sum_sweep": ["space", "algorithms"],
    "inner_product": ["space", "algorithms", "seed"],
    "prior_mc": ["space", "algorithms", "seed"],
    "supervised_nfl": ["space", "learners"],
    "cv_vs_anticv": ["space", "candidates"],
    "conditioning_contrast": ["space"],
    "meta_induction": [],
    "mco_benchmark": ["seed"],
}

DEFAULTS = {
    "nfl_sum_sweep": {"m": [1, 2], "measures": ["min", "mean"], "arithmetic": "rational"},
    "inner_product": {"m": 2, "measure": "min", "dirichlet_priors": 20, "include_uniform": True, "arithmetic": "rational"},
    "prior_mc": {"m": 2, "measure": "min", "n_samples": 10000, "z": 3.0, "arithmetic": "float"},
    "supervised_nfl": {"m": 3, "loss": "zero_one", "arithmetic": "rational"},
    "cv_vs_anticv": {"m": 3, "folds": "loo", "loss": "zero_one", "arithmetic": "rational"},
    "conditioning_contrast": {
        "m": 3,
        "learner_a": "memorize_plus_default(0)",
        "learner_b": "uniform",
        "loss": "zero_one",
        "arithmetic": "rational",
    },
    "meta_induction": {
        "inner_space": {"x_size": 2, "y_values": [0, 1]},
        "challenger": "hill_descend(start=0)",
        "baseline": "random(seed=3)",
        "inner_m": 1,
        "measure": "min",
        "training_inputs": [0, 1],
        "universe": "actual",
        "arithmetic": "rational",
    },
    "mco_benchmark": {
        "space": {"x_size": 64, "y_size": 8},
        "n_seeds": 200,
        "m": 16,
        "candidates": [0.05, 0.5, 5.0, 50.0],
        "folds": 2,
        "refit_every": 1,
        "harmonics": 2,
        "confidence_z": 1.6448536269514722,
        "arithmetic": "float",
    },
}


def kind_schema(kind: str) -> dict:
    props = dict(_common)
    props.update(_kind_props[kind])
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": f"nfl-lab {kind} config (schema v{SCHEMA_VERSION})",
        "type": "object",
        "additionalProperties": False,
        "properties": props,
        "required": ["schema_version", "experiment", *_required[kind]],
    }


def schema_document() -> dict:
    return {"schema_version": SCHEMA_VERSION, "kinds": {k: kind_schema(k) for k in KINDS}, "defaults": DEFAULTS}


def load_config(path) -> dict:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"cannot parse {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("", f"{path} does not contain a mapping")
    return data


def _path(error: jsonschema.ValidationError) -> str:
    parts = []
    for p in error.absolute_path:
        parts.append(f"[{p}]" if isinstance(p, int) else (f".{p}" if parts else str(p)))
    return "".join(parts)


def resolve_config(raw: dict) -> dict:
    """Validate ``raw`` and return it with every default filled in."""
    if not isinstance(raw, dict):
        raise ConfigError("", "config must be a mapping")
    kind = raw.get("experiment")
    if kind not in KINDS:
        raise ConfigError("experiment", f"must be one of {', '.join(KINDS)}; got {kind!r}")
    validator = jsonschema.Draft202012Validator(kind_schema(kind))
    errors = sorted(validator.iter_errors(raw), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        err = errors[0]
        field = _path(err)
        if err.validator == "additionalProperties":
            extra = sorted(set(err.instance) - set(err.schema["properties"]))
            raise ConfigError(".".join(filter(None, [field, extra[0]])) if extra else field, "unknown key")
        if err.validator == "required":
            missing = err.message.split("'")[1]
            raise ConfigError(".".join(filter(None, [field, missing])), "required key is missing")
        raise ConfigError(field or "<root>", err.message)

    cfg = copy.deepcopy(DEFAULTS[kind])
    cfg.update(copy.deepcopy(raw))
    cfg.setdefault("name", kind)
    out = cfg.setdefault("output", {})
    out.setdefault("dir", "nfl-lab-out")
    out.setdefault("name", cfg["name"])
    if kind in STOCHASTIC_KINDS and "seed" not in cfg:
        raise ConfigError("seed", "stochastic experiments need an explicit seed")
    _check_semantics(kind, cfg)
    return cfg


def build_space(spec: dict, field: str, enumerable: bool = True) -> FiniteSpace:
    if "y_values" in spec and "y_size" in spec:
        raise ConfigError(field, "give either y_values or y_size, not both")
    if "y_values" in spec:
        ys = spec["y_values"]
    elif "y_size" in spec:
        ys = list(range(spec["y_size"]))
    else:
        ys = [0, 1]
    try:
        return FiniteSpace(spec["x_size"], tuple(ys), DEFAULT_ENUMERATION_CAP if enumerable else None)
    except ValueError as exc:
        raise ConfigError(field, str(exc)) from None


def _check_semantics(kind: str, cfg: dict) -> None:
    if "space" in cfg:
        space = build_space(cfg["space"], "space", enumerable=(kind != "mco_benchmark"))
    if kind == "meta_induction":
        inner = build_space(cfg["inner_space"], "inner_space")
        n_outer = inner.n_functions
        if 2**n_outer > DEFAULT_ENUMERATION_CAP:
            raise ConfigError("inner_space", f"outer universe count 2^{n_outer} exceeds the enumeration cap")
        for i, x in enumerate(cfg["training_inputs"]):
            if x >= n_outer:
                raise ConfigError(f"training_inputs[{i}]", f"{x} is not an inner function rank (< {n_outer})")
        if len(set(cfg["training_inputs"])) == n_outer:
            raise ConfigError("training_inputs", "covers every outer input; nothing is left to predict")
        if cfg["universe"] != "actual" and len(cfg["universe"]) != n_outer:
            raise ConfigError("universe", f"needs {n_outer} bits, one per inner function")
        for key in ("challenger", "baseline"):
            _spec(make_algorithm, cfg[key], key, inner)
        _measure_ok(cfg["measure"], "measure")
        if cfg["inner_m"] > inner.x_size:
            raise ConfigError("inner_m", f"exceeds inner |X| = {inner.x_size}")
        return
    for i, a in enumerate(cfg.get("algorithms", [])):
        _spec(make_algorithm, a, f"algorithms[{i}]", space)
    for i, learner in enumerate(cfg.get("learners", [])):
        _spec(make_learner, learner, f"learners[{i}]")
    for i, c in enumerate(cfg.get("candidates", []) if kind == "cv_vs_anticv" else []):
        _spec(make_learner, c, f"candidates[{i}]")
    for key in ("learner_a", "learner_b"):
        if key in cfg:
            _spec(make_learner, cfg[key], key)
    for i, ms in enumerate(cfg.get("measures", [])):
        _measure_ok(ms, f"measures[{i}]")
    if "measure" in cfg:
        _measure_ok(cfg["measure"], "measure")
    ms = cfg.get("m")
    if kind in ("nfl_sum_sweep", "inner_product", "prior_mc", "mco_benchmark"):
        for i, v in enumerate(ms if isinstance(ms, list) else [ms]):
            if not 1 <= v <= space.x_size:
                raise ConfigError("m" if not isinstance(ms, list) else f"m[{i}]", f"must lie in [1, |X|={space.x_size}]")
    if kind == "mco_benchmark" and len(set(cfg["candidates"])) != len(cfg["candidates"]):
        raise ConfigError("candidates", "temperatures must be distinct")


def _spec(builder, text, field, *args):
    try:
        return builder(text, *args)
    except (SpecError, ValueError) as exc:
        raise ConfigError(field, str(exc)) from None


def _measure_ok(text, field):
    try:
        PerformanceMeasure.parse(text)
    except ValueError as exc:
        raise ConfigError(field, str(exc)) from None

"""Run configuration: JSON schema, parsing and serialization."""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .bath import BathSpec, bath_from_dict
from .perturbation import MAX_ORDER, SpinModel
from .superop import NAMED_OPERATORS, operator_from_json, operator_to_json

COMMANDS = ("split", "expand", "oracle", "sweep")
SWEEP_PARAMETERS = ("lambda", "beta", "omega_c")

_NUMBER = {"type": "number"}
_OPERATOR = {
    "oneOf": [
        {"type": "string", "enum": sorted(NAMED_OPERATORS)},
        {
            "type": "object",
            "required": ["dim", "re", "im"],
            "properties": {
                "dim": {"type": "integer", "minimum": 1},
                "re": {"type": "array", "items": _NUMBER},
                "im": {"type": "array", "items": _NUMBER},
                "vec": {"type": "string"},
            },
        },
    ]
}
_PAIR = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}

SCHEMA = {
    "type": "object",
    "required": ["command"],
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "output": {"type": "string"},
        "model": {
            "type": "object",
            "required": ["omega"],
            "additionalProperties": False,
            "properties": {"omega": _NUMBER, "coupling": _OPERATOR, "lambda": _NUMBER},
        },
        "bath": {
            "type": "object",
            "required": ["spectral_density"],
            "additionalProperties": False,
            "properties": {
                "spectral_density": {
                    "type": "object",
                    "required": ["kind"],
                    "properties": {
                        "kind": {"enum": ["ohmic_exp", "drude", "discrete_modes"]},
                        "alpha": _NUMBER,
                        "omega_c": _NUMBER,
                        "lambda": _NUMBER,
                        "gamma": _NUMBER,
                        "modes": {"type": "array", "items": _PAIR, "minItems": 1},
                    },
                },
                "beta": {"oneOf": [_NUMBER, {"type": "null"}, {"const": "inf"}]},
                "mean": {
                    "oneOf": [
                        {"type": "null"},
                        {
                            "type": "object",
                            "required": ["displacements"],
                            "properties": {"displacements": {"type": "array", "items": _PAIR}},
                        },
                    ]
                },
            },
        },
        "times": {
            "type": "object",
            "required": ["T", "h"],
            "additionalProperties": False,
            "properties": {"T": _NUMBER, "h": _NUMBER, "n_out": {"type": "integer", "minimum": 1}},
        },
        "orders": {"type": "integer", "minimum": 0, "maximum": MAX_ORDER},
        "mc": {
            "type": "object",
            "required": ["samples"],
            "additionalProperties": False,
            "properties": {"samples": {"type": "integer", "minimum": 1000}, "seed": {"type": "integer"}},
        },
        "generator": {
            "type": "object",
            "properties": {
                "superoperator": _OPERATOR,
                "lindblad": {
                    "type": "object",
                    "properties": {
                        "hamiltonian": _OPERATOR,
                        "jumps": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "required": ["rate", "op"],
                                "properties": {"rate": _NUMBER, "op": _OPERATOR},
                            },
                        },
                    },
                },
            },
            "minProperties": 1,
            "maxProperties": 1,
        },
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"fock_cutoff": {"type": "integer", "minimum": 2}},
        },
        "sweep": {
            "type": "object",
            "required": ["parameter", "values"],
            "additionalProperties": False,
            "properties": {
                "parameter": {"enum": list(SWEEP_PARAMETERS)},
                "values": {"type": "array", "items": _NUMBER},
            },
        },
    },
}


class ConfigError(ValueError):
    """Configuration does not match the schema or is inconsistent."""


@dataclass
class RunConfig:
    """Validated run configuration; ``raw`` keeps the normalized JSON document."""

    command: str
    raw: dict = field(repr=False)

    @property
    def output(self) -> str | None:
        return self.raw.get("output")

    @property
    def max_order(self) -> int:
        return int(self.raw.get("orders", 2))

    def model(self) -> SpinModel:
        m = self._section("model")
        coupling = operator_from_json(m.get("coupling", "sigma_x"))
        return SpinModel(float(m["omega"]), coupling, float(m.get("lambda", 1.0)))

    def bath(self) -> BathSpec:
        return bath_from_dict(self._section("bath"))

    def time_grid(self) -> tuple[float, float, np.ndarray]:
        """``(T, h, output times)``; output times are evenly spaced grid points in ``(0, T]``."""
        t = self._section("times")
        T, h = float(t["T"]), float(t["h"])
        if not (T > 0 and h > 0):
            raise ConfigError("times.T and times.h must be positive")
        n = int(round(T / h))
        if abs(n * h - T) > 1e-9 * max(T, 1.0):
            raise ConfigError("times.T must be an integer multiple of times.h")
        n_out = int(t.get("n_out", 10))
        n_out = min(n_out, n)
        idx = np.unique(np.round(np.linspace(0, n, n_out + 1)[1:]).astype(int))
        return T, h, idx * h

    def _section(self, name: str) -> dict:
        if name not in self.raw:
            raise ConfigError(f"command {self.command!r} needs a {name!r} section")
        return self.raw[name]

    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)

    def to_json(self) -> str:
        return json.dumps(self.raw, indent=2, sort_keys=True)


def _normalize(doc: dict) -> dict:
    doc = copy.deepcopy(doc)
    bath = doc.get("bath")
    if bath is not None and "beta" in bath:
        b = bath["beta"]
        if b is not None and b != "inf" and not math.isfinite(float(b)):
            bath["beta"] = None
    return doc


def parse_config(doc: dict) -> RunConfig:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid configuration at {path}: {exc.message}") from exc
    doc = _normalize(doc)
    if doc["command"] == "sweep" and "sweep" in doc and not doc["sweep"]["values"]:
        raise ConfigError("sweep.values is empty")
    return RunConfig(command=doc["command"], raw=doc)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    return parse_config(doc)


def model_to_dict(model: SpinModel) -> dict:
    return {"omega": model.omega, "coupling": operator_to_json(model.coupling_op), "lambda": model.lam}

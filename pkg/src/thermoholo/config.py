"""Experiment configuration: JSON document, schema, defaults and resolution.

A config file is merged section by section over :data:`DEFAULTS`; the
``probe``, ``targets``, ``sweep`` and ``anchors`` sections replace the
defaults wholesale because their alternatives are mutually exclusive.
Environment variables ``THERMOHOLO_CONFIG``, ``THERMOHOLO_OUT``,
``THERMOHOLO_WORKERS`` and ``THERMOHOLO_TOL`` supply flag defaults.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import jsonschema
import numpy as np

from .errors import HolographyError
from .holography import QUAD_STRATEGIES, ReconstructionConfig
from .models import ModelKind, ModelSpec, eta_coupling
from .validation import check_beta

SCHEMA_VERSION = 1
ENV_PREFIX = "THERMOHOLO_"
DEFAULT_TOL = {"FourierResum": 1e-6, "TruncatedAdaptive": 1e-3}
REPLACED_SECTIONS = ("probe", "targets", "sweep", "anchors")

_num = {"type": "number"}
_opt_num = {"type": ["number", "null"]}
_complex = {"oneOf": [_num, {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}]}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": [k.value for k in ModelKind]},
                "n_sites": {"type": "integer", "minimum": 1},
                "coupling": _num,
                "delta_split": _num,
                "spin_coupling": _num,
                "fock_cutoff": {"type": ["integer", "null"], "minimum": 2},
            },
        },
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "lambda0": _num,
        "probe": {
            "oneOf": [
                {"type": "object", "additionalProperties": False, "required": ["eta"],
                 "properties": {"eta": _num}},
                {"type": "object", "additionalProperties": False,
                 "required": ["delta_split", "omega", "coupling"],
                 "properties": {"delta_split": _num, "omega": _num, "coupling": _num}},
            ]
        },
        "trace": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_samples": {"type": "integer", "minimum": 4},
                "horizon": _opt_num,
                "path": {"enum": ["identity", "dynamics"]},
            },
        },
        "recon": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "line1": _opt_num,
                "line2": _opt_num,
                "m_minus": _opt_num,
                "m_plus": _opt_num,
                "quad": {"enum": list(QUAD_STRATEGIES)},
                "tol": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "harmonic_tol": {"type": "number", "exclusiveMinimum": 0},
                "max_harmonics": {"type": ["integer", "null"], "minimum": 1},
                "on_budget": {"enum": ["raise", "warn"]},
                "window_periods": {"type": "number", "exclusiveMinimum": 0},
                "max_depth": {"type": "integer", "minimum": 0},
                "n_panels": {"type": "integer", "minimum": 8},
                "strict": {"type": "boolean"},
            },
        },
        "targets": {
            "oneOf": [
                {"type": "object", "additionalProperties": False, "required": ["values"],
                 "properties": {"values": {"type": "array", "items": _complex, "minItems": 1}}},
                {"type": "object", "additionalProperties": False, "required": ["start", "stop", "step"],
                 "properties": {"start": _num, "stop": _num, "step": {"type": "number", "exclusiveMinimum": 0}}},
            ]
        },
        "transport": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"target": _num, "n_times": {"type": "integer", "minimum": 1}},
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["axis", "values"],
            "properties": {
                "axis": {"enum": ["n_samples", "m_minus", "m_plus", "distance"]},
                "values": {"type": "array", "items": _num, "minItems": 1},
                "floor": {"type": "number", "minimum": 0},
            },
        },
        "anchors": {"type": "object", "additionalProperties": _complex},
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"csv": {"type": "boolean"}, "json": {"type": "boolean"}},
        },
    },
}

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "model": {"kind": "Oscillator", "fock_cutoff": None},
    "beta": 1.0,
    "lambda0": 1.0,
    "probe": {"eta": 1.0},
    "trace": {"n_samples": 100, "horizon": None, "path": "identity"},
    "recon": {"quad": "FourierResum", "tol": None},
    "targets": {"start": 0.5, "stop": 3.0, "step": 0.05},
    "transport": {"target": 2.0, "n_times": 100},
    "sweep": {"axis": "n_samples", "values": [10, 25, 50, 100], "floor": 1e-12},
    "anchors": {},
    "outputs": {"csv": True, "json": True},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Typed view of a resolved configuration document.

    Range targets are given in units of βλ′; explicit values are λ′ itself.
    """

    model: ModelSpec
    beta: float
    lambda0: float
    eta: float
    n_samples: int
    horizon: Optional[float]
    trace_path: str
    recon: ReconstructionConfig
    targets: np.ndarray
    transport_target: float
    n_times: int
    sweep_axis: str
    sweep_values: tuple
    sweep_floor: float
    anchors: dict
    outputs: dict
    document: dict = field(repr=False)

    @property
    def tol(self):
        return self.recon.tol


def _check_finite(obj, path="config"):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _check_finite(v, f"{path}[{i}]")
    elif isinstance(obj, float) and not math.isfinite(obj):
        raise HolographyError(f"{path} is not finite")


def merge(user):
    doc = copy.deepcopy(DEFAULTS)
    for key, val in user.items():
        if isinstance(val, dict) and isinstance(doc.get(key), dict) and key not in REPLACED_SECTIONS:
            doc[key].update(val)
        else:
            doc[key] = val
    return doc


def _as_complex(v):
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


def _targets(section, beta):
    if "values" in section:
        return np.array([_as_complex(v) for v in section["values"]])
    start, stop, step = section["start"], section["stop"], section["step"]
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    if n < 1:
        raise HolographyError("target range is empty")
    return (start + step * np.arange(n)) / beta + 0j


def resolve(user=None, tol=None):
    """Validate ``user`` (a parsed JSON document) and return an ExperimentConfig."""
    user = {"schema_version": SCHEMA_VERSION} if user is None else user
    try:
        jsonschema.validate(user, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise HolographyError(f"invalid config: {exc.message}") from None
    _check_finite(user)
    doc = merge(user)
    jsonschema.validate(doc, SCHEMA)
    beta = check_beta(doc["beta"])
    recon_doc = dict(doc["recon"])
    if tol is not None:
        recon_doc["tol"] = float(tol)
    if recon_doc.get("tol") is None:
        recon_doc["tol"] = DEFAULT_TOL[recon_doc.get("quad", "FourierResum")]
    doc["recon"] = recon_doc
    probe = doc["probe"]
    eta = probe["eta"] if "eta" in probe else eta_coupling(probe["delta_split"], probe["omega"], probe["coupling"])
    if eta == 0:
        raise HolographyError("probe coupling η must be nonzero")
    model = ModelSpec(**doc["model"])
    anchors = {float(k): _as_complex(v) for k, v in doc["anchors"].items()}
    targets = _targets(doc["targets"], beta)
    resolved = copy.deepcopy(doc)
    resolved["derived"] = {"eta": eta}
    return ExperimentConfig(
        model=model,
        beta=beta,
        lambda0=float(doc["lambda0"]),
        eta=float(eta),
        n_samples=doc["trace"]["n_samples"],
        horizon=doc["trace"]["horizon"],
        trace_path=doc["trace"]["path"],
        recon=ReconstructionConfig(**recon_doc),
        targets=targets,
        transport_target=float(doc["transport"]["target"]),
        n_times=int(doc["transport"]["n_times"]),
        sweep_axis=doc["sweep"]["axis"],
        sweep_values=tuple(doc["sweep"]["values"]),
        sweep_floor=float(doc["sweep"].get("floor", 1e-12)),
        anchors=anchors,
        outputs=doc["outputs"],
        document=resolved,
    )


def load(path, tol=None):
    if path is None:
        return resolve(None, tol)
    with open(path) as fh:
        try:
            user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise HolographyError(f"config is not valid JSON: {exc}") from None
    return resolve(user, tol)

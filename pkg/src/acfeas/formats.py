"""JSON instance and solution files.

Floats are written with ``repr``, the shortest string that parses back to the
same double, so a write/read cycle is exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .power_model import (
    Bus,
    BusKind,
    Line,
    LineParams,
    NetworkError,
    NetworkInstance,
    PhaseSolution,
    validate_network,
)

INSTANCE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["buses", "lines"],
    "properties": {
        "buses": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "kind"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "kind": {"enum": ["generator", "load"]},
                    "p_demand": {"type": "number"},
                    "q_demand": {"type": "number"},
                },
                "if": {"properties": {"kind": {"const": "load"}}},
                "then": {"required": ["p_demand", "q_demand"]},
                "else": {"not": {"anyOf": [{"required": ["p_demand"]}, {"required": ["q_demand"]}]}},
            },
        },
        "lines": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["from", "to", "susceptance", "conductance", "delta_max"],
                "properties": {
                    "from": {"type": "string"},
                    "to": {"type": "string"},
                    "susceptance": {"type": "number"},
                    "conductance": {"type": "number"},
                    "delta_max": {"type": "number"},
                },
            },
        },
    },
}

SOLUTION_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["angles_rad"],
    "properties": {
        "angles_rad": {"type": "object", "additionalProperties": {"type": "number"}},
    },
}


class FormatError(ValueError):
    """Malformed or schema-violating file contents."""


def _validate(doc, schema, what: str) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise FormatError(f"{what}: {where}: {exc.message}") from None


def instance_to_dict(net: NetworkInstance) -> dict:
    buses = []
    for bus in net.buses:
        entry = {"id": bus.id, "kind": bus.kind.value}
        if bus.is_load:
            entry["p_demand"] = bus.p_demand
            entry["q_demand"] = bus.q_demand
        buses.append(entry)
    lines = [
        {
            "from": line.a,
            "to": line.b,
            "susceptance": line.params.susceptance,
            "conductance": line.params.conductance,
            "delta_max": line.params.delta_max,
        }
        for line in net.lines
    ]
    return {"buses": buses, "lines": lines}


def instance_from_dict(doc) -> NetworkInstance:
    _validate(doc, INSTANCE_SCHEMA, "instance")
    buses = []
    for entry in doc["buses"]:
        if entry["kind"] == "load":
            buses.append(Bus.load(entry["id"], entry["p_demand"], entry["q_demand"]))
        else:
            buses.append(Bus(entry["id"], BusKind.GENERATOR))
    lines = [
        Line(
            entry["from"],
            entry["to"],
            LineParams(
                float(entry["susceptance"]), float(entry["conductance"]), float(entry["delta_max"])
            ),
        )
        for entry in doc["lines"]
    ]
    net = NetworkInstance(tuple(buses), tuple(lines))
    violations = validate_network(net)
    if violations:
        raise NetworkError(violations)
    return net


def solution_to_dict(sol: PhaseSolution) -> dict:
    return {"angles_rad": dict(sol.angles)}


def solution_from_dict(doc) -> PhaseSolution:
    _validate(doc, SOLUTION_SCHEMA, "solution")
    return PhaseSolution(doc["angles_rad"])


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from None


def _write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def read_instance(path) -> NetworkInstance:
    return instance_from_dict(_read_json(path))


def write_instance(path, net: NetworkInstance) -> None:
    _write_json(path, instance_to_dict(net))


def read_solution(path) -> PhaseSolution:
    return solution_from_dict(_read_json(path))


def write_solution(path, sol: PhaseSolution) -> None:
    _write_json(path, solution_to_dict(sol))

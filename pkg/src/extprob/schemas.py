"""JSON schemas for every CLI input file."""

from __future__ import annotations

_number = {"type": "number"}
_quaternion = {"type": "array", "items": _number, "minItems": 4, "maxItems": 4}
_pair = {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}
_clifford = {"type": "array", "items": _pair, "minItems": 16, "maxItems": 16}


def _ring_typed(container: str) -> dict:
    """Schema for {ring, rank, <container>} with ring-specific element shapes."""
    return {
        "type": "object",
        "required": ["ring", "rank", container],
        "additionalProperties": False,
        "properties": {
            "ring": {"enum": ["quaternion", "clifford"]},
            "rank": {"type": "integer", "minimum": 1},
            container: {"type": "array", "minItems": 1},
        },
        "allOf": [
            {"if": {"properties": {"ring": {"const": "quaternion"}}},
             "then": {"properties": {container: {"items": _quaternion}}}},
            {"if": {"properties": {"ring": {"const": "clifford"}}},
             "then": {"properties": {container: {"items": _clifford}}}},
        ],
    }


VECTOR = _ring_typed("coeffs")
OPERATOR = _ring_typed("entries")

COLOR_MODEL = {
    "type": "object",
    "required": ["colors"],
    "properties": {
        "colors": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["n", "p"],
                "additionalProperties": False,
                "properties": {"n": {"type": "integer"}, "p": {"type": "number", "minimum": 0}},
            },
        },
    },
}

_outcomes = {
    "type": "array", "minItems": 2, "maxItems": 2,
    "items": {"type": "array", "minItems": 1, "items": {"enum": [-1, 1]}},
}

SIGNED_MODEL = {
    "type": "object",
    "required": ["weights", "a_outcomes", "b_outcomes"],
    "additionalProperties": False,
    "properties": {
        "weights": {"type": "array", "minItems": 1, "items": _number},
        "a_outcomes": _outcomes,
        "b_outcomes": _outcomes,
    },
}

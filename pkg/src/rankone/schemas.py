"""JSON schemas for the ``--format json`` output of each command."""

from .classify import LABELS

_HEAD = {
    "command": {"type": "string"},
    "input": {"type": "string"},
    "seed": {"type": "integer"},
}

ERROR_REPORT = {
    "type": "object",
    "required": ["command", "input", "seed", "error", "exit_code"],
    "properties": {**_HEAD, "error": {"type": "string"}, "exit_code": {"enum": [2, 3, 4, 5]}},
}

_COSET_TABLE = {
    "type": "object",
    "required": ["index", "generators", "action"],
    "properties": {
        "index": {"type": "integer", "minimum": 1},
        "generators": {"type": "array", "items": {"type": "string"}},
        "action": {
            "type": "object",
            "additionalProperties": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        },
    },
}

_WITNESS = {
    "type": "object",
    "required": ["index", "prime", "rank", "subgroup"],
    "properties": {
        "index": {"type": "integer", "minimum": 1},
        "prime": {"type": "integer", "minimum": 2},
        "rank": {"type": "integer", "minimum": 3},
        "subgroup": _COSET_TABLE,
        "gs_violated": {"type": "boolean"},
    },
}

ANALYZE_REPORT = {
    "type": "object",
    "required": ["presentation", "deficiency", "betti", "torsion", "per_prime"],
    "properties": {
        **_HEAD,
        "deficiency": {"type": "integer"},
        "betti": {"type": "integer", "minimum": 0},
        "torsion": {"type": "array", "items": {"type": "integer", "minimum": 2}},
        "per_prime": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["p", "d_p", "gs_violated"],
                "properties": {
                    "p": {"type": "integer", "minimum": 2},
                    "d_p": {"type": "integer", "minimum": 0},
                    "gs_violated": {"type": ["boolean", "null"]},
                },
            },
        },
    },
}

VSA_REPORT = {
    "type": "object",
    "required": ["found", "witness", "searched_index", "subgroups_checked", "max_rank",
                 "budget_exhausted"],
    "properties": {
        **_HEAD,
        "found": {"type": "boolean"},
        "witness": {"oneOf": [{"type": "null"}, _WITNESS]},
        "searched_index": {"type": "integer", "minimum": 0},
        "subgroups_checked": {"type": "integer", "minimum": 0},
        "max_rank": {"type": "integer", "minimum": 0},
        "budget_exhausted": {"type": "boolean"},
    },
}

HNN_REPORT = {
    "type": "object",
    "required": ["endomorphism", "vertex_rank"],
    "properties": {
        **_HEAD,
        "endomorphism": {"type": "object", "additionalProperties": {"type": "string"}},
        "vertex_rank": {"type": "integer", "minimum": 1},
        "status": {"enum": ["found", "not-found", "budget-exhausted", "none-within-bounds",
                            "primitive"]},
        "cover": _COSET_TABLE,
    },
}

GBS_REPORT = {
    "type": "object",
    "required": ["label", "reduction"],
    "properties": {
        **_HEAD,
        "label": {"enum": list(LABELS)},
        "reduction": {"type": "object", "required": ["label", "reduced", "trace"]},
        "quotient_relation": {
            "type": "object",
            "required": ["relation", "R", "L", "conclusion"],
        },
    },
}

VERDICT = {
    "type": "object",
    "required": ["label", "certificates", "citations", "budgets", "timings"],
    "properties": {
        "label": {"enum": list(LABELS)},
        "certificates": {
            "type": "array",
            "items": {"type": "object", "required": ["type"]},
        },
        "citations": {"type": "array", "items": {"type": "string"}},
        "budgets": {"type": "object"},
        "timings": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
    },
}

CLASSIFY_REPORT = {
    "allOf": [
        VERDICT,
        {
            "type": "object",
            "required": ["bounded_generation"],
            "properties": {
                **_HEAD,
                "bounded_generation": {
                    "enum": ["boundedly generated", "NOT boundedly generated", "unknown"]
                },
            },
        },
    ]
}

_BY_COMMAND = {
    "analyze": ANALYZE_REPORT,
    "vsa": VSA_REPORT,
    "hnn": HNN_REPORT,
    "gbs": GBS_REPORT,
    "classify": CLASSIFY_REPORT,
}


def report_schema(command: str) -> dict:
    """Schema for one report of ``command``; failures use the error schema."""
    return {"oneOf": [ERROR_REPORT, {"allOf": [{"not": {"required": ["error"]}},
                                               _BY_COMMAND[command]]}]}


def document_schema(command: str) -> dict:
    return {
        "$schema": "http://json-schema.org/draft-07/schema#",
        "type": "object",
        "required": ["config", "reports"],
        "properties": {
            "config": {
                "type": "object",
                "required": ["command", "seed", "max_index", "budget_ms", "format", "jobs"],
                "properties": {
                    "seed": {"type": "integer"},
                    "max_index": {"type": "integer", "minimum": 1},
                    "budget_ms": {"type": "integer", "minimum": 1},
                    "jobs": {"type": "integer", "minimum": 1},
                },
            },
            "reports": {"type": "array", "items": report_schema(command)},
        },
    }

"""JSON round-tripping for instances and patterns (envelope formatVersion 1)."""

from __future__ import annotations

import json
from typing import Union

from .errors import ParseError, ValidationError
from .model import FALSE, TRUE, Context, CspInstance, CspPattern

FORMAT_VERSION = 1


def _int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{what} must be an integer, got {value!r}")
    return value


def _int_pair(value, what: str) -> tuple:
    if not isinstance(value, list) or len(value) != 2:
        raise ParseError(f"{what} must be a two-element list, got {value!r}")
    return (_int(value[0], what), _int(value[1], what))


def _fields(obj, what: str, required: tuple, optional: tuple = ()) -> None:
    if not isinstance(obj, dict):
        raise ParseError(f"{what} must be an object, got {type(obj).__name__}")
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ValidationError(f"{what} has unknown fields {sorted(unknown)}")
    missing = set(required) - set(obj)
    if missing:
        raise ParseError(f"{what} is missing fields {sorted(missing)}")


def _instance_payload(p: CspInstance) -> dict:
    return {
        "variables": p.num_variables,
        "domains": [sorted(d) for d in p.domains],
        "constraints": [
            {"scope": list(scope), "disallowed": [list(pair) for pair in sorted(pairs)]}
            for scope, pairs in sorted(p.disallowed.items())
        ],
    }


def _pattern_payload(chi: CspPattern) -> dict:
    ctx = chi.context
    return {
        "variables": chi.num_variables,
        "values": list(chi.values_per_variable),
        "entries": [
            {
                "scope": list(c.scope),
                "pairs": [
                    {"a": a, "b": b, "tv": tv.value} for (a, b), tv in sorted(c.entries)
                ],
            }
            for c in chi.constraints
        ],
        "context": {
            "neqVars": [list(pair) for pair in sorted(ctx.var_diseqs)],
            "varOrder": list(ctx.var_order) if ctx.var_order is not None else None,
            "neqValues": [
                [list(x), list(y)] for x, y in sorted(ctx.value_diseqs)
            ],
            "valueOrder": ctx.value_order,
        },
    }


def serialise(x: Union[CspInstance, CspPattern]) -> str:
    if isinstance(x, CspInstance):
        kind, payload = "instance", _instance_payload(x)
    elif isinstance(x, CspPattern):
        kind, payload = "pattern", _pattern_payload(x)
    else:
        raise ValidationError(f"cannot serialise {type(x).__name__}")
    return json.dumps(
        {"kind": kind, "formatVersion": FORMAT_VERSION, "payload": payload}, indent=2
    )


def _parse_instance(payload) -> CspInstance:
    _fields(payload, "instance payload", ("variables", "domains", "constraints"))
    n = _int(payload["variables"], "variables")
    domains = payload["domains"]
    if not isinstance(domains, list) or len(domains) != n:
        raise ParseError(f"domains must list {n} value sets")
    doms = tuple(
        frozenset(_int(v, f"domain value of variable {i}") for v in d)
        for i, d in enumerate(domains)
    )
    constraints = payload["constraints"]
    if not isinstance(constraints, list):
        raise ParseError("constraints must be a list")
    disallowed = {}
    for item in constraints:
        _fields(item, "constraint", ("scope", "disallowed"))
        scope = _int_pair(item["scope"], "scope")
        if not isinstance(item["disallowed"], list):
            raise ParseError(f"disallowed of scope {scope} must be a list")
        pairs = frozenset(
            _int_pair(pair, f"disallowed pair of scope {scope}")
            for pair in item["disallowed"]
        )
        key = (min(scope), max(scope))
        if key in disallowed:
            raise ValidationError(f"two constraints share the scope {key}")
        if scope != key:
            pairs = frozenset((b, a) for a, b in pairs)
        disallowed[key] = pairs
    return CspInstance.build(doms, disallowed)


def _parse_pattern(payload) -> CspPattern:
    _fields(payload, "pattern payload", ("variables", "values", "entries", "context"))
    n = _int(payload["variables"], "variables")
    values = payload["values"]
    if not isinstance(values, list) or len(values) != n:
        raise ParseError(f"values must list {n} counts")
    counts = [_int(k, "value count") for k in values]
    if not isinstance(payload["entries"], list):
        raise ParseError("entries must be a list")
    entries: dict = {}
    for item in payload["entries"]:
        _fields(item, "entry", ("scope", "pairs"))
        scope = _int_pair(item["scope"], "scope")
        if not isinstance(item["pairs"], list):
            raise ParseError(f"pairs of scope {scope} must be a list")
        key = (min(scope), max(scope))
        if key in entries:
            raise ValidationError(f"two constraint patterns share the scope {key}")
        scope_map = {}
        for pair in item["pairs"]:
            _fields(pair, "pair", ("a", "b", "tv"))
            a, b = _int(pair["a"], "a"), _int(pair["b"], "b")
            if pair["tv"] == "T":
                tv = TRUE
            elif pair["tv"] == "F":
                tv = FALSE
            else:
                raise ParseError(f"entry value {pair['tv']!r} is not 'T' or 'F'")
            if scope != key:
                a, b = b, a
            if (a, b) in scope_map:
                raise ValidationError(f"scope {key} assigns ({a}, {b}) twice")
            scope_map[(a, b)] = tv
        entries[key] = scope_map
    ctx = payload["context"]
    _fields(ctx, "context", ("neqVars", "varOrder", "neqValues", "valueOrder"))
    if not isinstance(ctx["neqVars"], list) or not isinstance(ctx["neqValues"], list):
        raise ParseError("neqVars and neqValues must be lists")
    neq_vars = [_int_pair(pair, "neqVars entry") for pair in ctx["neqVars"]]
    var_order = ctx["varOrder"]
    if var_order is not None:
        if not isinstance(var_order, list):
            raise ParseError("varOrder must be a list or null")
        var_order = [_int(v, "varOrder entry") for v in var_order]
    neq_values = []
    for item in ctx["neqValues"]:
        if not isinstance(item, list) or len(item) != 2:
            raise ParseError(f"neqValues entry {item!r} must pair two points")
        neq_values.append(
            (_int_pair(item[0], "neqValues point"), _int_pair(item[1], "neqValues point"))
        )
    if not isinstance(ctx["valueOrder"], bool):
        raise ParseError("valueOrder must be a boolean")
    return CspPattern.build(
        counts,
        entries,
        neq_vars=neq_vars,
        var_order=var_order,
        neq_values=neq_values,
        value_order=ctx["valueOrder"],
    )


def parse(text: str) -> Union[CspInstance, CspPattern]:
    """Parse a serialised document; ParseError carries the position for malformed JSON."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"line {e.lineno} column {e.colno}: {e.msg}") from None
    _fields(doc, "document", ("kind", "formatVersion", "payload"))
    if doc["formatVersion"] != FORMAT_VERSION:
        raise ValidationError(f"unsupported formatVersion {doc['formatVersion']!r}")
    if doc["kind"] == "instance":
        return _parse_instance(doc["payload"])
    if doc["kind"] == "pattern":
        return _parse_pattern(doc["payload"])
    raise ParseError(f"unknown document kind {doc['kind']!r}")

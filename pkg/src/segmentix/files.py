"""JSON schemas for instances, segmentations, targets, and cost functions.

Every loader reports problems as FileFormatError with the offending file,
field path, and (for syntax errors) line and column, so the CLI can exit
with a uniform diagnostic. Dumps are deterministic: sorted keys, two-space
indent, trailing newline.

Schemas, with exact field names:

    MarketInstance          {"valuations": [1.0, 2.0], "mu": [0.4, 0.6], "k": 0.8}
    Segmentation            {"prior": [...], "segments": [{"mu": [...], "weight": ..., "price": ...}]}
    RationalizationTarget   {"cs": ..., "ps": ..., "valuations": [...], "mu": [...]}
    ConvexCostSpec          {"knots": [...], "quadratics": [[a, b, c], ...]}

Prices in segmentation files are valuation values, not indices; loading
resolves them back against the instance's ladder.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .market import (
    Market,
    MarketInstance,
    Segment,
    Segmentation,
    ValidationError,
    Valuations,
)
from .rationalize import ConvexCostSpec, RationalizationTarget

# relative tolerance for matching a serialized price back to its valuation
PRICE_MATCH_RTOL = 1e-9


class FileFormatError(ValidationError):
    """A file failed JSON parsing or schema validation."""


def _fail(where: str, message: str) -> FileFormatError:
    return FileFormatError("file_format", f"{where}: {message}")


def read_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise _fail(path, str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise _fail(path, f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def dump_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _require_object(data: Any, where: str, fields: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
    if not isinstance(data, dict):
        raise _fail(where, f"expected a JSON object, got {type(data).__name__}")
    for name in fields:
        if name not in data:
            raise _fail(where, f"missing field '{name}'")
    allowed = set(fields) | set(optional)
    for name in data:
        if name not in allowed:
            raise _fail(where, f"unknown field '{name}' (expected {sorted(allowed)})")
    return data


def _number(data: dict, field: str, where: str) -> float:
    v = data[field]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _fail(where, f"field '{field}' must be a number, got {type(v).__name__}")
    if not math.isfinite(float(v)):
        raise _fail(where, f"field '{field}' must be finite, got {v}")
    return float(v)


def _number_list(data: dict, field: str, where: str) -> list[float]:
    v = data[field]
    if not isinstance(v, list) or not v:
        raise _fail(where, f"field '{field}' must be a non-empty array")
    out = []
    for i, item in enumerate(v):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise _fail(where, f"field '{field}[{i}]' must be a number, got {type(item).__name__}")
        out.append(float(item))
    return out


def _rewrap(exc: ValidationError, where: str) -> FileFormatError:
    return FileFormatError(exc.invariant, f"{where}: {exc.message}")


def parse_instance_fields(data: Any, where: str, require_k: bool) -> tuple[Valuations, Market, float | None]:
    fields = ("valuations", "mu", "k") if require_k else ("valuations", "mu")
    optional = () if require_k else ("k",)
    obj = _require_object(data, where, fields, optional)
    try:
        vals = Valuations(_number_list(obj, "valuations", where))
        mu = Market(_number_list(obj, "mu", where))
    except FileFormatError:
        raise
    except ValidationError as exc:
        raise _rewrap(exc, where) from exc
    if len(mu) != len(vals):
        raise _fail(where, f"'mu' has {len(mu)} entries but 'valuations' has {len(vals)}")
    k = _number(obj, "k", where) if "k" in obj else None
    return vals, mu, k


def load_market_instance(path: str) -> MarketInstance:
    vals, mu, k = parse_instance_fields(read_json(path), path, require_k=True)
    try:
        return MarketInstance(vals, mu, k)
    except ValidationError as exc:
        raise _rewrap(exc, path) from exc


def load_sweep_instance(path: str) -> tuple[Valuations, Market]:
    """Instance for a k-sweep; any 'k' field present is read but unused."""
    vals, mu, _ = parse_instance_fields(read_json(path), path, require_k=False)
    return vals, mu


def segmentation_to_dict(seg: Segmentation, vals: Valuations) -> dict:
    return {
        "prior": list(seg.prior.weights),
        "segments": [
            {"mu": list(s.market.weights), "weight": s.weight, "price": vals[s.price_index]}
            for s in seg.segments
        ],
    }


def _resolve_price(price: float, vals: Valuations, where: str) -> int:
    scale = max(1.0, abs(vals[len(vals) - 1]))
    for i in range(len(vals)):
        if abs(vals[i] - price) <= PRICE_MATCH_RTOL * scale:
            return i
    raise _fail(where, f"price {price} does not match any valuation in {tuple(vals.values)}")


def parse_segmentation(data: Any, vals: Valuations, where: str) -> Segmentation:
    obj = _require_object(data, where, ("prior", "segments"))
    try:
        prior = Market(_number_list(obj, "prior", where))
    except FileFormatError:
        raise
    except ValidationError as exc:
        raise _rewrap(exc, where) from exc
    if len(prior) != len(vals):
        raise _fail(where, f"'prior' has {len(prior)} entries but the valuation ladder has {len(vals)}")
    raw_segments = obj["segments"]
    if not isinstance(raw_segments, list) or not raw_segments:
        raise _fail(where, "field 'segments' must be a non-empty array")
    segments = []
    for j, raw in enumerate(raw_segments):
        sub = f"{where}: segments[{j}]"
        seg_obj = _require_object(raw, sub, ("mu", "weight", "price"))
        try:
            market = Market(_number_list(seg_obj, "mu", sub))
            weight = _number(seg_obj, "weight", sub)
            price_index = _resolve_price(_number(seg_obj, "price", sub), vals, sub)
            segments.append(Segment(market, weight, price_index))
        except FileFormatError:
            raise
        except ValidationError as exc:
            raise _rewrap(exc, sub) from exc
    try:
        return Segmentation(prior, segments)
    except ValidationError as exc:
        raise _rewrap(exc, where) from exc


def load_segmentation(path: str, vals: Valuations) -> Segmentation:
    return parse_segmentation(read_json(path), vals, path)


def parse_segmentation_structure(data: Any, where: str) -> tuple[Market, list[tuple[Market, float, float]]]:
    """Parse a segmentation file without a valuation ladder.

    Prices stay as raw numbers since there is nothing to resolve them
    against; callers get (prior, [(market, weight, price_value), ...]).
    """
    obj = _require_object(data, where, ("prior", "segments"))
    try:
        prior = Market(_number_list(obj, "prior", where))
    except FileFormatError:
        raise
    except ValidationError as exc:
        raise _rewrap(exc, where) from exc
    raw_segments = obj["segments"]
    if not isinstance(raw_segments, list) or not raw_segments:
        raise _fail(where, "field 'segments' must be a non-empty array")
    triples = []
    for j, raw in enumerate(raw_segments):
        sub = f"{where}: segments[{j}]"
        seg_obj = _require_object(raw, sub, ("mu", "weight", "price"))
        try:
            market = Market(_number_list(seg_obj, "mu", sub))
        except FileFormatError:
            raise
        except ValidationError as exc:
            raise _rewrap(exc, sub) from exc
        triples.append((market, _number(seg_obj, "weight", sub), _number(seg_obj, "price", sub)))
        if len(market) != len(prior):
            raise _fail(sub, f"'mu' has {len(market)} entries but the prior has {len(prior)}")
    return prior, triples


def load_rationalization_target(path: str) -> RationalizationTarget:
    obj = _require_object(read_json(path), path, ("cs", "ps", "valuations", "mu"))
    try:
        vals = Valuations(_number_list(obj, "valuations", path))
        mu = Market(_number_list(obj, "mu", path))
        if len(mu) != len(vals):
            raise _fail(path, f"'mu' has {len(mu)} entries but 'valuations' has {len(vals)}")
        return RationalizationTarget(
            cs=_number(obj, "cs", path), ps=_number(obj, "ps", path), vals=vals, mu_star=mu
        )
    except FileFormatError:
        raise
    except ValidationError as exc:
        raise _rewrap(exc, path) from exc


def cost_spec_to_dict(spec: ConvexCostSpec) -> dict:
    return {
        "knots": list(spec.knots),
        "quadratics": [list(q) for q in spec.quadratics],
    }


def parse_cost_spec(data: Any, where: str) -> ConvexCostSpec:
    obj = _require_object(data, where, ("knots", "quadratics"))
    knots = _number_list(obj, "knots", where)
    raw_quads = obj["quadratics"]
    if not isinstance(raw_quads, list) or not raw_quads:
        raise _fail(where, "field 'quadratics' must be a non-empty array")
    quads = []
    for i, q in enumerate(raw_quads):
        if not isinstance(q, list) or len(q) != 3:
            raise _fail(where, f"field 'quadratics[{i}]' must be a 3-element array [a, b, c]")
        row = []
        for j, item in enumerate(q):
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise _fail(where, f"field 'quadratics[{i}][{j}]' must be a number")
            row.append(float(item))
        quads.append(tuple(row))
    try:
        return ConvexCostSpec(knots=tuple(knots), quadratics=tuple(quads))
    except ValidationError as exc:
        raise _rewrap(exc, where) from exc


def load_cost_spec(path: str) -> ConvexCostSpec:
    return parse_cost_spec(read_json(path), path)

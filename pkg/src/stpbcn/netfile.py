"""Reading and writing network description files (JSON)."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

from .errors import ConflictingDefinition, DimensionMismatch, SchemaError, BCNError
from .network import (
    MAX_SIGNAL_BITS,
    ORDERS,
    BooleanControlNetwork,
    compile_algebraic_form,
    parse_rules,
    reorder_output_friendly,
)
from .stp import LogicalMatrix, is_power_of_two

FIELD_ORDER = ("name", "n", "m", "d", "t", "p", "s", "signal_order", "L", "rules", "H")


def _matrix(doc: Any, label: str) -> LogicalMatrix | None:
    if doc is None:
        return None
    if not isinstance(doc, dict) or "rows" not in doc or "cols" not in doc:
        raise SchemaError(f"{label} must be an object with 'rows' and 'cols'")
    kind = doc.get("type", "delta")
    if kind != "delta":
        raise SchemaError(f"{label}: only delta matrices are supported, got {kind!r}")
    rows, cols = doc["rows"], doc["cols"]
    if not isinstance(rows, int) or not is_power_of_two(rows):
        raise SchemaError(f"{label}.rows must be a power of 2, got {rows!r}")
    if not isinstance(cols, list) or not all(isinstance(c, int) for c in cols):
        raise SchemaError(f"{label}.cols must be a list of integers")
    if not is_power_of_two(len(cols)):
        raise SchemaError(f"{label} has {len(cols)} columns, not a power of 2")
    try:
        return LogicalMatrix(rows, tuple(cols))
    except DimensionMismatch as exc:
        raise SchemaError(f"{label}: {exc}") from None


def _count(doc: dict, key: str, default: int | None = 0) -> int | None:
    value = doc.get(key, default)
    if value is None:
        return default
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise SchemaError(f"field {key!r} must be a non-negative integer")
    return value


def parse_network_file(document: str | bytes | dict) -> BooleanControlNetwork:
    """Build a network from a JSON document (text or already-decoded object)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise SchemaError("network document must be a JSON object")
    unknown = set(document) - set(FIELD_ORDER)
    if unknown:
        raise SchemaError(f"unknown fields: {sorted(unknown)}")

    n = _count(document, "n", None)
    if n is None or n < 1:
        raise SchemaError("field 'n' is required and must be at least 1")
    m, d, t = (_count(document, k) for k in ("m", "d", "t"))
    if n + m + d + t > MAX_SIGNAL_BITS:
        raise SchemaError(f"n+m+d+t = {n + m + d + t} exceeds the limit of {MAX_SIGNAL_BITS}")
    order = tuple(document.get("signal_order") or ("u", "x", "d", "f"))
    if order not in ORDERS:
        raise SchemaError(f"signal_order must be one of {[list(o) for o in ORDERS]}")
    name = document.get("name") or ""
    s = _count(document, "s", None)
    L = _matrix(document.get("L"), "L")
    H = _matrix(document.get("H"), "H")
    rules_doc = document.get("rules")
    if L is None and rules_doc is None:
        raise SchemaError("either 'L' or 'rules' must be given")

    rules = None
    permutation = None
    if rules_doc is not None:
        if not isinstance(rules_doc, dict) or not isinstance(rules_doc.get("state"), list):
            raise SchemaError("rules must be an object with a 'state' list")
        try:
            rules = parse_rules(rules_doc["state"], rules_doc.get("output") or [], n, m, d, t)
        except BCNError as exc:
            raise SchemaError(f"rules: {exc}") from None
        if rules.output:
            rules, permutation, friendly = reorder_output_friendly(rules, n)
            if permutation == tuple(range(1, n + 1)):
                permutation = None
            if s is None:
                s = friendly
            elif s < friendly:
                raise SchemaError(f"outputs read {friendly} state variables but s={s}")
        compiled = compile_algebraic_form(rules, n, m, d, t, order, s=s, name=name)
        if L is not None and L != compiled.L:
            raise ConflictingDefinition("explicit L disagrees with the compiled rules")
        if H is not None and compiled.H is not None and H != compiled.H:
            raise ConflictingDefinition("explicit H disagrees with the compiled output rules")
        L = compiled.L
        H = H if H is not None else compiled.H

    p = document.get("p")
    if p is not None and H is not None and H.rows != 2 ** p:
        raise SchemaError(f"H has {H.rows} rows but p={p}")
    try:
        return BooleanControlNetwork(
            n=n, L=L, m=m, d=d, t=t, H=H, s=s, order=order, name=name,
            rules=rules, state_permutation=permutation,
        )
    except DimensionMismatch as exc:
        raise SchemaError(str(exc)) from None


def network_document(net: BooleanControlNetwork) -> dict:
    rules = None
    if net.rules is not None:
        from .expr import to_text

        state = list(net.rules.state_text) or [to_text(e) for e in net.rules.state]
        output = list(net.rules.output_text) or [to_text(e) for e in net.rules.output]
        rules = {"state": state, "output": output}
    return {
        "name": net.name,
        "n": net.n,
        "m": net.m,
        "d": net.d,
        "t": net.t,
        "p": net.p,
        "s": net.s,
        "signal_order": list(net.order),
        "L": {"rows": net.L.rows, "cols": list(net.L.cols)},
        "rules": rules,
        "H": None if net.H is None else {"rows": net.H.rows, "cols": list(net.H.cols)},
    }


def write_network_file(net: BooleanControlNetwork) -> str:
    """Canonical text form: one top-level field per line, compact values."""
    doc = network_document(net)
    lines = [
        f"  {json.dumps(key)}: {json.dumps(doc[key], ensure_ascii=False, separators=(', ', ': '))}"
        for key in FIELD_ORDER
    ]
    return "{\n" + ",\n".join(lines) + "\n}\n"


def load_network(path: str | Path) -> BooleanControlNetwork:
    return parse_network_file(Path(path).read_text(encoding="utf-8"))


def save_network(net: BooleanControlNetwork, path: str | Path) -> None:
    Path(path).write_text(write_network_file(net), encoding="utf-8")


def fingerprint(net: BooleanControlNetwork) -> dict:
    """Dimensions plus a content hash of the canonical document."""
    digest = hashlib.sha256(write_network_file(net).encode("utf-8")).hexdigest()
    return {
        "name": net.name, "n": net.n, "m": net.m, "d": net.d, "t": net.t,
        "p": net.p, "s": net.s, "sha256": digest[:16],
    }

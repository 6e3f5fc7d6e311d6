"""Machine-readable reports (JSON, CSV, text) for every command.

The JSON document is the canonical form; CSV is the same document
flattened to ``key,value`` rows with JSON-encoded values, so both parse
back to identical content.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from .kuhn import ParamScan
from .linear_sieve import BoundBreakdown, LowerBoundS
from .verifier import REPORT_WITNESS_CAP, ScanReport, Witnesses

SCHEMA_VERSION = 1
FORMATS = ("json", "csv", "text")


def _plain(x: Any) -> Any:
    """Convert numpy scalars/arrays and tuples to JSON-native values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _scan(r: ScanReport) -> dict:
    return {
        "scan_id": r.scan_id,
        "range": list(r.range),
        "max_value": r.max_value,
        "argmax": list(r.argmax),
        "checked_count": r.checked_count,
        "counterexample_count": len(r.counterexamples),
        "near_boundary": r.near_boundary,
        "details": r.details,
    }


def _breakdown(b: BoundBreakdown) -> dict:
    return {
        "N": b.N,
        "X": b.X,
        "z": b.z,
        "y": b.y,
        "D": b.D,
        "params": b.params.as_dict(),
        "S_lower": b.S_lower,
        "squarefree_mode": b.squarefree_mode,
        "M1": b.M1,
        "M2": b.M2,
        "E_remainder": b.E_remainder,
        "leading_factor": b.leading,
        "sum_upper": b.sum_upper,
        "kuhn_remainder": b.kuhn_remainder,
        "r4_lower": b.r4_lower,
        "published_chain_r4": b.published_chain_r4,
        "certified": b.certified,
        "notes": b.notes,
    }


def _witness_rows(w: Witnesses) -> List[List[int]]:
    cap = min(REPORT_WITNESS_CAP, w.n.size)
    return np.stack([w.n[:cap], w.a[:cap], w.omega[:cap]], axis=1).tolist()


def to_document(
    result: Any,
    command: str,
    inputs: Optional[Dict[str, Any]] = None,
    runtime_seconds: float = 0.0,
) -> Dict[str, Any]:
    """Wrap any module result in the versioned report schema."""
    ledger: List[dict] = []
    counterexamples: List[Any] = []
    if isinstance(result, BoundBreakdown):
        ledger = [e.as_dict() for e in result.constant_ledger]
        results = _breakdown(result)
        passed = result.certified
    elif isinstance(result, ScanReport):
        results = _scan(result)
        counterexamples = list(result.counterexamples)
        passed = result.ok
    elif isinstance(result, tuple) and len(result) == 2 and isinstance(result[1], Witnesses):
        scan, w = result
        results = _scan(scan)
        results["witness_count"] = int(w.n.size)
        results["witnesses"] = _witness_rows(w)
        counterexamples = list(scan.counterexamples)
        passed = scan.ok
    elif isinstance(result, tuple) and all(isinstance(r, ScanReport) for r in result):
        results = {"scans": [_scan(r) for r in result]}
        counterexamples = [{"scan_id": r.scan_id, "cases": r.counterexamples} for r in result if r.counterexamples]
        passed = all(r.ok for r in result)
    elif isinstance(result, ParamScan):
        results = {
            "N": result.N,
            "best_s": result.best_s,
            "best_alpha": result.best_alpha,
            "best_r4_lower": result.best_r4,
            "surface": [list(row) for row in result.surface],
            "excluded": [list(row) for row in result.excluded],
        }
        passed = result.best_r4 > 0
    elif isinstance(result, LowerBoundS):
        results = result._asdict()
        passed = result.value > 0
    else:
        raise TypeError(f"cannot serialise result of type {type(result).__name__}")
    return _plain(
        {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "inputs": inputs or {},
            "constants_ledger": ledger,
            "results": results,
            "counterexamples": counterexamples,
            "passed": bool(passed),
            "runtime_seconds": runtime_seconds,
        }
    )


def exit_status(doc: Dict[str, Any]) -> int:
    return 0 if doc["passed"] else 1


def _flatten(obj: Any, prefix: str = "") -> Iterable[Tuple[str, Any]]:
    if isinstance(obj, dict) and obj:
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else k)
    elif isinstance(obj, list) and obj:
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _render_text(doc: Dict[str, Any]) -> str:
    out = [f"{doc['command']}: {'PASS' if doc['passed'] else 'FAIL'}"]
    for k, v in doc["inputs"].items():
        out.append(f"  input {k} = {v}")
    for e in doc["constants_ledger"]:
        rel = "<=" if e["direction"] == "upper" else ">="
        mark = "ok" if e["ok"] else "VIOLATED"
        out.append(f"  ledger {e['name']:>12}: {e['computed']:.10g} {rel} {e['paper_value']}  {mark}")
    for key, value in _flatten(doc["results"]):
        if key.startswith(("witnesses", "surface", "excluded")):
            continue
        out.append(f"  {key} = {value}")
    out.append(f"  counterexamples: {len(doc['counterexamples'])}")
    out.append(f"  runtime_seconds: {doc['runtime_seconds']:.3f}")
    return "\n".join(out) + "\n"


def emit_report(result: Any, fmt: str = "json", **kwargs) -> str:
    """Serialise ``result`` (a module result or an existing document)."""
    doc = result if isinstance(result, dict) else to_document(result, **kwargs)
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in _flatten(doc):
            writer.writerow([key, json.dumps(value)])
        return buf.getvalue()
    if fmt == "text":
        return _render_text(doc)
    raise ValueError(f"unknown format {fmt!r}")


def _set_path(root: dict, key: str, value: Any) -> None:
    parts: List[Any] = []
    for token in key.replace("[", ".[").split("."):
        if token.startswith("["):
            parts.append(int(token[1:-1]))
        elif token:
            parts.append(token)
    node: Any = root
    for part, nxt in zip(parts, parts[1:] + [None]):
        if isinstance(part, int):
            while len(node) <= part:
                node.append(None)
        if nxt is None:
            node[part] = value
            return
        if isinstance(part, int):
            if node[part] is None:
                node[part] = [] if isinstance(nxt, int) else {}
        else:
            node.setdefault(part, [] if isinstance(nxt, int) else {})
        node = node[part]


def parse_report(text: str, fmt: str = "json") -> Dict[str, Any]:
    """Inverse of :func:`emit_report` for the JSON and CSV formats."""
    if fmt == "json":
        return json.loads(text)
    if fmt == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        doc: Dict[str, Any] = {}
        for key, value in rows[1:]:
            _set_path(doc, key, json.loads(value))
        return doc
    raise ValueError(f"cannot parse format {fmt!r}")

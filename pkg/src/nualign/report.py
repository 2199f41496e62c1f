"""Alignment report documents: versioned JSON, deterministic bytes.

A report round-trips: loading it reconstructs the alignment (moves with
their events, bindings and the full order closure), and re-serializing
the reconstruction yields the identical document.
"""

from __future__ import annotations

import json

from .align import Alignment, CostTable, Move, move_cost
from .eventlog import Event
from .poset import Multiset, Poset
from .rcnu import RcNuNet, case_of_mode

SCHEMA = "nualign-report"
SCHEMA_VERSION = "1.0"


class ReportError(ValueError):
    pass


def _event_to_json(event: Event):
    roles = dict(event.roles)
    return {
        "index": event.index,
        "activity": event.activity,
        "timestamp": event.timestamp,
        "case": event.case,
        "resources": [
            {"role": roles.get(inst, "?"), "instance": inst, "count": n}
            for inst, n in sorted(event.resources.items())
        ],
    }


def _event_from_json(doc) -> Event:
    resources = Multiset({
        entry["instance"]: int(entry["count"]) for entry in doc["resources"]
    })
    roles = tuple(sorted(
        (entry["instance"], entry["role"]) for entry in doc["resources"]
    ))
    return Event(int(doc["index"]), doc["activity"], float(doc["timestamp"]),
                 doc["case"], resources, roles)


def _move_case(net: RcNuNet | None, move: Move):
    if move.event is not None:
        return move.event.case
    if net is not None and move.transition is not None:
        try:
            return case_of_mode(net, move.transition, move.binding())
        except (KeyError, ValueError):
            return None
    for var, value in move.mode:
        if var == "c":
            return value
    return None


def build_report(alignment: Alignment, mode: str,
                 costs: CostTable = CostTable(),
                 net: RcNuNet | None = None,
                 violations=(), warnings=()) -> dict:
    moves = []
    per_case = {}
    for i, mv in enumerate(alignment.moves):
        cost = move_cost(mv, costs)
        case = _move_case(net, mv)
        if case is not None:
            per_case[case] = per_case.get(case, 0) + cost
        moves.append({
            "index": i,
            "kind": mv.kind,
            "activity": mv.label,
            "case": case,
            "transition": mv.transition,
            "bindings": {k: v for k, v in mv.mode},
            "event": _event_to_json(mv.event) if mv.event is not None else None,
            "cost": cost,
        })
    deviations = sum(
        1 for mv in alignment.moves
        if mv.kind == "log" or (mv.kind == "model" and mv.label is not None)
    )
    return {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "mode": mode,
        "costs": {"sync": costs.sync, "tau": costs.tau, "visible": costs.visible},
        "total_cost": alignment.cost(costs),
        "deviation_moves": deviations,
        "per_case_cost": dict(sorted(per_case.items())),
        "moves": moves,
        "order": sorted(
            [i, j] for i, j in alignment.order.closed_pairs()
        ),
        "violations": list(violations),
        "warnings": list(warnings),
    }


def violation_entry(realignment, comp) -> dict:
    """Report entry for one realigned interval."""
    def describe(indices):
        out = []
        for i in sorted(indices):
            mv = comp.moves[i]
            out.append({
                "kind": mv.kind,
                "activity": mv.label,
                "case": comp.case_of[i],
            })
        return out

    a, b = realignment.bounds
    return {
        "interval_lower": describe(a),
        "interval_upper": describe(b),
        "moves_replaced": len(realignment.region),
        "realignment_cost": realignment.alignment.cost(),
        "fallback": realignment.fallback,
    }


def report_to_alignment(doc: dict) -> Alignment:
    if doc.get("schema") != SCHEMA:
        raise ReportError(f"not a {SCHEMA} document")
    major = str(doc.get("schema_version", "")).split(".")[0]
    if major != SCHEMA_VERSION.split(".")[0]:
        raise ReportError(f"unsupported schema_version {doc.get('schema_version')!r}")
    moves = []
    for entry in doc["moves"]:
        event = _event_from_json(entry["event"]) if entry["event"] else None
        moves.append(Move(
            entry["kind"],
            event=event,
            transition=entry["transition"],
            mode=tuple(sorted(entry["bindings"].items())),
            label=entry["activity"],
        ))
    order = Poset(range(len(moves)), [tuple(p) for p in doc["order"]])
    return Alignment(tuple(moves), order)


def dumps_report(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_report(path) -> dict:
    with open(path, encoding="utf-8") as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as exc:
            raise ReportError(f"{path}: invalid JSON: {exc}") from exc

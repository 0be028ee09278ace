"""Debug trace: line-delimited JSON records of a rewrite run.

The first record is a full graph snapshot; every following record describes
one step (sequence enter/exit, rule applied/failed) with enough delta
information that replaying the records reproduces the final graph.  The
browser viewer consumes exactly this format (docs/trace-format.md).
"""

from __future__ import annotations

import json

from .errors import GraftError

KINDS = ("snapshot", "sequence-enter", "rule-applied", "rule-failed",
         "rule-stale", "sequence-exit")

_REQUIRED = {
    "snapshot": ("graph",),
    "sequence-enter": ("text",),
    "rule-applied": ("rule", "bindings", "delta", "emitted"),
    "rule-failed": ("rule",),
    "rule-stale": ("rule",),
    "sequence-exit": ("result",),
}


class TraceRecorder:
    """Collects events (shape produced by sequences' trace hook) with ordinals."""

    def __init__(self, graph):
        self.events = [{"ordinal": 0, "kind": "snapshot", "graph": graph.snapshot()}]

    def __call__(self, event):
        event = dict(event)
        event["ordinal"] = len(self.events)
        self.events.append(event)

    def applied_count(self, rule=None):
        return sum(
            1 for e in self.events
            if e["kind"] == "rule-applied" and (rule is None or e["rule"] == rule)
        )


def write_trace(events, sink):
    for event in events:
        validate_record(event)
        sink.write(json.dumps(event, sort_keys=True) + "\n")


def read_trace(source):
    events = []
    for lineno, line in enumerate(source, 1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise GraftError(f"trace record {lineno} is not valid JSON: {exc}") from None
        validate_record(record, lineno)
        events.append(record)
    if not events or events[0]["kind"] != "snapshot":
        raise GraftError("trace must start with a snapshot record")
    return events


def validate_record(record, lineno=None):
    where = f"record {lineno}" if lineno else "record"
    kind = record.get("kind")
    if kind not in KINDS:
        raise GraftError(f"{where} has unknown kind {kind!r}")
    if "ordinal" not in record:
        raise GraftError(f"{where} has no ordinal")
    for field in _REQUIRED[kind]:
        if field not in record:
            raise GraftError(f"{where} ({kind}) is missing field {field!r}")
    return record


def replay(events, upto=None):
    """Materialize the plain-data graph state after applying events[:upto]."""
    if not events or events[0]["kind"] != "snapshot":
        raise GraftError("trace must start with a snapshot record")
    snapshot = events[0]["graph"]
    nodes = {n["id"]: dict(n, attrs=dict(n["attrs"])) for n in snapshot["nodes"]}
    edges = {e["id"]: dict(e, attrs=dict(e["attrs"])) for e in snapshot["edges"]}
    for event in events[1:upto]:
        if event["kind"] != "rule-applied":
            continue
        delta = event["delta"]
        for n in delta["createdNodes"]:
            nodes[n["id"]] = dict(n, attrs=dict(n["attrs"]))
        for e in delta["createdEdges"]:
            edges[e["id"]] = dict(e, attrs=dict(e["attrs"]))
        for d in delta["deleted"]:
            (nodes if d["kind"] == "node" else edges).pop(d["id"], None)
        for change in delta["attrChanges"]:
            el = nodes.get(change["el"]) or edges.get(change["el"])
            if el is None:
                raise GraftError(f"attribute change for unknown element {change['el']}")
            el["attrs"][change["attr"]] = change["value"]
    return {"nodes": nodes, "edges": edges}


def replay_equals_graph(events, graph):
    """True iff replaying the trace lands on the given graph's current state."""
    state = replay(events)
    snap = graph.snapshot()
    got_nodes = {n["id"]: (n["cls"], n["attrs"]) for n in snap["nodes"]}
    want_nodes = {i: (n["cls"], n["attrs"]) for i, n in state["nodes"].items()}
    got_edges = {e["id"]: (e["cls"], e["src"], e["tgt"], e["attrs"]) for e in snap["edges"]}
    want_edges = {
        i: (e["cls"], e["src"], e["tgt"], e["attrs"]) for i, e in state["edges"].items()
    }
    return got_nodes == want_nodes and got_edges == want_edges

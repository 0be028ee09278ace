"""The state-machine extraction case: fixtures, rule files, driver, oracle.

Everything the pipeline does is expressed in the shipped DSL rule files
(rules/extract.grg, rules/export.gri) and driven through the sequence
language; this module only loads those artifacts and offers one-call
entry points.  The brute-force oracle in oracle.py is the only hard-coded
traversal and exists solely for verification.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from ..errors import GraftError
from ..modelio import import_xmi, load_schema, machine_signature
from ..rules import apply_all, merge_rulesets, parse_rules
from ..sequences import ExecutionEnv, execute
from .genfixture import (
    TCP_EXPECTED_STATES,
    TCP_EXPECTED_TRANSITIONS,
    build_graph,
    emit_xmi,
    make_large_model,
    make_random_model,
    make_tcp_model,
)
from .oracle import MachineValue, brute_force_extract

_PKG = "graft.reengineering"


def fixture_path(name):
    return resources.files(_PKG) / "fixtures" / name


def rules_path(name):
    return resources.files(_PKG) / "rules" / name


def script_path():
    return resources.files(_PKG) / "scripts" / "reengineering.grs"


def case_schema():
    """Schema of the case: mini-Java + state machine + helper edges."""
    return load_schema([
        fixture_path("java.ecore"),
        fixture_path("statemachine.ecore"),
        fixture_path("helper.gm"),
    ])


def case_rules(schema):
    rs = parse_rules(rules_path("extract.grg").read_text(), schema, "extract.grg")
    extra = parse_rules(rules_path("export.gri").read_text(), schema, "export.gri")
    return merge_rulesets(rs, extra)


def extraction_sequence():
    """The xgrs line of the shipped script (single source of truth)."""
    for line in script_path().read_text().splitlines():
        stripped = line.strip()
        if stripped.startswith("xgrs "):
            return stripped[len("xgrs "):]
    raise GraftError("shipped script has no xgrs command")


def load_tcp_small(schema=None):
    schema = schema or case_schema()
    with fixture_path("tcp_small.xmi").open("rb") as fh:
        return import_xmi(fh, schema)


@dataclass(frozen=True)
class ExtractionSummary:
    states: int
    transitions: int


def _check_state_root(graph):
    roots = [
        c for c in graph.nodes_of_type("java_Class", True)
        if graph.get_attr(c, "name") == "State" and graph.get_attr(c, "isAbstract")
    ]
    if len(roots) != 1:
        raise GraftError(
            f"expected exactly one abstract class named State, found {len(roots)}"
        )


def extract_states(graph, rules=None):
    """Create the machine and its states; returns the number of states."""
    _check_state_root(graph)
    rules = rules or case_rules(graph.schema)
    before = sum(1 for _ in graph.nodes_of_type("sm_State", True))
    apply_all(graph, rules, "createStates")
    return sum(1 for _ in graph.nodes_of_type("sm_State", True)) - before


def extract_transitions(graph, rules=None):
    """Create transitions for activation calls; returns how many survived."""
    rules = rules or case_rules(graph.schema)
    before = sum(1 for _ in graph.nodes_of_type("sm_Transition", True))
    env = ExecutionEnv(graph=graph, rules=rules)
    execute(env, "[createTransitions] ;> [bindSourceState] ;> [pruneSourcelessTransitions]")
    return sum(1 for _ in graph.nodes_of_type("sm_Transition", True)) - before


def assign_triggers(graph, rules=None):
    rules = rules or case_rules(graph.schema)
    env = ExecutionEnv(graph=graph, rules=rules)
    execute(
        env,
        "[triggerFromMethod] ;> [triggerFromSwitchCase] ;> [triggerFromCatch] ;> [triggerFallback]",
    )


def assign_actions(graph, rules=None):
    rules = rules or case_rules(graph.schema)
    env = ExecutionEnv(graph=graph, rules=rules)
    execute(env, "[actionFromSend] ;> [actionFallback]")


def run_extraction(graph, emit_sink=None, trace=None, rules=None):
    """Run the shipped extraction sequence; emits XMI text into emit_sink."""
    _check_state_root(graph)
    rules = rules or case_rules(graph.schema)
    env = ExecutionEnv(graph=graph, rules=rules, emit_sink=emit_sink, trace=trace)
    execute(env, extraction_sequence())
    return ExtractionSummary(
        states=sum(1 for _ in graph.nodes_of_type("sm_State", True)),
        transitions=sum(1 for _ in graph.nodes_of_type("sm_Transition", True)),
    )


def machine_of(graph):
    """Machine value of an extracted graph, comparable with the oracle's."""
    states, transitions = machine_signature(graph)
    return MachineValue(states, transitions)


__all__ = [
    "ExtractionSummary",
    "MachineValue",
    "TCP_EXPECTED_STATES",
    "TCP_EXPECTED_TRANSITIONS",
    "assign_actions",
    "assign_triggers",
    "brute_force_extract",
    "build_graph",
    "case_rules",
    "case_schema",
    "emit_xmi",
    "extract_states",
    "extract_transitions",
    "extraction_sequence",
    "fixture_path",
    "load_tcp_small",
    "machine_of",
    "make_large_model",
    "make_random_model",
    "make_tcp_model",
    "run_extraction",
    "script_path",
]

"""Brute-force reference extraction: plain graph traversals, no rules engine.

Used only by tests to check the rule-driven pipeline.  Implements the same
behavior specification: states for concrete classes below the abstract
"State" class; transitions for <Class>.Instance().activate() statements
whose enclosing class owns a state; trigger priority non-run method, then
switch case on the ascent path, then catch block, then "--"; action from a
send(<enum constant>) statement in one of the containers on the ascent
path, else "--".  The rules are applied on all matches per batch, so where
one transition has several candidates for one rule (nested switches, two
sends in scope), the last candidate in deterministic scan order decides;
the scans below follow the same order the matcher enumerates.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import GraftError

CONTAINMENT_EDGES = (
    "java_Class_methods",
    "java_Method_body",
    "java_Block_statements",
    "java_Switch_cases",
    "java_SwitchCase_statements",
    "java_Try_body",
    "java_Try_catches",
    "java_CatchBlock_body",
)


@dataclass(frozen=True)
class MachineValue:
    states: frozenset  # of state names
    transitions: frozenset  # of (source, target, trigger, action)


def brute_force_extract(graph):
    """Extract the machine value by direct traversal."""
    root = _state_root(graph)
    state_classes = _concrete_descendants(graph, root)
    states = frozenset(graph.get_attr(c, "name") for c in state_classes)
    state_ids = {c.id for c in state_classes}

    transitions = set()
    for es in graph.nodes_of_type("java_ExpressionStatement", True):
        target_cls = _activation_target(graph, es)
        if target_cls is None or target_cls.id not in state_ids:
            continue
        path = _ascent_path(graph, es)
        if path is None:
            continue
        source_cls = path[-1]
        if source_cls.id not in state_ids:
            continue
        trigger = _trigger_of(graph, path)
        action = _action_of(graph, es, path)
        transitions.add(
            (
                graph.get_attr(source_cls, "name"),
                graph.get_attr(target_cls, "name"),
                trigger,
                action,
            )
        )
    return MachineValue(states, frozenset(transitions))


def _state_root(graph):
    roots = [
        c
        for c in graph.nodes_of_type("java_Class", True)
        if graph.get_attr(c, "name") == "State" and graph.get_attr(c, "isAbstract")
    ]
    if len(roots) != 1:
        raise GraftError(f"expected exactly one abstract class named State, found {len(roots)}")
    return roots[0]


def _concrete_descendants(graph, root):
    # reachability over reversed extends edges, skipping abstract classes
    out = []
    seen = {root.id}
    work = [root]
    while work:
        cur = work.pop()
        for edge in graph.incoming(cur, "java_Class_extends"):
            child = edge.src
            if child.id in seen:
                continue
            seen.add(child.id)
            if not graph.get_attr(child, "isAbstract"):
                out.append(child)
            work.append(child)
    return out


def _activation_target(graph, es):
    """Class C for an `C.Instance().activate()` expression statement, else None."""
    exprs = [e.tgt for e in graph.outgoing(es, "java_ExpressionStatement_expression")]
    if len(exprs) != 1 or exprs[0].cls != "java_MethodCall":
        return None
    call = exprs[0]
    if graph.get_attr(call, "methodName") != "activate":
        return None
    recvs = [e.tgt for e in graph.outgoing(call, "java_MethodCall_target")]
    if len(recvs) != 1 or recvs[0].cls != "java_MethodCall":
        return None
    inst = recvs[0]
    if graph.get_attr(inst, "methodName") != "Instance":
        return None
    targets = [e.tgt for e in graph.outgoing(inst, "java_MethodCall_target")]
    if len(targets) != 1 or targets[0].cls != "java_Class":
        return None
    return targets[0]


def _containment_parent(graph, node):
    for edge in graph.incoming(node):
        if edge.cls in CONTAINMENT_EDGES:
            return edge.src
    return None


def _ascent_path(graph, es):
    """Nodes from the statement up to (and including) the enclosing class."""
    path = [es]
    cur = es
    while True:
        parent = _containment_parent(graph, cur)
        if parent is None:
            return None
        path.append(parent)
        if parent.cls == "java_Class":
            return path
        cur = parent


def _trigger_of(graph, path):
    method = next(n for n in path if n.cls == "java_Method")
    name = graph.get_attr(method, "name")
    if name != "run":
        return name
    trigger = None
    for node in path:  # last one on the way up wins (batch order)
        if node.cls == "java_SwitchCase":
            trigger = graph.get_attr(node, "constantName")
    if trigger is not None:
        return trigger
    for node in path:
        if node.cls == "java_CatchBlock":
            trigger = graph.get_attr(node, "exceptionType")
    return trigger if trigger is not None else "--"


def _action_of(graph, es, path):
    # containers linked to the transition, scanned in link order: the
    # statement itself, the source class, then the ascent path inside-out;
    # the last qualifying send decides
    action = None
    for container in [es, path[-1]] + path[1:]:
        for edge in graph.outgoing(container):
            child = edge.tgt
            if child.cls != "java_ExpressionStatement":
                continue
            flag = _send_flag(graph, child)
            if flag is not None:
                action = flag
    return action if action is not None else "--"


def _send_flag(graph, stmt):
    exprs = [e.tgt for e in graph.outgoing(stmt, "java_ExpressionStatement_expression")]
    if len(exprs) != 1 or exprs[0].cls != "java_MethodCall":
        return None
    call = exprs[0]
    if graph.get_attr(call, "methodName") != "send":
        return None
    flag = None
    for arg_edge in graph.outgoing(call, "java_MethodCall_arguments"):
        ref = arg_edge.tgt
        if ref.cls != "java_EnumReference":
            continue
        for const_edge in graph.outgoing(ref, "java_EnumReference_constant"):
            if const_edge.tgt.cls == "java_EnumConstant":
                flag = graph.get_attr(const_edge.tgt, "name")
    return flag

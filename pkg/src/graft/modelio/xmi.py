"""XMI instance import and state-machine XMI export.

Import: one node per model element; containment nesting becomes containment
edges; cross-references (attribute values holding ids or positional paths,
whitespace-separated) are resolved in a second pass so forward references
work.  Every node lands in the graph's name index under its xmi:id, or its
positional path when no id is given.

Export: the emitted document is produced in five passes (id assignment,
prefix, states, transitions, suffix) and is byte-deterministic.  Ids are
positional paths (/0/@states.N style); the importer accepts both those and
plain ids.  The exact template is documented in docs/xmi-format.md.
"""

from __future__ import annotations

import io
import warnings
import xml.etree.ElementTree as ET
from xml.sax.saxutils import escape, quoteattr

from ..errors import ExportError, ImportError_
from ..graph import Graph

XMI_NS = "http://www.omg.org/XMI"
XSI_NS = "http://www.w3.org/2001/XMLSchema-instance"

SM_MACHINE = "sm_StateMachine"
SM_STATE = "sm_State"
SM_TRANSITION = "sm_Transition"
SM_STATES_EDGE = "sm_StateMachine_states"
SM_TRANSITIONS_EDGE = "sm_StateMachine_transitions"
SM_SOURCE_EDGE = "sm_Transition_source"
SM_TARGET_EDGE = "sm_Transition_target"


def _local(tag):
    return tag.rsplit("}", 1)[-1]


def _ns(tag):
    if tag.startswith("{"):
        return tag[1:].split("}", 1)[0]
    return ""


def _rootify(source):
    if isinstance(source, ET.Element):
        return source
    return ET.parse(source).getroot()


class _Importer:
    def __init__(self, schema, seed_order="creation"):
        self.schema = schema
        self.graph = Graph(schema, seed_order=seed_order)
        self.by_id = {}
        self.by_path = {}
        self.pending_refs = []  # (node, edge_cls_name, ref_text, context)
        self.pkg_by_uri = {p.ns_uri: p.name for p in schema.packages if p.ns_uri}
        self.pkg_by_prefix = {p.ns_prefix: p.name for p in schema.packages if p.ns_prefix}

    def run(self, root):
        if _local(root.tag) == "XMI" and _ns(root.tag) == XMI_NS:
            roots = list(root)
        else:
            roots = [root]
        for idx, elem in enumerate(roots):
            self._element(elem, None, None, f"/{idx}")
        self._resolve_refs()
        return self.graph

    # -- pass 1: elements, attributes, containment ---------------------------

    def _element(self, elem, parent_node, via_edge_cls, path):
        cls_name = self._class_of(elem, via_edge_cls)
        node = self.graph.add_node(cls_name)
        self.by_path[path] = node
        xmi_id = elem.get(f"{{{XMI_NS}}}id") or elem.get("xmi:id")
        if xmi_id is not None:
            if xmi_id in self.by_id:
                raise ImportError_(f"duplicate xmi:id {xmi_id!r}")
            self.by_id[xmi_id] = node
            self.graph.set_name(node, xmi_id)
        else:
            self.graph.set_name(node, path)
        if parent_node is not None:
            self.graph.add_edge(via_edge_cls, parent_node, node)
        self._attributes(elem, node, cls_name)
        counters = {}
        for child in elem:
            ref = _local(child.tag)
            edge_cls = self._find_reference(cls_name, ref)
            if edge_cls is None:
                raise ImportError_(
                    f"unknown reference {ref!r} on {cls_name} (element {path})"
                )
            if not edge_cls.containment:
                raise ImportError_(
                    f"child element {ref!r} of {cls_name} is not a containment reference"
                )
            n = counters.get(ref, 0)
            counters[ref] = n + 1
            self._element(child, node, edge_cls.name, f"{path}/@{ref}.{n}")

    def _class_of(self, elem, via_edge_cls):
        xsi = elem.get(f"{{{XSI_NS}}}type") or elem.get("xsi:type")
        if xsi:
            prefix, _, local = xsi.rpartition(":")
            pkg = self.pkg_by_prefix.get(prefix)
            if pkg is None:
                raise ImportError_(f"xsi:type {xsi!r} has an unknown package prefix")
            name = f"{pkg}_{local}"
            if name not in self.schema.node_classes:
                raise ImportError_(f"unknown type {name!r} from xsi:type {xsi!r}")
            return name
        if via_edge_cls is None:
            uri = _ns(elem.tag)
            pkg = self.pkg_by_uri.get(uri)
            if pkg is None:
                raise ImportError_(f"no imported package for namespace {uri!r}")
            name = f"{pkg}_{_local(elem.tag)}"
            if name not in self.schema.node_classes:
                raise ImportError_(f"unknown type {name!r}")
            return name
        target = self.schema.edge_classes[via_edge_cls].target
        if target is None:
            raise ImportError_(f"reference {via_edge_cls} has no recorded target class")
        if self.schema.node_classes[target].is_abstract:
            raise ImportError_(
                f"element under reference {via_edge_cls} needs an explicit xsi:type "
                f"({target} is abstract)"
            )
        return target

    def _attributes(self, elem, node, cls_name):
        attrs = self.schema.attributes_of(cls_name)
        for key, value in elem.attrib.items():
            if key.startswith(f"{{{XMI_NS}}}") or key.startswith(f"{{{XSI_NS}}}"):
                continue
            if key in ("xmi:id", "xsi:type") or key.startswith("xmlns"):
                continue
            if key in attrs:
                self.graph.set_attr(node, key, _parse_value(attrs[key].value_type, value, key))
                continue
            edge_cls = self._find_reference(cls_name, key)
            if edge_cls is not None:
                self.pending_refs.append((node, edge_cls.name, value, key))
                continue
            warnings.warn(f"ignoring unknown attribute {key!r} on {cls_name}")

    def _find_reference(self, cls_name, ref_name):
        for anc in self.schema.edge_classes.values():
            if anc.source is None:
                continue
            if not anc.name.endswith(f"_{ref_name}"):
                continue
            if anc.name != f"{anc.source}_{ref_name}":
                continue
            if self.schema.is_subtype_of(cls_name, anc.source):
                return anc
        return None

    # -- pass 2: cross references ----------------------------------------------

    def _resolve_refs(self):
        for node, edge_cls, text, ctx in self.pending_refs:
            for token in text.split():
                target = self._resolve_token(token)
                if target is None:
                    raise ImportError_(
                        f"unresolvable reference {token!r} in {ctx!r}"
                    )
                self.graph.add_edge(edge_cls, node, target)

    def _resolve_token(self, token):
        token = token.lstrip("#")
        if token in self.by_id:
            return self.by_id[token]
        if token.startswith("//"):
            token = "/0" + token[1:]
        return self.by_path.get(token)


def import_xmi(source, schema, seed_order="creation"):
    """Import an XMI document into a fresh graph conforming to `schema`."""
    return _Importer(schema, seed_order).run(_rootify(source))


def _parse_value(vt, text, key):
    try:
        if vt.kind == "string":
            return text
        if vt.kind == "integer":
            return int(text)
        if vt.kind == "double":
            return float(text)
        if vt.kind == "boolean":
            if text in ("true", "false"):
                return text == "true"
            raise ValueError(text)
        if vt.kind == "enum":
            return text  # validated by set_attr
    except ValueError:
        raise ImportError_(f"cannot parse {text!r} as {vt} for attribute {key!r}") from None
    raise ImportError_(f"attribute {key!r} has unsupported XMI type {vt}")


# ---------------------------------------------------------------------------
# State machine export
# ---------------------------------------------------------------------------

def export_state_machine_xmi(graph, sink=None):
    """Serialize the graph's single state machine; returns the bytes written."""
    machines = list(graph.nodes_of_type(SM_MACHINE, True))
    if len(machines) != 1:
        raise ExportError(f"expected exactly one state machine node, found {len(machines)}")
    pkg = next((p for p in graph.schema.packages if p.name == "sm"), None)
    ns_uri = pkg.ns_uri if pkg else "http://sm/1.0"

    # pass 1: assign ids in creation order
    states = sorted(graph.nodes_of_type(SM_STATE, True), key=lambda n: n.id)
    transitions = sorted(graph.nodes_of_type(SM_TRANSITION, True), key=lambda n: n.id)
    ids = {}
    for i, s in enumerate(states):
        ids[s.id] = f"/0/@states.{i}"
    for i, t in enumerate(transitions):
        ids[t.id] = f"/0/@transitions.{i}"

    out = io.StringIO()
    # pass 2: prefix
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(
        f'<sm:StateMachine xmi:version="2.0" xmlns:xmi="{XMI_NS}" '
        f'xmlns:xsi="{XSI_NS}" xmlns:sm="{escape(ns_uri)}">\n'
    )
    # pass 3: states
    for s in states:
        out.write(f"  <states name={quoteattr(graph.get_attr(s, 'name'))}/>\n")
    # pass 4: transitions
    for t in transitions:
        src = _single_endpoint(graph, t, SM_SOURCE_EDGE)
        tgt = _single_endpoint(graph, t, SM_TARGET_EDGE)
        out.write(
            "  <transitions"
            f" trigger={quoteattr(graph.get_attr(t, 'trigger'))}"
            f" action={quoteattr(graph.get_attr(t, 'action'))}"
            f" source={quoteattr(ids[src.id])}"
            f" target={quoteattr(ids[tgt.id])}/>\n"
        )
    # pass 5: suffix
    out.write("</sm:StateMachine>\n")
    data = out.getvalue().encode("utf-8")
    if sink is not None:
        sink.write(data)
    return data


def _single_endpoint(graph, transition, edge_cls):
    edges = list(graph.outgoing(transition, edge_cls))
    if len(edges) != 1:
        raise ExportError(
            f"transition #{transition.id} has {len(edges)} {edge_cls} edges, expected 1"
        )
    return edges[0].tgt


def machine_signature(graph):
    """Canonical value of the state machine: state names + transition tuples."""
    states = frozenset(
        graph.get_attr(s, "name") for s in graph.nodes_of_type(SM_STATE, True)
    )
    transitions = frozenset(
        (
            graph.get_attr(_single_endpoint(graph, t, SM_SOURCE_EDGE), "name"),
            graph.get_attr(_single_endpoint(graph, t, SM_TARGET_EDGE), "name"),
            graph.get_attr(t, "trigger"),
            graph.get_attr(t, "action"),
        )
        for t in graph.nodes_of_type(SM_TRANSITION, True)
    )
    return states, transitions

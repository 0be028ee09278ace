"""GraphViz DOT export with containment nesting.

Containment-configured edges turn container nodes into cluster subgraphs
holding their children (the container's own node is drawn inside its
cluster).  Per-class colors, shapes, label templates, and visibility come
from a LayoutConfig; the same JSON file drives the browser trace viewer.
"""

from __future__ import annotations

import json
import re

from ..errors import GraftError


class LayoutConfig:
    """Per-class rendering options plus the set of containment edge classes."""

    def __init__(self, containment=(), classes=None):
        self.containment = list(containment)
        self.classes = classes or {}  # class name -> {color, shape, label, visible}

    @classmethod
    def from_json(cls, text):
        data = json.loads(text) if isinstance(text, str) else text
        return cls(data.get("containment", ()), data.get("classes", {}))

    @classmethod
    def load(cls, path):
        return cls.from_json(open(path, encoding="utf-8").read())

    def validate(self, schema):
        for name in self.containment:
            if name not in schema.edge_classes:
                raise GraftError(f"layout containment class {name!r} is not an edge class")
        for name in self.classes:
            if not schema.has_class(name):
                raise GraftError(f"layout class {name!r} does not exist in the schema")
        return self

    def option(self, cls_name, key, default=None):
        return self.classes.get(cls_name, {}).get(key, default)

    def visible(self, cls_name):
        return self.option(cls_name, "visible", True)


_LABEL_FIELD = re.compile(r"\{(\w+)\}")


def _label(graph, el, config):
    template = config.option(el.cls, "label")
    if template is None:
        return el.cls

    def sub(match):
        try:
            return str(graph.get_attr(el, match.group(1)))
        except GraftError:
            return ""

    return _LABEL_FIELD.sub(sub, template)


def _esc(text):
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(graph, config=None, sink=None):
    """Render the graph as DOT text; returns the string written to sink."""
    config = config or LayoutConfig()
    config.validate(graph.schema)
    schema = graph.schema

    hidden_nodes = set()
    for node in graph.nodes():
        if not config.visible(node.cls):
            hidden_nodes.add(node.id)

    # containment forest: first containment edge wins; cycles broken by
    # dropping the closing parent link
    parent = {}
    warnings = []
    for cls in config.containment:
        for edge in graph.edges_of_type(cls, True):
            child, holder = edge.tgt, edge.src
            if child.id in parent or child.id in hidden_nodes or holder.id in hidden_nodes:
                continue
            parent[child.id] = holder
    for node in graph.nodes():
        seen = []
        cur = node
        while cur is not None and cur.id in parent:
            if cur.id in [n.id for n in seen]:
                dropped = parent.pop(seen[-1].id)
                warnings.append(
                    f"containment cycle broken at n{seen[-1].id} -> n{dropped.id}"
                )
                break
            seen.append(cur)
            cur = parent.get(cur.id)

    children = {}
    for child_id, holder in parent.items():
        children.setdefault(holder.id, []).append(child_id)
    node_by_id = {n.id: n for n in graph.nodes()}

    lines = ["digraph G {"]
    for w in sorted(set(warnings)):
        lines.append(f"  // warning: {w}")
    lines.append("  compound=true;")

    def node_stmt(node, indent):
        opts = [f'label="{_esc(_label(graph, node, config))}"']
        shape = config.option(node.cls, "shape")
        if shape:
            opts.append(f"shape={shape}")
        color = config.option(node.cls, "color")
        if color:
            opts.append(f'fillcolor="{color}"')
            opts.append("style=filled")
        return f'{indent}n{node.id} [{", ".join(opts)}];'

    def emit_tree(node, indent):
        kids = children.get(node.id)
        if not kids:
            lines.append(node_stmt(node, indent))
            return
        lines.append(f"{indent}subgraph cluster_{node.id} {{")
        lines.append(node_stmt(node, indent + "  "))
        for kid_id in sorted(kids):
            emit_tree(node_by_id[kid_id], indent + "  ")
        lines.append(f"{indent}}}")

    for node in graph.nodes():
        if node.id in hidden_nodes or node.id in parent:
            continue
        emit_tree(node, "  ")

    containment_classes = set()
    for cls in config.containment:
        containment_classes.update(schema.subclasses_of(cls))
    for edge in graph.edges():
        if edge.cls in containment_classes:
            continue
        if not config.visible(edge.cls):
            continue
        if edge.src.id in hidden_nodes or edge.tgt.id in hidden_nodes:
            continue
        opts = [f'label="{_esc(_label(graph, edge, config))}"']
        color = config.option(edge.cls, "color")
        if color:
            opts.append(f'color="{color}"')
        lines.append(f'  n{edge.src.id} -> n{edge.tgt.id} [{", ".join(opts)}];')
    lines.append("}")
    text = "\n".join(lines) + "\n"
    if sink is not None:
        sink.write(text)
    return text

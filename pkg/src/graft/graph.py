"""Attributed typed multigraph store.

Elements are handed out as Node/Edge objects that stay valid until deleted;
use after delete raises StaleElementError rather than corrupting state.
Iteration is deterministic: always creation order (ids are monotonic and
never reused), optionally reversed for whole-graph candidate enumeration
when ``seed_order`` is set to "reverse".
"""

from __future__ import annotations

import heapq
from contextlib import contextmanager

from .errors import GraphError, StaleElementError
from .metamodel import SchemaError


@contextmanager
def _as_graph_error():
    try:
        yield
    except GraphError:
        raise
    except SchemaError as exc:
        raise GraphError(str(exc)) from exc


class Element:
    __slots__ = ("id", "cls", "attrs", "alive", "graph")

    def __init__(self, graph, eid, cls):
        self.graph = graph
        self.id = eid
        self.cls = cls  # class name
        self.attrs = {}
        self.alive = True

    @property
    def name(self):
        return self.graph.name_of(self)

    def __repr__(self):
        state = "" if self.alive else " (deleted)"
        return f"<{self.kind} #{self.id} {self.cls}{state}>"


class Node(Element):
    __slots__ = ("out_edges", "in_edges")
    kind = "node"

    def __init__(self, graph, eid, cls):
        super().__init__(graph, eid, cls)
        self.out_edges = []
        self.in_edges = []


class Edge(Element):
    __slots__ = ("src", "tgt")
    kind = "edge"

    def __init__(self, graph, eid, cls, src, tgt):
        super().__init__(graph, eid, cls)
        self.src = src
        self.tgt = tgt


class Graph:
    """Mutable instance graph over a fixed schema."""

    def __init__(self, schema, seed_order="creation"):
        self.schema = schema
        self.seed_order = seed_order
        self._next_id = 1
        self._nodes = {}  # id -> Node, insertion ordered
        self._edges = {}  # id -> Edge
        self._nodes_by_class = {}  # class name -> {id: Node}
        self._edges_by_class = {}
        self._names = {}  # name -> element
        self._names_rev = {}  # id -> name
        self._listeners = []

    # -- listeners (used by the debug tracer) -------------------------------

    def add_listener(self, fn):
        self._listeners.append(fn)

    def remove_listener(self, fn):
        self._listeners.remove(fn)

    def _notify(self, *event):
        for fn in self._listeners:
            fn(*event)

    # -- element lifecycle ---------------------------------------------------

    def _check_live(self, el):
        if not el.alive or el.graph is not self:
            raise StaleElementError(f"use of deleted or foreign element {el!r}")

    def add_node(self, cls_name):
        with _as_graph_error():
            cls = self.schema.node_class(cls_name)
        if cls.is_abstract:
            raise GraphError(f"cannot instantiate abstract node class {cls_name}")
        node = Node(self, self._next_id, cls_name)
        self._next_id += 1
        self._init_attrs(node)
        self._nodes[node.id] = node
        self._nodes_by_class.setdefault(cls_name, {})[node.id] = node
        self._notify("create-node", node)
        return node

    def add_edge(self, cls_name, src, tgt):
        with _as_graph_error():
            cls = self.schema.edge_class(cls_name)
        if cls.is_abstract:
            raise GraphError(f"cannot instantiate abstract edge class {cls_name}")
        self._check_live(src)
        self._check_live(tgt)
        if not isinstance(src, Node) or not isinstance(tgt, Node):
            raise GraphError("edge endpoints must be nodes")
        edge = Edge(self, self._next_id, cls_name, src, tgt)
        self._next_id += 1
        self._init_attrs(edge)
        self._edges[edge.id] = edge
        self._edges_by_class.setdefault(cls_name, {})[edge.id] = edge
        src.out_edges.append(edge)
        tgt.in_edges.append(edge)
        self._notify("create-edge", edge)
        return edge

    def _init_attrs(self, el):
        for name, decl in self.schema.attributes_of(el.cls).items():
            el.attrs[name] = self.schema.default_value(decl.value_type)

    def remove_edge(self, edge):
        self._check_live(edge)
        if not isinstance(edge, Edge):
            raise GraphError(f"remove_edge on non-edge {edge!r}")
        self._notify("delete-edge", edge)
        edge.src.out_edges.remove(edge)
        edge.tgt.in_edges.remove(edge)
        del self._edges[edge.id]
        del self._edges_by_class[edge.cls][edge.id]
        self._drop_name(edge)
        edge.alive = False

    def remove_node(self, node):
        self._check_live(node)
        if not isinstance(node, Node):
            raise GraphError(f"remove_node on non-node {node!r}")
        for edge in list(node.out_edges) + list(node.in_edges):
            if edge.alive:
                self.remove_edge(edge)
        self._notify("delete-node", node)
        del self._nodes[node.id]
        del self._nodes_by_class[node.cls][node.id]
        self._drop_name(node)
        node.alive = False

    # -- names ---------------------------------------------------------------

    def set_name(self, el, name):
        self._check_live(el)
        if name in self._names:
            raise GraphError(f"element name {name!r} already registered")
        if el.id in self._names_rev:
            del self._names[self._names_rev[el.id]]
        self._names[name] = el
        self._names_rev[el.id] = name

    def by_name(self, name):
        el = self._names.get(name)
        if el is None:
            raise GraphError(f"no element named {name!r}")
        return el

    def has_name(self, name):
        return name in self._names

    def name_of(self, el):
        return self._names_rev.get(el.id)

    def _drop_name(self, el):
        name = self._names_rev.pop(el.id, None)
        if name is not None:
            del self._names[name]

    # -- attributes ------------------------------------------------------------

    def get_attr(self, el, attr):
        self._check_live(el)
        with _as_graph_error():
            decl = self.schema.resolve_attribute(el.cls, attr)
        return el.attrs[decl.name]

    def set_attr(self, el, attr, value):
        self._check_live(el)
        with _as_graph_error():
            decl = self.schema.resolve_attribute(el.cls, attr)
            value = self.schema.check_value(decl.value_type, value)
        old = el.attrs[decl.name]
        el.attrs[decl.name] = value
        self._notify("set-attr", el, decl.name, old, value)
        return value

    # -- iteration ---------------------------------------------------------------

    def node_count(self):
        return len(self._nodes)

    def edge_count(self):
        return len(self._edges)

    def nodes(self):
        return iter(list(self._nodes.values()))

    def edges(self):
        return iter(list(self._edges.values()))

    def _typed(self, table, cls_name, include_subtypes, kind):
        with _as_graph_error():
            if kind == "node":
                self.schema.node_class(cls_name)
            else:
                self.schema.edge_class(cls_name)
        if include_subtypes:
            classes = self.schema.subclasses_of(cls_name)
        else:
            classes = [cls_name]
        pools = [table[c] for c in classes if c in table and table[c]]
        if len(pools) == 1:
            seq = list(pools[0].values())
        elif not pools:
            seq = []
        else:
            seq = list(heapq.merge(*(list(p.values()) for p in pools), key=lambda e: e.id))
        if self.seed_order == "reverse":
            seq.reverse()
        return iter(seq)

    def nodes_of_type(self, cls_name, include_subtypes=True):
        return self._typed(self._nodes_by_class, cls_name, include_subtypes, "node")

    def edges_of_type(self, cls_name, include_subtypes=True):
        return self._typed(self._edges_by_class, cls_name, include_subtypes, "edge")

    def outgoing(self, node, cls_name=None):
        self._check_live(node)
        return self._adjacent(node.out_edges, cls_name)

    def incoming(self, node, cls_name=None):
        self._check_live(node)
        return self._adjacent(node.in_edges, cls_name)

    def incident(self, node, cls_name=None):
        self._check_live(node)
        seq = sorted(node.out_edges + node.in_edges, key=lambda e: e.id)
        return self._adjacent(seq, cls_name)

    def _adjacent(self, edges, cls_name):
        if cls_name is None:
            return iter(list(edges))
        with _as_graph_error():
            self.schema.edge_class(cls_name)
            subs = self.schema.subtype_set(cls_name)
        return iter([e for e in edges if e.cls in subs])

    # -- whole-graph helpers --------------------------------------------------

    def snapshot(self):
        """Plain-data dump of the current graph (deterministic, for traces/tests)."""
        return {
            "nodes": [
                {
                    "id": n.id,
                    "cls": n.cls,
                    "attrs": _plain_attrs(n.attrs),
                    **({"name": self._names_rev[n.id]} if n.id in self._names_rev else {}),
                }
                for n in self._nodes.values()
            ],
            "edges": [
                {
                    "id": e.id,
                    "cls": e.cls,
                    "src": e.src.id,
                    "tgt": e.tgt.id,
                    "attrs": _plain_attrs(e.attrs),
                    **({"name": self._names_rev[e.id]} if e.id in self._names_rev else {}),
                }
                for e in self._edges.values()
            ],
        }

    def check_consistency(self):
        """Structural sweep used by tests; raises on any violation."""
        for e in self._edges.values():
            if not e.src.alive or not e.tgt.alive:
                raise GraphError(f"edge {e!r} has a dead endpoint")
            if e.src.id not in self._nodes or e.tgt.id not in self._nodes:
                raise GraphError(f"edge {e!r} endpoint not in node set")
            if e not in e.src.out_edges or e not in e.tgt.in_edges:
                raise GraphError(f"edge {e!r} missing from adjacency lists")
        for n in self._nodes.values():
            for e in n.out_edges + n.in_edges:
                if e.id not in self._edges:
                    raise GraphError(f"adjacency of {n!r} references dead edge {e!r}")
        for name, el in self._names.items():
            if not el.alive or self._names_rev.get(el.id) != name:
                raise GraphError(f"name index broken for {name!r}")
        return True


def _plain_attrs(attrs):
    out = {}
    for k, v in attrs.items():
        if isinstance(v, set):
            out[k] = sorted(v)
        else:
            out[k] = v
    return out

"""Shared schema/graph fixtures and the brute-force match oracle."""

import itertools

import pytest

from graft.graph import Graph
from graft.metamodel import AttributeDecl, SchemaBuilder, scalar


def small_schema():
    """A, B<:A, C<:A, D<:B node hierarchy; E, F<:E edges; name/num attributes."""
    b = SchemaBuilder()
    b.declare_node_class("A", attrs=[AttributeDecl("name", scalar("string")),
                                     AttributeDecl("num", scalar("integer"))])
    b.declare_node_class("B", supers=["A"])
    b.declare_node_class("C", supers=["A"])
    b.declare_node_class("D", supers=["B"])
    b.declare_edge_class("E")
    b.declare_edge_class("F", supers=["E"])
    return b.build()


@pytest.fixture
def abc_schema():
    return small_schema()


def random_graph(schema, rng, n_nodes=12, n_edges=18):
    g = Graph(schema)
    classes = ["A", "B", "C", "D"]
    edge_classes = ["E", "F", "Edge"]
    nodes = []
    for _ in range(rng.randint(1, n_nodes)):
        n = g.add_node(rng.choice(classes))
        g.set_attr(n, "name", rng.choice(["x", "y", "z"]))
        g.set_attr(n, "num", rng.randint(0, 3))
        nodes.append(n)
    for _ in range(rng.randint(0, n_edges)):
        g.add_edge(rng.choice(edge_classes), rng.choice(nodes), rng.choice(nodes))
    return g


# ---------------------------------------------------------------------------
# Exhaustive injective enumeration oracle
# ---------------------------------------------------------------------------

class FlatPattern:
    """Plain-data description mirroring a flat DSL pattern.

    nodes: [(name, cls)]; edges: [(name, cls, src, tgt)];
    conds: [callable(bindings dict name->element, graph) -> bool]
    """

    def __init__(self, nodes=(), edges=(), conds=()):
        self.nodes = list(nodes)
        self.edges = list(edges)
        self.conds = list(conds)


def exhaustive_matches(graph, pat, fixed=None, forbidden_ids=frozenset(),
                       local_injective_only=False):
    """All injective typed assignments of `pat` onto `graph`.

    fixed: name -> element for pre-bound references to an enclosing scope.
    forbidden_ids: element ids locals may not take (enclosing injectivity).
    local_injective_only: when set (negative-block semantics), locals must be
    pairwise distinct but may collide with enclosing bindings.
    Returns a set of frozenset((name, element_id)) over the local names.
    """
    fixed = fixed or {}
    schema = graph.schema
    node_names = [n for n, _ in pat.nodes if n not in fixed]
    node_pools = {}
    for name, cls in pat.nodes:
        if name in fixed:
            continue
        node_pools[name] = [n for n in graph.nodes() if schema.is_subtype_of(n.cls, cls)]
    results = set()
    blocked = frozenset() if local_injective_only else forbidden_ids

    for combo in itertools.product(*(node_pools[n] for n in node_names)):
        binding = dict(fixed)
        ids = set()
        ok = True
        for name, el in zip(node_names, combo):
            if el.id in ids or el.id in blocked:
                ok = False
                break
            ids.add(el.id)
            binding[name] = el
        if not ok:
            continue
        for edge_binding in _assign_edges(graph, pat.edges, binding, ids, blocked, 0, []):
            full = dict(binding)
            full.update(edge_binding)
            if all(cond(full, graph) for cond in pat.conds):
                results.add(
                    frozenset((n, e.id) for n, e in full.items() if n not in fixed)
                )
    return results


def _assign_edges(graph, edges, binding, used_ids, blocked, idx, acc):
    if idx == len(edges):
        yield dict(acc)
        return
    name, cls, src, tgt = edges[idx]
    schema = graph.schema
    src_el = binding.get(src)
    tgt_el = binding.get(tgt)
    for e in graph.edges():
        if not schema.is_subtype_of(e.cls, cls):
            continue
        if e.id in used_ids or e.id in blocked or any(e is b for _, b in acc):
            continue
        if src_el is not None and e.src is not src_el:
            continue
        if tgt_el is not None and e.tgt is not tgt_el:
            continue
        acc.append((name, e))
        used_ids.add(e.id)
        yield from _assign_edges(graph, edges, binding, used_ids, blocked, idx + 1, acc)
        used_ids.discard(e.id)
        acc.pop()


def match_set(matches, names=None):
    """Engine matches -> comparable set of frozenset((name, id))."""
    out = set()
    for m in matches:
        items = []
        for name, el in m.bindings.items():
            if name.startswith("$"):
                continue
            if names is not None and name not in names:
                continue
            items.append((name, el.id))
        out.add(frozenset(items))
    return out

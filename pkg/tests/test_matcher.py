"""Matcher semantics: directed cases plus brute-force oracle equivalence."""

import random

import pytest

from graft.errors import RecursionLimitError
from graft.graph import Graph
from graft.metamodel import AttributeDecl, SchemaBuilder, scalar
from graft.rules import Matcher, parse_rules, find_matches

from conftest import FlatPattern, exhaustive_matches, match_set, random_graph, small_schema


def build(schema, text):
    return parse_rules(text, schema)


@pytest.fixture
def schema():
    return small_schema()


class TestDirected:
    def test_single_node_by_subtype(self, schema):
        g = Graph(schema)
        a = g.add_node("A")
        b = g.add_node("B")
        rs = build(schema, "rule r { x:A; modify { } }")
        ms = find_matches(g, rs, "r")
        assert [m.bindings["x"].id for m in ms] == [a.id, b.id]

    def test_injectivity_within_scope(self, schema):
        g = Graph(schema)
        a = g.add_node("A")
        g.add_edge("E", a, a)
        rs = build(schema, "rule r { x:A -:E-> y:A; modify { } }")
        assert find_matches(g, rs, "r") == []  # x and y cannot share a node

    def test_self_loop_same_name(self, schema):
        g = Graph(schema)
        a = g.add_node("A")
        b = g.add_node("A")
        g.add_edge("E", a, a)
        g.add_edge("E", a, b)
        rs = build(schema, "rule r { x:A; x -:E-> x; modify { } }")
        ms = find_matches(g, rs, "r")
        assert [m.bindings["x"].id for m in ms] == [a.id]

    def test_parallel_edges_distinct(self, schema):
        g = Graph(schema)
        a, b = g.add_node("A"), g.add_node("A")
        g.add_edge("E", a, b)
        g.add_edge("E", a, b)
        rs = build(schema, "rule r { x:A -e1:E-> y:A; x -e2:E-> y; modify { } }")
        ms = find_matches(g, rs, "r")
        # two edges, two orders
        assert len(ms) == 2

    def test_condition_prunes(self, schema):
        g = Graph(schema)
        a = g.add_node("A")
        g.set_attr(a, "num", 3)
        b = g.add_node("A")
        rs = build(schema, "rule r { x:A; if { x.num == 3; } modify { } }")
        ms = find_matches(g, rs, "r")
        assert [m.bindings["x"].id for m in ms] == [a.id]

    def test_negative_vetoes(self, schema):
        g = Graph(schema)
        a, b = g.add_node("A"), g.add_node("A")
        g.add_edge("E", a, b)
        rs = build(schema, "rule r { x:A; negative { x -:E-> ; } modify { } }")
        ms = find_matches(g, rs, "r")
        assert [m.bindings["x"].id for m in ms] == [b.id]

    def test_negative_local_may_overlap_enclosing(self, schema):
        # y is bound outside; the negative's anonymous target may still
        # bind the same node, so the veto fires
        g = Graph(schema)
        a, b = g.add_node("A"), g.add_node("A")
        g.add_edge("E", a, b)
        rs = build(schema, "rule r { x:A; y:A; x -:E-> y; negative { x -:E-> ; } modify { } }")
        assert find_matches(g, rs, "r") == []

    def test_optional_never_fails(self, schema):
        g = Graph(schema)
        a = g.add_node("A")
        rs = build(schema, "rule r { x:A; optional { x -:E-> y:A; } modify { } }")
        ms = find_matches(g, rs, "r")
        assert len(ms) == 1
        assert ms[0].optional_match() is None

    def test_optional_binds_when_available(self, schema):
        g = Graph(schema)
        a, b = g.add_node("A"), g.add_node("A")
        g.add_edge("E", a, b)
        rs = build(schema, "rule r { x:A; optional { x -:E-> y:A; } modify { } }")
        ms = find_matches(g, rs, "r")
        opt = {m.bindings["x"].id: m.optional_match() for m in ms}
        assert opt[a.id].bindings["y"].id == b.id
        assert opt[b.id] is None

    def test_optional_with_negative_marker_edge(self, schema):
        # marker-edge shape: an optional whose inner negative checks a
        # marker edge; only unmarked nodes get the optional sub-match
        g = Graph(schema)
        plain, marked = g.add_node("A"), g.add_node("A")
        g.add_edge("F", marked, marked)
        rs = build(
            schema,
            "rule r { x:A; optional { negative { x -:F-> ; } y:A; x -:E-> y; } modify { } }",
        )
        g.add_edge("E", plain, marked)
        g.add_edge("E", marked, plain)
        ms = find_matches(g, rs, "r")
        opt = {m.bindings["x"].id: m.optional_match() for m in ms}
        assert opt[plain.id] is not None
        assert opt[marked.id] is None

    def test_iterated_collects_all(self, schema):
        g = Graph(schema)
        hub = g.add_node("A")
        leaves = [g.add_node("B") for _ in range(3)]
        for leaf in leaves:
            g.add_edge("E", hub, leaf)
        rs = build(schema, "rule r { x:A; iterated { x -:E-> y:B; } modify { } }")
        ms = find_matches(g, rs, "r")
        mine = [m for m in ms if m.bindings["x"].id == hub.id][0]
        got = {it.bindings["y"].id for it in mine.iterated_matches()}
        assert got == {leaf.id for leaf in leaves}

    def test_iterated_empty_is_fine(self, schema):
        g = Graph(schema)
        g.add_node("A")
        rs = build(schema, "rule r { x:A; iterated { x -:E-> y:B; } modify { } }")
        ms = find_matches(g, rs, "r")
        assert len(ms) == 1 and ms[0].iterated_matches() == []

    def test_hierarchy_iterated_recursion(self, schema):
        # B-nodes chained under an A root via E edges, depth 2: the recursive
        # subpattern visits breadth (iterated) then depth (recursion)
        g = Graph(schema)
        root = g.add_node("A")
        kids = [g.add_node("B") for _ in range(2)]
        grandkid = g.add_node("B")
        for k in kids:
            g.add_edge("E", k, root)
        g.add_edge("E", grandkid, kids[0])
        text = """
        pattern Desc(parent:A) {
          iterated { child:B -:E-> parent; d:Desc(child); }
          modify { }
        }
        rule r { x:A; if { x.num == 0; } d:Desc(x); modify { } }
        """
        rs = build(schema, text)
        ms = find_matches(g, rs, "r", limit=None)
        root_match = [m for m in ms if m.bindings["x"].id == root.id][0]
        sub = root_match.sub_match("d")
        depth1 = sub.iterated_matches()
        assert len(depth1) == 2
        nested_counts = sorted(len(it.subs["d"].iterated_matches()) for it in depth1)
        assert nested_counts == [0, 1]

    def test_subpattern_failure_fails_enclosing(self, schema):
        g = Graph(schema)
        g.add_node("A")
        text = """
        pattern NeedsEdge(c:A) { c -:E-> d:A; modify { } }
        rule r { x:A; p:NeedsEdge(x); modify { p(); } }
        """
        rs = build(schema, text)
        assert find_matches(g, rs, "r") == []

    def test_recursion_cap(self, schema):
        g = Graph(schema)
        a, b = g.add_node("A"), g.add_node("A")
        # E-cycle so the recursion never bottoms out
        g.add_edge("E", a, b)
        g.add_edge("E", b, a)
        text = """
        pattern Chase(c:A) { c -:E-> d:A; r:Chase(d); modify { } }
        rule r { x:A; p:Chase(x); modify { } }
        """
        rs = build(schema, text)
        matcher = Matcher(g, rs, recursion_cap=16)
        with pytest.raises(RecursionLimitError):
            matcher.find_matches("r")

    def test_limit(self, schema):
        g = Graph(schema)
        for _ in range(5):
            g.add_node("A")
        rs = build(schema, "rule r { x:A; modify { } }")
        assert len(find_matches(g, rs, "r", limit=2)) == 2

    def test_rule_args(self, schema):
        g = Graph(schema)
        a, b = g.add_node("A"), g.add_node("A")
        g.add_edge("E", a, b)
        rs = build(schema, "rule r(x:A) { x -:E-> y:A; modify { } }")
        assert len(find_matches(g, rs, "r", args=(a,))) == 1
        assert len(find_matches(g, rs, "r", args=(b,))) == 0

    def test_deterministic_order(self, schema):
        rng = random.Random(5)
        g = random_graph(schema, rng, 10, 14)
        rs = build(schema, "rule r { x:A -e:E-> y:A; modify { } }")
        first = [tuple(sorted((k, v.id) for k, v in m.bindings.items())) for m in find_matches(g, rs, "r")]
        second = [tuple(sorted((k, v.id) for k, v in m.bindings.items())) for m in find_matches(g, rs, "r")]
        assert first == second


# ---------------------------------------------------------------------------
# Oracle equivalence (small sweeps; the acceptance suite runs the full sizes)
# ---------------------------------------------------------------------------

NODE_CLASSES = ["A", "B", "C", "D"]
EDGE_CLASSES = ["E", "F", "Edge"]


def gen_flat_pattern(rng, max_nodes=3, max_edges=2):
    n = rng.randint(1, max_nodes)
    nodes = [(f"n{i}", rng.choice(NODE_CLASSES)) for i in range(n)]
    edges = []
    for j in range(rng.randint(0, max_edges)):
        src = f"n{rng.randrange(n)}"
        tgt = f"n{rng.randrange(n)}"
        edges.append((f"e{j}", rng.choice(EDGE_CLASSES), src, tgt))
    conds = []
    cond_texts = []
    if rng.random() < 0.5:
        name = f"n{rng.randrange(n)}"
        num = rng.randint(0, 3)
        conds.append(lambda b, g, name=name, num=num: g.get_attr(b[name], "num") == num)
        cond_texts.append(f"{name}.num == {num}")
    return nodes, edges, conds, cond_texts


def pattern_text(nodes, edges, cond_texts, nested=""):
    lines = [f"{n}:{c};" for n, c in nodes]
    lines += [f"{s} -{e}:{c}-> {t};" for e, c, s, t in edges]
    lines += [f"if {{ {ct}; }}" for ct in cond_texts]
    return "rule r { " + " ".join(lines) + nested + " modify { } }"


def test_flat_patterns_match_exhaustive_oracle(schema):
    rng = random.Random(2024)
    for trial in range(60):
        g = random_graph(schema, rng)
        nodes, edges, conds, cond_texts = gen_flat_pattern(rng)
        rs = build(schema, pattern_text(nodes, edges, cond_texts))
        engine = match_set(find_matches(g, rs, "r"))
        oracle = exhaustive_matches(g, FlatPattern(nodes, edges, conds))
        assert engine == oracle, f"trial {trial}"


def test_negative_patterns_match_oracle(schema):
    rng = random.Random(77)
    for trial in range(40):
        g = random_graph(schema, rng)
        nodes, edges, conds, cond_texts = gen_flat_pattern(rng, max_nodes=2, max_edges=1)
        anchor = nodes[0][0]
        neg_cls = rng.choice(EDGE_CLASSES)
        nested = f" negative {{ {anchor} -:{neg_cls}-> ; }}"
        rs = build(schema, pattern_text(nodes, edges, cond_texts, nested))
        engine = match_set(find_matches(g, rs, "r"))

        base = exhaustive_matches(g, FlatPattern(nodes, edges, conds))
        oracle = set()
        for binding in base:
            els = {name: _el_by_id(g, eid) for name, eid in binding}
            neg = FlatPattern([("$t", "Node")], [("$e", neg_cls, anchor, "$t")], [])
            ext = exhaustive_matches(
                g, neg, fixed={anchor: els[anchor]}, local_injective_only=True
            )
            if not ext:
                oracle.add(binding)
        assert engine == oracle, f"trial {trial}"


def test_optional_and_iterated_against_oracle(schema):
    rng = random.Random(99)
    for trial in range(40):
        g = random_graph(schema, rng)
        anchor_cls = rng.choice(NODE_CLASSES)
        inner_cls = rng.choice(NODE_CLASSES)
        edge_cls = rng.choice(EDGE_CLASSES)
        kind = rng.choice(["optional", "iterated"])
        text = (
            f"rule r {{ x:{anchor_cls}; {kind} {{ x -:{edge_cls}-> y:{inner_cls}; }} modify {{ }} }}"
        )
        rs = build(schema, text)
        ms = find_matches(g, rs, "r")
        # top-level match set is never constrained by the nested block
        assert match_set(ms, names={"x"}) == exhaustive_matches(
            g, FlatPattern([("x", anchor_cls)])
        )
        for m in ms:
            x = m.bindings["x"]
            inner = FlatPattern(
                [("y", inner_cls)], [("$e", edge_cls, "x", "y")]
            )
            ext = exhaustive_matches(
                g, inner, fixed={"x": x}, forbidden_ids={x.id}
            )
            if kind == "optional":
                sub = m.optional_match()
                if ext:
                    assert sub is not None
                    got = frozenset(
                        (n, e.id) for n, e in sub.bindings.items() if not n.startswith("$")
                    )
                    assert got in {frozenset(b for b in e if not b[0].startswith("$")) for e in ext}
                else:
                    assert sub is None
            else:
                its = m.iterated_matches()
                used = {x.id}
                seen_pairs = set()
                for it in its:
                    y = it.bindings["y"]
                    edge = [v for k, v in it.bindings.items() if k.startswith("$")][0]
                    assert y.id not in used and edge.id not in used
                    # each iteration is a genuine inner match
                    assert g.schema.is_subtype_of(y.cls, inner_cls)
                    assert edge.src is x and edge.tgt is y
                    assert g.schema.is_subtype_of(edge.cls, edge_cls)
                    used |= {y.id, edge.id}
                    seen_pairs.add((y.id, edge.id))
                # maximality: no further inner match exists outside `used`
                remaining = exhaustive_matches(
                    g, inner, fixed={"x": x}, forbidden_ids=used
                )
                assert not remaining, f"trial {trial}: iterated not maximal"


def _el_by_id(g, eid):
    for n in g.nodes():
        if n.id == eid:
            return n
    for e in g.edges():
        if e.id == eid:
            return e
    raise AssertionError(f"no element {eid}")

"""Graph store: lifecycle, attributes, typed iteration, consistency properties."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graft.errors import GraphError, StaleElementError
from graft.graph import Graph
from graft.metamodel import AttributeDecl, SchemaBuilder, enum_type, scalar


@pytest.fixture
def schema():
    b = SchemaBuilder()
    b.declare_enum("Flags", [("SYN", 0), ("ACK", 1)])
    b.declare_node_class("State", is_abstract=True, attrs=[AttributeDecl("name", scalar("string"))])
    b.declare_node_class("SynSent", supers=["State"])
    b.declare_node_class("Listen", supers=["State"])
    b.declare_node_class("StateMachine")
    b.declare_node_class("Class", attrs=[AttributeDecl("name", scalar("string"))])
    b.declare_node_class("Packet", attrs=[AttributeDecl("flag", enum_type("Flags")),
                                          AttributeDecl("size", scalar("integer"))])
    b.declare_edge_class("link")
    b.declare_edge_class("Class_extends")
    return b.build()


@pytest.fixture
def graph(schema):
    return Graph(schema)


class TestLifecycle:
    def test_add_node(self, graph):
        graph.add_node("StateMachine")
        assert graph.node_count() == 1

    def test_add_edge_outdegree(self, graph):
        state = graph.add_node("SynSent")
        cls = graph.add_node("Class")
        graph.add_edge("link", state, cls)
        assert len(list(graph.outgoing(state, "link"))) == 1

    def test_parallel_edges_kept(self, graph):
        a = graph.add_node("Class")
        b = graph.add_node("Class")
        graph.add_edge("Class_extends", a, b)
        graph.add_edge("Class_extends", a, b)
        assert graph.edge_count() == 2

    def test_abstract_instantiation_rejected(self, graph):
        with pytest.raises(GraphError, match="abstract"):
            graph.add_node("State")

    def test_remove_isolated_node(self, graph):
        n = graph.add_node("Class")
        graph.add_node("Class")
        graph.remove_node(n)
        assert graph.node_count() == 1

    def test_remove_node_cascades_incident_edges(self, graph):
        hub = graph.add_node("Class")
        others = [graph.add_node("Class") for _ in range(3)]
        graph.add_edge("Class_extends", hub, others[0])
        graph.add_edge("Class_extends", others[1], hub)
        graph.add_edge("link", hub, others[2])
        assert graph.edge_count() == 3
        graph.remove_node(hub)
        assert graph.edge_count() == 0
        graph.check_consistency()

    def test_use_after_delete(self, graph):
        n = graph.add_node("SynSent")
        graph.remove_node(n)
        with pytest.raises(StaleElementError):
            graph.get_attr(n, "name")

    def test_dangling_endpoint_rejected(self, graph):
        a = graph.add_node("Class")
        b = graph.add_node("Class")
        graph.remove_node(b)
        with pytest.raises(StaleElementError):
            graph.add_edge("link", a, b)

    def test_ids_never_reused(self, graph):
        a = graph.add_node("Class")
        graph.remove_node(a)
        b = graph.add_node("Class")
        assert b.id != a.id


class TestAttributes:
    def test_set_get(self, graph):
        s = graph.add_node("SynSent")
        graph.set_attr(s, "name", "SynSent")
        assert graph.get_attr(s, "name") == "SynSent"

    def test_string_default_empty(self, graph):
        s = graph.add_node("SynSent")
        assert graph.get_attr(s, "name") == ""

    def test_enum_default_first_item(self, graph):
        p = graph.add_node("Packet")
        assert graph.get_attr(p, "flag") == "SYN"

    def test_enum_out_of_range(self, graph):
        p = graph.add_node("Packet")
        with pytest.raises(GraphError):
            graph.set_attr(p, "flag", "NOPE")

    def test_type_mismatch(self, graph):
        p = graph.add_node("Packet")
        with pytest.raises(GraphError):
            graph.set_attr(p, "size", "big")

    def test_unknown_attribute(self, graph):
        p = graph.add_node("Packet")
        with pytest.raises(GraphError, match="no attribute"):
            graph.get_attr(p, "missing")

    def test_int64_range(self, graph):
        p = graph.add_node("Packet")
        graph.set_attr(p, "size", 2**63 - 1)
        with pytest.raises(GraphError):
            graph.set_attr(p, "size", 2**63)


class TestIteration:
    def test_subtype_iteration(self, graph):
        a = graph.add_node("SynSent")
        b = graph.add_node("Listen")
        assert [n.id for n in graph.nodes_of_type("State", True)] == [a.id, b.id]
        assert list(graph.nodes_of_type("State", False)) == []

    def test_empty_graph(self, graph):
        assert list(graph.nodes_of_type("Class")) == []

    def test_unknown_class(self, graph):
        with pytest.raises(GraphError):
            list(graph.nodes_of_type("Nope"))

    def test_reverse_seed_order(self, schema):
        g = Graph(schema, seed_order="reverse")
        a = g.add_node("SynSent")
        b = g.add_node("Listen")
        assert [n.id for n in g.nodes_of_type("State")] == [b.id, a.id]

    def test_incident_merges_both_directions(self, graph):
        a, b = graph.add_node("Class"), graph.add_node("Class")
        e1 = graph.add_edge("Class_extends", a, b)
        e2 = graph.add_edge("link", b, a)
        e3 = graph.add_edge("Class_extends", b, a)
        assert [e.id for e in graph.incident(a)] == [e1.id, e2.id, e3.id]
        assert [e.id for e in graph.incident(a, "Class_extends")] == [e1.id, e3.id]
        assert [e.id for e in graph.incoming(a, "link")] == [e2.id]

    def test_matches_brute_force_filter(self, graph):
        import random

        rng = random.Random(7)
        concrete = ["SynSent", "Listen", "StateMachine", "Class", "Packet"]
        for _ in range(60):
            graph.add_node(rng.choice(concrete))
        for query in ["State", "Node", "Class", "SynSent"]:
            expected = [
                n.id for n in graph.nodes()
                if graph.schema.is_subtype_of(n.cls, query)
            ]
            got = [n.id for n in graph.nodes_of_type(query, True)]
            assert got == expected


class TestNames:
    def test_register_and_lookup(self, graph):
        n = graph.add_node("Class")
        graph.set_name(n, "c1")
        assert graph.by_name("c1") is n

    def test_bijection(self, graph):
        a = graph.add_node("Class")
        b = graph.add_node("Class")
        graph.set_name(a, "x")
        with pytest.raises(GraphError):
            graph.set_name(b, "x")

    def test_name_dropped_on_delete(self, graph):
        a = graph.add_node("Class")
        graph.set_name(a, "x")
        graph.remove_node(a)
        assert not graph.has_name("x")
        graph.check_consistency()


# random op-sequence property tests -----------------------------------------

op_strategy = st.lists(
    st.tuples(st.sampled_from(["add_node", "add_edge", "del_node", "del_edge"]),
              st.integers(0, 10**6)),
    max_size=120,
)


def run_ops(graph, ops):
    rngless_nodes = []
    rngless_edges = []
    created = deleted = 0
    for op, pick in ops:
        if op == "add_node":
            rngless_nodes.append(graph.add_node("Class"))
            created += 1
        elif op == "add_edge" and rngless_nodes:
            src = rngless_nodes[pick % len(rngless_nodes)]
            tgt = rngless_nodes[(pick // 7) % len(rngless_nodes)]
            rngless_edges.append(graph.add_edge("Class_extends", src, tgt))
        elif op == "del_node" and rngless_nodes:
            node = rngless_nodes.pop(pick % len(rngless_nodes))
            graph.remove_node(node)
            rngless_edges = [e for e in rngless_edges if e.alive]
            deleted += 1
        elif op == "del_edge" and rngless_edges:
            graph.remove_edge(rngless_edges.pop(pick % len(rngless_edges)))
    return created, deleted


@settings(max_examples=40, deadline=None)
@given(op_strategy)
def test_random_ops_keep_graph_consistent(ops):
    b = SchemaBuilder()
    b.declare_node_class("Class")
    b.declare_edge_class("Class_extends")
    g = Graph(b.build())
    created, deleted = run_ops(g, ops)
    g.check_consistency()
    assert created - deleted == g.node_count()


@settings(max_examples=20, deadline=None)
@given(op_strategy)
def test_identical_op_sequences_iterate_identically(ops):
    b = SchemaBuilder()
    b.declare_node_class("Class")
    b.declare_edge_class("Class_extends")
    schema = b.build()
    g1, g2 = Graph(schema), Graph(schema)
    run_ops(g1, ops)
    run_ops(g2, ops)
    assert g1.snapshot() == g2.snapshot()

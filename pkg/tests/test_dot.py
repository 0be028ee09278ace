"""DOT export: nesting, visibility, labels, cycle handling."""

import pytest

from graft.errors import GraftError
from graft.graph import Graph
from graft.metamodel import AttributeDecl, SchemaBuilder, scalar
from graft.modelio import LayoutConfig, export_dot


@pytest.fixture
def schema():
    b = SchemaBuilder()
    b.declare_node_class("Class", attrs=[AttributeDecl("name", scalar("string"))])
    b.declare_node_class("Method", attrs=[AttributeDecl("name", scalar("string"))])
    b.declare_edge_class("contains")
    b.declare_edge_class("calls")
    return b.build()


def test_containment_produces_cluster(schema):
    g = Graph(schema)
    cls = g.add_node("Class")
    g.set_attr(cls, "name", "SynSent")
    m = g.add_node("Method")
    g.set_attr(m, "name", "run")
    g.add_edge("contains", cls, m)
    config = LayoutConfig(containment=["contains"], classes={"Class": {"label": "{name}"}})
    text = export_dot(g, config)
    cluster = text[text.index(f"subgraph cluster_{cls.id}"):]
    assert f"n{m.id} " in cluster.split("}")[0]  # method inside the class cluster
    assert 'label="SynSent"' in text


def test_empty_config_flat_digraph(schema):
    g = Graph(schema)
    a, b = g.add_node("Class"), g.add_node("Method")
    g.add_edge("calls", a, b)
    text = export_dot(g)
    assert "subgraph" not in text
    assert f"n{a.id} -> n{b.id}" in text


def test_containment_cycle_broken_with_warning(schema):
    g = Graph(schema)
    a, b, c = (g.add_node("Class") for _ in range(3))
    g.add_edge("contains", a, b)
    g.add_edge("contains", b, c)
    g.add_edge("contains", c, a)
    config = LayoutConfig(containment=["contains"])
    text = export_dot(g, config)
    assert "// warning: containment cycle broken" in text
    # exactly one break: two nesting levels survive
    assert text.count("subgraph") == 2
    for node in (a, b, c):
        assert f"n{node.id} " in text


def test_hidden_class_omitted(schema):
    g = Graph(schema)
    a = g.add_node("Class")
    b = g.add_node("Method")
    g.add_edge("calls", a, b)
    config = LayoutConfig(classes={"Method": {"visible": False}})
    text = export_dot(g, config)
    assert f"n{b.id}" not in text
    assert "->" not in text  # incident edge suppressed


def test_edge_labels_and_colors(schema):
    g = Graph(schema)
    a, b = g.add_node("Class"), g.add_node("Class")
    g.add_edge("calls", a, b)
    config = LayoutConfig(classes={"calls": {"label": "uses", "color": "gray"}})
    text = export_dot(g, config)
    assert 'label="uses"' in text and 'color="gray"' in text


def test_unknown_class_in_config_rejected(schema):
    g = Graph(schema)
    with pytest.raises(GraftError, match="does not exist"):
        export_dot(g, LayoutConfig(classes={"Ghost": {}}))
    with pytest.raises(GraftError, match="not an edge class"):
        export_dot(g, LayoutConfig(containment=["Class"]))


def test_deterministic_output(schema):
    def build():
        g = Graph(schema)
        cls = g.add_node("Class")
        for _ in range(3):
            m = g.add_node("Method")
            g.add_edge("contains", cls, m)
            g.add_edge("calls", m, cls)
        return g

    config = LayoutConfig(containment=["contains"])
    assert export_dot(build(), config) == export_dot(build(), config)

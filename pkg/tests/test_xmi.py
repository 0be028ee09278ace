"""XMI import (elements, containment, cross references) and export."""

import io
import xml.etree.ElementTree as ET

import pytest

from graft.errors import ExportError, ImportError_
from graft.graph import Graph
from graft.modelio import export_state_machine_xmi, import_xmi, machine_signature
from graft.reengineering import case_schema, fixture_path

MINI = """<?xml version="1.0" encoding="UTF-8"?>
<xmi:XMI xmi:version="2.0" xmlns:xmi="http://www.omg.org/XMI" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" xmlns:java="http://graft/java/1.0">
  <java:Class xmi:id="c_A" name="A" extends="c_B"/>
  <java:Class xmi:id="c_B" name="B"/>
</xmi:XMI>
"""


@pytest.fixture(scope="module")
def schema():
    return case_schema()


class TestImport:
    def test_minimal_instance(self, schema):
        g = import_xmi(io.StringIO(MINI), schema)
        assert g.node_count() == 2
        edges = list(g.edges_of_type("java_Class_extends"))
        assert len(edges) == 1
        assert g.name_of(edges[0].src) == "c_A"
        assert g.name_of(edges[0].tgt) == "c_B"

    def test_forward_reference_resolves(self, schema):
        # c_A references c_B which appears later in the document
        g = import_xmi(io.StringIO(MINI), schema)
        assert g.by_name("c_A") is not None

    def test_containment_children(self, schema):
        text = """<?xml version="1.0"?>
        <java:Class xmlns:java="http://graft/java/1.0" xmlns:xmi="http://www.omg.org/XMI" xmi:id="c" name="C">
          <methods xmi:id="m" name="run"/>
        </java:Class>"""
        g = import_xmi(io.StringIO(text), schema)
        assert g.node_count() == 2
        assert len(list(g.edges_of_type("java_Class_methods"))) == 1

    def test_path_registration_without_id(self, schema):
        text = """<?xml version="1.0"?>
        <java:Class xmlns:java="http://graft/java/1.0" name="C">
          <methods name="run"/>
        </java:Class>"""
        g = import_xmi(io.StringIO(text), schema)
        assert g.by_name("/0").cls == "java_Class"
        assert g.by_name("/0/@methods.0").cls == "java_Method"

    def test_positional_path_references(self, schema):
        text = """<?xml version="1.0"?>
        <xmi:XMI xmlns:xmi="http://www.omg.org/XMI" xmlns:java="http://graft/java/1.0">
          <java:Class name="A" extends="/1"/>
          <java:Class name="B"/>
        </xmi:XMI>"""
        g = import_xmi(io.StringIO(text), schema)
        assert len(list(g.edges_of_type("java_Class_extends"))) == 1

    def test_boolean_attribute_parsed(self, schema):
        text = """<?xml version="1.0"?>
        <java:Class xmlns:java="http://graft/java/1.0" name="A" isAbstract="true"/>"""
        g = import_xmi(io.StringIO(text), schema)
        node = next(g.nodes())
        assert g.get_attr(node, "isAbstract") is True

    def test_unknown_type(self, schema):
        text = '<java:Nope xmlns:java="http://graft/java/1.0" name="A"/>'
        with pytest.raises(ImportError_, match="unknown type"):
            import_xmi(io.StringIO(text), schema)

    def test_unresolvable_reference(self, schema):
        text = '<java:Class xmlns:java="http://graft/java/1.0" name="A" extends="ghost"/>'
        with pytest.raises(ImportError_, match="unresolvable"):
            import_xmi(io.StringIO(text), schema)

    def test_attribute_parse_failure(self, schema):
        text = '<java:Class xmlns:java="http://graft/java/1.0" isAbstract="maybe"/>'
        with pytest.raises(ImportError_, match="cannot parse"):
            import_xmi(io.StringIO(text), schema)

    def test_unknown_attribute_warns(self, schema):
        text = '<java:Class xmlns:java="http://graft/java/1.0" name="A" vendorTag="x"/>'
        with pytest.warns(UserWarning, match="vendorTag"):
            import_xmi(io.StringIO(text), schema)

    def test_tcp_small_counts_match_xml_walk(self, schema):
        # independent count: model elements = XML elements below the xmi:XMI
        # wrapper; edges = containment children + whitespace-separated
        # reference tokens
        with fixture_path("tcp_small.xmi").open("r", encoding="utf-8") as fh:
            text = fh.read()
        root = ET.fromstring(text)
        expected_nodes = 0
        expected_edges = 0

        def walk(elem, contained):
            nonlocal expected_nodes, expected_edges
            expected_nodes += 1
            if contained:
                expected_edges += 1
            for key, value in elem.attrib.items():
                if key.endswith("}id") or key.endswith("}type"):
                    continue
                if key in ("name", "isAbstract", "constantName", "exceptionType", "methodName"):
                    continue
                expected_edges += len(value.split())
            for child in elem:
                walk(child, True)

        for top in root:
            walk(top, False)
        g = import_xmi(io.StringIO(text), schema)
        assert g.node_count() == expected_nodes
        assert g.edge_count() == expected_edges


def build_machine(schema, states, transitions):
    g = Graph(schema)
    machine = g.add_node("sm_StateMachine")
    nodes = {}
    for name in states:
        s = g.add_node("sm_State")
        g.set_attr(s, "name", name)
        g.add_edge("sm_StateMachine_states", machine, s)
        nodes[name] = s
    for src, tgt, trigger, action in transitions:
        t = g.add_node("sm_Transition")
        g.set_attr(t, "trigger", trigger)
        g.set_attr(t, "action", action)
        g.add_edge("sm_StateMachine_transitions", machine, t)
        g.add_edge("sm_Transition_source", t, nodes[src])
        g.add_edge("sm_Transition_target", t, nodes[tgt])
    return g


class TestExport:
    def test_empty_machine(self, schema):
        g = build_machine(schema, [], [])
        data = export_state_machine_xmi(g).decode()
        assert data.startswith('<?xml version="1.0" encoding="UTF-8"?>\n<sm:StateMachine')
        assert data.endswith("</sm:StateMachine>\n")
        assert "<states" not in data

    def test_single_state(self, schema):
        g = build_machine(schema, ["Closed"], [])
        data = export_state_machine_xmi(g).decode()
        assert data.count("<states") == 1
        assert '<states name="Closed"/>' in data

    def test_transitions_reference_positional_ids(self, schema):
        g = build_machine(schema, ["A", "B"], [("A", "B", "go", "--")])
        data = export_state_machine_xmi(g).decode()
        assert 'source="/0/@states.0" target="/0/@states.1"' in data
        assert 'trigger="go" action="--"' in data

    def test_empty_trigger_and_action_still_emitted(self, schema):
        g = build_machine(schema, ["A"], [("A", "A", "", "")])
        data = export_state_machine_xmi(g).decode()
        assert 'trigger="" action=""' in data

    def test_deterministic_bytes(self, schema):
        g1 = build_machine(schema, ["A", "B"], [("A", "B", "x", "y")])
        g2 = build_machine(schema, ["A", "B"], [("A", "B", "x", "y")])
        assert export_state_machine_xmi(g1) == export_state_machine_xmi(g2)

    def test_round_trip_isomorphic(self, schema):
        g = build_machine(
            schema,
            ["A", "B", "C"],
            [("A", "B", "go", "SYN"), ("B", "C", "halt", "--"), ("C", "C", "loop", "")],
        )
        data = export_state_machine_xmi(g)
        g2 = import_xmi(io.BytesIO(data), schema)
        assert machine_signature(g2) == machine_signature(g)

    def test_zero_machines_is_error(self, schema):
        with pytest.raises(ExportError, match="exactly one"):
            export_state_machine_xmi(Graph(schema))

    def test_multiple_machines_is_error(self, schema):
        g = Graph(schema)
        g.add_node("sm_StateMachine")
        g.add_node("sm_StateMachine")
        with pytest.raises(ExportError, match="exactly one"):
            export_state_machine_xmi(g)

    def test_transition_missing_endpoint(self, schema):
        g = Graph(schema)
        g.add_node("sm_StateMachine")
        g.add_node("sm_Transition")
        with pytest.raises(ExportError, match="expected 1"):
            export_state_machine_xmi(g)

    def test_attribute_values_escaped(self, schema):
        g = build_machine(schema, ['A"<&'], [])
        data = export_state_machine_xmi(g)
        g2 = import_xmi(io.BytesIO(data), schema)
        assert machine_signature(g2)[0] == frozenset({'A"<&'})

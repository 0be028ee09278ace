"""Program models for the extraction case: the TCP fixture, seeded random
programs for differential testing, and the large performance fixture.

A model is a small statement tree (classes with methods, blocks, switches,
try/catch, activate/send calls).  It can be rendered as an XMI document or
materialized directly as a graph; both routes describe the same program.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from xml.sax.saxutils import quoteattr

JAVA_NS = "http://graft/java/1.0"


@dataclass
class PActivate:
    target: str  # class name


@dataclass
class PSend:
    flag: str  # enum constant name


@dataclass
class PCall:
    name: str  # plain no-target call such as wait()


@dataclass
class PBlock:
    stmts: list = field(default_factory=list)


@dataclass
class PSwitch:
    cases: list = field(default_factory=list)  # (constantName, [stmts])


@dataclass
class PTry:
    body: list = field(default_factory=list)
    catches: list = field(default_factory=list)  # (exceptionType, [stmts])


@dataclass
class PMethod:
    name: str
    body: list = field(default_factory=list)


@dataclass
class PClass:
    name: str
    is_abstract: bool = False
    extends: str | None = None
    methods: list = field(default_factory=list)


@dataclass
class PEnum:
    name: str
    constants: list = field(default_factory=list)


@dataclass
class Model:
    classes: list = field(default_factory=list)
    enums: list = field(default_factory=list)

    def class_named(self, name):
        for c in self.classes:
            if c.name == name:
                return c
        raise KeyError(name)


# ---------------------------------------------------------------------------
# The hand-designed TCP program (the small fixture)
# ---------------------------------------------------------------------------

def make_tcp_model():
    def m(name, *stmts):
        return PMethod(name, list(stmts))

    def sw(*cases):
        return PSwitch(list(cases))

    classes = [
        PClass("State", is_abstract=True),
        PClass("Closed", extends="State", methods=[
            m("run", sw(
                ("PASSIVE_OPEN", [PActivate("Listen")]),
                ("ACTIVE_OPEN", [PSend("SYN"), PActivate("SynSent")]),
            )),
        ]),
        PClass("Listen", extends="State", methods=[
            m("run", sw(
                ("SEND", [PSend("SYN"), PActivate("SynSent")]),
                ("RCV_SYN", [PSend("SYN_ACK"), PActivate("SynReceived")]),
                ("CLOSE", [PActivate("Closed")]),
            )),
        ]),
        PClass("SynSent", extends="State", methods=[
            m("run", PTry(
                body=[sw(
                    ("RCV_SYN_ACK", [PSend("ACK"), PActivate("Established")]),
                    ("CLOSE", [PActivate("Closed")]),
                )],
                catches=[("Timeout", [PActivate("Closed")])],
            )),
        ]),
        PClass("SynReceived", extends="State", methods=[
            m("run", sw(("RCV_ACK", [PActivate("Established")]))),
            m("close", PSend("FIN"), PActivate("FinWait1")),
        ]),
        PClass("Established", extends="State", methods=[
            m("run", sw(("RCV_FIN", [PSend("ACK"), PActivate("CloseWait")]))),
            m("close", PSend("FIN"), PActivate("FinWait1")),
        ]),
        PClass("FinWait", is_abstract=True, extends="State"),
        PClass("FinWait1", extends="FinWait", methods=[
            m("run", sw(
                ("RCV_ACK", [PActivate("FinWait2")]),
                ("RCV_FIN", [PSend("ACK"), PActivate("Closing")]),
            )),
        ]),
        PClass("FinWait2", extends="FinWait", methods=[
            m("run", sw(("RCV_FIN", [PSend("ACK"), PActivate("TimeWait")]))),
        ]),
        PClass("Closing", extends="State", methods=[
            m("run", sw(("RCV_ACK", [PActivate("TimeWait")]))),
        ]),
        PClass("TimeWait", extends="State", methods=[
            m("run", PTry(body=[PCall("wait")], catches=[("Timeout", [PActivate("Closed")])])),
        ]),
        PClass("CloseWait", extends="State", methods=[
            m("close", PSend("FIN"), PActivate("LastAck")),
        ]),
        PClass("LastAck", extends="State", methods=[
            m("run", sw(("RCV_ACK", [PActivate("Closed")]))),
        ]),
        PClass("Reset", extends="State", methods=[
            m("run", PActivate("Closed")),  # no switch, no catch: fallback trigger
        ]),
        PClass("Main", methods=[
            m("main", PActivate("Closed")),  # not a state class: no transition
        ]),
        PClass("Logger", methods=[m("log")]),
    ]
    enums = [PEnum("TcpFlags", ["SYN", "ACK", "SYN_ACK", "FIN"])]
    return Model(classes, enums)


# The state machine of the TCP fixture, worked out by hand from the model
# above; tests hold both the engine and the oracle against it.
TCP_EXPECTED_STATES = frozenset({
    "Closed", "Listen", "SynSent", "SynReceived", "Established",
    "FinWait1", "FinWait2", "Closing", "TimeWait", "CloseWait",
    "LastAck", "Reset",
})

TCP_EXPECTED_TRANSITIONS = frozenset({
    ("Closed", "Listen", "PASSIVE_OPEN", "--"),
    ("Closed", "SynSent", "ACTIVE_OPEN", "SYN"),
    ("Listen", "SynSent", "SEND", "SYN"),
    ("Listen", "SynReceived", "RCV_SYN", "SYN_ACK"),
    ("Listen", "Closed", "CLOSE", "--"),
    ("SynSent", "Established", "RCV_SYN_ACK", "ACK"),
    ("SynSent", "Closed", "CLOSE", "--"),
    ("SynSent", "Closed", "Timeout", "--"),
    ("SynReceived", "Established", "RCV_ACK", "--"),
    ("SynReceived", "FinWait1", "close", "FIN"),
    ("Established", "CloseWait", "RCV_FIN", "ACK"),
    ("Established", "FinWait1", "close", "FIN"),
    ("FinWait1", "FinWait2", "RCV_ACK", "--"),
    ("FinWait1", "Closing", "RCV_FIN", "ACK"),
    ("FinWait2", "TimeWait", "RCV_FIN", "ACK"),
    ("Closing", "TimeWait", "RCV_ACK", "--"),
    ("TimeWait", "Closed", "Timeout", "--"),
    ("CloseWait", "LastAck", "close", "FIN"),
    ("LastAck", "Closed", "RCV_ACK", "--"),
    ("Reset", "Closed", "--", "--"),
})


# ---------------------------------------------------------------------------
# XMI rendering
# ---------------------------------------------------------------------------

class _XmiWriter:
    def __init__(self, model):
        self.model = model
        self.lines = []
        self.ids = {}
        self.counter = 0
        self.floating_calls = []  # Instance() receiver calls, emitted as roots
        self.const_ids = {}

    def fresh(self, prefix):
        self.counter += 1
        return f"{prefix}_{self.counter}"

    def render(self):
        out = self.lines
        out.append('<?xml version="1.0" encoding="UTF-8"?>')
        out.append(
            f'<xmi:XMI xmi:version="2.0" xmlns:xmi="http://www.omg.org/XMI" '
            f'xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" xmlns:java="{JAVA_NS}">'
        )
        for e in self.model.enums:
            out.append(f'  <java:Enumeration xmi:id="en_{e.name}" name={quoteattr(e.name)}>')
            for c in e.constants:
                cid = f"ec_{e.name}_{c}"
                self.const_ids[c] = cid
                out.append(f'    <constants xmi:id="{cid}" name={quoteattr(c)}/>')
            out.append("  </java:Enumeration>")
        for c in self.model.classes:
            self._cls(c)
        out.extend(self.floating_calls)
        out.append("</xmi:XMI>")
        return "\n".join(out) + "\n"

    def _cls(self, c):
        attrs = f'xmi:id="c_{c.name}" name={quoteattr(c.name)}'
        if c.is_abstract:
            attrs += ' isAbstract="true"'
        if c.extends:
            attrs += f' extends="c_{c.extends}"'
        if not c.methods:
            self.lines.append(f"  <java:Class {attrs}/>")
            return
        self.lines.append(f"  <java:Class {attrs}>")
        for m in c.methods:
            mid = self.fresh("m")
            self.lines.append(f'    <methods xmi:id="{mid}" name={quoteattr(m.name)}>')
            self._block("body", m.body, "      ")
            self.lines.append("    </methods>")
        self.lines.append("  </java:Class>")

    def _block(self, ref, stmts, indent):
        bid = self.fresh("b")
        self.lines.append(f'{indent}<{ref} xmi:id="{bid}">')
        for s in stmts:
            self._stmt(s, indent + "  ")
        self.lines.append(f"{indent}</{ref}>")

    def _stmt(self, s, indent):
        if isinstance(s, PBlock):
            self.lines.append(f'{indent}<statements xsi:type="java:Block" xmi:id="{self.fresh("b")}">')
            for inner in s.stmts:
                self._stmt(inner, indent + "  ")
            self.lines.append(f"{indent}</statements>")
        elif isinstance(s, PSwitch):
            self.lines.append(f'{indent}<statements xsi:type="java:Switch" xmi:id="{self.fresh("sw")}">')
            for const, stmts in s.cases:
                self.lines.append(
                    f'{indent}  <cases xmi:id="{self.fresh("case")}" constantName={quoteattr(const)}>'
                )
                for inner in stmts:
                    self._case_stmt(inner, indent + "    ")
                self.lines.append(f"{indent}  </cases>")
            self.lines.append(f"{indent}</statements>")
        elif isinstance(s, PTry):
            self.lines.append(f'{indent}<statements xsi:type="java:Try" xmi:id="{self.fresh("try")}">')
            self._block("body", s.body, indent + "  ")
            for exc, stmts in s.catches:
                self.lines.append(
                    f'{indent}  <catches xmi:id="{self.fresh("catch")}" exceptionType={quoteattr(exc)}>'
                )
                self._block("body", stmts, indent + "    ")
                self.lines.append(f"{indent}  </catches>")
            self.lines.append(f"{indent}</statements>")
        else:
            self._expr_stmt(s, indent, "statements")

    def _case_stmt(self, s, indent):
        # switch cases contain statements directly
        if isinstance(s, (PActivate, PSend, PCall)):
            self._expr_stmt(s, indent, "statements")
        else:
            self._stmt(s, indent)

    def _expr_stmt(self, s, indent, ref):
        esid = self.fresh("es")
        self.lines.append(f'{indent}<{ref} xsi:type="java:ExpressionStatement" xmi:id="{esid}">')
        if isinstance(s, PActivate):
            recv = self.fresh("mc")
            self.floating_calls.append(
                f'  <java:MethodCall xmi:id="{recv}" methodName="Instance" target="c_{s.target}"/>'
            )
            self.lines.append(
                f'{indent}  <expression xsi:type="java:MethodCall" xmi:id="{self.fresh("mc")}" '
                f'methodName="activate" target="{recv}"/>'
            )
        elif isinstance(s, PSend):
            self.lines.append(
                f'{indent}  <expression xsi:type="java:MethodCall" xmi:id="{self.fresh("mc")}" methodName="send">'
            )
            self.lines.append(
                f'{indent}    <arguments xsi:type="java:EnumReference" xmi:id="{self.fresh("er")}" '
                f'constant="{self.const_ids[s.flag]}"/>'
            )
            self.lines.append(f"{indent}  </expression>")
        elif isinstance(s, PCall):
            self.lines.append(
                f'{indent}  <expression xsi:type="java:MethodCall" xmi:id="{self.fresh("mc")}" '
                f'methodName={quoteattr(s.name)}/>'
            )
        else:
            raise TypeError(f"not an expression statement: {s!r}")
        self.lines.append(f"{indent}</{ref}>")


def emit_xmi(model):
    """Render a model as a multi-root XMI document (text)."""
    return _XmiWriter(model).render()


# ---------------------------------------------------------------------------
# Direct graph construction (no XML round trip; used by differential tests)
# ---------------------------------------------------------------------------

def build_graph(model, schema):
    from ..graph import Graph

    g = Graph(schema)
    class_nodes = {}
    const_nodes = {}
    for e in model.enums:
        en = g.add_node("java_Enumeration")
        g.set_attr(en, "name", e.name)
        for cname in e.constants:
            cn = g.add_node("java_EnumConstant")
            g.set_attr(cn, "name", cname)
            g.add_edge("java_Enumeration_constants", en, cn)
            const_nodes[cname] = cn
    for c in model.classes:
        node = g.add_node("java_Class")
        g.set_attr(node, "name", c.name)
        g.set_attr(node, "isAbstract", c.is_abstract)
        class_nodes[c.name] = node

    def add_stmt(parent, edge_cls, s):
        if isinstance(s, (PActivate, PSend, PCall)):
            es = g.add_node("java_ExpressionStatement")
            g.add_edge(edge_cls, parent, es)
            if isinstance(s, PActivate):
                call = g.add_node("java_MethodCall")
                g.set_attr(call, "methodName", "activate")
                g.add_edge("java_ExpressionStatement_expression", es, call)
                recv = g.add_node("java_MethodCall")
                g.set_attr(recv, "methodName", "Instance")
                g.add_edge("java_MethodCall_target", call, recv)
                g.add_edge("java_MethodCall_target", recv, class_nodes[s.target])
            elif isinstance(s, PSend):
                call = g.add_node("java_MethodCall")
                g.set_attr(call, "methodName", "send")
                g.add_edge("java_ExpressionStatement_expression", es, call)
                ref = g.add_node("java_EnumReference")
                g.add_edge("java_MethodCall_arguments", call, ref)
                g.add_edge("java_EnumReference_constant", ref, const_nodes[s.flag])
            else:
                call = g.add_node("java_MethodCall")
                g.set_attr(call, "methodName", s.name)
                g.add_edge("java_ExpressionStatement_expression", es, call)
            return
        if isinstance(s, PBlock):
            b = g.add_node("java_Block")
            g.add_edge(edge_cls, parent, b)
            for inner in s.stmts:
                add_stmt(b, "java_Block_statements", inner)
            return
        if isinstance(s, PSwitch):
            sw = g.add_node("java_Switch")
            g.add_edge(edge_cls, parent, sw)
            for const, stmts in s.cases:
                case = g.add_node("java_SwitchCase")
                g.set_attr(case, "constantName", const)
                g.add_edge("java_Switch_cases", sw, case)
                for inner in stmts:
                    add_stmt(case, "java_SwitchCase_statements", inner)
            return
        if isinstance(s, PTry):
            tr = g.add_node("java_Try")
            g.add_edge(edge_cls, parent, tr)
            body = g.add_node("java_Block")
            g.add_edge("java_Try_body", tr, body)
            for inner in s.body:
                add_stmt(body, "java_Block_statements", inner)
            for exc, stmts in s.catches:
                cb = g.add_node("java_CatchBlock")
                g.set_attr(cb, "exceptionType", exc)
                g.add_edge("java_Try_catches", tr, cb)
                cbody = g.add_node("java_Block")
                g.add_edge("java_CatchBlock_body", cb, cbody)
                for inner in stmts:
                    add_stmt(cbody, "java_Block_statements", inner)
            return
        raise TypeError(f"unknown statement {s!r}")

    for c in model.classes:
        node = class_nodes[c.name]
        if c.extends:
            g.add_edge("java_Class_extends", node, class_nodes[c.extends])
        for m in c.methods:
            mn = g.add_node("java_Method")
            g.set_attr(mn, "name", m.name)
            g.add_edge("java_Class_methods", node, mn)
            body = g.add_node("java_Block")
            g.add_edge("java_Method_body", mn, body)
            for s in m.body:
                add_stmt(body, "java_Block_statements", s)
    return g


# ---------------------------------------------------------------------------
# Random and large models
# ---------------------------------------------------------------------------

FLAGS = ["SYN", "ACK", "SYN_ACK", "FIN", "RST"]
EVENTS = ["OPEN", "CLOSE", "SEND", "RCV_ACK", "RCV_SYN", "RCV_FIN", "TIMEOUT_EVT"]
EXCEPTIONS = ["Timeout", "Reset", "IOError"]


def make_random_model(seed, max_classes=20, max_statements=60):
    """Seeded random program exercising every extraction path."""
    rng = random.Random(seed)
    n_state_classes = rng.randint(0, max(2, max_classes - 4))
    classes = [PClass("State", is_abstract=True)]
    state_names = []
    for i in range(n_state_classes):
        parent = rng.choice(["State"] + state_names) if state_names else "State"
        name = f"S{i}"
        classes.append(PClass(name, is_abstract=rng.random() < 0.2, extends=parent))
        state_names.append(name)
    concrete = [c.name for c in classes[1:] if not c.is_abstract]
    n_plain = rng.randint(0, 3)
    for i in range(n_plain):
        classes.append(PClass(f"Helper{i}"))

    budget = [rng.randint(0, max_statements)]

    def gen_stmts(depth):
        stmts = []
        while budget[0] > 0 and rng.random() < 0.7 and len(stmts) < 4:
            budget[0] -= 1
            roll = rng.random()
            if roll < 0.35 and concrete:
                if rng.random() < 0.5:
                    stmts.append(PSend(rng.choice(FLAGS)))
                stmts.append(PActivate(rng.choice(concrete)))
            elif roll < 0.5 and depth < 3:
                cases = []
                for _ in range(rng.randint(1, 3)):
                    cases.append((rng.choice(EVENTS), gen_stmts(depth + 1)))
                stmts.append(PSwitch(cases))
            elif roll < 0.6 and depth < 3:
                catches = [(rng.choice(EXCEPTIONS), gen_stmts(depth + 1))
                           for _ in range(rng.randint(1, 2))]
                stmts.append(PTry(body=gen_stmts(depth + 1), catches=catches))
            elif roll < 0.7 and depth < 3:
                stmts.append(PBlock(gen_stmts(depth + 1)))
            else:
                stmts.append(PCall(rng.choice(["wait", "log", "reset"])))
        return stmts

    for c in classes:
        if c.is_abstract:
            continue
        n_methods = rng.randint(0, 2)
        method_names = ["run"] + [rng.choice(["close", "open", "shutdown"]) for _ in range(n_methods)]
        seen = set()
        for name in method_names:
            if name in seen:
                continue
            seen.add(name)
            c.methods.append(PMethod(name, gen_stmts(0)))
    return Model(classes, [PEnum("TcpFlags", FLAGS)])


def make_large_model(seed=7, classes=200, calls_per_method=2, pad_calls=2, stubs=1060):
    """A model that imports to roughly 7k nodes plus 7k edges.

    Syntax trees are edge-light relative to their node count, so plain
    helper calls (one node per edge) and unconnected library stub classes
    (nodes only) pad the graph to the documented scale.
    """
    rng = random.Random(seed)
    model = Model([PClass("State", is_abstract=True)], [PEnum("TcpFlags", FLAGS)])
    names = []
    for i in range(classes):
        parent = rng.choice(["State"] + names[-8:]) if names else "State"
        name = f"S{i}"
        model.classes.append(PClass(name, is_abstract=rng.random() < 0.1, extends=parent))
        names.append(name)
    concrete = [c.name for c in model.classes[1:] if not c.is_abstract]
    for c in model.classes[1:]:
        if c.is_abstract:
            continue
        cases = []
        for k in range(calls_per_method):
            stmts = [PSend(rng.choice(FLAGS)), PActivate(rng.choice(concrete))]
            stmts += [PCall("log") for _ in range(pad_calls)]
            cases.append((rng.choice(EVENTS), stmts))
        c.methods.append(PMethod("run", [PSwitch(cases)]))
        c.methods.append(PMethod("close", [PSend("FIN"), PActivate(rng.choice(concrete))]))
    for i in range(stubs):
        model.classes.append(PClass(f"Lib{i}"))
    return model

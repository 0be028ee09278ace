"""The type system: node/edge classes with multiple inheritance, enums, attributes.

A Schema is built incrementally through SchemaBuilder (or the module-level
convenience functions) and is immutable once ``build()`` has run.  The two
root classes ``Node`` and ``Edge`` always exist and are instantiable; every
declared class ultimately inherits from one of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError, SchemaError

NODE_ROOT = "Node"
EDGE_ROOT = "Edge"

SCALAR_TYPES = ("boolean", "integer", "double", "string")

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class ValueType:
    """A value type: a scalar, an enum, or a container over scalars.

    kind is one of 'boolean', 'integer', 'double', 'string', 'enum', 'set',
    'map', 'array'.  For enums, ``name`` holds the enum name; containers put
    their element kinds in ``elem`` (and ``key`` for maps).
    """

    kind: str
    name: str | None = None
    key: str | None = None
    elem: str | None = None

    def __str__(self):
        if self.kind == "enum":
            return self.name
        if self.kind == "set":
            return f"set<{self.elem}>"
        if self.kind == "map":
            return f"map<{self.key},{self.elem}>"
        if self.kind == "array":
            return f"array<{self.elem}>"
        return self.kind


def scalar(kind):
    if kind not in SCALAR_TYPES:
        raise SchemaError(f"not a scalar type: {kind}")
    return ValueType(kind)


def enum_type(name):
    return ValueType("enum", name=name)


def set_type(elem):
    if elem not in SCALAR_TYPES:
        raise SchemaError(f"container element must be scalar, got {elem}")
    return ValueType("set", elem=elem)


def map_type(key, elem):
    if key not in SCALAR_TYPES or elem not in SCALAR_TYPES:
        raise SchemaError(f"map key/value must be scalar, got {key},{elem}")
    return ValueType("map", key=key, elem=elem)


def array_type(elem):
    if elem not in SCALAR_TYPES:
        raise SchemaError(f"container element must be scalar, got {elem}")
    return ValueType("array", elem=elem)


@dataclass(frozen=True)
class AttributeDecl:
    name: str
    value_type: ValueType


@dataclass(frozen=True)
class EnumDef:
    name: str
    items: tuple  # of (item name, int value)

    def item_names(self):
        return [n for n, _ in self.items]

    def value_of(self, item):
        for n, v in self.items:
            if n == item:
                return v
        raise SchemaError(f"enum {self.name} has no item {item}")


@dataclass
class GraphElementClass:
    """Common shape of node and edge classes."""

    name: str
    supers: tuple = ()
    attributes: tuple = ()  # own AttributeDecls only
    is_abstract: bool = False


@dataclass
class NodeClass(GraphElementClass):
    kind = "node"


@dataclass
class EdgeClass(GraphElementClass):
    kind = "edge"
    # Metadata recorded by the Ecore importer.  containment drives DOT
    # nesting and XMI child placement; source/target document which node
    # classes the originating reference connected (None for hand-declared
    # edge classes such as helper edges).
    containment: bool = False
    source: str | None = None
    target: str | None = None


@dataclass(frozen=True)
class PackageInfo:
    """Namespace bookkeeping for imported Ecore packages."""

    name: str
    ns_uri: str = ""
    ns_prefix: str = ""


class Schema:
    """Validated, immutable type universe for graphs and rules."""

    def __init__(self, node_classes, edge_classes, enums, packages=()):
        self.node_classes = {c.name: c for c in node_classes}
        self.edge_classes = {c.name: c for c in edge_classes}
        self.enums = {e.name: e for e in enums}
        self.packages = list(packages)
        self._validate()
        self._ancestors = {}   # class name -> frozenset of ancestor names (incl. self)
        self._descendants = {} # class name -> list of descendant names (incl. self), declaration order
        self._attr_table = {}  # class name -> {attr name: AttributeDecl}
        self._subtype_sets = {}
        self._index()

    # -- construction ------------------------------------------------------

    def _validate(self):
        overlap = set(self.node_classes) & set(self.edge_classes)
        if overlap:
            raise SchemaError(f"names used for both node and edge classes: {sorted(overlap)}")
        for kind, table in (("node", self.node_classes), ("edge", self.edge_classes)):
            for cls in table.values():
                for sup in cls.supers:
                    if sup not in table:
                        raise SchemaError(f"unknown super {sup!r} of {kind} class {cls.name}")
        self._check_acyclic(self.node_classes)
        self._check_acyclic(self.edge_classes)
        for cls in list(self.node_classes.values()) + list(self.edge_classes.values()):
            for attr in cls.attributes:
                self._check_value_type(attr.value_type, cls.name)

    def _check_value_type(self, vt, owner):
        if vt.kind == "enum" and vt.name not in self.enums:
            raise SchemaError(f"attribute of {owner} uses unknown enum {vt.name!r}")

    @staticmethod
    def _check_acyclic(table):
        state = {}  # 0 visiting, 1 done

        def visit(name, stack):
            if state.get(name) == 1:
                return
            if state.get(name) == 0:
                raise SchemaError(f"inheritance cycle through {name!r}: {' -> '.join(stack + [name])}")
            state[name] = 0
            for sup in table[name].supers:
                visit(sup, stack + [name])
            state[name] = 1

        for name in table:
            visit(name, [])

    def _index(self):
        for table in (self.node_classes, self.edge_classes):
            for name in table:
                self._ancestors[name] = frozenset(self._collect_ancestors(name, table))
            for name in table:
                self._descendants[name] = [
                    other for other in table if name in self._ancestors[other]
                ]
            for name in table:
                self._attr_table[name] = self._resolve_attrs(name, table)

    def _collect_ancestors(self, name, table):
        seen = {name}
        work = [name]
        while work:
            for sup in table[work.pop()].supers:
                if sup not in seen:
                    seen.add(sup)
                    work.append(sup)
        return seen

    def _resolve_attrs(self, name, table):
        # Diamond inheritance of one declaration is fine (each ancestor owns
        # its attributes exactly once); two independent declarations of the
        # same name on unrelated ancestors are an error.
        resolved = {}
        for anc in table:  # declaration order keeps errors deterministic
            if anc == name or anc not in self._ancestors[name]:
                continue
            for decl in table[anc].attributes:
                prior = resolved.get(decl.name)
                if prior is None or prior is decl:
                    resolved[decl.name] = decl
                else:
                    raise SchemaError(
                        f"attribute {decl.name!r} of class {name} inherited from "
                        f"two unrelated declarations"
                    )
        for decl in table[name].attributes:
            prior = resolved.get(decl.name)
            if prior is None:
                resolved[decl.name] = decl
            elif prior.value_type != decl.value_type:
                raise SchemaError(
                    f"attribute {decl.name!r} of class {name} collides with an "
                    f"inherited attribute of a different type"
                )
        return resolved

    # -- queries -----------------------------------------------------------

    def _lookup(self, name):
        cls = self.node_classes.get(name) or self.edge_classes.get(name)
        if cls is None:
            raise SchemaError(f"unknown class {name!r}")
        return cls

    def node_class(self, name):
        cls = self.node_classes.get(name)
        if cls is None:
            raise SchemaError(f"unknown node class {name!r}")
        return cls

    def edge_class(self, name):
        cls = self.edge_classes.get(name)
        if cls is None:
            raise SchemaError(f"unknown edge class {name!r}")
        return cls

    def has_class(self, name):
        return name in self.node_classes or name in self.edge_classes

    def kind_of(self, name):
        if name in self.node_classes:
            return "node"
        if name in self.edge_classes:
            return "edge"
        raise SchemaError(f"unknown class {name!r}")

    def is_subtype_of(self, sub, super_):
        """True iff super_ is reachable from sub over super links (reflexive)."""
        anc = self._ancestors.get(sub)
        if anc is None:
            raise SchemaError(f"unknown class {sub!r}")
        if super_ not in self._ancestors:
            raise SchemaError(f"unknown class {super_!r}")
        if self.kind_of(sub) != self.kind_of(super_):
            raise SchemaError(f"{sub} and {super_} are not classes of the same kind")
        return super_ in anc

    def subclasses_of(self, name):
        """All classes whose instances count as `name`, declaration order, incl. itself."""
        if name not in self._descendants:
            raise SchemaError(f"unknown class {name!r}")
        return self._descendants[name]

    def subtype_set(self, name):
        """Frozen set of subclasses_of(name), for hot-path membership checks."""
        cached = self._subtype_sets.get(name)
        if cached is None:
            cached = frozenset(self.subclasses_of(name))
            self._subtype_sets[name] = cached
        return cached

    def resolve_attribute(self, cls_name, attr_name):
        table = self._attr_table.get(cls_name)
        if table is None:
            raise SchemaError(f"unknown class {cls_name!r}")
        decl = table.get(attr_name)
        if decl is None:
            raise SchemaError(f"class {cls_name} has no attribute {attr_name!r}")
        return decl

    def attributes_of(self, cls_name):
        table = self._attr_table.get(cls_name)
        if table is None:
            raise SchemaError(f"unknown class {cls_name!r}")
        return dict(table)

    def default_value(self, vt):
        if vt.kind == "boolean":
            return False
        if vt.kind == "integer":
            return 0
        if vt.kind == "double":
            return 0.0
        if vt.kind == "string":
            return ""
        if vt.kind == "enum":
            items = self.enums[vt.name].items
            return items[0][0] if items else ""
        if vt.kind == "set":
            return set()
        if vt.kind == "map":
            return {}
        if vt.kind == "array":
            return []
        raise SchemaError(f"no default for value type {vt}")

    def check_value(self, vt, value):
        """Validate a Python value against a declared value type."""
        kind = vt.kind
        if kind == "boolean":
            ok = isinstance(value, bool)
        elif kind == "integer":
            ok = isinstance(value, int) and not isinstance(value, bool)
            if ok and not (INT64_MIN <= value <= INT64_MAX):
                raise GraphValueError(f"integer out of 64-bit range: {value}")
        elif kind == "double":
            ok = isinstance(value, float) or (
                isinstance(value, int) and not isinstance(value, bool)
            )
            if ok:
                value = float(value)
        elif kind == "string":
            ok = isinstance(value, str)
        elif kind == "enum":
            ok = isinstance(value, str) and value in self.enums[vt.name].item_names()
        elif kind == "set":
            ok = isinstance(value, set) and all(
                self._scalar_ok(vt.elem, v) for v in value
            )
        elif kind == "map":
            ok = isinstance(value, dict) and all(
                self._scalar_ok(vt.key, k) and self._scalar_ok(vt.elem, v)
                for k, v in value.items()
            )
        elif kind == "array":
            ok = isinstance(value, list) and all(
                self._scalar_ok(vt.elem, v) for v in value
            )
        else:
            ok = False
        if not ok:
            raise GraphValueError(f"value {value!r} does not match type {vt}")
        return value

    @staticmethod
    def _scalar_ok(kind, value):
        if kind == "boolean":
            return isinstance(value, bool)
        if kind == "integer":
            return isinstance(value, int) and not isinstance(value, bool)
        if kind == "double":
            return isinstance(value, (int, float)) and not isinstance(value, bool)
        if kind == "string":
            return isinstance(value, str)
        return False

    def __eq__(self, other):
        if not isinstance(other, Schema):
            return NotImplemented
        return (
            self.node_classes == other.node_classes
            and self.edge_classes == other.edge_classes
            and self.enums == other.enums
        )


class GraphValueError(SchemaError):
    """A value does not fit its declared attribute type."""


class SchemaBuilder:
    """Accumulates declarations (by hand, from Ecore, from schema text) into a Schema."""

    def __init__(self):
        self._node_classes = [NodeClass(NODE_ROOT)]
        self._edge_classes = [EdgeClass(EDGE_ROOT)]
        self._enums = []
        self._packages = []

    def _names(self, kind):
        table = self._node_classes if kind == "node" else self._edge_classes
        return {c.name for c in table}

    def declare_node_class(self, name, supers=(), attrs=(), is_abstract=False):
        self._check_new_class(name)
        supers = tuple(s for s in supers if s != NODE_ROOT) or (NODE_ROOT,)
        unknown = [s for s in supers if s not in self._names("node")]
        if unknown:
            raise SchemaError(f"unknown super {unknown[0]!r} of node class {name}")
        cls = NodeClass(name, supers, tuple(attrs), is_abstract)
        self._node_classes.append(cls)
        self._probe(cls)
        return cls

    def declare_edge_class(
        self,
        name,
        supers=(),
        attrs=(),
        is_abstract=False,
        containment=False,
        source=None,
        target=None,
    ):
        self._check_new_class(name)
        supers = tuple(s for s in supers if s != EDGE_ROOT) or (EDGE_ROOT,)
        unknown = [s for s in supers if s not in self._names("edge")]
        if unknown:
            raise SchemaError(f"unknown super {unknown[0]!r} of edge class {name}")
        cls = EdgeClass(name, supers, tuple(attrs), is_abstract, containment, source, target)
        self._edge_classes.append(cls)
        self._probe(cls)
        return cls

    def declare_enum(self, name, items):
        if any(e.name == name for e in self._enums):
            raise SchemaError(f"duplicate enum name {name!r}")
        names = [n for n, _ in items]
        values = [v for _, v in items]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate item names in enum {name}")
        if len(set(values)) != len(values):
            raise SchemaError(f"duplicate item values in enum {name}")
        e = EnumDef(name, tuple((n, int(v)) for n, v in items))
        self._enums.append(e)
        return e

    def add_package(self, info):
        self._packages.append(info)

    def has_class(self, name):
        return name in self._names("node") or name in self._names("edge")

    def _check_new_class(self, name):
        if name in self._names("node") or name in self._names("edge"):
            raise SchemaError(f"duplicate class name {name!r}")
        if any(e.name == name for e in self._enums):
            raise SchemaError(f"class name {name!r} collides with an enum")

    def _probe(self, cls):
        # Validate eagerly so a bad declaration is reported at its call site.
        try:
            self.build()
        except SchemaError:
            if cls.kind == "node":
                self._node_classes.remove(cls)
            else:
                self._edge_classes.remove(cls)
            raise

    def build(self):
        return Schema(
            list(self._node_classes),
            list(self._edge_classes),
            list(self._enums),
            list(self._packages),
        )


# ---------------------------------------------------------------------------
# Schema text format (the .gm-like intermediate emitted by the Ecore importer)
# ---------------------------------------------------------------------------

def emit_schema_text(schema):
    """Render a schema as declaration text; parse_schema_text inverts this."""
    out = []
    for pkg in schema.packages:
        out.append(f'package {pkg.name} nsURI "{pkg.ns_uri}" nsPrefix "{pkg.ns_prefix}";')
    for e in schema.enums.values():
        items = ", ".join(f"{n} = {v}" for n, v in e.items)
        out.append(f"enum {e.name} {{ {items} }}")
    for cls in schema.node_classes.values():
        if cls.name == NODE_ROOT:
            continue
        out.append(_emit_class(cls, "node"))
    for cls in schema.edge_classes.values():
        if cls.name == EDGE_ROOT:
            continue
        out.append(_emit_class(cls, "edge"))
    return "\n".join(out) + "\n"


def _emit_class(cls, kind):
    words = []
    if cls.is_abstract:
        words.append("abstract")
    if kind == "edge" and cls.containment:
        words.append("containment")
    words.append(f"{kind} class {cls.name}")
    supers = [] if cls.supers in ((NODE_ROOT,), (EDGE_ROOT,)) else list(cls.supers)
    if supers:
        words.append("extends " + ", ".join(supers))
    if kind == "edge" and cls.source and cls.target:
        words.append(f"connect {cls.source} -> {cls.target}")
    head = " ".join(words)
    if not cls.attributes:
        return head + ";"
    attrs = " ".join(f"{a.name} : {a.value_type};" for a in cls.attributes)
    return f"{head} {{ {attrs} }}"


class _SchemaTextParser:
    def __init__(self, text, filename):
        self.filename = filename
        self.tokens = self._lex(text)
        self.pos = 0

    def _lex(self, text):
        tokens = []
        line, col, i = 1, 1, 0
        n = len(text)
        while i < n:
            c = text[i]
            if c == "\n":
                line += 1
                col = 1
                i += 1
                continue
            if c in " \t\r":
                i += 1
                col += 1
                continue
            if text.startswith("//", i):
                while i < n and text[i] != "\n":
                    i += 1
                continue
            if c.isalpha() or c == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                tokens.append((text[i:j], line, col))
                col += j - i
                i = j
                continue
            if c == '"':
                j = i + 1
                while j < n and text[j] != '"':
                    j += 1
                if j >= n:
                    raise ParseError("unterminated string", self.filename, line, col)
                tokens.append((text[i : j + 1], line, col))
                col += j + 1 - i
                i = j + 1
                continue
            if c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
                j = i + 1
                while j < n and text[j].isdigit():
                    j += 1
                tokens.append((text[i:j], line, col))
                col += j - i
                i = j
                continue
            for sym in ("->", "{", "}", ";", ",", ":", "=", "<", ">"):
                if text.startswith(sym, i):
                    tokens.append((sym, line, col))
                    i += len(sym)
                    col += len(sym)
                    break
            else:
                raise ParseError(f"unexpected character {c!r}", self.filename, line, col)
        tokens.append(("<eof>", line, col))
        return tokens

    def peek(self):
        return self.tokens[self.pos][0]

    def next(self):
        tok = self.tokens[self.pos]
        if tok[0] != "<eof>":
            self.pos += 1
        return tok[0]

    def expect(self, want):
        tok, line, col = self.tokens[self.pos]
        if tok != want:
            raise ParseError(f"expected {want!r}, got {tok!r}", self.filename, line, col)
        self.pos += 1
        return tok

    def error(self, msg):
        _, line, col = self.tokens[self.pos]
        raise ParseError(msg, self.filename, line, col)

    def parse_into(self, builder):
        while self.peek() != "<eof>":
            self._statement(builder)

    def _statement(self, builder):
        tok = self.peek()
        if tok == "package":
            self._package(builder)
        elif tok == "enum":
            self._enum(builder)
        else:
            self._class(builder)

    def _package(self, builder):
        self.expect("package")
        name = self.next()
        uri = prefix = ""
        while self.peek() != ";":
            key = self.next()
            val = self.next()
            if not val.startswith('"'):
                self.error("expected quoted value in package declaration")
            val = val[1:-1]
            if key == "nsURI":
                uri = val
            elif key == "nsPrefix":
                prefix = val
            else:
                self.error(f"unknown package property {key!r}")
        self.expect(";")
        builder.add_package(PackageInfo(name, uri, prefix))

    def _enum(self, builder):
        self.expect("enum")
        name = self.next()
        self.expect("{")
        items = []
        next_value = 0
        while self.peek() != "}":
            item = self.next()
            if self.peek() == "=":
                self.next()
                next_value = int(self.next())
            items.append((item, next_value))
            next_value += 1
            if self.peek() == ",":
                self.next()
        self.expect("}")
        builder.declare_enum(name, items)

    def _class(self, builder):
        is_abstract = containment = False
        while self.peek() in ("abstract", "containment"):
            if self.next() == "abstract":
                is_abstract = True
            else:
                containment = True
        kind = self.next()
        if kind not in ("node", "edge"):
            self.error(f"expected 'node' or 'edge', got {kind!r}")
        if containment and kind != "edge":
            self.error("only edge classes can be containment")
        self.expect("class")
        name = self.next()
        supers = []
        source = target = None
        if self.peek() == "extends":
            self.next()
            supers.append(self.next())
            while self.peek() == ",":
                self.next()
                supers.append(self.next())
        if self.peek() == "connect":
            self.next()
            source = self.next()
            self.expect("->")
            target = self.next()
        attrs = []
        if self.peek() == "{":
            self.next()
            while self.peek() != "}":
                attrs.append(self._attr())
            self.next()
        else:
            self.expect(";")
        if kind == "node":
            builder.declare_node_class(name, supers, attrs, is_abstract)
        else:
            builder.declare_edge_class(
                name, supers, attrs, is_abstract, containment, source, target
            )

    def _attr(self):
        name = self.next()
        self.expect(":")
        vt = self._value_type()
        self.expect(";")
        return AttributeDecl(name, vt)

    def _value_type(self):
        base = self.next()
        if base in SCALAR_TYPES:
            return scalar(base)
        if base == "set":
            self.expect("<")
            elem = self.next()
            self.expect(">")
            return set_type(elem)
        if base == "array":
            self.expect("<")
            elem = self.next()
            self.expect(">")
            return array_type(elem)
        if base == "map":
            self.expect("<")
            key = self.next()
            self.expect(",")
            elem = self.next()
            self.expect(">")
            return map_type(key, elem)
        return enum_type(base)  # enum reference, validated on build


def parse_schema_text(text, builder=None, filename="<schema>"):
    """Parse declaration text into a builder (fresh one if not given)."""
    builder = builder or SchemaBuilder()
    _SchemaTextParser(text, filename).parse_into(builder)
    return builder

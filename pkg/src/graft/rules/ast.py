"""AST for the rule DSL: patterns, nested blocks, rewrite specs, expressions."""

from __future__ import annotations

from dataclasses import dataclass, field


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    value: object  # str, int, bool, float
    pos: tuple = (0, 0)


@dataclass(frozen=True)
class EnumLit:
    enum: str
    item: str
    pos: tuple = (0, 0)


@dataclass(frozen=True)
class VarRef:
    """Reference to a var parameter in an expression."""

    name: str
    pos: tuple = (0, 0)


@dataclass(frozen=True)
class AttrRef:
    elem: str
    attr: str
    pos: tuple = (0, 0)


@dataclass(frozen=True)
class Unary:
    op: str  # '!' or '-'
    operand: object
    pos: tuple = (0, 0)


@dataclass(frozen=True)
class Binary:
    op: str  # == != < <= > >= && || + - * /
    left: object
    right: object
    pos: tuple = (0, 0)


# -- pattern items (kept in source order) -------------------------------------

@dataclass
class NodeItem:
    name: str
    cls: str | None  # None for a plain reference
    is_decl: bool
    pos: tuple = (0, 0)


@dataclass
class EdgeItem:
    name: str  # auto-generated for anonymous edges
    cls: str | None
    src: str
    tgt: str
    is_decl: bool
    pos: tuple = (0, 0)


@dataclass
class CondItem:
    expr: object
    pos: tuple = (0, 0)


@dataclass
class DefItem:
    name: str
    cls: str
    pos: tuple = (0, 0)


@dataclass
class SubpatternArg:
    name: str
    is_yield: bool
    pos: tuple = (0, 0)


@dataclass
class SubpatternItem:
    inst: str
    pattern: str
    args: list
    pos: tuple = (0, 0)


@dataclass
class NestedItem:
    kind: str  # iterated | optional | negative
    pattern: "Pattern"
    pos: tuple = (0, 0)


# -- rewrite statements --------------------------------------------------------

@dataclass
class CreateNode:
    name: str
    cls: str
    pos: tuple = (0, 0)


@dataclass
class CreateEdge:
    name: str
    cls: str
    src: str
    tgt: str
    pos: tuple = (0, 0)


@dataclass
class KeepRef:
    """A bare element reference in a rewrite body (marks the element as kept)."""

    name: str
    pos: tuple = (0, 0)


@dataclass
class DeleteStmt:
    names: list
    pos: tuple = (0, 0)


@dataclass
class EvalAssign:
    elem: str
    attr: str
    expr: object
    pos: tuple = (0, 0)


@dataclass
class YieldAssign:
    target: str  # def element name
    expr: object  # element reference (VarRef-like by name) or expression
    pos: tuple = (0, 0)


@dataclass
class ElemExpr:
    """An element reference used as a yield source or call argument."""

    name: str
    pos: tuple = (0, 0)


@dataclass
class EmitStmt:
    exprs: list
    pos: tuple = (0, 0)


@dataclass
class CallStmt:
    inst: str
    args: list  # element names
    pos: tuple = (0, 0)


@dataclass
class RewriteSpec:
    mode: str  # modify | replace
    params: list = field(default_factory=list)  # rewrite-time Params (subpatterns only)
    body: list = field(default_factory=list)  # ordered statements
    pos: tuple = (0, 0)

    def statements(self, *kinds):
        return [s for s in self.body if isinstance(s, kinds)]


@dataclass
class Pattern:
    items: list = field(default_factory=list)
    rewrite: RewriteSpec | None = None
    pos: tuple = (0, 0)

    def nested_items(self):
        return [i for i in self.items if isinstance(i, NestedItem)]


@dataclass
class Param:
    name: str
    cls: str  # class name, or scalar type name for var params
    is_def: bool = False
    is_var: bool = False
    pos: tuple = (0, 0)


@dataclass
class RuleDecl:
    name: str
    params: list
    pattern: Pattern
    pos: tuple = (0, 0)


@dataclass
class SubpatternDecl:
    name: str
    params: list
    pattern: Pattern
    pos: tuple = (0, 0)


class RuleSet:
    """Parsed, schema-resolved rules and subpatterns."""

    def __init__(self, schema):
        self.schema = schema
        self.rules = {}
        self.subpatterns = {}

    def rule(self, name):
        from ..errors import MatchError

        r = self.rules.get(name)
        if r is None:
            raise MatchError(f"unknown rule {name!r}")
        return r

    def subpattern(self, name):
        from ..errors import MatchError

        p = self.subpatterns.get(name)
        if p is None:
            raise MatchError(f"unknown subpattern {name!r}")
        return p

"""Lexer, recursive-descent parser, and resolver for the rule DSL.

The grammar is documented in docs/rule-language.md.  parse_rules() returns a
RuleSet whose patterns are fully resolved against a schema: every class name
exists, every element reference points at a visible declaration, subpattern
instantiations match their signatures.
"""

from __future__ import annotations

from ..errors import ParseError
from ..metamodel import SCALAR_TYPES
from . import ast

KEYWORDS = {
    "rule", "pattern", "modify", "replace", "delete", "eval", "emit",
    "yield", "def", "var", "iterated", "optional", "negative", "if",
    "true", "false",
}

SYMBOLS = [
    "-->", "->", "::", "==", "!=", "<=", ">=", "&&", "||",
    "{", "}", "(", ")", ";", ",", ":", ".", "=", "!", "<", ">",
    "+", "-", "*", "/",
]


class Token:
    __slots__ = ("kind", "value", "line", "col")

    def __init__(self, kind, value, line, col):
        self.kind = kind  # ident | int | string | symbol | keyword | eof
        self.value = value
        self.line = line
        self.col = col

    def __repr__(self):
        return f"Token({self.kind}, {self.value!r})"


def lex(text, filename):
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise ParseError("unterminated comment", filename, line, col)
            skipped = text[i : end + 2]
            line += skipped.count("\n")
            col = len(skipped) - skipped.rfind("\n") if "\n" in skipped else col + len(skipped)
            i = end + 2
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", int(text[i:j]), line, col))
            col += j - i
            i = j
            continue
        if c == '"':
            j = i + 1
            out = []
            while j < n and text[j] != '"':
                if text[j] == "\\":
                    if j + 1 >= n:
                        break
                    esc = text[j + 1]
                    out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc))
                    if out[-1] is None:
                        raise ParseError(f"bad escape \\{esc}", filename, line, col)
                    j += 2
                    continue
                if text[j] == "\n":
                    raise ParseError("newline in string literal", filename, line, col)
                out.append(text[j])
                j += 1
            if j >= n:
                raise ParseError("unterminated string", filename, line, col)
            tokens.append(Token("string", "".join(out), line, col))
            col += j + 1 - i
            i = j + 1
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("symbol", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", filename, line, col)
    tokens.append(Token("eof", None, line, col))
    return tokens


class _Parser:
    def __init__(self, text, filename):
        self.filename = filename
        self.tokens = lex(text, filename)
        self.pos = 0
        self._anon = 0

    # -- token helpers ----------------------------------------------------

    def peek(self, offset=0):
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, value, offset=0):
        tok = self.peek(offset)
        return tok.value == value and tok.kind in ("symbol", "keyword")

    def accept(self, value):
        if self.at(value):
            return self.next()
        return None

    def expect(self, value):
        tok = self.next()
        if tok.value != value or tok.kind not in ("symbol", "keyword"):
            self.error(f"expected {value!r}, got {tok.value!r}", tok)
        return tok

    def ident(self, what="identifier"):
        tok = self.next()
        if tok.kind != "ident":
            self.error(f"expected {what}, got {tok.value!r}", tok)
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.filename, tok.line, tok.col)

    def fresh_anon(self, prefix):
        self._anon += 1
        return f"${prefix}{self._anon}"

    # -- top level ---------------------------------------------------------

    def parse_file(self):
        rules, subpatterns = [], []
        while self.peek().kind != "eof":
            if self.at("rule"):
                rules.append(self.rule_decl())
            elif self.at("pattern"):
                subpatterns.append(self.pattern_decl())
            else:
                self.error("expected 'rule' or 'pattern' declaration")
        return rules, subpatterns

    def rule_decl(self):
        tok = self.expect("rule")
        name = self.ident("rule name").value
        params = self.param_list()
        self.expect("{")
        pattern = self.pattern_body(rewrite_required=True)
        self.expect("}")
        return ast.RuleDecl(name, params, pattern, (tok.line, tok.col))

    def pattern_decl(self):
        tok = self.expect("pattern")
        name = self.ident("pattern name").value
        params = self.param_list()
        self.expect("{")
        pattern = self.pattern_body(rewrite_required=False)
        self.expect("}")
        return ast.SubpatternDecl(name, params, pattern, (tok.line, tok.col))

    def param_list(self):
        if not self.at("("):
            return []
        self.expect("(")
        params = []
        while not self.at(")"):
            is_def = bool(self.accept("def"))
            is_var = bool(self.accept("var"))
            tok = self.ident("parameter name")
            self.expect(":")
            cls = self.ident("type name").value
            params.append(ast.Param(tok.value, cls, is_def, is_var, (tok.line, tok.col)))
            if not self.at(")"):
                self.expect(",")
        self.expect(")")
        return params

    # -- patterns ------------------------------------------------------------

    def pattern_body(self, rewrite_required, allow_rewrite=True):
        items = []
        rewrite = None
        pos = (self.peek().line, self.peek().col)
        while not self.at("}"):
            if self.at("modify") or self.at("replace"):
                if not allow_rewrite:
                    self.error("negative patterns cannot carry a rewrite part")
                rewrite = self.rewrite_block()
                if not self.at("}"):
                    self.error("rewrite part must be the last element of its block")
                break
            items.append(self.pattern_stmt(items))
        if rewrite_required and rewrite is None:
            self.error("rule is missing its modify/replace part")
        return ast.Pattern(items, rewrite, pos)

    def pattern_stmt(self, items):
        tok = self.peek()
        if self.at("if"):
            self.next()
            self.expect("{")
            conds = []
            while not self.at("}"):
                expr = self.expression()
                self.expect(";")
                # each statement is its own condition, checked as soon as the
                # elements it mentions are bound
                conds.append(ast.CondItem(expr, (tok.line, tok.col)))
            self.expect("}")
            if not conds:
                self.error("empty if block")
            if len(conds) == 1:
                return conds[0]
            return _ChainGroup(conds)
        if self.at("def"):
            self.next()
            name = self.ident("def element name")
            self.expect(":")
            cls = self.ident("class name").value
            self.expect(";")
            return ast.DefItem(name.value, cls, (name.line, name.col))
        if self.at("iterated") or self.at("optional") or self.at("negative"):
            kind = self.next().value
            self.expect("{")
            inner = self.pattern_body(
                rewrite_required=False, allow_rewrite=(kind != "negative")
            )
            self.expect("}")
            return ast.NestedItem(kind, inner, (tok.line, tok.col))
        # subpattern instance: inst:Name(...)
        if (
            tok.kind == "ident"
            and self.peek(1).value == ":"
            and self.peek(2).kind == "ident"
            and self.peek(3).value == "("
        ):
            inst = self.next().value
            self.next()
            pat_name = self.next().value
            args = self.call_args(allow_yield=True)
            self.expect(";")
            return ast.SubpatternItem(inst, pat_name, args, (tok.line, tok.col))
        stmts = self.element_chain()
        self.expect(";")
        if len(stmts) == 1:
            return stmts[0]
        return _ChainGroup(stmts)

    def call_args(self, allow_yield):
        self.expect("(")
        args = []
        while not self.at(")"):
            is_yield = bool(self.accept("yield"))
            if is_yield and not allow_yield:
                self.error("'yield' argument is not allowed here")
            tok = self.ident("argument name")
            args.append(ast.SubpatternArg(tok.value, is_yield, (tok.line, tok.col)))
            if not self.at(")"):
                self.expect(",")
        self.expect(")")
        return args

    def element_chain(self):
        """Parse `a:T -e:E-> b:U -...-> ...`; returns the items in source order."""
        out = []
        src = self.endpoint(out)
        while self.at("-->") or self.at("-"):
            etok = self.peek()
            name, cls, is_decl = self.edge_segment()
            if self.at(";"):
                tgt_name = self.fresh_anon("n")
                out.append(ast.NodeItem(tgt_name, "Node", True, (etok.line, etok.col)))
                tgt = tgt_name
                out.insert(
                    len(out) - 1,
                    ast.EdgeItem(name, cls, src, tgt, is_decl, (etok.line, etok.col)),
                )
                return out
            tgt = self.endpoint(out)
            out.insert(
                _edge_slot(out, tgt),
                ast.EdgeItem(name, cls, src, tgt, is_decl, (etok.line, etok.col)),
            )
            src = tgt
        return out

    def edge_segment(self):
        """One of -->, -e->, -:T->, -e:T->."""
        if self.accept("-->"):
            return self.fresh_anon("e"), "Edge", True
        self.expect("-")
        name = None
        cls = None
        if self.peek().kind == "ident":
            name = self.next().value
        if self.accept(":"):
            cls = self.ident("edge class").value
        self.expect("->")
        if name is None and cls is None:
            self.error("empty edge segment")
        if name is None:
            return self.fresh_anon("e"), cls, True
        if cls is None:
            return name, None, False  # reference to a declared edge
        return name, cls, True

    def endpoint(self, out):
        """IDENT, IDENT:Class (declaration), or :Class (anonymous declaration)."""
        tok = self.peek()
        if self.accept(":"):
            cls = self.ident("node class").value
            name = self.fresh_anon("n")
            out.append(ast.NodeItem(name, cls, True, (tok.line, tok.col)))
            return name
        name_tok = self.ident("node name")
        if self.at(":"):
            self.next()
            cls = self.ident("node class").value
            out.append(ast.NodeItem(name_tok.value, cls, True, (name_tok.line, name_tok.col)))
        else:
            out.append(ast.NodeItem(name_tok.value, None, False, (name_tok.line, name_tok.col)))
        return name_tok.value

    # -- rewrites ---------------------------------------------------------------

    def rewrite_block(self):
        tok = self.next()  # modify | replace
        mode = tok.value
        params = []
        if self.at("("):
            params = self.param_list()
        self.expect("{")
        body = []
        while not self.at("}"):
            body.extend(self.rewrite_stmt())
        self.expect("}")
        return ast.RewriteSpec(mode, params, body, (tok.line, tok.col))

    def rewrite_stmt(self):
        tok = self.peek()
        if self.at("delete"):
            self.next()
            self.expect("(")
            names = [self.ident("element name").value]
            while self.accept(","):
                names.append(self.ident("element name").value)
            self.expect(")")
            self.expect(";")
            return [ast.DeleteStmt(names, (tok.line, tok.col))]
        if self.at("eval"):
            self.next()
            self.expect("{")
            out = []
            while not self.at("}"):
                etok = self.ident("element name")
                self.expect(".")
                attr = self.ident("attribute name").value
                self.expect("=")
                expr = self.expression()
                self.expect(";")
                out.append(ast.EvalAssign(etok.value, attr, expr, (etok.line, etok.col)))
            self.expect("}")
            return out
        if self.at("yield"):
            self.next()
            self.expect("{")
            out = []
            while not self.at("}"):
                self.accept("yield")  # optional per-assignment marker
                ttok = self.ident("def element name")
                self.expect("=")
                val = self.yield_source()
                self.expect(";")
                out.append(ast.YieldAssign(ttok.value, val, (ttok.line, ttok.col)))
            self.expect("}")
            return out
        if self.at("emit"):
            self.next()
            self.expect("(")
            exprs = [self.expression()]
            while self.accept(","):
                exprs.append(self.expression())
            self.expect(")")
            self.expect(";")
            return [ast.EmitStmt(exprs, (tok.line, tok.col))]
        # sub-rewrite call: inst(args);
        if tok.kind == "ident" and self.peek(1).value == "(":
            inst = self.next().value
            args = self.call_args(allow_yield=False)
            self.expect(";")
            return [ast.CallStmt(inst, [a.name for a in args], (tok.line, tok.col))]
        # element statement: creations and kept references
        stmts = self.element_chain()
        self.expect(";")
        return [self._to_rewrite_stmt(s) for s in stmts]

    @staticmethod
    def _to_rewrite_stmt(item):
        if isinstance(item, ast.NodeItem):
            if item.is_decl:
                return ast.CreateNode(item.name, item.cls, item.pos)
            return ast.KeepRef(item.name, item.pos)
        if item.is_decl:
            return ast.CreateEdge(item.name, item.cls, item.src, item.tgt, item.pos)
        return ast.KeepRef(item.name, item.pos)

    def yield_source(self):
        tok = self.peek()
        if tok.kind == "ident" and self.peek(1).value in (";",):
            return ast.ElemExpr(self.next().value, (tok.line, tok.col))
        return self.expression()

    # -- expressions ---------------------------------------------------------

    def expression(self):
        return self.or_expr()

    def or_expr(self):
        left = self.and_expr()
        while self.at("||"):
            tok = self.next()
            left = ast.Binary("||", left, self.and_expr(), (tok.line, tok.col))
        return left

    def and_expr(self):
        left = self.cmp_expr()
        while self.at("&&"):
            tok = self.next()
            left = ast.Binary("&&", left, self.cmp_expr(), (tok.line, tok.col))
        return left

    def cmp_expr(self):
        left = self.add_expr()
        for op in ("==", "!=", "<=", ">=", "<", ">"):
            if self.at(op):
                tok = self.next()
                return ast.Binary(op, left, self.add_expr(), (tok.line, tok.col))
        return left

    def add_expr(self):
        left = self.mul_expr()
        while self.at("+") or self.at("-"):
            tok = self.next()
            left = ast.Binary(tok.value, left, self.mul_expr(), (tok.line, tok.col))
        return left

    def mul_expr(self):
        left = self.unary_expr()
        while self.at("*") or self.at("/"):
            tok = self.next()
            left = ast.Binary(tok.value, left, self.unary_expr(), (tok.line, tok.col))
        return left

    def unary_expr(self):
        if self.at("!") or self.at("-"):
            tok = self.next()
            return ast.Unary(tok.value, self.unary_expr(), (tok.line, tok.col))
        return self.primary()

    def primary(self):
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return ast.Lit(tok.value, (tok.line, tok.col))
        if tok.kind == "string":
            self.next()
            return ast.Lit(tok.value, (tok.line, tok.col))
        if self.at("true"):
            self.next()
            return ast.Lit(True, (tok.line, tok.col))
        if self.at("false"):
            self.next()
            return ast.Lit(False, (tok.line, tok.col))
        if self.accept("("):
            expr = self.expression()
            self.expect(")")
            return expr
        if tok.kind == "ident":
            self.next()
            if self.accept("::"):
                item = self.ident("enum item").value
                return ast.EnumLit(tok.value, item, (tok.line, tok.col))
            if self.accept("."):
                attr = self.ident("attribute name").value
                return ast.AttrRef(tok.value, attr, (tok.line, tok.col))
            return ast.VarRef(tok.value, (tok.line, tok.col))
        self.error(f"expected expression, got {tok.value!r}")


class _ChainGroup:
    """Transient container so pattern_stmt can return several items."""

    def __init__(self, items):
        self.items = items


def _edge_slot(out, tgt_name):
    """Edges sit between their endpoints in source order."""
    for i, item in enumerate(out):
        if isinstance(item, ast.NodeItem) and item.name == tgt_name and item.is_decl:
            return i
    return len(out)


def _flatten(items):
    for item in items:
        if isinstance(item, _ChainGroup):
            yield from item.items
        else:
            yield item


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------

class _Scope:
    def __init__(self, parent=None, extra=None):
        self.parent = parent
        self.extra = extra  # secondary scope (rewrite params), consulted last
        self.elems = {}  # name -> ('node'|'edge', cls)
        self.defs = {}   # name -> cls (node defs)
        self.vars = {}   # name -> scalar type

    def _walk(self, table_name, name):
        extras = []
        s = self
        while s:
            table = getattr(s, table_name)
            if name in table:
                return table[name]
            if s.extra is not None:
                extras.append(s.extra)
            s = s.parent
        for ex in extras:
            found = ex._walk(table_name, name)
            if found is not None:
                return found
        return None

    def lookup_elem(self, name):
        return self._walk("elems", name)

    def lookup_def(self, name):
        return self._walk("defs", name)

    def lookup_var(self, name):
        return self._walk("vars", name)

    def is_taken(self, name):
        return (
            self.lookup_elem(name) is not None
            or self.lookup_def(name) is not None
            or self.lookup_var(name) is not None
        )


class _Resolver:
    def __init__(self, ruleset, filename):
        self.rs = ruleset
        self.schema = ruleset.schema
        self.filename = filename

    def fail(self, msg, pos):
        raise ParseError(msg, self.filename, pos[0], pos[1])

    def node_cls(self, name, pos):
        if name not in self.schema.node_classes:
            self.fail(f"unknown node class {name!r}", pos)
        return name

    def edge_cls(self, name, pos):
        if name not in self.schema.edge_classes:
            self.fail(f"unknown edge class {name!r}", pos)
        return name

    def declare_params(self, params, scope):
        for p in params:
            if scope.is_taken(p.name):
                self.fail(f"duplicate parameter {p.name!r}", p.pos)
            if p.is_var:
                if p.cls not in SCALAR_TYPES:
                    self.fail(f"var parameter must have a scalar type, got {p.cls!r}", p.pos)
                scope.vars[p.name] = p.cls
            elif p.is_def:
                self.node_or_edge(p.cls, p.pos)
                scope.defs[p.name] = p.cls
            else:
                kind = self.node_or_edge(p.cls, p.pos)
                scope.elems[p.name] = (kind, p.cls)

    def node_or_edge(self, cls, pos):
        if cls in self.schema.node_classes:
            return "node"
        if cls in self.schema.edge_classes:
            return "edge"
        self.fail(f"unknown class {cls!r}", pos)

    def resolve_decl(self, decl, is_rule):
        scope = _Scope()
        self.declare_params(decl.params, scope)
        rw = decl.pattern.rewrite
        rw_params = None
        if rw is not None and rw.params:
            if is_rule:
                self.fail("only subpattern rewrites take parameters", rw.pos)
            for p in rw.params:
                if p.is_def or p.is_var:
                    self.fail("rewrite parameters must be plain elements", p.pos)
                if scope.is_taken(p.name):
                    self.fail(f"rewrite parameter {p.name!r} shadows a pattern element", p.pos)
            rw_params = _Scope()
            self.declare_params(rw.params, rw_params)
        ctx = {
            "in_negative": False,
            "mode": rw.mode if rw else None,
            "top": True,
            "rw_params": rw_params,
        }
        self.resolve_pattern(decl.pattern, scope, ctx, decl)

    def resolve_pattern(self, pattern, scope, ctx, decl):
        pattern.items = list(_flatten(pattern.items))
        insts = {}
        mode = pattern.rewrite.mode if pattern.rewrite else None
        if mode == "replace":
            bad = [i for i in pattern.items if isinstance(i, (ast.NestedItem, ast.SubpatternItem, ast.DefItem))]
            if bad:
                self.fail(
                    "replace mode cannot be combined with nested blocks, subpatterns or defs; use modify",
                    bad[0].pos,
                )
        # first register this level's declarations: an inline chain target sits
        # after its edge in source order, and nested blocks may reference any
        # element of the enclosing pattern
        for item in pattern.items:
            if isinstance(item, ast.NodeItem) and item.is_decl:
                if scope.is_taken(item.name):
                    self.fail(f"duplicate declaration of {item.name!r}", item.pos)
                self.node_cls(item.cls, item.pos)
                scope.elems[item.name] = ("node", item.cls)
            elif isinstance(item, ast.EdgeItem) and item.is_decl:
                if scope.is_taken(item.name):
                    self.fail(f"duplicate declaration of {item.name!r}", item.pos)
                self.edge_cls(item.cls, item.pos)
                scope.elems[item.name] = ("edge", item.cls)
            elif isinstance(item, ast.DefItem):
                if ctx["in_negative"]:
                    self.fail("negative patterns cannot declare def elements", item.pos)
                if not ctx.get("top"):
                    self.fail("def elements are only allowed at rule/subpattern top level", item.pos)
                if scope.is_taken(item.name):
                    self.fail(f"duplicate declaration of {item.name!r}", item.pos)
                self.node_or_edge(item.cls, item.pos)
                scope.defs[item.name] = item.cls
        pattern._decls = dict(scope.elems)
        # then check references and recurse
        for item in pattern.items:
            if isinstance(item, ast.NodeItem):
                if not item.is_decl:
                    found = scope.lookup_elem(item.name)
                    if found is None:
                        self.fail(f"reference to undeclared element {item.name!r}", item.pos)
                    if found[0] != "node":
                        self.fail(f"{item.name!r} is not a node", item.pos)
            elif isinstance(item, ast.EdgeItem):
                self.resolve_edge_item(item, scope)
            elif isinstance(item, ast.CondItem):
                self.resolve_expr(item.expr, scope)
            elif isinstance(item, ast.SubpatternItem):
                self.resolve_subpattern_item(item, scope, insts)
            elif isinstance(item, ast.NestedItem):
                child = _Scope(scope)
                child_ctx = dict(ctx)
                child_ctx["top"] = False
                child_ctx["in_negative"] = ctx["in_negative"] or item.kind == "negative"
                if item.kind == "negative" and item.pattern.rewrite is not None:
                    self.fail("negative patterns cannot carry a rewrite part", item.pos)
                self.resolve_pattern(item.pattern, child, child_ctx, decl)
        if pattern.rewrite is not None:
            if ctx["in_negative"]:
                self.fail("rewrites are not allowed inside negative patterns", pattern.rewrite.pos)
            self.resolve_rewrite(pattern, scope, insts, ctx, decl)
        pattern._insts = insts  # inst name -> SubpatternDecl, used by matcher

    def resolve_edge_item(self, item, scope):
        for end in (item.src, item.tgt):
            found = scope.lookup_elem(end)
            if found is None:
                self.fail(f"reference to undeclared element {end!r}", item.pos)
            if found[0] != "node":
                self.fail(f"{end!r} is not a node", item.pos)
        if not item.is_decl:
            found = scope.lookup_elem(item.name)
            if found is None:
                self.fail(f"reference to undeclared edge {item.name!r}", item.pos)
            if found[0] != "edge":
                self.fail(f"{item.name!r} is not an edge", item.pos)

    def resolve_subpattern_item(self, item, scope, insts):
        target = self.rs.subpatterns.get(item.pattern)
        if target is None:
            self.fail(f"unknown subpattern {item.pattern!r}", item.pos)
        if scope.is_taken(item.inst) or item.inst in insts:
            self.fail(f"duplicate declaration of {item.inst!r}", item.pos)
        if len(item.args) != len(target.params):
            self.fail(
                f"subpattern {item.pattern} expects {len(target.params)} argument(s), "
                f"got {len(item.args)}",
                item.pos,
            )
        for arg, formal in zip(item.args, target.params):
            if formal.is_var:
                if scope.lookup_var(arg.name) is None:
                    self.fail(f"argument {arg.name!r} is not a var parameter", arg.pos)
                continue
            if formal.is_def:
                if not arg.is_yield:
                    self.fail(
                        f"argument for def parameter {formal.name!r} needs a 'yield' marker",
                        arg.pos,
                    )
                if scope.lookup_def(arg.name) is None:
                    self.fail(f"yield argument {arg.name!r} is not a def element", arg.pos)
                continue
            if arg.is_yield:
                self.fail(f"parameter {formal.name!r} is not a def parameter", arg.pos)
            found = scope.lookup_elem(arg.name)
            if found is None:
                self.fail(f"reference to undeclared element {arg.name!r}", arg.pos)
            kind = self.node_or_edge(formal.cls, formal.pos)
            if found[0] != kind:
                self.fail(f"argument {arg.name!r} has the wrong element kind", arg.pos)
            if not self.schema.is_subtype_of(found[1], formal.cls):
                self.fail(
                    f"argument {arg.name!r} of class {found[1]} does not fit "
                    f"parameter class {formal.cls}",
                    arg.pos,
                )
        insts[item.inst] = target

    # -- rewrite resolution ----------------------------------------------------

    def resolve_rewrite(self, pattern, scope, insts, ctx, decl):
        rw = pattern.rewrite
        if rw.params and not ctx.get("top"):
            self.fail("only the top-level rewrite of a subpattern takes parameters", rw.pos)
        rw_scope = _Scope(scope, extra=ctx.get("rw_params"))
        created = set()
        for stmt in rw.body:
            if isinstance(stmt, ast.CreateNode):
                if rw_scope.is_taken(stmt.name):
                    self.fail(f"duplicate declaration of {stmt.name!r}", stmt.pos)
                self.node_cls(stmt.cls, stmt.pos)
                rw_scope.elems[stmt.name] = ("node", stmt.cls)
                created.add(stmt.name)
            elif isinstance(stmt, ast.CreateEdge):
                self.edge_cls(stmt.cls, stmt.pos)
                for end in (stmt.src, stmt.tgt):
                    if rw_scope.lookup_elem(end) is None and rw_scope.lookup_def(end) is None:
                        self.fail(f"reference to undeclared element {end!r}", stmt.pos)
                if rw_scope.is_taken(stmt.name):
                    self.fail(f"duplicate declaration of {stmt.name!r}", stmt.pos)
                rw_scope.elems[stmt.name] = ("edge", stmt.cls)
                created.add(stmt.name)
            elif isinstance(stmt, ast.KeepRef):
                if rw_scope.lookup_elem(stmt.name) is None and rw_scope.lookup_def(stmt.name) is None:
                    self.fail(f"reference to undeclared element {stmt.name!r}", stmt.pos)
            elif isinstance(stmt, ast.DeleteStmt):
                if rw.mode != "modify":
                    self.fail("delete() is only available in modify mode", stmt.pos)
                for name in stmt.names:
                    if rw_scope.lookup_elem(name) is None:
                        self.fail(f"reference to undeclared element {name!r}", stmt.pos)
            elif isinstance(stmt, ast.EvalAssign):
                target = rw_scope.lookup_elem(stmt.elem) or rw_scope.lookup_def(stmt.elem)
                if target is None:
                    self.fail(f"reference to undeclared element {stmt.elem!r}", stmt.pos)
                self.resolve_expr(stmt.expr, rw_scope)
            elif isinstance(stmt, ast.YieldAssign):
                if scope.lookup_def(stmt.target) is None:
                    self.fail(f"yield target {stmt.target!r} is not a def element", stmt.pos)
                # yields run before any creation, so sources are pattern
                # elements, parameters, or other defs
                if isinstance(stmt.expr, ast.ElemExpr):
                    if (
                        scope.lookup_elem(stmt.expr.name) is None
                        and scope.lookup_def(stmt.expr.name) is None
                    ):
                        self.fail(
                            f"yield source {stmt.expr.name!r} must be a pattern element or def",
                            stmt.pos,
                        )
                else:
                    self.resolve_expr(stmt.expr, scope)
            elif isinstance(stmt, ast.EmitStmt):
                for expr in stmt.exprs:
                    self.resolve_expr(expr, rw_scope)
            elif isinstance(stmt, ast.CallStmt):
                target = insts.get(stmt.inst)
                if target is None:
                    self.fail(f"{stmt.inst!r} is not a subpattern instance of this pattern", stmt.pos)
                sub_rw = target.pattern.rewrite
                if sub_rw is None:
                    self.fail(f"subpattern {target.name} has no rewrite part to call", stmt.pos)
                if len(stmt.args) != len(sub_rw.params):
                    self.fail(
                        f"rewrite of {target.name} expects {len(sub_rw.params)} argument(s), "
                        f"got {len(stmt.args)}",
                        stmt.pos,
                    )
                for name in stmt.args:
                    if rw_scope.lookup_elem(name) is None and rw_scope.lookup_def(name) is None:
                        self.fail(f"reference to undeclared element {name!r}", stmt.pos)
        if rw.mode == "replace":
            referenced = set()
            for stmt in rw.body:
                referenced |= _referenced_names(stmt)
            rw._kept = referenced

    def resolve_expr(self, expr, scope):
        if isinstance(expr, ast.Lit):
            return
        if isinstance(expr, ast.EnumLit):
            enum = self.schema.enums.get(expr.enum)
            if enum is None:
                self.fail(f"unknown enum {expr.enum!r}", expr.pos)
            if expr.item not in enum.item_names():
                self.fail(f"enum {expr.enum} has no item {expr.item!r}", expr.pos)
            return
        if isinstance(expr, ast.VarRef):
            if scope.lookup_var(expr.name) is None:
                if scope.lookup_elem(expr.name) or scope.lookup_def(expr.name):
                    self.fail(
                        f"{expr.name!r} is an element; expected an attribute access or var",
                        expr.pos,
                    )
                self.fail(f"reference to undeclared var {expr.name!r}", expr.pos)
            return
        if isinstance(expr, ast.AttrRef):
            found = scope.lookup_elem(expr.elem)
            cls = None
            if found is not None:
                cls = found[1]
            else:
                cls = scope.lookup_def(expr.elem)
            if cls is None:
                self.fail(f"reference to undeclared element {expr.elem!r}", expr.pos)
            try:
                self.schema.resolve_attribute(cls, expr.attr)
            except Exception:
                self.fail(f"class {cls} has no attribute {expr.attr!r}", expr.pos)
            return
        if isinstance(expr, ast.Unary):
            self.resolve_expr(expr.operand, scope)
            return
        if isinstance(expr, ast.Binary):
            self.resolve_expr(expr.left, scope)
            self.resolve_expr(expr.right, scope)
            return
        raise AssertionError(f"unhandled expression node {expr!r}")


def _referenced_names(stmt):
    names = set()

    def from_expr(expr):
        if isinstance(expr, ast.AttrRef):
            names.add(expr.elem)
        elif isinstance(expr, ast.Unary):
            from_expr(expr.operand)
        elif isinstance(expr, ast.Binary):
            from_expr(expr.left)
            from_expr(expr.right)
        elif isinstance(expr, ast.ElemExpr):
            names.add(expr.name)

    if isinstance(stmt, ast.CreateEdge):
        names.update((stmt.src, stmt.tgt))
    elif isinstance(stmt, ast.KeepRef):
        names.add(stmt.name)
    elif isinstance(stmt, ast.EvalAssign):
        names.add(stmt.elem)
        from_expr(stmt.expr)
    elif isinstance(stmt, ast.YieldAssign):
        from_expr(stmt.expr)
    elif isinstance(stmt, ast.EmitStmt):
        for e in stmt.exprs:
            from_expr(e)
    elif isinstance(stmt, ast.CallStmt):
        names.update(stmt.args)
    return names


def parse_rules(text, schema, filename="<rules>"):
    """Parse and resolve rule DSL text into a RuleSet."""
    parser = _Parser(text, filename)
    rules, subpatterns = parser.parse_file()
    rs = ast.RuleSet(schema)
    for sp in subpatterns:
        if sp.name in rs.subpatterns or sp.name in rs.rules:
            raise ParseError(f"duplicate name {sp.name!r}", filename, sp.pos[0], sp.pos[1])
        rs.subpatterns[sp.name] = sp
    for r in rules:
        if r.name in rs.rules or r.name in rs.subpatterns:
            raise ParseError(f"duplicate name {r.name!r}", filename, r.pos[0], r.pos[1])
        rs.rules[r.name] = r
    resolver = _Resolver(rs, filename)
    for sp in rs.subpatterns.values():
        resolver.resolve_decl(sp, is_rule=False)
    for r in rs.rules.values():
        resolver.resolve_decl(r, is_rule=True)
    return rs


def merge_rulesets(base, extra):
    """Combine two rulesets over the same schema; duplicate names are errors."""
    if base.schema is not extra.schema and base.schema != extra.schema:
        raise ParseError("rulesets were resolved against different schemas")
    for name, r in extra.rules.items():
        if name in base.rules or name in base.subpatterns:
            raise ParseError(f"duplicate name {name!r} when merging rule files")
        base.rules[name] = r
    for name, sp in extra.subpatterns.items():
        if name in base.rules or name in base.subpatterns:
            raise ParseError(f"duplicate name {name!r} when merging rule files")
        base.subpatterns[name] = sp
    return base

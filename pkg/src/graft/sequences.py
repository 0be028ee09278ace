"""Rule application control language: parsing and interpretation.

Grammar (documented in docs/shell.md):

    seq     := andor { (';>' | '<;') andor }          left-associative
    andor   := not { ('&&' | '||') not }              && binds tighter than ||
    not     := '!' not | postfix
    postfix := atom [ '*' ]
    atom    := '[' call ']' | call | '(' seq ')'
    call    := IDENT [ '(' literal {',' literal} ')' ]

Semantics: a rule call applies the first match (true iff one existed); the
all-bracketed form applies every match found up front (true iff at least one
was applied); `s*` repeats s until it fails and is true iff it succeeded at
least once; `s1 ;> s2` runs both and returns s2's result, `s1 <; s2` runs
both and returns s1's; && and || are lazy; ! negates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError, SequenceError
from .rules import Rewriter, apply_all, find_matches


# -- AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class RuleCall:
    rule: str
    args: tuple = ()


@dataclass(frozen=True)
class AllBracket:
    call: RuleCall


@dataclass(frozen=True)
class ThenRight:
    left: object
    right: object


@dataclass(frozen=True)
class ThenLeft:
    left: object
    right: object


@dataclass(frozen=True)
class LazyAnd:
    left: object
    right: object


@dataclass(frozen=True)
class LazyOr:
    left: object
    right: object


@dataclass(frozen=True)
class Not:
    inner: object


@dataclass(frozen=True)
class Star:
    inner: object


# -- parsing -------------------------------------------------------------------

class _SeqParser:
    def __init__(self, text, filename="<sequence>"):
        self.text = text
        self.filename = filename
        self.tokens = self._lex()
        self.pos = 0

    def _lex(self):
        symbols = [";>", "<;", "&&", "||", "!", "*", "[", "]", "(", ")", ","]
        tokens = []
        i, col = 0, 1
        text = self.text
        while i < len(text):
            c = text[i]
            if c in " \t\r\n":
                i += 1
                col += 1
                continue
            if c.isalpha() or c == "_":
                j = i
                while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                tokens.append(("ident", text[i:j], col))
                col += j - i
                i = j
                continue
            if c.isdigit():
                j = i
                while j < len(text) and text[j].isdigit():
                    j += 1
                tokens.append(("int", int(text[i:j]), col))
                col += j - i
                i = j
                continue
            if c == '"':
                j = text.find('"', i + 1)
                if j < 0:
                    raise ParseError("unterminated string", self.filename, 1, col)
                tokens.append(("string", text[i + 1 : j], col))
                col += j + 1 - i
                i = j + 1
                continue
            for sym in symbols:
                if text.startswith(sym, i):
                    tokens.append(("sym", sym, col))
                    i += len(sym)
                    col += len(sym)
                    break
            else:
                raise ParseError(f"unexpected character {c!r}", self.filename, 1, col)
        tokens.append(("eof", None, col))
        return tokens

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        if tok[0] != "eof":
            self.pos += 1
        return tok

    def accept(self, sym):
        if self.peek()[:2] == ("sym", sym):
            self.next()
            return True
        return False

    def expect(self, sym):
        tok = self.next()
        if tok[:2] != ("sym", sym):
            raise ParseError(f"expected {sym!r}, got {tok[1]!r}", self.filename, 1, tok[2])

    def parse(self):
        seq = self.sequence()
        tok = self.peek()
        if tok[0] != "eof":
            raise ParseError(f"trailing input {tok[1]!r}", self.filename, 1, tok[2])
        return seq

    def sequence(self):
        left = self.or_level()
        while True:
            if self.accept(";>"):
                left = ThenRight(left, self.or_level())
            elif self.accept("<;"):
                left = ThenLeft(left, self.or_level())
            else:
                return left

    def or_level(self):
        left = self.and_level()
        while self.accept("||"):
            left = LazyOr(left, self.and_level())
        return left

    def and_level(self):
        left = self.not_level()
        while self.accept("&&"):
            left = LazyAnd(left, self.not_level())
        return left

    def not_level(self):
        if self.accept("!"):
            return Not(self.not_level())
        return self.postfix()

    def postfix(self):
        atom = self.atom()
        if self.accept("*"):
            return Star(atom)
        return atom

    def atom(self):
        if self.accept("["):
            call = self.call()
            self.expect("]")
            return AllBracket(call)
        if self.accept("("):
            seq = self.sequence()
            self.expect(")")
            return seq
        return self.call()

    def call(self):
        tok = self.next()
        if tok[0] != "ident":
            raise ParseError(f"expected rule name, got {tok[1]!r}", self.filename, 1, tok[2])
        args = []
        if self.accept("("):
            while self.peek()[:2] != ("sym", ")"):
                args.append(self.literal())
                if self.peek()[:2] != ("sym", ")"):
                    self.expect(",")
            self.expect(")")
        return RuleCall(tok[1], tuple(args))

    def literal(self):
        tok = self.next()
        if tok[0] in ("int", "string"):
            return tok[1]
        if tok[0] == "ident" and tok[1] in ("true", "false"):
            return tok[1] == "true"
        raise ParseError(
            f"rule arguments in sequences must be literals, got {tok[1]!r}",
            self.filename, 1, tok[2],
        )


def parse_sequence(text, filename="<sequence>"):
    return _SeqParser(text, filename).parse()


# -- execution ---------------------------------------------------------------

@dataclass
class ExecutionEnv:
    """Everything a sequence run needs; the trace hook must not mutate the graph."""

    graph: object
    rules: object  # RuleSet
    emit_sink: object = None
    trace: object = None  # callable(event dict) or None
    step_budget: int | None = None
    steps_taken: int = field(default=0)

    def charge(self):
        self.steps_taken += 1
        if self.step_budget is not None and self.steps_taken > self.step_budget:
            raise SequenceError(f"step budget of {self.step_budget} exceeded")

    def fire(self, event):
        if self.trace is not None:
            self.trace(event)


def bind_check(env, seq):
    """Verify every rule a sequence mentions exists in the env's ruleset."""
    if isinstance(seq, RuleCall):
        env.rules.rule(seq.rule)
    elif isinstance(seq, AllBracket):
        env.rules.rule(seq.call.rule)
    elif isinstance(seq, (Not, Star)):
        bind_check(env, seq.inner)
    elif isinstance(seq, (ThenRight, ThenLeft, LazyAnd, LazyOr)):
        bind_check(env, seq.left)
        bind_check(env, seq.right)


def execute(env, seq):
    """Run a sequence (text or AST) and return its boolean result."""
    if isinstance(seq, str):
        seq = parse_sequence(seq)
    bind_check(env, seq)
    env.fire({"kind": "sequence-enter", "text": _render(seq)})
    result = _exec(env, seq)
    env.fire({"kind": "sequence-exit", "result": result})
    return result


def _exec(env, seq):
    if isinstance(seq, RuleCall):
        return _exec_rule(env, seq, all_matches=False)
    if isinstance(seq, AllBracket):
        return _exec_rule(env, seq.call, all_matches=True)
    if isinstance(seq, ThenRight):
        _exec(env, seq.left)
        return _exec(env, seq.right)
    if isinstance(seq, ThenLeft):
        result = _exec(env, seq.left)
        _exec(env, seq.right)
        return result
    if isinstance(seq, LazyAnd):
        if not _exec(env, seq.left):
            return False
        return _exec(env, seq.right)
    if isinstance(seq, LazyOr):
        if _exec(env, seq.left):
            return True
        return _exec(env, seq.right)
    if isinstance(seq, Not):
        return not _exec(env, seq.inner)
    if isinstance(seq, Star):
        succeeded = False
        while _exec(env, seq.inner):
            succeeded = True
        return succeeded
    raise SequenceError(f"cannot execute {seq!r}")


def _exec_rule(env, call, all_matches):
    env.charge()
    decl = env.rules.rule(call.rule)
    if all_matches:
        matches = find_matches(env.graph, env.rules, decl, call.args)
    else:
        matches = find_matches(env.graph, env.rules, decl, call.args, limit=1)
    if not matches:
        env.fire({"kind": "rule-failed", "rule": call.rule})
        return False
    rewriter = Rewriter(env.graph, env.rules)
    applied = 0
    for match in matches:
        if not match.is_live():
            env.fire({"kind": "rule-stale", "rule": call.rule})
            continue
        outcome = _traced_apply(env, rewriter, decl, match)
        applied += 1
    return applied > 0


def _traced_apply(env, rewriter, decl, match):
    if env.trace is None:
        return rewriter.apply(decl, match, env.emit_sink)
    recorder = _DeltaRecorder(env.graph)
    env.graph.add_listener(recorder)
    try:
        outcome = rewriter.apply(decl, match, env.emit_sink)
    finally:
        env.graph.remove_listener(recorder)
    env.fire({
        "kind": "rule-applied",
        "rule": decl.name,
        "bindings": {
            name: {"id": el.id, "cls": el.cls}
            for name, el in match.bindings.items()
            if not name.startswith("$")
        },
        "delta": recorder.delta(),
        "emitted": outcome.emitted_text,
    })
    return outcome


class _DeltaRecorder:
    """Graph listener capturing one rule application's delta."""

    def __init__(self, graph):
        self.graph = graph
        self.created_nodes = []
        self.created_edges = []
        self.deleted = []
        self.attr_changes = []

    def __call__(self, event, *payload):
        if event == "create-node":
            node = payload[0]
            self.created_nodes.append({"id": node.id, "cls": node.cls, "attrs": dict(node.attrs)})
        elif event == "create-edge":
            edge = payload[0]
            self.created_edges.append({
                "id": edge.id, "cls": edge.cls,
                "src": edge.src.id, "tgt": edge.tgt.id, "attrs": dict(edge.attrs),
            })
        elif event == "delete-node":
            self.deleted.append({"id": payload[0].id, "kind": "node"})
        elif event == "delete-edge":
            self.deleted.append({"id": payload[0].id, "kind": "edge"})
        elif event == "set-attr":
            el, name, old, new = payload
            self.attr_changes.append({"el": el.id, "attr": name, "value": new})

    def delta(self):
        return {
            "createdNodes": self.created_nodes,
            "createdEdges": self.created_edges,
            "deleted": self.deleted,
            "attrChanges": self.attr_changes,
        }


def _render(seq):
    if isinstance(seq, RuleCall):
        if seq.args:
            args = ",".join(repr(a) for a in seq.args)
            return f"{seq.rule}({args})"
        return seq.rule
    if isinstance(seq, AllBracket):
        return f"[{_render(seq.call)}]"
    if isinstance(seq, ThenRight):
        return f"{_render(seq.left)} ;> {_render(seq.right)}"
    if isinstance(seq, ThenLeft):
        return f"{_render(seq.left)} <; {_render(seq.right)}"
    if isinstance(seq, LazyAnd):
        return f"{_render(seq.left)} && {_render(seq.right)}"
    if isinstance(seq, LazyOr):
        return f"{_render(seq.left)} || {_render(seq.right)}"
    if isinstance(seq, Not):
        return f"!({_render(seq.inner)})"
    if isinstance(seq, Star):
        return f"({_render(seq.inner)})*"
    return repr(seq)

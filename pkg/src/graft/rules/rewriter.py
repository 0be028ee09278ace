"""Rewrite execution: replace/modify semantics, yields, emits, sub-rewrites.

Execution order for one rewrite application:

1. yield phase: walking the match tree innermost-first, every yield
   assignment runs, so def values are ready before any enclosing rewrite
   statement uses them;
2. per scope: deletions (implicit for replace mode, delete() statements for
   modify mode), then creations in source order, then the rewrites of nested
   iterated/optional blocks in pattern order (iterations in match order),
   then the remaining statements (eval/emit/sub-rewrite calls) in source
   order.  A sub-rewrite call executes the callee's rewrite with the given
   arguments bound to its rewrite parameters.
"""

from __future__ import annotations

import io

from ..errors import EvalError, RewriteError, StaleElementError
from . import ast
from .exprs import eval_expr, to_text
from .matcher import DefCell, Match, Matcher


class RewriteOutcome:
    """What one rewrite application produced."""

    def __init__(self, created, emitted_text, yielded_values, deleted_ids, attr_changes):
        self.created = created              # top-scope name -> element
        self.emitted_text = emitted_text
        self.yielded_values = yielded_values
        self.deleted_ids = deleted_ids
        self.attr_changes = attr_changes    # (element, attr) pairs, in order

    def __repr__(self):
        return (
            f"<rewrite: +{len(self.created)} -{len(self.deleted_ids)} "
            f"emitted {len(self.emitted_text)} chars>"
        )


class ApplyAllResult:
    def __init__(self, applied, stale):
        self.applied = applied
        self.stale = stale

    def __iter__(self):  # unpacking convenience
        return iter((self.applied, self.stale))


class _Frame:
    """Execution frame for one rewrite body.

    Name resolution: created elements of this frame, rewrite parameters of
    this frame, the matched scope chain, then enclosing frames' parameters
    (enclosing creations are not visible to nested rewrites).
    """

    __slots__ = ("created", "params", "match_env", "parent")

    def __init__(self, match_env, params=None, parent=None):
        self.created = {}
        self.params = params or {}
        self.match_env = match_env  # _MatchView for scope chain lookup
        self.parent = parent

    def lookup_element(self, name):
        if name in self.created:
            return self.created[name]
        if name in self.params:
            return self.params[name]
        el = self.match_env.lookup_element(name)
        if el is not None:
            return el
        cell = self.match_env.lookup_cell(name)
        if cell is not None and cell.filled:
            return cell.value
        frame = self.parent
        while frame is not None:
            if name in frame.params:
                return frame.params[name]
            frame = frame.parent
        return None

    def lookup_var(self, name):
        return self.match_env.lookup_var(name)

    def lookup_cell(self, name):
        return self.match_env.lookup_cell(name)


class _MatchView:
    """Read view over a Match chain (match + its enclosing matches)."""

    __slots__ = ("match", "parent", "graph")

    def __init__(self, match, parent, graph):
        self.match = match
        self.parent = parent
        self.graph = graph

    def lookup_element(self, name):
        view = self
        while view is not None:
            el = view.match.bindings.get(name)
            if el is not None:
                return el
            view = view.parent
        return None

    def lookup_var(self, name):
        view = self
        while view is not None:
            if name in view.match.vars:
                return view.match.vars[name]
            view = view.parent
        return None

    def lookup_cell(self, name):
        view = self
        while view is not None:
            if name in view.match.cells:
                return view.match.cells[name]
            view = view.parent
        return None


class _ExprScope:
    """Adapter handing a _Frame to eval_expr; defs read as their values."""

    __slots__ = ("frame", "graph")

    def __init__(self, frame, graph):
        self.frame = frame
        self.graph = graph

    def lookup_element(self, name):
        return self.frame.lookup_element(name)

    def lookup_var(self, name):
        return self.frame.lookup_var(name)


class Rewriter:
    def __init__(self, graph, ruleset):
        self.graph = graph
        self.rules = ruleset
        self.schema = graph.schema

    # -- public ------------------------------------------------------------

    def apply(self, decl, match, emit_sink=None):
        """Apply the rewrite of `decl` (rule or subpattern) for `match`."""
        if not match.is_live():
            raise StaleElementError(
                f"match of {match.decl_name} references deleted elements"
            )
        buffer = io.StringIO()
        state = _ApplyState(self, emit_sink, buffer)
        view = _MatchView(match, None, self.graph)
        self._yield_phase(match, view)
        frame = _Frame(view)
        self._exec_scope(match.pattern, view, frame, state)
        yielded = {name: cell.value for name, cell in match.cells.items() if cell.filled}
        return RewriteOutcome(
            dict(frame.created), buffer.getvalue(), yielded,
            state.deleted_ids, state.attr_changes,
        )

    # -- yield phase ---------------------------------------------------------

    def _yield_phase(self, match, view):
        for idx in sorted(match.nested):
            kind, value = match.nested[idx]
            if kind == "iterated":
                for m in value:
                    self._yield_phase(m, _MatchView(m, view, self.graph))
            elif kind == "optional" and value is not None:
                self._yield_phase(value, _MatchView(value, view, self.graph))
        for m in match.subs.values():
            self._yield_phase(m, _MatchView(m, view, self.graph))
        rewrite = match.pattern.rewrite
        if rewrite is None:
            return
        frame = _Frame(view)
        scope = _ExprScope(frame, self.graph)
        for stmt in rewrite.body:
            if not isinstance(stmt, ast.YieldAssign):
                continue
            cell = view.lookup_cell(stmt.target)
            if cell is None:
                raise RewriteError(f"no def element {stmt.target!r} to yield into")
            if isinstance(stmt.expr, ast.ElemExpr):
                value = frame.lookup_element(stmt.expr.name)
                if value is None:
                    raise RewriteError(
                        f"yield source {stmt.expr.name!r} is not bound"
                    )
                if not self.schema.is_subtype_of(value.cls, cell.cls):
                    raise RewriteError(
                        f"yield of {value.cls} element into def of class {cell.cls}"
                    )
            else:
                value = eval_expr(stmt.expr, scope)
            cell.value = value
            cell.filled = True

    # -- rewrite phase ----------------------------------------------------------

    def _exec_scope(self, pattern, view, frame, state):
        rewrite = pattern.rewrite
        match = view.match
        if rewrite is not None:
            self._run_deletions(pattern, rewrite, view, frame, state)
            for stmt in rewrite.body:
                if isinstance(stmt, ast.CreateNode):
                    frame.created[stmt.name] = self.graph.add_node(stmt.cls)
                elif isinstance(stmt, ast.CreateEdge):
                    src = self._resolve_live(frame, stmt.src, stmt)
                    tgt = self._resolve_live(frame, stmt.tgt, stmt)
                    frame.created[stmt.name] = self.graph.add_edge(stmt.cls, src, tgt)
        self._run_nested(match, view, frame, state)
        if rewrite is None:
            return
        scope = _ExprScope(frame, self.graph)
        for stmt in rewrite.body:
            if isinstance(stmt, ast.EvalAssign):
                el = self._resolve_live(frame, stmt.elem, stmt)
                try:
                    value = eval_expr(stmt.expr, scope)
                    self.graph.set_attr(el, stmt.attr, value)
                except StaleElementError:
                    raise
                except EvalError:
                    raise
                except Exception as exc:
                    raise EvalError(str(exc)) from exc
                state.attr_changes.append((el, stmt.attr))
            elif isinstance(stmt, ast.EmitStmt):
                text = "".join(to_text(eval_expr(e, scope)) for e in stmt.exprs)
                state.emit(text)
            elif isinstance(stmt, ast.CallStmt):
                self._run_call(pattern, match, view, frame, state, stmt)

    def _run_deletions(self, pattern, rewrite, view, frame, state):
        if rewrite.mode == "replace":
            kept = getattr(rewrite, "_kept", set())
            doomed = []
            for item in pattern.items:
                if isinstance(item, (ast.NodeItem, ast.EdgeItem)) and item.is_decl:
                    if item.name not in kept:
                        doomed.append(view.match.bindings[item.name])
            # edges first so node cascades do not hit already-deleted edges
            for el in sorted(doomed, key=lambda e: (e.kind != "edge", e.id)):
                if el.alive:
                    self._delete(el, state)
        else:
            for stmt in rewrite.statements(ast.DeleteStmt):
                for name in stmt.names:
                    el = self._resolve_live(frame, name, stmt)
                    self._delete(el, state)

    def _delete(self, el, state):
        if el.kind == "node":
            for e in list(el.out_edges) + list(el.in_edges):
                if e.alive:
                    state.deleted_ids.append(e.id)
            self.graph.remove_node(el)
        else:
            self.graph.remove_edge(el)
        state.deleted_ids.append(el.id)

    def _run_nested(self, match, view, frame, state):
        for idx in sorted(match.nested):
            kind, value = match.nested[idx]
            if kind == "iterated":
                for m in value:
                    self._exec_nested(m, view, frame, state)
            elif kind == "optional" and value is not None:
                self._exec_nested(value, view, frame, state)

    def _exec_nested(self, m, view, frame, state):
        child_view = _MatchView(m, view, self.graph)
        child_frame = _Frame(child_view, parent=frame)
        self._exec_scope(m.pattern, child_view, child_frame, state)

    def _run_call(self, pattern, match, view, frame, state, stmt):
        sub = match.subs.get(stmt.inst)
        if sub is None:
            raise RewriteError(f"no matched subpattern instance {stmt.inst!r}")
        target = pattern._insts[stmt.inst]
        sub_rewrite = target.pattern.rewrite
        params = {}
        for formal, arg_name in zip(sub_rewrite.params, stmt.args):
            el = self._resolve_live(frame, arg_name, stmt)
            if not self.schema.is_subtype_of(el.cls, formal.cls):
                raise RewriteError(
                    f"argument {arg_name!r} of class {el.cls} does not fit "
                    f"rewrite parameter {formal.name}:{formal.cls}"
                )
            params[formal.name] = el
        sub_view = _MatchView(sub, None, self.graph)
        sub_frame = _Frame(sub_view, params=params, parent=frame)
        self._exec_scope(target.pattern, sub_view, sub_frame, state)

    def _resolve_live(self, frame, name, stmt):
        el = frame.lookup_element(name)
        if el is None:
            raise RewriteError(f"element {name!r} is not bound at rewrite time")
        if not el.alive:
            raise StaleElementError(f"element {name!r} was deleted before use")
        return el


class _ApplyState:
    __slots__ = ("rewriter", "sink", "buffer", "deleted_ids", "attr_changes")

    def __init__(self, rewriter, sink, buffer):
        self.rewriter = rewriter
        self.sink = sink
        self.buffer = buffer
        self.deleted_ids = []
        self.attr_changes = []

    def emit(self, text):
        self.buffer.write(text)
        if self.sink is not None:
            self.sink.write(text)


# -- top-level convenience functions ----------------------------------------

def find_matches(graph, ruleset, rule, args=(), limit=None, recursion_cap=None):
    matcher = Matcher(graph, ruleset, recursion_cap or 10_000)
    return matcher.find_matches(rule, args, limit)


def apply_rewrite(graph, ruleset, rule, match, emit_sink=None):
    decl = ruleset.rule(rule) if isinstance(rule, str) else rule
    return Rewriter(graph, ruleset).apply(decl, match, emit_sink)


def apply_all(graph, ruleset, rule, args=(), emit_sink=None, recursion_cap=None):
    """Collect every match first, then rewrite each; stale matches are skipped."""
    decl = ruleset.rule(rule) if isinstance(rule, str) else rule
    matches = find_matches(graph, ruleset, decl, args, recursion_cap=recursion_cap)
    rewriter = Rewriter(graph, ruleset)
    applied = stale = 0
    for match in matches:
        if not match.is_live():
            stale += 1
            continue
        rewriter.apply(decl, match, emit_sink)
        applied += 1
    return ApplyAllResult(applied, stale)

"""Backtracking pattern matcher with nested blocks and recursive subpatterns.

Semantics in brief:

- element candidates are enumerated in graph creation order, pattern elements
  in source order, so the produced match list is deterministic;
- matching is injective per scope: a rule application or a subpattern
  instantiation owns one injectivity domain covering its parameters and every
  element bound by its positive pattern including iterated/optional blocks;
- negative blocks check for the existence of an extension but keep their own
  local injectivity domain, so their elements may coincide with elements
  already bound outside;
- iterated blocks greedily accumulate inner matches (locals pairwise
  distinct across iterations) until no further one exists;
- optional blocks contribute the first inner match or stay absent;
- a subpattern instance contributes exactly the first match of its pattern;
  failure to match fails the enclosing attempt;
- conditions run as soon as every element they mention is bound.
"""

from __future__ import annotations

from ..errors import MatchError, RecursionLimitError
from . import ast
from .exprs import element_refs, eval_condition

DEFAULT_RECURSION_CAP = 10_000


class DefCell:
    """Shared slot a subpattern yields into; aliased across scopes."""

    __slots__ = ("name", "cls", "value", "filled")

    def __init__(self, name, cls):
        self.name = name
        self.cls = cls
        self.value = None
        self.filled = False

    def __repr__(self):
        return f"<def {self.name}:{self.cls} = {self.value!r}>"


class Match:
    """One match of a pattern scope (rule, subpattern, or nested block)."""

    __slots__ = ("decl_name", "pattern", "bindings", "local_names", "vars",
                 "cells", "nested", "subs")

    def __init__(self, decl_name, pattern, bindings, local_names, vars_, cells, nested, subs):
        self.decl_name = decl_name
        self.pattern = pattern
        self.bindings = bindings
        self.local_names = local_names
        self.vars = vars_
        self.cells = cells
        self.nested = nested  # item index -> ("optional", Match|None) | ("iterated", [Match])
        self.subs = subs      # instance name -> Match

    # -- views used by callers and tests -----------------------------------

    @property
    def yielded_values(self):
        return {name: cell.value for name, cell in self.cells.items() if cell.filled}

    def iterated_matches(self, which=0):
        found = [v for _, v in sorted(self.nested.items()) if v[0] == "iterated"]
        return found[which][1] if found else []

    def optional_match(self, which=0):
        found = [v for _, v in sorted(self.nested.items()) if v[0] == "optional"]
        return found[which][1] if found else None

    def sub_match(self, inst):
        return self.subs[inst]

    # -- internals ----------------------------------------------------------

    def local_ids(self):
        ids = {self.bindings[n].id for n in self.local_names}
        for kind, value in self.nested.values():
            if kind == "iterated":
                for m in value:
                    ids |= m.local_ids()
            elif kind == "optional" and value is not None:
                ids |= value.local_ids()
        return ids

    def all_elements(self):
        out = list(self.bindings.values())
        for kind, value in self.nested.values():
            if kind == "iterated":
                for m in value:
                    out.extend(m.all_elements())
            elif kind == "optional" and value is not None:
                out.extend(value.all_elements())
        for m in self.subs.values():
            out.extend(m.all_elements())
        return out

    def is_live(self):
        return all(el.alive for el in self.all_elements())

    def signature(self):
        locals_sig = tuple(sorted((n, self.bindings[n].id) for n in self.local_names))
        nested_sig = []
        for idx in sorted(self.nested):
            kind, value = self.nested[idx]
            if kind == "iterated":
                nested_sig.append((idx, tuple(m.signature() for m in value)))
            elif kind == "optional":
                nested_sig.append((idx, value.signature() if value else None))
        subs_sig = tuple((k, m.signature()) for k, m in sorted(self.subs.items()))
        return (locals_sig, tuple(nested_sig), subs_sig)

    def __repr__(self):
        binds = ", ".join(f"{k}={v.id}" for k, v in sorted(self.bindings.items()))
        return f"<match {self.decl_name}: {binds}>"


class _Env:
    """Live matcher state for one scope; chained to enclosing scopes."""

    __slots__ = ("graph", "bindings", "local_names", "vars", "cells", "nested",
                 "subs", "domain", "parent")

    def __init__(self, graph, domain, parent=None):
        self.graph = graph
        self.bindings = {}
        self.local_names = set()
        self.vars = {}
        self.cells = {}
        self.nested = {}
        self.subs = {}
        self.domain = domain
        self.parent = parent

    def lookup_element(self, name):
        env = self
        while env is not None:
            el = env.bindings.get(name)
            if el is not None:
                return el
            env = env.parent
        return None

    def lookup_var(self, name):
        env = self
        while env is not None:
            if name in env.vars:
                return env.vars[name]
            env = env.parent
        return None

    def lookup_cell(self, name):
        env = self
        while env is not None:
            if name in env.cells:
                return env.cells[name]
            env = env.parent
        return None

    def snapshot(self, decl_name, pattern):
        return Match(
            decl_name,
            pattern,
            dict(self.bindings),
            set(self.local_names),
            dict(self.vars),
            dict(self.cells),
            dict(self.nested),
            dict(self.subs),
        )


def _first(gen):
    try:
        return next(gen, None)
    finally:
        gen.close()


class Matcher:
    """Finds matches of rules/subpatterns from a RuleSet on one graph."""

    def __init__(self, graph, ruleset, recursion_cap=DEFAULT_RECURSION_CAP):
        self.graph = graph
        self.rules = ruleset
        self.schema = graph.schema
        self.recursion_cap = recursion_cap

    # -- public -------------------------------------------------------------

    def find_matches(self, rule, args=(), limit=None):
        decl = self.rules.rule(rule) if isinstance(rule, str) else rule
        env = self._instantiate(decl, args, parent=None)
        out = []
        try:
            gen = self._match_scope(decl.pattern, env, 0, decl.name)
            for m in gen:
                out.append(m)
                if limit is not None and len(out) >= limit:
                    gen.close()
                    break
        except RecursionError:
            raise RecursionLimitError(
                "pattern recursion exceeded interpreter capacity; "
                "check for unbounded subpattern recursion"
            ) from None
        return out

    # -- scope setup -----------------------------------------------------------

    def _instantiate(self, decl, args, parent):
        if len(args) != len(decl.params):
            raise MatchError(
                f"{decl.name} expects {len(decl.params)} argument(s), got {len(args)}"
            )
        env = _Env(self.graph, domain=set(), parent=parent)
        for param, arg in zip(decl.params, args):
            if param.is_var:
                self.schema.check_value(_scalar_vt(param.cls), arg)
                env.vars[param.name] = arg
            elif param.is_def:
                if isinstance(arg, DefCell):
                    env.cells[param.name] = arg
                else:
                    raise MatchError(f"def parameter {param.name!r} needs a yield argument")
            else:
                el = arg
                if el is None or not getattr(el, "alive", False):
                    raise MatchError(f"argument for {param.name!r} is not a live element")
                if el.kind != self.schema.kind_of(param.cls):
                    raise MatchError(f"argument for {param.name!r} has the wrong element kind")
                if not self.schema.is_subtype_of(el.cls, param.cls):
                    raise MatchError(
                        f"argument for {param.name!r} has class {el.cls}, "
                        f"expected a subtype of {param.cls}"
                    )
                env.bindings[param.name] = el
                env.domain.add(el.id)
        return env

    # -- the matching engine -----------------------------------------------------

    def _match_scope(self, pattern, env, depth, decl_name):
        for item in pattern.items:
            if isinstance(item, ast.DefItem) and item.name not in env.cells:
                env.cells[item.name] = DefCell(item.name, item.cls)
        plan, conds = _plan_of(pattern)
        yield from self._step(pattern, env, plan, 0, conds, depth, decl_name)

    def _step(self, pattern, env, plan, idx, pending, depth, decl_name):
        # run every condition whose elements are now all bound
        if pending:
            still = []
            for cond, refs in pending:
                if all(env.lookup_element(r) is not None for r in refs):
                    if not eval_condition(cond.expr, env):
                        return
                else:
                    still.append((cond, refs))
            pending = still
        if idx == len(plan):
            if pending:
                raise MatchError(
                    f"conditions in {decl_name} reference elements that are never bound"
                )
            yield env.snapshot(decl_name, pattern)
            return
        kind, item, item_idx = plan[idx]
        handler = getattr(self, "_item_" + kind)
        yield from handler(pattern, env, plan, idx, item, item_idx, pending, depth, decl_name)

    def _recurse(self, pattern, env, plan, idx, pending, depth, decl_name):
        return self._step(pattern, env, plan, idx + 1, pending, depth, decl_name)

    # node declaration / reference
    def _item_node(self, pattern, env, plan, idx, item, item_idx, pending, depth, decl_name):
        if not item.is_decl or item.name in env.bindings:
            # pure references never constrain on their own; declarations
            # already bound by an earlier edge are satisfied checks
            yield from self._recurse(pattern, env, plan, idx, pending, depth, decl_name)
            return
        for cand in self.graph.nodes_of_type(item.cls, True):
            if cand.id in env.domain:
                continue
            env.bindings[item.name] = cand
            env.local_names.add(item.name)
            env.domain.add(cand.id)
            try:
                yield from self._recurse(pattern, env, plan, idx, pending, depth, decl_name)
            finally:
                del env.bindings[item.name]
                env.local_names.discard(item.name)
                env.domain.discard(cand.id)

    def _item_edge(self, pattern, env, plan, idx, item, item_idx, pending, depth, decl_name):
        graph = self.graph
        src_el = env.lookup_element(item.src)
        tgt_el = env.lookup_element(item.tgt)
        if not item.is_decl:
            # reference to an already-bound edge: endpoints must line up
            el = env.lookup_element(item.name)
            if el is None:
                return
            if src_el is not None and el.src is not src_el:
                return
            if tgt_el is not None and el.tgt is not tgt_el:
                return
            yield from self._recurse(pattern, env, plan, idx, pending, depth, decl_name)
            return

        if src_el is not None and tgt_el is not None:
            candidates = (
                e for e in graph.outgoing(src_el, item.cls) if e.tgt is tgt_el
            )
        elif src_el is not None:
            candidates = graph.outgoing(src_el, item.cls)
        elif tgt_el is not None:
            candidates = graph.incoming(tgt_el, item.cls)
        else:
            candidates = graph.edges_of_type(item.cls, True)

        src_cls = None if src_el is not None else _decl_class(pattern, env, item.src)
        tgt_cls = None if tgt_el is not None else _decl_class(pattern, env, item.tgt)

        src_subs = None if src_cls is None else self.schema.subtype_set(src_cls)
        tgt_subs = None if tgt_cls is None else self.schema.subtype_set(tgt_cls)
        for edge in candidates:
            if edge.id in env.domain:
                continue
            binds = [(item.name, edge)]
            if src_el is None:
                if item.src == item.tgt and edge.src is not edge.tgt:
                    continue
                if edge.src.id in env.domain or edge.src.cls not in src_subs:
                    continue
                binds.append((item.src, edge.src))
            if tgt_el is None and item.tgt != item.src:
                if edge.tgt.id in env.domain or edge.tgt.cls not in tgt_subs:
                    continue
                if src_el is None and edge.tgt is edge.src:
                    continue  # two distinct pattern nodes cannot share one graph node
                binds.append((item.tgt, edge.tgt))
            for name, el in binds:
                env.bindings[name] = el
                env.local_names.add(name)
                env.domain.add(el.id)
            try:
                yield from self._recurse(pattern, env, plan, idx, pending, depth, decl_name)
            finally:
                for name, el in binds:
                    del env.bindings[name]
                    env.local_names.discard(name)
                    env.domain.discard(el.id)

    def _item_sub(self, pattern, env, plan, idx, item, item_idx, pending, depth, decl_name):
        if depth + 1 > self.recursion_cap:
            raise RecursionLimitError(
                f"subpattern recursion exceeded {self.recursion_cap} instantiations"
            )
        target = pattern._insts[item.inst]
        args = []
        for arg, formal in zip(item.args, target.params):
            if formal.is_var:
                args.append(env.lookup_var(arg.name))
            elif formal.is_def:
                cell = env.lookup_cell(arg.name)
                if cell is None:
                    raise MatchError(f"no def element {arg.name!r} in scope")
                args.append(cell)
            else:
                el = env.lookup_element(arg.name)
                if el is None:
                    return  # argument not bound on this branch
                args.append(el)
        callee_env = self._instantiate(target, args, parent=None)
        sub = _first(self._match_scope(target.pattern, callee_env, depth + 1, target.name))
        if sub is None:
            return
        env.subs[item.inst] = sub
        try:
            yield from self._recurse(pattern, env, plan, idx, pending, depth, decl_name)
        finally:
            del env.subs[item.inst]

    def _item_nested(self, pattern, env, plan, idx, item, item_idx, pending, depth, decl_name):
        inner = item.pattern
        if item.kind == "negative":
            child = _Env(self.graph, domain=set(), parent=env)
            if _first(self._match_scope(inner, child, depth, decl_name + "/negative")) is not None:
                return
            yield from self._recurse(pattern, env, plan, idx, pending, depth, decl_name)
            return

        if item.kind == "optional":
            child = _Env(self.graph, domain=env.domain, parent=env)
            sub = _first(self._match_scope(inner, child, depth, decl_name + "/optional"))
            added = sub.local_ids() - env.domain if sub is not None else set()
            env.domain |= added
            env.nested[item_idx] = ("optional", sub)
            try:
                yield from self._recurse(pattern, env, plan, idx, pending, depth, decl_name)
            finally:
                env.domain -= added
                del env.nested[item_idx]
            return

        # iterated: greedily accumulate inner matches
        collected = []
        added_all = set()
        seen = set()
        while True:
            child = _Env(self.graph, domain=env.domain, parent=env)
            m = _first(self._match_scope(inner, child, depth, decl_name + "/iterated"))
            if m is None:
                break
            sig = m.signature()
            if sig in seen:
                break
            seen.add(sig)
            ids = m.local_ids() - env.domain
            env.domain |= ids
            added_all |= ids
            collected.append(m)
        env.nested[item_idx] = ("iterated", collected)
        try:
            yield from self._recurse(pattern, env, plan, idx, pending, depth, decl_name)
        finally:
            env.domain -= added_all
            del env.nested[item_idx]


def _plan_of(pattern):
    """Cache the per-scope matching plan.

    Positive elements come first, ordered for connectivity: an edge one of
    whose endpoints is already determined binds its other endpoint, instead
    of that node being enumerated over the whole graph.  Seeds (nodes with no
    usable edge) keep their source order, so enumeration stays deterministic.
    Subpattern instantiations and nested blocks run after all positive
    elements, in source order.
    """
    cached = getattr(pattern, "_plan", None)
    if cached is not None:
        return cached
    positives, deferred, conds = [], [], []
    for item_idx, item in enumerate(pattern.items):
        if isinstance(item, ast.NodeItem):
            positives.append(("node", item, item_idx))
        elif isinstance(item, ast.EdgeItem):
            positives.append(("edge", item, item_idx))
        elif isinstance(item, ast.CondItem):
            conds.append((item, tuple(element_refs(item.expr))))
        elif isinstance(item, ast.SubpatternItem):
            deferred.append(("sub", item, item_idx))
        elif isinstance(item, ast.NestedItem):
            deferred.append(("nested", item, item_idx))
    plan = (_order_positives(positives) + deferred, conds)
    pattern._plan = plan
    return plan


def _order_positives(positives):
    local_decls = {it.name for _, it, _ in positives if it.is_decl}

    determined = set()

    def is_det(name):
        return name not in local_decls or name in determined

    def mark(entry):
        kind, item, _ = entry
        if not item.is_decl:
            return  # a reference binds nothing
        determined.add(item.name)
        if kind == "edge":
            determined.update((item.src, item.tgt))

    ordered = []
    pending = list(positives)
    while pending:
        pick = None
        for entry in pending:  # edges that can bind from a known endpoint
            kind, item, _ = entry
            if kind == "edge" and item.is_decl and (is_det(item.src) or is_det(item.tgt)):
                pick = entry
                break
        if pick is None:
            for entry in pending:  # satisfied checks and references
                kind, item, _ = entry
                if kind == "node" and is_det(item.name):
                    pick = entry
                    break
                if kind == "edge" and not item.is_decl and is_det(item.name):
                    pick = entry
                    break
        if pick is None:
            for entry in pending:  # seed the first undetermined node
                if entry[0] == "node":
                    pick = entry
                    break
        if pick is None:
            for entry in pending:  # disconnected edge: enumerate globally
                if entry[1].is_decl:
                    pick = entry
                    break
        if pick is None:
            pick = pending[0]
        pending.remove(pick)
        mark(pick)
        ordered.append(pick)
    return ordered


def _decl_class(pattern, env, name):
    decls = getattr(pattern, "_decls", {})
    found = decls.get(name)
    if found is not None:
        return found[1]
    raise MatchError(f"endpoint {name!r} is not bound and not declared locally")


def _scalar_vt(kind):
    from ..metamodel import ValueType

    return ValueType(kind)

"""Script runner and command line entry point.

A .grs script drives the pipeline: import models and rules, run rewrite
sequences (optionally traced), export XMI and DOT.  File paths inside a
script resolve relative to the script's directory.  The grammar is
documented in docs/shell.md.

Exit codes: 0 success, 1 first failing command, 2 usage error.
"""

from __future__ import annotations

import argparse
import io
import sys
import time
from pathlib import Path

from .errors import GraftError, ParseError
from .metamodel import SchemaBuilder, parse_schema_text
from .modelio import LayoutConfig, export_dot, export_state_machine_xmi, import_ecore, import_xmi
from .rules import merge_rulesets, parse_rules
from .sequences import ExecutionEnv, execute
from .trace import TraceRecorder, write_trace


class ShellState:
    def __init__(self, base_dir, seed_order="creation", quiet=False, trace_path=None):
        self.base_dir = Path(base_dir)
        self.seed_order = seed_order
        self.quiet = quiet
        self.trace_path = trace_path
        self.schema = None
        self.graph = None
        self.rules = None
        self.emitted = io.StringIO()
        self.import_ms = 0.0
        self.extraction_ms = 0.0
        self.trace_written = None

    def resolve(self, name):
        return self.base_dir / name

    def say(self, text):
        if not self.quiet:
            print(text)


class ScriptFailure(GraftError):
    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


def run_script(path, seed_order="creation", quiet=False, trace_path=None, show_time=False):
    """Execute a .grs script; returns the exit code."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        print(f"cannot read script: {exc}", file=sys.stderr)
        return 1
    state = ShellState(path.parent, seed_order, quiet, trace_path)
    try:
        for lineno, raw in enumerate(lines, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if _command(state, lineno, line) == "quit":
                break
    except ScriptFailure as exc:
        print(f"{path.name}:{exc}", file=sys.stderr)
        return 1
    if show_time:
        _report(state)
    return 0


def _command(state, lineno, line):
    words = line.split()
    head = words[0]
    try:
        if head == "new":
            if words[1:] != ["graph"]:
                raise GraftError("usage: new graph")
            state.schema = None
            state.graph = None
            state.rules = None
            state.emitted = io.StringIO()
            return None
        if head == "import":
            _import(state, words[1:])
            return None
        if head == "debug" and words[1:2] == ["xgrs"]:
            _xgrs(state, line.split(None, 2)[2], debug=True)
            return None
        if head == "xgrs":
            _xgrs(state, line.split(None, 1)[1], debug=False)
            return None
        if head == "export":
            if len(words) != 2:
                raise GraftError("usage: export <file>")
            _need_graph(state)
            with open(state.resolve(words[1]), "wb") as fh:
                export_state_machine_xmi(state.graph, fh)
            state.say(f"exported {words[1]}")
            return None
        if head == "dot":
            if len(words) not in (2, 3):
                raise GraftError("usage: dot <file> [layout config]")
            _need_graph(state)
            config = LayoutConfig.load(state.resolve(words[2])) if len(words) == 3 else None
            with open(state.resolve(words[1]), "w", encoding="utf-8") as fh:
                export_dot(state.graph, config, fh)
            state.say(f"wrote {words[1]}")
            return None
        if head == "echo":
            print(line.split(None, 1)[1] if len(words) > 1 else "")
            return None
        if head == "quit":
            return "quit"
    except ScriptFailure:
        raise
    except (GraftError, OSError) as exc:
        raise ScriptFailure(lineno, str(exc)) from exc
    raise ScriptFailure(lineno, f"unknown command {head!r}")


def _import(state, args):
    model_files, instance_files, rule_files = [], [], []
    bucket = model_files
    it = iter(args)
    for word in it:
        if word == "include":
            try:
                rule_files.append(next(it))
            except StopIteration:
                raise GraftError("include needs a rule file") from None
            continue
        if word.endswith(".xmi"):
            instance_files.append(word)
        else:
            model_files.append(word)
    if not model_files:
        raise GraftError("import needs at least one model file (.ecore or .gm)")
    if len(instance_files) > 1:
        raise GraftError("import accepts at most one .xmi instance file")
    t0 = time.perf_counter()
    builder = SchemaBuilder()
    for name in model_files:
        text = Path(state.resolve(name)).read_text(encoding="utf-8")
        if text.lstrip().startswith("<"):
            import_ecore(str(state.resolve(name)), builder)
        else:
            parse_schema_text(text, builder, filename=name)
    state.schema = builder.build()
    if instance_files:
        with open(state.resolve(instance_files[0]), "rb") as fh:
            state.graph = import_xmi(fh, state.schema, seed_order=state.seed_order)
    ruleset = None
    for name in rule_files:
        text = Path(state.resolve(name)).read_text(encoding="utf-8")
        parsed = parse_rules(text, state.schema, filename=name)
        ruleset = parsed if ruleset is None else merge_rulesets(ruleset, parsed)
    state.rules = ruleset
    ms = 1000 * (time.perf_counter() - t0)
    state.import_ms += ms
    if state.graph is not None:
        state.say(
            f"imported {state.graph.node_count()} nodes, "
            f"{state.graph.edge_count()} edges in {ms:.1f} ms"
        )


def _xgrs(state, seq_text, debug):
    _need_graph(state)
    if state.rules is None:
        raise GraftError("no rules loaded (include a rule file in the import command)")
    recorder = TraceRecorder(state.graph) if debug else None
    env = ExecutionEnv(
        graph=state.graph,
        rules=state.rules,
        emit_sink=state.emitted,
        trace=recorder,
    )
    t0 = time.perf_counter()
    result = execute(env, seq_text)
    ms = 1000 * (time.perf_counter() - t0)
    state.extraction_ms += ms
    state.say(f"xgrs result: {str(result).lower()} in {ms:.1f} ms")
    if recorder is not None:
        target = state.trace_path or state.base_dir / "debug.trace"
        with open(target, "w", encoding="utf-8") as fh:
            write_trace(recorder.events, fh)
        state.trace_written = Path(target)
        state.say(f"trace: {len(recorder.events)} records -> {target}")


def _need_graph(state):
    if state.graph is None:
        raise GraftError("no graph loaded (use the import command first)")


def _report(state):
    print(f"import time: {state.import_ms:.1f} ms")
    print(f"extraction time: {state.extraction_ms:.1f} ms")
    heap = _heap_mib()
    if heap is not None:
        print(f"heap: {heap:.1f} MiB")


def _heap_mib():
    try:
        import resource

        usage = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
        return usage / 1024  # linux reports KiB
    except Exception:
        return None


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="graft",
        description="Graph rewriting shell: run .grs scripts or one-shot extractions.",
    )
    parser.add_argument("--script", help="run this .grs script")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    parser.add_argument("--time", action="store_true", dest="show_time",
                        help="print the import/extraction timing report")
    parser.add_argument("--trace", help="trace file for debug xgrs commands")
    parser.add_argument("--seed-order", choices=("creation", "reverse"), default="creation",
                        help="candidate enumeration order (determinism check)")
    sub = parser.add_subparsers(dest="cmd")

    extract = sub.add_parser("extract", help="one-shot state machine extraction")
    extract.add_argument("--model", action="append", required=True,
                         help=".ecore or .gm model file (repeatable, in order)")
    extract.add_argument("--xmi", required=True, help="program graph instance")
    extract.add_argument("--rules", action="append", required=True,
                         help="rule file (repeatable)")
    extract.add_argument("--sequence", help="xgrs sequence (default: shipped pipeline)")
    extract.add_argument("--out", required=True, help="output XMI path")
    extract.add_argument("--dot", help="also write the graph as DOT")
    extract.add_argument("--layout", help="layout config for --dot")

    gen = sub.add_parser("gen-fixture", help="generate a program graph XMI")
    gen.add_argument("kind", choices=("small", "large", "random"))
    gen.add_argument("out", help="output .xmi path")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--classes", type=int, default=20)
    gen.add_argument("--statements", type=int, default=60)

    args = parser.parse_args(argv)
    if args.cmd == "extract":
        return _cli_extract(args)
    if args.cmd == "gen-fixture":
        return _cli_gen(args)
    if not args.script:
        parser.print_usage(sys.stderr)
        print("graft: a --script or a subcommand is required", file=sys.stderr)
        return 2
    return run_script(
        args.script,
        seed_order=args.seed_order,
        quiet=args.quiet,
        trace_path=args.trace,
        show_time=args.show_time,
    )


def _cli_extract(args):
    from .reengineering import extraction_sequence

    try:
        builder = SchemaBuilder()
        for name in args.model:
            text = Path(name).read_text(encoding="utf-8")
            if text.lstrip().startswith("<"):
                import_ecore(name, builder)
            else:
                parse_schema_text(text, builder, filename=name)
        schema = builder.build()
        with open(args.xmi, "rb") as fh:
            graph = import_xmi(fh, schema, seed_order=args.seed_order)
        ruleset = None
        for name in args.rules:
            parsed = parse_rules(Path(name).read_text(encoding="utf-8"), schema, filename=name)
            ruleset = parsed if ruleset is None else merge_rulesets(ruleset, parsed)
        env = ExecutionEnv(graph=graph, rules=ruleset, emit_sink=io.StringIO())
        execute(env, args.sequence or extraction_sequence())
        with open(args.out, "wb") as fh:
            export_state_machine_xmi(graph, fh)
        if args.dot:
            config = LayoutConfig.load(args.layout) if args.layout else None
            with open(args.dot, "w", encoding="utf-8") as fh:
                export_dot(graph, config, fh)
    except (GraftError, OSError) as exc:
        print(f"graft: {exc}", file=sys.stderr)
        return 1
    if not args.quiet:
        states = sum(1 for _ in graph.nodes_of_type("sm_State", True))
        transitions = sum(1 for _ in graph.nodes_of_type("sm_Transition", True))
        print(f"extracted {states} states, {transitions} transitions -> {args.out}")
    return 0


def _cli_gen(args):
    from .reengineering import emit_xmi, make_large_model, make_random_model, make_tcp_model

    if args.kind == "small":
        model = make_tcp_model()
    elif args.kind == "large":
        model = make_large_model(seed=args.seed or 7)
    else:
        model = make_random_model(args.seed, args.classes, args.statements)
    Path(args.out).write_text(emit_xmi(model), encoding="utf-8")
    if not args.quiet:
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

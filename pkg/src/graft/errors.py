"""Exception hierarchy shared by all graft components."""


class GraftError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(GraftError):
    """Invalid type declarations: duplicate names, bad supers, cycles, attribute clashes."""


class GraphError(GraftError):
    """Illegal graph operation: abstract instantiation, dangling elements, bad attributes."""


class StaleElementError(GraphError):
    """An element reference was used after the element was deleted."""


class ParseError(GraftError):
    """Syntax or resolution error in DSL text (rules, sequences, schema text, scripts).

    Carries enough position information to format as ``file:line:col: message``.
    """

    def __init__(self, message, filename="<string>", line=0, col=0):
        self.message = message
        self.filename = filename
        self.line = line
        self.col = col
        super().__init__(f"{filename}:{line}:{col}: {message}")


class MatchError(GraftError):
    """Bad arguments to the matcher, or a pattern that cannot be evaluated."""


class RecursionLimitError(MatchError):
    """Subpattern recursion exceeded the configured instantiation cap."""


class RewriteError(GraftError):
    """Rewrite execution failed: stale elements, eval type mismatch, bad call."""


class EvalError(RewriteError):
    """Attribute expression evaluation failed (type mismatch, unknown attribute)."""


class SequenceError(GraftError):
    """Sequence interpretation failed (unknown rule, step budget exceeded)."""


class ImportError_(GraftError):
    """Model import failed (Ecore or XMI)."""


class ExportError(GraftError):
    """Model export failed (state machine XMI)."""

"""graft: typed attributed graph rewriting with model I/O and a rule DSL."""

from .graph import Graph
from .metamodel import (
    AttributeDecl,
    EnumDef,
    Schema,
    SchemaBuilder,
    emit_schema_text,
    parse_schema_text,
)

__all__ = [
    "AttributeDecl",
    "EnumDef",
    "Graph",
    "Schema",
    "SchemaBuilder",
    "emit_schema_text",
    "parse_schema_text",
]

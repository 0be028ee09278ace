"""Rule DSL: parser, matcher, and rewrite executor."""

from .ast import RuleSet
from .matcher import DefCell, Match, Matcher
from .parser import merge_rulesets, parse_rules
from .rewriter import (
    ApplyAllResult,
    RewriteOutcome,
    Rewriter,
    apply_all,
    apply_rewrite,
    find_matches,
)

__all__ = [
    "ApplyAllResult",
    "DefCell",
    "Match",
    "Matcher",
    "RewriteOutcome",
    "Rewriter",
    "RuleSet",
    "apply_all",
    "apply_rewrite",
    "find_matches",
    "merge_rulesets",
    "parse_rules",
]

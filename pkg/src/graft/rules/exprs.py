"""Attribute expression evaluation shared by the matcher and the rewriter."""

from __future__ import annotations

from ..errors import EvalError
from . import ast


def element_refs(expr):
    """Names of pattern elements an expression reads attributes from."""
    out = set()

    def walk(e):
        if isinstance(e, ast.AttrRef):
            out.add(e.elem)
        elif isinstance(e, ast.Unary):
            walk(e.operand)
        elif isinstance(e, ast.Binary):
            walk(e.left)
            walk(e.right)

    walk(expr)
    return out


def eval_expr(expr, resolver):
    """Evaluate an expression.

    ``resolver`` must provide lookup_element(name), lookup_var(name) and a
    ``graph`` attribute.
    """
    if isinstance(expr, ast.Lit):
        return expr.value
    if isinstance(expr, ast.EnumLit):
        return expr.item
    if isinstance(expr, ast.VarRef):
        value = resolver.lookup_var(expr.name)
        if value is None:
            raise EvalError(f"var {expr.name!r} has no value")
        return value
    if isinstance(expr, ast.AttrRef):
        el = resolver.lookup_element(expr.elem)
        if el is None:
            raise EvalError(f"element {expr.elem!r} is not bound")
        return resolver.graph.get_attr(el, expr.attr)
    if isinstance(expr, ast.Unary):
        val = eval_expr(expr.operand, resolver)
        if expr.op == "!":
            _need_bool(val, expr)
            return not val
        _need_num(val, expr)
        return -val
    if isinstance(expr, ast.Binary):
        if expr.op == "&&":
            left = eval_expr(expr.left, resolver)
            _need_bool(left, expr)
            if not left:
                return False
            right = eval_expr(expr.right, resolver)
            _need_bool(right, expr)
            return right
        if expr.op == "||":
            left = eval_expr(expr.left, resolver)
            _need_bool(left, expr)
            if left:
                return True
            right = eval_expr(expr.right, resolver)
            _need_bool(right, expr)
            return right
        left = eval_expr(expr.left, resolver)
        right = eval_expr(expr.right, resolver)
        return _binop(expr.op, left, right, expr)
    raise EvalError(f"cannot evaluate {expr!r}")


def eval_condition(expr, resolver):
    value = eval_expr(expr, resolver)
    _need_bool(value, expr)
    return value


def to_text(value):
    """Deterministic textual form used by emit()."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _binop(op, left, right, expr):
    if op == "==":
        return _mixed_eq(left, right)
    if op == "!=":
        return not _mixed_eq(left, right)
    if op in ("<", "<=", ">", ">="):
        if not (_both_nums(left, right) or (isinstance(left, str) and isinstance(right, str))):
            raise EvalError(f"cannot order {left!r} and {right!r}")
        return {"<": left < right, "<=": left <= right, ">": left > right, ">=": left >= right}[op]
    if op == "+":
        if isinstance(left, str) and isinstance(right, str):
            return left + right
        if _both_nums(left, right):
            return left + right
        raise EvalError(f"cannot add {left!r} and {right!r}")
    if op in ("-", "*", "/"):
        if not _both_nums(left, right):
            raise EvalError(f"numeric operator {op} on {left!r} and {right!r}")
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if right == 0:
            raise EvalError("division by zero")
        if isinstance(left, int) and isinstance(right, int):
            q = abs(left) // abs(right)
            return q if (left >= 0) == (right >= 0) else -q
        return left / right
    raise EvalError(f"unknown operator {op}")


def _mixed_eq(left, right):
    if _both_nums(left, right):
        return left == right
    if type(left) is not type(right):
        raise EvalError(f"cannot compare {left!r} and {right!r}")
    return left == right


def _both_nums(a, b):
    return (
        isinstance(a, (int, float)) and not isinstance(a, bool)
        and isinstance(b, (int, float)) and not isinstance(b, bool)
    )


def _need_bool(value, expr):
    if not isinstance(value, bool):
        raise EvalError(f"expected a boolean, got {value!r}")


def _need_num(value, expr):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise EvalError(f"expected a number, got {value!r}")

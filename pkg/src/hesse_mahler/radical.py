"""Exact radical expressions such as ``-4320-1944*sqrt(5)`` or ``6+3*cbrt(2)-9*cbrt(4)``.

Grammar: integers, ``+ - * /``, ``**`` or ``^`` with an integer or rational
exponent, parentheses, ``sqrt(.)``, ``cbrt(.)`` and the imaginary unit ``i``.
Roots use the principal branch.  Expressions are parsed once with :mod:`ast`
and evaluated at any precision.
"""

from __future__ import annotations

import ast
from fractions import Fraction

from .mpnum import DEFAULT, PrecisionContext, principal_root

__all__ = ["RadicalExpr", "parse_radical", "evaluate_radical"]

_FUNCS = {"sqrt": 2, "cbrt": 3}


class RadicalSyntaxError(ValueError):
    pass


def _validate(node):
    if isinstance(node, ast.Expression):
        return _validate(node.body)
    if isinstance(node, ast.BinOp):
        if not isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)):
            raise RadicalSyntaxError(f"operator {type(node.op).__name__} not allowed")
        _validate(node.left)
        _validate(node.right)
        if isinstance(node.op, ast.Pow):
            _rational(node.right)
        return
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        return _validate(node.operand)
    if isinstance(node, ast.Constant) and type(node.value) is int:
        return
    if isinstance(node, ast.Name) and node.id == "i":
        return
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
        return _validate(node.args[0])
    raise RadicalSyntaxError(f"unsupported syntax: {ast.dump(node)}")


def _rational(node) -> Fraction:
    if isinstance(node, ast.Constant) and type(node.value) is int:
        return Fraction(node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        v = _rational(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
        l, r = _rational(node.left), _rational(node.right)
        if isinstance(node.op, ast.Div):
            return l / r
        return {ast.Add: l + r, ast.Sub: l - r, ast.Mult: l * r}[type(node.op)]
    raise RadicalSyntaxError("exponents must be rational constants")


class RadicalExpr:
    """A parsed radical expression; ``evaluate(prec)`` gives an mpc."""

    def __init__(self, text: str):
        self.text = text.strip()
        try:
            tree = ast.parse(self.text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise RadicalSyntaxError(f"cannot parse {text!r}: {exc.msg}") from None
        _validate(tree)
        self._tree = tree

    def __repr__(self):
        return f"RadicalExpr({self.text!r})"

    def __eq__(self, other):
        return isinstance(other, RadicalExpr) and self.text == other.text

    def __hash__(self):
        return hash(self.text)

    def evaluate(self, prec: PrecisionContext = DEFAULT):
        mp = prec.mp

        def ev(node):
            if isinstance(node, ast.Expression):
                return ev(node.body)
            if isinstance(node, ast.Constant):
                return mp.mpc(node.value)
            if isinstance(node, ast.Name):
                return mp.mpc(0, 1)
            if isinstance(node, ast.UnaryOp):
                v = ev(node.operand)
                return -v if isinstance(node.op, ast.USub) else v
            if isinstance(node, ast.Call):
                return principal_root(ev(node.args[0]), _FUNCS[node.func.id], prec)
            op = type(node.op)
            if op is ast.Pow:
                e = _rational(node.right)
                base = ev(node.left)
                if e.denominator == 1:
                    return base ** int(e)
                if e.denominator in (2, 3):
                    return principal_root(base, e.denominator, prec) ** e.numerator
                return mp.power(base, mp.mpf(e.numerator) / e.denominator)
            l, r = ev(node.left), ev(node.right)
            if op is ast.Add:
                return l + r
            if op is ast.Sub:
                return l - r
            if op is ast.Mult:
                return l * r
            return l / r

        return ev(self._tree)


def parse_radical(text: str) -> RadicalExpr:
    return RadicalExpr(text)


def evaluate_radical(text: str, prec: PrecisionContext = DEFAULT):
    return RadicalExpr(text).evaluate(prec)

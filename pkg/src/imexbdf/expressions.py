"""Tiny arithmetic expression compiler for config fields.

Coefficient and solution fields in config files are plain arithmetic
over the grid coordinates and time, e.g. ``1 + 0.5*sin(x)*cos(t)``.
The grammar is a strict whitelist over the Python expression syntax:

* names: the declared variables (``x``, ``y``, ``t``) and the constants
  ``pi``, ``e``;
* functions: ``sin``, ``cos``, ``exp``, ``abs``;
* operators: ``+ - * / **`` and unary ``+ -``.

Anything else is rejected at parse time with the offending position, so
config files cannot smuggle arbitrary code.  Compiled fields evaluate
elementwise over numpy arrays.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}
_CONSTANTS = {"pi": math.pi, "e": math.e}
_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_UNARYOPS = (ast.UAdd, ast.USub)


@dataclass(frozen=True)
class FieldExpr:
    """A compiled scalar field of the grid coordinates and time."""

    text: str
    variables: tuple[str, ...]
    names_used: frozenset[str]
    _code: object

    def __call__(self, *args):
        if len(args) != len(self.variables):
            raise ConfigError(
                f"field {self.text!r} takes {self.variables}, got {len(args)} values"
            )
        scope = dict(zip(self.variables, args))
        scope.update(_CONSTANTS)
        scope.update(_FUNCTIONS)
        scope["__builtins__"] = {}
        return eval(self._code, scope)  # noqa: S307 - tree was whitelisted

    @property
    def time_dependent(self) -> bool:
        return "t" in self.names_used


def _reject(node: ast.AST, text: str, reason: str):
    line = getattr(node, "lineno", 1)
    col = getattr(node, "col_offset", 0)
    raise ConfigError(f"bad expression {text!r} at line {line}, column {col}: {reason}")


def _validate(node: ast.AST, text: str, variables: tuple[str, ...], used: set):
    if isinstance(node, ast.Expression):
        _validate(node.body, text, variables, used)
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            _reject(node, text, f"constant {node.value!r} is not a number")
    elif isinstance(node, ast.Name):
        if node.id in variables or node.id in _CONSTANTS:
            used.add(node.id)
        else:
            allowed = ", ".join([*variables, *_CONSTANTS])
            _reject(node, text, f"unknown name {node.id!r} (allowed: {allowed})")
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, _BINOPS):
            _reject(node, text, f"operator {type(node.op).__name__} not allowed")
        _validate(node.left, text, variables, used)
        _validate(node.right, text, variables, used)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, _UNARYOPS):
            _reject(node, text, f"operator {type(node.op).__name__} not allowed")
        _validate(node.operand, text, variables, used)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            _reject(node, text, f"only {sorted(_FUNCTIONS)} may be called")
        if node.keywords or len(node.args) != 1:
            _reject(node, text, "functions take exactly one positional argument")
        used.add(node.func.id)
        _validate(node.args[0], text, variables, used)
    else:
        _reject(node, text, f"syntax {type(node).__name__} not allowed")


def compile_field(text: str, variables: tuple[str, ...] = ("x", "t")) -> FieldExpr:
    """Compile an expression string into an elementwise field function."""
    if not isinstance(text, str) or not text.strip():
        raise ConfigError("empty expression")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(
            f"bad expression {text!r} at line {exc.lineno}, column {exc.offset}: "
            f"{exc.msg}"
        ) from None
    used: set = set()
    _validate(tree, text, variables, used)
    code = compile(tree, "<field>", "eval")
    return FieldExpr(
        text=text,
        variables=tuple(variables),
        names_used=frozenset(used),
        _code=code,
    )

"""Boundary-parameter maps p -> tau(p) in [0, pi) for the singular channels.

Three computable forms are supported: a constant, a table (linear
interpolation inside the tabulated range) and an arithmetic expression in
``p``.  Values outside [0, pi) are rejected rather than wrapped.
"""

from __future__ import annotations

import ast
import csv
import math
import operator
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ValidationError

__all__ = ["TauSpec", "TauConstant", "TauTable", "TauExpression", "parse_tau", "tau_from_dict"]


def _checked(value: float, p: float) -> float:
    v = float(value)
    if not (math.isfinite(v) and 0.0 <= v < math.pi):
        raise ValidationError(f"tau({p}) = {v} outside [0, pi)")
    return v


class TauSpec:
    def __call__(self, p: float) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class TauConstant(TauSpec):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", _checked(self.value, math.nan))

    def __call__(self, p):
        return self.value

    def to_dict(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class TauTable(TauSpec):
    grid: tuple
    values: tuple

    def __post_init__(self):
        g = tuple(float(x) for x in self.grid)
        v = tuple(float(x) for x in self.values)
        if len(g) != len(v) or len(g) < 1:
            raise ValidationError("tau table needs matching, non-empty grid and values")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise ValidationError("tau table grid must be strictly increasing")
        for p, t in zip(g, v):
            _checked(t, p)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_csv(cls, path) -> "TauTable":
        rows = []
        try:
            with open(path, newline="") as fh:
                for row in csv.reader(fh):
                    if not row or row[0].strip().startswith("#"):
                        continue
                    try:
                        rows.append((float(row[0]), float(row[1])))
                    except (ValueError, IndexError):
                        if rows:  # only a leading header may be non-numeric
                            raise ValidationError(f"malformed tau table row {row!r}") from None
        except OSError as exc:
            raise ValidationError(f"cannot read tau table {path}: {exc}") from None
        if not rows:
            raise ValidationError(f"tau table {path} is empty")
        return cls(tuple(r[0] for r in rows), tuple(r[1] for r in rows))

    def __call__(self, p):
        p = float(p)
        g = self.grid
        if not g[0] <= p <= g[-1]:
            raise ValidationError(f"p={p} outside the tau table range [{g[0]}, {g[-1]}]")
        return _checked(np.interp(p, g, self.values), p)

    def to_dict(self):
        return {"kind": "table", "grid": list(self.grid), "values": list(self.values)}


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {name: getattr(math, name) for name in
          ("atan", "atan2", "sin", "cos", "tan", "tanh", "exp", "log", "sqrt", "fabs", "hypot")}
_FUNCS["abs"] = abs
_CONSTS = {"pi": math.pi, "e": math.e}


def _compile(source: str):
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ValidationError(f"cannot parse tau expression {source!r}: {exc.msg}") from None

    def check(node):
        if isinstance(node, ast.Expression):
            check(node.body)
        elif isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            check(node.left)
            check(node.right)
        elif isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            check(node.operand)
        elif isinstance(node, ast.Constant) and type(node.value) in (int, float):
            pass
        elif isinstance(node, ast.Name) and (node.id == "p" or node.id in _CONSTS):
            pass
        elif (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
              and node.func.id in _FUNCS and not node.keywords):
            for a in node.args:
                check(a)
        else:
            raise ValidationError(f"unsupported construct in tau expression: {ast.dump(node)[:60]}")

    check(tree)
    return tree.body


def _eval(node, p):
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, p), _eval(node.right, p))
    if isinstance(node, ast.UnaryOp):
        return _UNOPS[type(node.op)](_eval(node.operand, p))
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return p if node.id == "p" else _CONSTS[node.id]
    return _FUNCS[node.func.id](*(_eval(a, p) for a in node.args))


@dataclass(frozen=True)
class TauExpression(TauSpec):
    """Arithmetic in ``p`` with +, -, *, /, **, pi, e and a few math functions."""

    source: str

    def __post_init__(self):
        object.__setattr__(self, "_tree", _compile(self.source))

    def __call__(self, p):
        p = float(p)
        try:
            v = _eval(self._tree, p)
        except (ArithmeticError, ValueError, TypeError) as exc:
            raise ValidationError(f"tau expression failed at p={p}: {exc}") from None
        if isinstance(v, complex):
            raise ValidationError(f"tau expression is complex at p={p}")
        return _checked(v, p)

    def to_dict(self):
        return {"kind": "expression", "source": self.source}


def parse_tau(text: str, base_dir=None) -> TauSpec:
    """``const:<value>``, ``table:<csv path>``, ``expr:<expression>``; a bare
    number is a constant and a bare ``*.csv`` path a table."""
    text = text.strip()
    kind, sep, rest = text.partition(":")
    if sep:
        kind = kind.strip().lower()
        if kind in ("const", "constant"):
            try:
                return TauConstant(float(rest))
            except ValueError:
                raise ValidationError(f"bad constant tau {rest!r}") from None
        if kind == "table":
            path = Path(rest)
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            return TauTable.from_csv(path)
        if kind in ("expr", "expression"):
            return TauExpression(rest)
    if text.lower().endswith(".csv"):
        return TauTable.from_csv(text)
    try:
        return TauConstant(float(text))
    except ValueError:
        raise ValidationError(f"unrecognized tau spec {text!r}") from None


def tau_from_dict(d: dict) -> TauSpec:
    kind = d.get("kind")
    if kind == "constant":
        return TauConstant(d["value"])
    if kind == "table":
        return TauTable(tuple(d["grid"]), tuple(d["values"]))
    if kind == "expression":
        return TauExpression(d["source"])
    raise ValidationError(f"unknown tau kind {kind!r}")

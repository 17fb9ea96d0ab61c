"""Variables, deferred expressions and deferred object construction.

A :class:`Variable` is declared on a sequence and stands for a real vector
whose value is only known at build time. Arithmetic on variables yields
:class:`Expression` trees. Constructors of waveforms and pulses that receive
an expression return a :class:`Deferred` instead of a concrete object; it is
materialized by :func:`evaluate` once values are supplied.
"""

from __future__ import annotations

import inspect
import math
import operator
from collections.abc import Callable, Mapping
from functools import wraps
from typing import Any

import numpy as np

__all__ = [
    "Parametrized",
    "Expression",
    "Variable",
    "Deferred",
    "is_parametrized",
    "evaluate",
    "parametrizable",
    "deferrable",
    "variables_in",
]

# Keyword arguments holding durations; values computed from expressions are
# rounded to the nearest ns when a deferred call is materialized.
DURATION_KEYS = frozenset({"duration"})

_BINARY = {
    "add": operator.add,
    "sub": operator.sub,
    "mul": operator.mul,
    "div": operator.truediv,
    "pow": operator.pow,
}
_UNARY = {
    "neg": operator.neg,
    "abs": abs,
}


class Parametrized:
    """Marker base class for anything that needs variable values to evaluate."""

    def evaluate(self, values: Mapping[str, np.ndarray]) -> Any:  # pragma: no cover
        raise NotImplementedError


class Expression(Parametrized):
    def _wrap(self, name: str, other: Any, reverse: bool = False) -> Expression:
        if not isinstance(other, (Expression, int, float, np.integer, np.floating)):
            return NotImplemented
        args = (other, self) if reverse else (self, other)
        return _Op(name, args)

    def __add__(self, other):
        return self._wrap("add", other)

    def __radd__(self, other):
        return self._wrap("add", other, reverse=True)

    def __sub__(self, other):
        return self._wrap("sub", other)

    def __rsub__(self, other):
        return self._wrap("sub", other, reverse=True)

    def __mul__(self, other):
        return self._wrap("mul", other)

    def __rmul__(self, other):
        return self._wrap("mul", other, reverse=True)

    def __truediv__(self, other):
        return self._wrap("div", other)

    def __rtruediv__(self, other):
        return self._wrap("div", other, reverse=True)

    def __pow__(self, other):
        return self._wrap("pow", other)

    def __neg__(self):
        return _Op("neg", (self,))

    def __abs__(self):
        return _Op("abs", (self,))

    def __hash__(self) -> int:
        return id(self)

    def to_json(self) -> dict:  # pragma: no cover
        raise NotImplementedError


class Variable(Expression):
    """A named real-valued vector of fixed ``size``, set at build time."""

    def __init__(self, name: str, size: int = 1):
        if not isinstance(name, str) or not name:
            raise ValueError("variable name must be a non-empty string")
        if int(size) != size or size < 1:
            raise ValueError(f"variable size must be a positive integer, got {size}")
        self.name = name
        self.size = int(size)

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, index: int) -> _Item:
        if not isinstance(index, (int, np.integer)):
            raise TypeError("variables are indexed by integers")
        if not -self.size <= index < self.size:
            raise IndexError(f"index {index} out of range for variable '{self.name}'")
        return _Item(self, int(index) % self.size)

    def __iter__(self):
        if self.size == 1:
            raise TypeError(f"variable '{self.name}' of size 1 is not iterable")
        return (self[i] for i in range(self.size))

    def evaluate(self, values):
        val = np.asarray(values[self.name], dtype=float)
        return float(val[0]) if self.size == 1 else val

    def to_json(self) -> dict:
        return {"var": self.name}

    def __repr__(self) -> str:
        return f"Variable({self.name!r}, size={self.size})"


class _Item(Expression):
    def __init__(self, var: Variable, index: int):
        self.var = var
        self.index = index

    def evaluate(self, values):
        return float(np.asarray(values[self.var.name], dtype=float)[self.index])

    def to_json(self) -> dict:
        return {"var": self.var.name, "index": self.index}

    def __repr__(self) -> str:
        return f"{self.var.name}[{self.index}]"


class _Op(Expression):
    def __init__(self, op: str, args: tuple):
        if op not in _BINARY and op not in _UNARY:
            raise ValueError(f"unknown operation {op!r}")
        self.op = op
        self.args = tuple(args)

    def evaluate(self, values):
        vals = [evaluate(a, values) for a in self.args]
        if self.op in _UNARY:
            return _UNARY[self.op](vals[0])
        return _BINARY[self.op](vals[0], vals[1])

    def to_json(self) -> dict:
        return {"op": self.op, "args": [_json_value(a) for a in self.args]}

    def __repr__(self) -> str:
        return f"{self.op}({', '.join(map(repr, self.args))})"


def _json_value(x: Any) -> Any:
    if isinstance(x, Expression):
        return {"expr": x.to_json()}
    return float(x)


def expression_from_json(node: Mapping, variables: Mapping[str, Variable]) -> Any:
    """Inverse of ``Expression.to_json`` (``node`` is the inner dict)."""
    if "var" in node:
        var = variables[node["var"]]
        return var[node["index"]] if "index" in node else var
    args = []
    for a in node["args"]:
        args.append(expression_from_json(a["expr"], variables) if isinstance(a, Mapping) else a)
    return _Op(node["op"], tuple(args))


class Deferred(Parametrized):
    """A constructor call postponed until variable values are known."""

    def __init__(self, key: str, kwargs: dict[str, Any]):
        self.key = key
        self.kwargs = dict(kwargs)

    def evaluate(self, values):
        kw = {}
        for name, raw in self.kwargs.items():
            val = evaluate(raw, values)
            if name in DURATION_KEYS and is_parametrized(raw):
                val = int(math.floor(float(val) + 0.5))
            kw[name] = val
        return FACTORIES[self.key](**kw)

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.kwargs.items())
        return f"Deferred {self.key}({args})"


FACTORIES: dict[str, Callable[..., Any]] = {}


def is_parametrized(obj: Any) -> bool:
    """True if ``obj`` (possibly nested in lists/tuples/dicts) needs variable values."""
    if isinstance(obj, Parametrized):
        return True
    if isinstance(obj, (list, tuple, set, frozenset)):
        return any(is_parametrized(o) for o in obj)
    if isinstance(obj, dict):
        return any(is_parametrized(o) for o in obj.values())
    return False


def evaluate(obj: Any, values: Mapping[str, np.ndarray]) -> Any:
    """Recursively replace expressions and deferred calls by concrete values."""
    if isinstance(obj, Parametrized):
        return obj.evaluate(values)
    if isinstance(obj, list):
        return [evaluate(o, values) for o in obj]
    if isinstance(obj, tuple):
        return tuple(evaluate(o, values) for o in obj)
    if isinstance(obj, dict):
        return {k: evaluate(v, values) for k, v in obj.items()}
    return obj


def variables_in(obj: Any) -> set[str]:
    """Names of every variable referenced by ``obj``."""
    found: set[str] = set()

    def walk(o):
        if isinstance(o, Variable):
            found.add(o.name)
        elif isinstance(o, _Item):
            found.add(o.var.name)
        elif isinstance(o, _Op):
            for a in o.args:
                walk(a)
        elif isinstance(o, Deferred):
            for v in o.kwargs.values():
                walk(v)
        elif isinstance(o, (list, tuple, set, frozenset)):
            for v in o:
                walk(v)
        elif isinstance(o, dict):
            for v in o.values():
                walk(v)

    walk(obj)
    return found


def parametrizable(key: str):
    """Register ``func`` under ``key``; parametrized calls return a :class:`Deferred`."""

    def deco(func):
        sig = inspect.signature(func)

        @wraps(func)
        def wrapper(*args, **kwargs):
            if is_parametrized(args) or is_parametrized(kwargs):
                bound = sig.bind(*args, **kwargs)
                bound.apply_defaults()
                return Deferred(key, dict(bound.arguments))
            return func(*args, **kwargs)

        FACTORIES[key] = func
        return wrapper

    return deco


def deferrable(key: str):
    """Class decorator: constructing with parametrized arguments yields a :class:`Deferred`."""

    def deco(cls):
        sig = inspect.signature(cls.__init__)

        def __new__(klass, *args, **kwargs):
            if is_parametrized(args) or is_parametrized(kwargs):
                bound = sig.bind(None, *args, **kwargs)
                bound.apply_defaults()
                arguments = dict(bound.arguments)
                arguments.pop(next(iter(sig.parameters)))
                return Deferred(key, arguments)
            return object.__new__(klass)

        cls.__new__ = staticmethod(__new__)
        FACTORIES[key] = cls
        return cls

    return deco


def check_finite(x: float, what: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{what} must be finite, got {x}")
    return x

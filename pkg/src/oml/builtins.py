"""Built-in constants: their type schemes and their denotations in a frame."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .domain import BOT, Frame
from .errors import InterpError
from .parser import parse_scheme
from .syntax import Arrow, Scheme, TCon, Type, show_type

INT = TCon("Int")
BOOL = TCon("Bool")


@dataclass(frozen=True)
class Builtin:
    name: str
    scheme: Scheme
    denote: Callable  # (frame, ground instance type) -> value


def _not(frame: Frame, t: Type):
    return frame.fun(t, lambda b: BOT if b is BOT else 1 - b)


def _succ(frame: Frame, t: Type):
    n = frame.int_size
    return frame.fun(t, lambda i: BOT if i is BOT else (i + 1) % n)


def _eq_int(frame: Frame, t: Type):
    inner = t.cod

    def outer(i):
        return frame.fun(inner, lambda j: BOT if i is BOT or j is BOT else int(i == j))
    return frame.fun(t, outer)


def _if(frame: Frame, t: Type):
    # Bool -> a -> a -> a, strict in the condition only
    branch = t.cod
    res = branch.cod

    def on_cond(c):
        if c is BOT:
            return frame.fun(branch, lambda x: frame.bottom(res))
        return frame.fun(branch, lambda x: frame.fun(res, lambda y: x if c == 1 else y))
    return frame.fun(t, on_cond)


def _unit(frame: Frame, t: Type):
    return 0


BUILTINS = {b.name: b for b in [
    Builtin("not", parse_scheme("Bool -> Bool"), _not),
    Builtin("succ", parse_scheme("Int -> Int"), _succ),
    Builtin("eqInt", parse_scheme("Int -> Int -> Bool"), _eq_int),
    Builtin("if", parse_scheme("forall a. Bool -> a -> a -> a"), _if),
    Builtin("emptyStr", parse_scheme("String"), _unit),
]}


def literal_type(value) -> Type:
    return BOOL if isinstance(value, bool) else INT


def literal_value(frame: Frame, value):
    if isinstance(value, bool):
        return int(value)
    return value % frame.int_size


def denote(frame: Frame, name: str, t: Type):
    """Denotation of built-in ``name`` at the ground instance ``t``."""
    b = BUILTINS.get(name)
    if b is None:
        raise InterpError(f"unknown constant {name}")
    if isinstance(t, Arrow) or isinstance(t, TCon):
        return b.denote(frame, t)
    raise InterpError(f"constant {name} at non-ground type {show_type(t)}")

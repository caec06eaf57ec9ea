"""A finite pointed-CPO frame over ground types.

Values are plain Python data so that equality and hashing are structural:

* at a base type, ``None`` is bottom and ``0 .. n-1`` are the proper elements
  (``Bool`` has ``0`` = false, ``1`` = true; ``Int`` has ``int_size`` elements;
  any other constant has a single element);
* at ``a -> b`` a value is a tuple holding one ``b``-value per element of the
  carrier of ``a``, in carrier order. The bottom function is the all-bottom
  table, so applying it yields bottom.

Function values produced by evaluation start out as :class:`Fun` objects whose
table cells are filled on first application. :func:`Frame.force` turns one into
its canonical tuple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from .errors import CarrierTooLarge, InterpError
from .syntax import Arrow, TCon, TVar, Type, show_type

DEFAULT_INT_SIZE = 2
DEFAULT_CARRIER_CAP = 10**6

BOT = None


class _Missing:
    def __repr__(self) -> str:
        return "MISSING"

    def __bool__(self) -> bool:
        return False


MISSING = _Missing()


@dataclass(eq=False)
class Frame:
    int_size: int = DEFAULT_INT_SIZE
    carrier_cap: int = DEFAULT_CARRIER_CAP
    _carriers: dict = field(default_factory=dict, repr=False)
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.int_size < 1 or self.carrier_cap < 1:
            raise ValueError("int_size and carrier_cap must be positive")

    # -- carriers --
    def base_size(self, name: str) -> int:
        if name == "Int":
            return self.int_size
        if name == "Bool":
            return 2
        return 1

    def carrier_size(self, t: Type) -> int:
        """Number of elements, bottom included."""
        if isinstance(t, TCon):
            return self.base_size(t.name) + 1
        if isinstance(t, Arrow):
            d = self.carrier_size(t.dom)
            c = self.carrier_size(t.cod)
            # saturate instead of building astronomically large integers
            if c > 1 and d * math.log2(c) > math.log2(self.carrier_cap) + 8:
                return self.carrier_cap * 256
            return c ** d
        raise InterpError(f"no carrier for non-ground type {show_type(t)}")

    def carrier(self, t: Type) -> tuple:
        cached = self._carriers.get(t)
        if cached is not None:
            return cached
        size = self.carrier_size(t)
        if size > self.carrier_cap:
            raise CarrierTooLarge(
                f"carrier of {show_type(t)} has {size} elements, above the cap of {self.carrier_cap}")
        if isinstance(t, TCon):
            out = (BOT,) + tuple(range(self.base_size(t.name)))
        else:
            n = len(self.carrier(t.dom))
            cod = self.carrier(t.cod)
            out = tuple(_product(cod, n))
        self._carriers[t] = out
        return out

    def index(self, t: Type) -> dict:
        idx = self._index.get(t)
        if idx is None:
            idx = {v: i for i, v in enumerate(self.carrier(t))}
            self._index[t] = idx
        return idx

    # -- frame operations --
    def force(self, v):
        """Canonical (fully tabulated) form of a value."""
        return v.table() if isinstance(v, Fun) else v

    def app(self, f, v, fun_type: Arrow):
        v = self.force(v)
        if isinstance(f, Fun):
            return f(v)
        try:
            return f[self.index(fun_type.dom)[v]]
        except (KeyError, TypeError, IndexError) as exc:
            raise InterpError(f"ill-typed application at {show_type(fun_type)}") from exc

    def fun(self, fun_type: Arrow, fn) -> "Fun":
        return Fun(self, fun_type, fn)

    def tabulate(self, fun_type: Arrow, fn) -> tuple:
        return tuple(fn(a) for a in self.carrier(fun_type.dom))

    def bottom(self, t: Type):
        if isinstance(t, Arrow):
            n = self.carrier_size(t.dom)
            if n > self.carrier_cap:
                raise CarrierTooLarge(f"domain of {show_type(t)} too large")
            return (self.bottom(t.cod),) * n
        if isinstance(t, TVar):
            raise InterpError(f"no bottom at non-ground type {show_type(t)}")
        return BOT

    def leq(self, v, w, t: Type) -> bool:
        v, w = self.force(v), self.force(w)
        if isinstance(t, Arrow):
            return all(self.leq(a, b, t.cod) for a, b in zip(v, w))
        return v is BOT or v == w

    def lub(self, chain: Iterable, t: Type):
        chain = [self.force(x) for x in chain]
        if not chain:
            return self.bottom(t)
        for a, b in zip(chain, chain[1:]):
            if not self.leq(a, b, t):
                raise InterpError("lub of a sequence that is not an ascending chain", "not-a-chain")
        return chain[-1]

    def val_eq(self, v, w, t: Type) -> bool:
        return self.force(v) == self.force(w)

    def well_formed(self, v, t: Type) -> bool:
        v = self.force(v)
        if isinstance(t, TCon):
            return v is BOT or (isinstance(v, int) and not isinstance(v, bool)
                                and 0 <= v < self.base_size(t.name))
        if isinstance(t, Arrow):
            if not isinstance(v, tuple) or len(v) != self.carrier_size(t.dom):
                return False
            return all(self.well_formed(x, t.cod) for x in v)
        return False

    def is_monotone(self, v, t: Type) -> bool:
        """Order-preserving, and sending monotone arguments to monotone results."""
        if not isinstance(t, Arrow):
            return True
        v = self.force(v)
        dom = self.carrier(t.dom)
        for i, a in enumerate(dom):
            for j, b in enumerate(dom):
                if i != j and self.leq(a, b, t.dom) and not self.leq(v[i], v[j], t.cod):
                    return False
        return all(self.is_monotone(x, t.cod) for a, x in zip(dom, v)
                   if self.is_monotone(a, t.dom))

    # -- printing --
    def show(self, v, t: Type) -> str:
        v = self.force(v)
        if isinstance(t, TCon):
            if v is BOT:
                return "⊥"
            if t.name == "Bool":
                return "true" if v else "false"
            if t.name == "Int":
                return str(v)
            return t.name.lower() if self.base_size(t.name) == 1 else f"{t.name}#{v}"
        dom = self.carrier(t.dom)
        entries = [(a, r) for a, r in zip(dom, v)]
        # proper elements first, bottom last
        entries = [e for e in entries if e[0] is not BOT] + [e for e in entries if e[0] is BOT]
        return "{" + ", ".join(f"{self.show(a, t.dom)}↦{self.show(r, t.cod)}" for a, r in entries) + "}"


class Fun:
    """A function value whose table is computed lazily, one cell per argument."""

    __slots__ = ("frame", "type", "fn", "cells", "_table")

    def __init__(self, frame: Frame, fun_type: Arrow, fn):
        self.frame = frame
        self.type = fun_type
        self.fn = fn
        self.cells = {}
        self._table = None

    def __call__(self, v):
        # v is already canonical
        try:
            return self.cells[v]
        except KeyError:
            r = self.cells[v] = self.fn(v)
            return r

    def table(self) -> tuple:
        if self._table is None:
            frame = self.frame
            self._table = tuple(frame.force(self(a)) for a in frame.carrier(self.type.dom))
        return self._table

    def __eq__(self, other) -> bool:
        if isinstance(other, Fun):
            return self is other or self.table() == other.table()
        if isinstance(other, tuple):
            return self.table() == other
        return NotImplemented

    def __hash__(self):
        return hash(self.table())

    def __repr__(self) -> str:
        return f"Fun({show_type(self.type)})"


def _product(values: tuple, n: int):
    if n == 0:
        yield ()
        return
    for head in values:
        for rest in _product(values, n - 1):
            yield (head,) + rest


# -- scheme values ------------------------------------------------------------

class SchemeValue:
    """A map from ground instance types to values; may be computed lazily."""

    def lookup(self, t: Type):
        raise NotImplementedError

    def items(self, universe) -> list:
        """Entries whose key lies in ``universe`` (deterministic order)."""
        raise NotImplementedError

    def to_map(self, universe) -> dict:
        return dict(self.items(universe))

    def keys(self, universe) -> list:
        return [k for k, _ in self.items(universe)]

    def memo_key(self):
        """Token used when memoising evaluations that depend on this value."""
        return Ident(self)


class FiniteSchemeValue(SchemeValue):
    def __init__(self, entries: dict):
        self.entries = dict(entries)

    def lookup(self, t: Type):
        return self.entries.get(t, MISSING)

    def items(self, universe) -> list:
        return [(k, v) for k, v in self.entries.items() if universe is None or k in universe]

    def __eq__(self, other) -> bool:
        # Fun values compare by table, so plain dict equality is extensional
        return isinstance(other, FiniteSchemeValue) and self.entries == other.entries

    __hash__ = None

    def __repr__(self) -> str:
        return f"FiniteSchemeValue({self.entries!r})"


EMPTY = FiniteSchemeValue({})


class Singleton(SchemeValue):
    __slots__ = ("type", "value")

    def __init__(self, t: Type, value):
        self.type = t
        self.value = value

    def lookup(self, t: Type):
        return self.value if t == self.type else MISSING

    def items(self, universe) -> list:
        # a monotype is its own single instance, inside the universe or not
        return [(self.type, self.value)]

    def __eq__(self, other) -> bool:
        return isinstance(other, Singleton) and self.type == other.type and self.value == other.value

    def __hash__(self):
        return hash((self.type, self.value))

    def memo_key(self):
        return (self.type, memo_token(self.value))


class Ident:
    """Hashes by identity and keeps its referent alive (so ids are never reused)."""

    __slots__ = ("obj",)

    def __init__(self, obj):
        self.obj = obj

    def __eq__(self, other) -> bool:
        return isinstance(other, Ident) and other.obj is self.obj

    def __hash__(self):
        return id(self.obj)


def memo_token(v):
    return Ident(v) if isinstance(v, Fun) else v


def scheme_bottom(frame: Frame, keys: Iterable) -> FiniteSchemeValue:
    return FiniteSchemeValue({k: frame.bottom(k) for k in keys})


def _same_domain(a: dict, b: dict) -> None:
    if a.keys() != b.keys():
        raise InterpError("scheme values over different ground-instance sets", "domain-mismatch")


def scheme_leq(frame: Frame, a: dict, b: dict) -> bool:
    _same_domain(a, b)
    return all(frame.leq(a[k], b[k], k) for k in a)


def scheme_lub(frame: Frame, chain: list) -> dict:
    if not chain:
        raise InterpError("lub of an empty chain", "not-a-chain")
    for x in chain[1:]:
        _same_domain(chain[0], x)
    return {k: frame.lub([x[k] for x in chain], k) for k in chain[0]}

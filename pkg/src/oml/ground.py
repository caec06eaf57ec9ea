"""Finite ground-type universes and ground instances of schemes and predicates.

A universe holds every type over a set of base constants with arrow nesting
up to ``depth``. Ground instances of a quantified scheme are truncated to the
universe: quantified variables range over its members and the instance type
must itself be a member. A monotype is its own single instance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import OmlError
from .syntax import (Arrow, ConstrainedScheme, QualType, Scheme, TCon, TVar, Type, apply,
                     ftv, ftv_ordered, is_ground, show_type, type_height)
from .unify import try_match


@dataclass(frozen=True)
class GroundUniverse:
    base: tuple
    depth: int
    members: tuple = field(compare=False)
    _set: frozenset = field(compare=False, repr=False)

    def __contains__(self, t) -> bool:
        return t in self._set

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def position(self, t: Type) -> int:
        return self.members.index(t)


def _sort_key(t: Type):
    return (type_height(t), show_type(t))


def universe(base, depth: int) -> GroundUniverse:
    base = tuple(sorted(set(base)))
    if not base:
        raise ValueError("universe needs at least one base constant")
    if depth < 0:
        raise ValueError("depth must be non-negative")
    layer = [TCon(b) for b in base]
    for _ in range(depth):
        layer = [TCon(b) for b in base] + [Arrow(a, b) for a in layer for b in layer]
    members = tuple(sorted(set(layer), key=_sort_key))
    return GroundUniverse(base, depth, members, frozenset(members))


def gsubst_enum(variables, U: GroundUniverse):
    """Every assignment of members of ``U`` to ``variables`` (in the given order)."""
    variables = list(variables) if not isinstance(variables, (set, frozenset)) else sorted(variables)
    for combo in itertools.product(U.members, repeat=len(variables)):
        yield dict(zip(variables, combo))


class OpenScheme(OmlError):
    kind = "open-variables"


def _split(cs):
    """Normalise a type, scheme or constrained scheme to (outer P, Scheme)."""
    if isinstance(cs, ConstrainedScheme):
        return tuple(cs.outer), cs.scheme
    if isinstance(cs, Scheme):
        return (), cs
    return (), Scheme((), QualType((), cs))


def _check_closed(outer, sc: Scheme) -> None:
    free = ftv(sc) | ftv(list(outer))
    if free:
        raise OpenScheme(f"open type variables {', '.join(sorted(free))}")


def ground_instances(ctx, cs, U: GroundUniverse) -> list:
    """``gr`` by comprehension over ground substitutions, in universe order."""
    outer, sc = _split(cs)
    _check_closed(outer, sc)
    if not ctx.entails_all_ground(outer):
        return []
    if not sc.quantified:
        return [sc.body] if ctx.entails_all_ground(sc.context) else []
    found = set()
    for S in gsubst_enum(sc.quantified, U):
        t = apply(S, sc.body)
        if t in U and t not in found and ctx.entails_all_ground(apply(S, sc.context)):
            found.add(t)
    return sorted(found, key=U.position)


def ground_instances_recursive(ctx, cs, U: GroundUniverse) -> list:
    """``gr`` by the structural clauses: one quantifier at a time, then truncation."""
    outer, sc = _split(cs)
    _check_closed(outer, sc)
    if not ctx.entails_all_ground(outer):
        return []

    def go(qs: tuple, context: tuple, body: Type) -> set:
        if qs:
            out = set()
            for t in U.members:
                S = {qs[0]: t}
                out |= go(qs[1:], apply(S, context), apply(S, body))
            return out
        for p in context:
            if not ctx.entails_ground(p):
                return set()
        return {body}

    found = go(sc.quantified, sc.context, sc.body)
    if sc.quantified:
        found = {t for t in found if t in U}
        return sorted(found, key=U.position)
    return sorted(found, key=_sort_key)


def instance_subst(ctx, sc: Scheme, t: Type, U: GroundUniverse):
    """A ground substitution for ``sc``'s quantifiers exhibiting ``t`` as an
    instance, or ``None``. Variables that do not occur in the body range over ``U``."""
    S = try_match(sc.body, t)
    if S is None:
        return None
    rest = [q for q in sc.quantified if q not in S]
    # any free variable of the body must be matched identically
    for v, ty in S.items():
        if v not in sc.quantified and ty != TVar(v):
            return None
    base = {q: S[q] for q in sc.quantified if q in S}
    for extra in gsubst_enum(rest, U):
        full = dict(base, **extra)
        if ctx.entails_all_ground(apply(full, sc.context)):
            return full
    return None


def is_instance(ctx, sc: Scheme, t: Type, U: GroundUniverse) -> bool:
    """Membership in ``gr(sc)`` (truncated to ``U`` when ``sc`` is quantified)."""
    if not is_ground(t):
        return False
    if sc.quantified and t not in U:
        return False
    return instance_subst(ctx, sc, t, U) is not None


def ground_preds(ctx, P, U: GroundUniverse) -> list:
    """``gr(P)``: satisfiable ground instantiations of ``P`` over ``U``."""
    P = tuple(P)
    out = []
    seen = set()
    for S in gsubst_enum(ftv_ordered(list(P)), U):
        inst = apply(S, P)
        if inst not in seen and ctx.entails_all_ground(inst):
            seen.add(inst)
            out.append(inst)
    return out


__all__ = ["GroundUniverse", "universe", "gsubst_enum", "ground_instances",
           "ground_instances_recursive", "ground_preds", "is_instance", "instance_subst",
           "OpenScheme"]

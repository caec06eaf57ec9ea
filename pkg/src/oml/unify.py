"""First-order unification and one-way matching over types and predicates.

Failures raise :class:`UnifyError` whose ``kind`` names the reason.
"""

from __future__ import annotations

from .errors import UnifyError
from .syntax import Arrow, Pred, TCon, TVar, apply, compose, show_pred, show_type


def _occurs(name: str, t) -> bool:
    if isinstance(t, TVar):
        return t.name == name
    if isinstance(t, Arrow):
        return _occurs(name, t.dom) or _occurs(name, t.cod)
    return False


def _show(x) -> str:
    return show_pred(x) if isinstance(x, Pred) else show_type(x)


def _bind(name: str, t, S: dict) -> None:
    if isinstance(t, TVar) and t.name == name:
        return
    if _occurs(name, t):
        raise UnifyError(f"occurs check: {name} in {show_type(t)}", "occurs")
    single = {name: t}
    for k in list(S):
        S[k] = apply(single, S[k])
    S[name] = t


def _unify_types(a, b, S: dict, keep: frozenset) -> None:
    a = apply(S, a)
    b = apply(S, b)
    if isinstance(a, TVar) and isinstance(b, TVar):
        if a.name == b.name:
            return
        # the right-hand variable is bound unless only it is in ``keep``
        if b.name in keep and a.name not in keep:
            _bind(a.name, b, S)
        else:
            _bind(b.name, a, S)
    elif isinstance(a, TVar):
        _bind(a.name, b, S)
    elif isinstance(b, TVar):
        _bind(b.name, a, S)
    elif isinstance(a, TCon) and isinstance(b, TCon):
        if a.name != b.name:
            raise UnifyError(f"cannot unify {a.name} with {b.name}", "clash")
    elif isinstance(a, Arrow) and isinstance(b, Arrow):
        _unify_types(a.dom, b.dom, S, keep)
        _unify_types(a.cod, b.cod, S, keep)
    else:
        raise UnifyError(f"cannot unify {show_type(a)} with {show_type(b)}", "clash")


def _check_preds(a: Pred, b: Pred) -> None:
    if a.cls != b.cls:
        raise UnifyError(f"class mismatch: {a.cls} vs {b.cls}", "class-mismatch")
    if len(a.args) != len(b.args):
        raise UnifyError(f"arity mismatch for {a.cls}", "arity")


def unify(a, b, keep=frozenset()) -> dict:
    """Most general unifier of two types or two predicates.

    ``keep`` names variables that should be left unbound when a
    variable-variable choice exists.
    """
    S: dict = {}
    keep = frozenset(keep)
    if isinstance(a, Pred) or isinstance(b, Pred):
        if not (isinstance(a, Pred) and isinstance(b, Pred)):
            raise UnifyError("cannot unify a type with a predicate", "class-mismatch")
        _check_preds(a, b)
        for x, y in zip(a.args, b.args):
            _unify_types(x, y, S, keep)
    else:
        _unify_types(a, b, S, keep)
    return S


def unify_at_indices(a: Pred, b: Pred, indices, keep=frozenset()) -> dict:
    """Unify only the argument positions listed in ``indices``."""
    _check_preds(a, b)
    S: dict = {}
    keep = frozenset(keep)
    for i in sorted(indices):
        if i >= len(a.args):
            raise UnifyError(f"index {i} out of range for {a.cls}", "arity")
        _unify_types(a.args[i], b.args[i], S, keep)
    return S


def unify_many(pairs, keep=frozenset()) -> dict:
    """Unify a sequence of (type, type) pairs simultaneously."""
    S: dict = {}
    for x, y in pairs:
        _unify_types(x, y, S, frozenset(keep))
    return S


def _match(p, t, S: dict) -> None:
    if isinstance(p, TVar):
        bound = S.get(p.name)
        if bound is None:
            S[p.name] = t
        elif bound != t:
            raise UnifyError(f"{p.name} matched both {show_type(bound)} and {show_type(t)}", "clash")
    elif isinstance(p, TCon):
        if not (isinstance(t, TCon) and t.name == p.name):
            raise UnifyError(f"cannot match {p.name} onto {show_type(t)}", "clash")
    elif isinstance(p, Arrow):
        if not isinstance(t, Arrow):
            raise UnifyError(f"cannot match {show_type(p)} onto {show_type(t)}", "clash")
        _match(p.dom, t.dom, S)
        _match(p.cod, t.cod, S)
    else:
        raise TypeError(p)


def match_onto(pattern, target) -> dict:
    """One-way matching: returns ``S`` with ``apply(S, pattern) == target``.

    Variables of ``target`` are rigid.
    """
    S: dict = {}
    if isinstance(pattern, Pred) or isinstance(target, Pred):
        if not (isinstance(pattern, Pred) and isinstance(target, Pred)):
            raise UnifyError("cannot match a type against a predicate", "class-mismatch")
        _check_preds(pattern, target)
        for x, y in zip(pattern.args, target.args):
            _match(x, y, S)
    else:
        _match(pattern, target, S)
    return S


def try_match(pattern, target):
    try:
        return match_onto(pattern, target)
    except UnifyError:
        return None


__all__ = ["unify", "unify_at_indices", "unify_many", "match_onto", "try_match", "compose"]

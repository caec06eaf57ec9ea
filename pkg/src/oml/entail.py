"""Predicate entailment ``d : P ||-_A pi`` with named witnesses."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EntailError, UnifyError
from .syntax import Pred, TVar, apply, show_pred
from .unify import match_onto

DEFAULT_DEPTH = 100


@dataclass(frozen=True)
class Assumption:
    def __str__(self) -> str:
        return "-"


@dataclass(frozen=True)
class ByAxiom:
    inst: str
    subs: tuple = ()

    def __str__(self) -> str:
        if not self.subs:
            return self.inst
        return f"{self.inst}({', '.join(str(s) for s in self.subs)})"


ASSUME = Assumption()


def _renamed(ax):
    ren = {q: TVar(f"{q}@{ax.name}") for q in ax.quantified}
    return apply(ren, ax.context), apply(ren, ax.head)


def matching_axioms(axioms, goal: Pred) -> list:
    """All ``(axiom, S)`` with ``S head == goal`` (the axiom's variables renamed apart)."""
    found = []
    for ax in axioms:
        if ax.head.cls != goal.cls or len(ax.head.args) != len(goal.args):
            continue
        ctx, head = _renamed(ax)
        try:
            S = match_onto(head, goal)
        except UnifyError:
            continue
        found.append((ax, apply(S, ctx)))
    return found


def entail(axioms, assumptions, goal: Pred, depth_budget: int = DEFAULT_DEPTH):
    """Return a witness for ``assumptions ||-_A goal`` or raise :class:`EntailError`."""
    if depth_budget < 1:
        raise EntailError(f"entailment depth exhausted at {show_pred(goal)}", "depth-exhausted", goal)
    if goal in assumptions:
        return ASSUME
    found = matching_axioms(axioms, goal)
    if not found:
        raise EntailError(f"no instance matches {show_pred(goal)}", "no-matching-axiom", goal)
    if len(found) > 1:
        names = ", ".join(ax.name for ax, _ in found)
        raise EntailError(f"overlapping instances for {show_pred(goal)}: {names}", "ambiguous-match", goal)
    ax, context = found[0]
    subs = tuple(entail(axioms, assumptions, q, depth_budget - 1) for q in context)
    return ByAxiom(ax.name, subs)


def entail_all(axioms, assumptions, goals, depth_budget: int = DEFAULT_DEPTH) -> list:
    out = []
    for i, g in enumerate(goals):
        try:
            out.append(entail(axioms, assumptions, g, depth_budget))
        except EntailError as exc:
            raise EntailError(f"predicate {i} ({show_pred(g)}): {exc}", exc.kind, g, i) from exc
    return out


def entails(axioms, assumptions, goal: Pred, depth_budget: int = DEFAULT_DEPTH) -> bool:
    """Boolean form; depth exhaustion propagates rather than reading as ``False``."""
    try:
        entail(axioms, assumptions, goal, depth_budget)
        return True
    except EntailError as exc:
        if exc.kind == "depth-exhausted":
            raise
        return False


def check_witness(axioms, assumptions, goal: Pred, witness) -> bool:
    """Replay a witness bottom-up, independently of the search in :func:`entail`."""
    if isinstance(witness, Assumption):
        return goal in assumptions
    by_name = {ax.name: ax for ax in axioms}
    ax = by_name.get(witness.inst)
    if ax is None or len(witness.subs) != len(ax.context):
        return False
    ctx, head = _renamed(ax)
    try:
        S = match_onto(head, goal)
    except UnifyError:
        return False
    return all(check_witness(axioms, assumptions, apply(S, q), w)
               for q, w in zip(ctx, witness.subs))

"""Rewriting with the equational rules, and the semantic equivalence oracle.

The rewrite engine proposes single steps (beta, eta, mu unrolling, let
inlining, method resolution, improvement of the scheme). It is an assistant
for building equality proofs. Deciding equivalence is the oracle's job: it
compares denotations at every ground instance in a finite universe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .domain import Frame
from .entail import ByAxiom, entail
from .errors import EntailError, OmlError, TypeCheckError
from .ground import GroundUniverse, ground_instances
from .interp import Interpreter
from .syntax import (App, Expr, Lam, Let, Mu, Scheme, Var, apply, free_vars, ftv, is_ground,
                     scheme, show_expr, show_scheme, show_subst, subst_expr)
from .typecheck import _dedupe, check_ambiguity, check_scheme, improve

RULES = ("Beta", "Eta", "MuUnroll", "LetInline", "Method", "ImprStep")
# rules earlier in this list fire first; within a rule, leftmost-outermost
PRIORITY = ({"Beta", "LetInline"}, {"Eta"}, {"Method"}, {"MuUnroll"})


@dataclass(frozen=True)
class RewriteStep:
    rule: str
    path: tuple
    redex: Expr
    contractum: Expr
    payload: object = None

    def __str__(self) -> str:
        extra = f" [{self.payload}]" if self.rule == "Method" else ""
        return (f"{self.rule}{extra} @ {show_path(self.path)} : {show_expr(self.redex)} ⇒ "
                f"{show_expr(self.contractum)}")


def show_path(path: tuple) -> str:
    return ".".join(map(str, path)) if path else "ε"


def children(e: Expr) -> tuple:
    if isinstance(e, (Lam, Mu)):
        return (e.body,)
    if isinstance(e, App):
        return (e.fun, e.arg)
    if isinstance(e, Let):
        return (e.bound, e.body)
    return ()


def positions(e: Expr, path: tuple = ()):
    """Subterms in pre-order (leftmost-outermost first) with their paths."""
    yield path, e
    for i, c in enumerate(children(e)):
        yield from positions(c, path + (i,))


def subterm(e: Expr, path: tuple) -> Expr:
    for i in path:
        e = children(e)[i]
    return e


def replace_at(e: Expr, path: tuple, new: Expr) -> Expr:
    if not path:
        return new
    i, rest = path[0], path[1:]
    if isinstance(e, Lam):
        return Lam(e.var, replace_at(e.body, rest, new), e.pos)
    if isinstance(e, Mu):
        return Mu(e.var, replace_at(e.body, rest, new), e.pos)
    if isinstance(e, App):
        if i == 0:
            return App(replace_at(e.fun, rest, new), e.arg, e.pos)
        return App(e.fun, replace_at(e.arg, rest, new), e.pos)
    if isinstance(e, Let):
        if i == 0:
            return Let(e.var, replace_at(e.bound, rest, new), e.body, e.pos)
        return Let(e.var, e.bound, replace_at(e.body, rest, new), e.pos)
    raise ValueError(f"no position {path} in {show_expr(e)}")


def binders_along(e: Expr, path: tuple) -> set:
    out = set()
    for i in path:
        if isinstance(e, (Lam, Mu)):
            out.add(e.var)
        elif isinstance(e, Let) and i == 1:
            out.add(e.var)
        e = children(e)[i]
    return out


# -- structural rules ------------------------------------------------------------

def _structural(e: Expr):
    """(rule, contractum) for every structural redex rooted at ``e``."""
    if isinstance(e, App) and isinstance(e.fun, Lam):
        yield "Beta", subst_expr(e.fun.body, e.fun.var, e.arg)
    if (isinstance(e, Lam) and isinstance(e.body, App) and e.body.arg == Var(e.var)
            and e.var not in free_vars(e.body.fun)):
        yield "Eta", e.body.fun
    if isinstance(e, Mu):
        yield "MuUnroll", subst_expr(e.body, e.var, e)
    if isinstance(e, Let):
        yield "LetInline", subst_expr(e.body, e.var, e.bound)


# -- method resolution -----------------------------------------------------------

_WRAPPERS = ("ThenI", "ThenE", "ForallI", "ForallE", "Impr")
_CHILD = {"LamI": (0,), "Mu": (0,), "AppE": (0, 1), "Let": (0, 1)}


def method_occurrences(tp, node, ground_only: bool = False) -> list:
    """``(path, method, instance, predicate)`` for every method occurrence in the
    derivation whose class predicate resolves to an instance axiom."""
    ctx = tp.ctx
    out = []

    def walk(n, path, inst):
        if n.rule == "ForallE":
            inst = dict(inst)
            inst[n.payload[0]] = n.payload[1]
        elif n.rule not in _WRAPPERS:
            if n.rule == "Var":
                x = n.expr.name
                if x in ctx.sigs and n.env.get(x) == ctx.method_schemes[x]:
                    hit = _resolve(ctx, n, x, inst, ground_only)
                    if hit is not None:
                        out.append((path,) + hit)
                return
            idx = _CHILD.get(n.rule, ())
            for i, p in zip(idx, n.premises):
                walk(p, path + (i,), {})
            return
        for p in n.premises:
            walk(p, path, inst)

    walk(node, (), {})
    return out


def _resolve(ctx, n, x, inst, ground_only):
    pattern, _ = ctx.sigs[x]
    pi = apply(inst, pattern)
    if ground_only and not all(is_ground(a) for a in pi.args):
        return None
    try:
        w = entail(ctx.axioms, tuple(n.preds), pi, ctx.entail_depth)
    except EntailError:
        return None
    if not isinstance(w, ByAxiom):
        return None
    return x, w.inst, pi


def _typed(tp, M: Expr, at: Scheme):
    try:
        return check_scheme(tp.ctx, tp.env, M, at, check_ambiguous=False)
    except OmlError:
        return None


def rewrite_candidates(tp, M: Expr, at: Scheme, ground_methods: bool = False) -> list:
    """Every single rewrite step applicable to ``M`` at scheme ``at``."""
    out = []
    for path, sub in positions(M):
        for rule, new in _structural(sub):
            whole = replace_at(M, path, new)
            # copying or discarding a subterm can strand an overloaded occurrence
            # whose predicate nothing determines; such a step is not replayable
            if _typed(tp, whole, at) is not None:
                out.append((RewriteStep(rule, path, sub, new), whole))
    node = _typed(tp, M, at)
    if node is not None:
        for path, x, d, pi in method_occurrences(tp, node, ground_methods):
            impl = tp.ctx.impls[(x, d)]
            if free_vars(impl) & binders_along(M, path):
                continue  # the implementation would be captured here
            out.append((RewriteStep("Method", path, subterm(M, path), impl, d),
                        replace_at(M, path, impl)))
    step = impr_step(tp, M, at)
    if step is not None:
        out.append((step, M))
    return out


def impr_step(tp, M: Expr, at: Scheme):
    """Improve the scheme's context; None when improvement changes nothing."""
    keep = ftv(at)
    U = improve(tp.ctx, at.context, keep)
    if not U:
        return None
    new = improved_scheme(at, U)
    return RewriteStep("ImprStep", (), M, M, (U, new))


def improved_scheme(at: Scheme, U: dict) -> Scheme:
    qs = [q for q in at.quantified if q not in U]
    return scheme(qs, _dedupe(apply(U, at.context)), apply(U, at.body))


def _order(candidates: list) -> list:
    out = []
    for tier in PRIORITY:
        out += [c for c in candidates if c[0].rule in tier]
    out += [c for c in candidates if c[0].rule == "ImprStep"]
    return out


@dataclass
class NormalizeResult:
    term: Expr
    scheme: Scheme
    steps: list = field(default_factory=list)
    terms: list = field(default_factory=list)   # the term before each step, then the result
    exhausted: bool = False

    def trace(self) -> str:
        return "\n".join(str(s) for s in self.steps)


def normalize(tp, M: Expr, at: Scheme, fuel: int = 200) -> NormalizeResult:
    """Rewrite until no step applies or ``fuel`` steps have been taken."""
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    res = NormalizeResult(M, at, terms=[M])
    step = impr_step(tp, M, at)
    if step is not None:
        res.steps.append(step)
        res.scheme = step.payload[1]
    while True:
        cands = [c for c in rewrite_candidates(tp, res.term, res.scheme, ground_methods=True)
                 if c[0].rule != "ImprStep"]
        if not cands:
            return res
        if fuel == 0:
            res.exhausted = True
            return res
        step, new = _order(cands)[0]
        fuel -= 1
        res.steps.append(step)
        res.term = new
        res.terms.append(new)


# -- oracle ----------------------------------------------------------------------

@dataclass(frozen=True)
class Equal:
    keys: int

    def __bool__(self) -> bool:
        return True

    def __str__(self) -> str:
        return f"equal ({self.keys} instances)"


@dataclass(frozen=True)
class Unequal:
    witness: object
    lhs: object
    rhs: object
    shown: tuple = ("", "")

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"unequal at {self.witness}: {self.shown[0]} vs {self.shown[1]}"


def oracle_equiv(tp, M: Expr, N: Expr, at: Scheme, universe: GroundUniverse,
                 frame: Frame | None = None, interp: Interpreter | None = None):
    """Compare the denotations of ``M`` and ``N`` at every ground instance of ``at``."""
    amb = check_ambiguity(tp.ctx, at)
    if amb:
        raise TypeCheckError(f"ambiguous type {show_scheme(at)}: {{{', '.join(sorted(amb))}}} "
                             f"not determined by the body", "ambiguous-scheme")
    it = interp or Interpreter(tp.ctx, universe, frame or Frame())
    env = tp.env
    left = it.evaluate(tp, check_scheme(tp.ctx, env, M, at))
    right = it.evaluate(tp, check_scheme(tp.ctx, env, N, at))
    keys = ground_instances(tp.ctx, at, it.universe)
    for k in keys:
        a, b = left.lookup(k), right.lookup(k)
        if not it.frame.val_eq(a, b, k):
            return Unequal(k, a, b, (it.frame.show(a, k), it.frame.show(b, k)))
    return Equal(len(keys))


__all__ = ["RewriteStep", "rewrite_candidates", "normalize", "NormalizeResult",
           "oracle_equiv", "Equal", "Unequal", "method_occurrences", "positions",
           "replace_at", "subterm", "show_path", "show_subst", "RULES"]

"""Class contexts: axioms, method signatures and implementations, and the
validity checks that instances must pass (non-overlap, covering)."""

from __future__ import annotations

from dataclasses import dataclass, field

from .builtins import BUILTINS
from .entail import DEFAULT_DEPTH, entail
from .errors import ContextError, EntailError, UnifyError
from .syntax import (Axiom, Pred, Program, Scheme, TVar, apply, fresh_name, ftv,
                     ftv_ordered, scheme, scheme_alpha_eq, show_pred, show_scheme,
                     show_subst)
from .unify import match_onto, unify, unify_at_indices


@dataclass(eq=False)
class ClassContext:
    axioms: tuple
    fundeps: tuple
    classes: dict                 # class name -> ClassDecl
    sigs: dict                    # method -> (class Pred pattern, Scheme)
    impls: dict                   # (method, instance) -> Expr
    consts: dict                  # constant name -> Scheme
    arity: dict                   # class name -> number of parameters
    entail_depth: int = DEFAULT_DEPTH
    method_schemes: dict = field(default_factory=dict)
    instance_schemes: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    _ground_cache: dict = field(default_factory=dict, repr=False)

    @property
    def methods(self) -> list:
        return list(self.sigs)

    def axiom(self, name: str) -> Axiom:
        for ax in self.axioms:
            if ax.name == name:
                return ax
        raise KeyError(name)

    def fundeps_of(self, cls: str) -> list:
        return [fd for fd in self.fundeps if fd.cls == cls]

    def instances_of(self, method: str) -> list:
        return [d for (x, d) in self.impls if x == method]

    def entails_ground(self, pred: Pred) -> bool:
        """``||- pred`` for a ground predicate, cached.

        Depth exhaustion counts as unsatisfied and is recorded in ``warnings``.
        """
        hit = self._ground_cache.get(pred)
        if hit is None:
            try:
                entail(self.axioms, (), pred, self.entail_depth)
                hit = True
            except EntailError as exc:
                if exc.kind == "depth-exhausted":
                    msg = f"entailment depth exhausted at {show_pred(pred)}"
                    if msg not in self.warnings:
                        self.warnings.append(msg)
                hit = False
            self._ground_cache[pred] = hit
        return hit

    def entails_all_ground(self, preds) -> bool:
        return all(self.entails_ground(p) for p in preds)


def _check_pred(p: Pred, arity: dict, where: str) -> None:
    if p.cls not in arity:
        raise ContextError(f"{where}: unknown class {p.cls}", "unknown-class", {"pred": p})
    if len(p.args) != arity[p.cls]:
        raise ContextError(f"{where}: {p.cls} expects {arity[p.cls]} argument(s), got {len(p.args)}",
                           "arity-mismatch", {"pred": p})


def build_context(p: Program, entail_depth: int = DEFAULT_DEPTH) -> ClassContext:
    arity = {}
    classes = {}
    sigs = {}
    for c in p.classes:
        if len(set(c.params)) != len(c.params):
            raise ContextError(f"class {c.name}: parameters must be distinct", "bad-class")
        arity[c.name] = len(c.params)
        classes[c.name] = c
    for c in p.classes:
        pattern = Pred(c.name, tuple(TVar(t) for t in c.params))
        for m, sc in c.methods:
            for q in sc.context:
                _check_pred(q, arity, f"method {m}")
            sigs[m] = (pattern, sc)

    for fd in p.fundeps:
        if fd.cls not in arity:
            raise ContextError(f"fundep on unknown class {fd.cls}", "unknown-class")
        bad = [i for i in fd.determiners | fd.determined if i >= arity[fd.cls] or i < 0]
        if bad:
            raise ContextError(f"{fd}: index {bad[0]} out of range for {fd.cls}", "arity-mismatch")

    axioms = []
    impls = {}
    seen = set()
    for inst in p.instances:
        ax = inst.axiom
        if ax.name in seen:
            raise ContextError(f"duplicate instance name {ax.name}", "duplicate-instance")
        seen.add(ax.name)
        _check_pred(ax.head, arity, f"instance {ax.name}")
        for q in ax.context:
            _check_pred(q, arity, f"instance {ax.name}")
        missing = set(ftv(ax.head)) - set(ax.quantified)
        if missing:
            raise ContextError(f"instance {ax.name}: unquantified variables {sorted(missing)}",
                               "open-instance")
        cls = classes[ax.head.cls]
        expected = [m for m, _ in cls.methods]
        given = [m for m, _ in inst.impls]
        for m in given:
            if m not in expected:
                raise ContextError(f"instance {ax.name}: {m} is not a method of {cls.name}",
                                   "unknown-method", {"instance": ax.name, "method": m})
        for m in expected:
            if m not in given:
                raise ContextError(f"instance {ax.name}: missing implementation of {m}",
                                   "missing-implementation", {"instance": ax.name, "method": m})
        axioms.append(ax)
        for m, e in inst.impls:
            impls[(m, ax.name)] = e

    consts = {}
    for name, sc in p.externals:
        b = BUILTINS.get(name)
        if b is None:
            raise ContextError(f"signature for {name} has no definition and is not a built-in",
                               "unknown-external", {"name": name})
        if not scheme_alpha_eq(sc, b.scheme):
            raise ContextError(f"built-in {name} has type {show_scheme(b.scheme)}, declared "
                               f"{show_scheme(sc)}", "external-mismatch", {"name": name})
        consts[name] = b.scheme
    for b in p.defs + ((p.main,) if p.main else ()):
        if b.scheme is not None:
            for q in b.scheme.context:
                _check_pred(q, arity, b.name)

    ctx = ClassContext(tuple(axioms), tuple(p.fundeps), classes, sigs, impls, consts, arity,
                       entail_depth)
    for m in sigs:
        ctx.method_schemes[m] = method_scheme(ctx, m)
    for (m, d) in impls:
        ctx.instance_schemes[(m, d)] = instance_method_scheme(ctx, m, d)
    return ctx


def method_scheme(ctx: ClassContext, x: str) -> Scheme:
    """``forall t.., u... (pi, Q) => tau`` with the class variables first."""
    pattern, sc = ctx.sigs[x]
    class_vars = [a.name for a in pattern.args]
    return scheme(class_vars + list(sc.quantified), (pattern,) + sc.context, sc.body)


def instance_method_scheme(ctx: ClassContext, x: str, d: str) -> Scheme:
    pattern, sc = ctx.sigs[x]
    ax = ctx.axiom(d)
    try:
        S = match_onto(pattern, ax.head)
    except UnifyError as exc:
        raise ContextError(f"instance {d} does not match the class of {x}", "head-mismatch") from exc
    # keep the method's own variables apart from the instance's
    avoid = set(ax.quantified) | ftv(ax.context)
    ren = {}
    own = []
    for u in sc.quantified:
        v = fresh_name(u, avoid) if u in avoid else u
        avoid.add(v)
        own.append(v)
        if v != u:
            ren[u] = TVar(v)
    full = dict(S)
    full.update(ren)
    ctx_q = tuple(apply(full, q) for q in sc.context)
    return scheme(list(ax.quantified) + own, tuple(ax.context) + ctx_q, apply(full, sc.body))


# -- validity checks -----------------------------------------------------------

def _apart(ax: Axiom, avoid) -> Pred:
    ren = {}
    taken = set(avoid)
    for q in ax.quantified:
        v = fresh_name(q, taken) if q in taken else q
        taken.add(v)
        ren[q] = TVar(v)
    return apply(ren, ax.head)


def overlap_violations(ctx: ClassContext) -> list:
    """All overlapping pairs as ``(d, d', X or None, unifier)``."""
    out = []
    axioms = ctx.axioms
    for i, a in enumerate(axioms):
        for b in axioms[i + 1:]:
            if a.head.cls != b.head.cls:
                continue
            hb = _apart(b, ftv(a.head) | set(a.quantified))
            fds = ctx.fundeps_of(a.head.cls)
            if not fds:
                try:
                    out.append((a, b, None, unify(a.head, hb)))
                except UnifyError:
                    pass
                continue
            for fd in fds:
                try:
                    out.append((a, b, fd.determiners, unify_at_indices(a.head, hb, fd.determiners)))
                except UnifyError:
                    pass
    return out


def check_nonoverlap(ctx: ClassContext) -> None:
    found = overlap_violations(ctx)
    if not found:
        return
    a, b, X, S = found[0]
    where = "" if X is None else f" at {{{', '.join(str(i) for i in sorted(X))}}}"
    raise ContextError(
        f"overlap{where}: {show_pred(a.head)} ~ {show_pred(b.head)} ({a.name}, {b.name}; "
        f"unifier {show_subst(S)})",
        "overlap", {"axioms": (a.name, b.name), "indices": X, "unifier": S})


def fd_closure(J, F) -> frozenset:
    """Least superset of ``J`` closed under the dependencies ``F`` (pairs of sets)."""
    out = set(J)
    F = [(frozenset(u), frozenset(v)) for u, v in F]
    changed = True
    while changed:
        changed = False
        for u, v in F:
            if u <= out and not v <= out:
                out |= v
                changed = True
    return frozenset(out)


def ftv_at(p: Pred, indices) -> frozenset:
    out = set()
    for i in indices:
        out |= ftv(p.args[i])
    return frozenset(out)


def instantiate_fundeps(ctx, P) -> list:
    """``fd(A, P)``: one ``(ftv_X(pi), ftv_Y(pi))`` per dependency and matching predicate."""
    fundeps = ctx.fundeps if hasattr(ctx, "fundeps") else ctx
    out = []
    for pi in P:
        for fd in fundeps:
            if fd.cls == pi.cls:
                dep = (ftv_at(pi, fd.determiners), ftv_at(pi, fd.determined))
                if dep not in out:
                    out.append(dep)
    return out


def covering_violations(ctx: ClassContext) -> list:
    out = []
    for ax in ctx.axioms:
        F = instantiate_fundeps(ctx, ax.context)
        for fd in ctx.fundeps_of(ax.head.cls):
            reach = fd_closure(ftv_at(ax.head, fd.determiners), F)
            escaping = ftv_at(ax.head, fd.determined) - reach
            if escaping:
                out.append((ax, fd, escaping))
    return out


def check_covering(ctx: ClassContext) -> None:
    found = covering_violations(ctx)
    if not found:
        return
    ax, fd, esc = found[0]
    raise ContextError(
        f"uncovered: instance {ax.name} ({show_pred(ax.head)}) violates {fd}: "
        f"{', '.join(sorted(esc))} not determined",
        "uncovered", {"axiom": ax.name, "fundep": fd, "variables": frozenset(esc)})


def ambiguous_vars(ctx, sc: Scheme) -> frozenset:
    """Variables of the context not determined by the body (through fd closure)."""
    F = instantiate_fundeps(ctx, sc.context)
    reach = fd_closure(ftv(sc.body), F)
    return frozenset(ftv(sc.context) - reach) & frozenset(sc.quantified)

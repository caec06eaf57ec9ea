"""Qualified-type inference and checking that materialises typing derivations.

Inference is constraint-collecting algorithm W over qualified types. All
predicates float to the top-level context; ``let`` generalises only type
variables that are free in neither the environment nor the predicates.
The resulting tree is then elaborated into the declarative rules (ForallE and
ThenE at variable occurrences, ThenI/ForallI at checked boundaries, Impr when
a declared context is improved) and can be replayed rule by rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .builtins import BUILTINS, literal_type
from .classctx import (ClassContext, ambiguous_vars, build_context, check_covering,
                       check_nonoverlap)
from .entail import ASSUME, check_witness, entail
from .errors import EntailError, ImprovementClash, TypeCheckError, UnifyError
from .syntax import (App, Arrow, Const, Expr, Lam, Let, Mu, Pred, Program, QualType, Scheme,
                     TCon, TVar, Var, apply, compose, free_vars, ftv, ftv_ordered, mono,
                     scheme_alpha_eq, show_expr, show_pred, show_scheme, show_subst,
                     show_type)
from .unify import match_onto, unify, unify_at_indices

DEFAULT_TYPE = TCon("Int")
RULES = ("Var", "Const", "LamI", "AppE", "Mu", "ThenI", "ThenE", "ForallI", "ForallE",
         "Let", "Impr", "Ctxt")


def is_internal(name: str) -> bool:
    return name.startswith("?")


@dataclass(eq=False)
class Derivation:
    """One rule application concluding ``preds | env |- expr : scheme``."""

    rule: str
    preds: tuple
    env: dict
    expr: Expr
    scheme: Scheme
    premises: tuple = ()
    payload: object = None

    @property
    def type(self):
        return self.scheme.body

    def walk(self):
        yield self
        for p in self.premises:
            yield from p.walk()

    def size(self) -> int:
        return sum(1 for _ in self.walk())


def _qual(context, body) -> Scheme:
    return Scheme((), QualType(tuple(context), body))


# -- substitution over whole derivations ------------------------------------------

def subst_derivation(S: dict, node: Derivation, _envs=None) -> Derivation:
    """Apply ``S`` to every conclusion and payload; ForallI-bound names are left alone."""
    if _envs is None:
        _envs = {}
    if not S:
        return node
    key = id(node.env)
    env = _envs.get(key)
    if env is None or env[0] is not node.env:
        env = (node.env, {k: apply(S, v) for k, v in node.env.items()})
        _envs[key] = env
    inner = S
    if node.rule == "ForallI" and node.payload in S:
        inner = {k: v for k, v in S.items() if k != node.payload}
        _envs = {}
    payload = node.payload
    if node.rule == "ThenI":
        payload = apply(S, payload)
    elif node.rule == "ThenE":
        payload = (apply(S, payload[0]), payload[1])
    elif node.rule == "ForallE":
        payload = (payload[0], apply(S, payload[1]))
    elif node.rule == "Impr":
        payload = {k: apply(S, v) for k, v in payload.items()}
    premises = tuple(subst_derivation(inner, p, _envs) for p in node.premises)
    return Derivation(node.rule, apply(S, node.preds), env[1], node.expr, apply(S, node.scheme),
                      premises, payload)


def _rebase(node: Derivation, preds: tuple, ctx: ClassContext) -> Derivation:
    """Set the context of every node to ``preds`` and recompute ThenE witnesses."""
    payload = node.payload
    if node.rule == "ThenE":
        pi = payload[0]
        payload = (pi, entail(ctx.axioms, preds, pi, ctx.entail_depth))
    premises = tuple(_rebase(p, preds, ctx) for p in node.premises)
    return Derivation(node.rule, preds, node.env, node.expr, node.scheme, premises, payload)


# -- improvement --------------------------------------------------------------------

def improve(ctx, P, keep=frozenset()) -> dict:
    """Improving substitution for ``P`` from the declared dependencies.

    Pairs of predicates in ``P`` that agree on the determining positions have
    their determined positions unified, until nothing changes.
    """
    S: dict = {}
    P = list(P)
    fundeps = ctx.fundeps if hasattr(ctx, "fundeps") else ctx
    changed = True
    while changed:
        changed = False
        cur = apply(S, P)
        for fd in fundeps:
            group = [p for p in cur if p.cls == fd.cls]
            for i, a in enumerate(group):
                for b in group[i + 1:]:
                    if any(a.args[k] != b.args[k] for k in fd.determiners):
                        continue
                    try:
                        U = unify_at_indices(a, b, fd.determined, keep)
                    except UnifyError as exc:
                        raise ImprovementClash(
                            f"improvement clash: {show_pred(a)} and {show_pred(b)} agree on "
                            f"{sorted(fd.determiners)} but not on {sorted(fd.determined)}",
                            (a, b)) from exc
                    if U:
                        S = compose(U, S)
                        changed = True
                        break
                if changed:
                    break
            if changed:
                break
    return S


def check_ambiguity(ctx, sc: Scheme) -> frozenset:
    """Empty when ``sc`` is unambiguous, otherwise the undetermined variables."""
    return ambiguous_vars(ctx, sc)


# -- inference ------------------------------------------------------------------------

class Inferencer:
    def __init__(self, ctx: ClassContext):
        self.ctx = ctx
        self.S: dict = {}
        self.preds: list = []
        self.counter = 0

    def fresh(self) -> TVar:
        self.counter += 1
        return TVar(f"?{self.counter}")

    def unify(self, a, b, e: Expr) -> None:
        a2, b2 = apply(self.S, a), apply(self.S, b)
        try:
            U = unify(a2, b2)
        except UnifyError as exc:
            kind = "occurs" if exc.kind == "occurs" else "cannot-unify"
            raise TypeCheckError(f"cannot unify {show_type(a2)} with {show_type(b2)} in "
                                 f"{show_expr(e)}", kind, _site(e)) from exc
        if U:
            self.S = compose(U, self.S)

    def instantiate(self, node: Derivation, env: dict, e: Expr):
        sc = node.scheme
        while sc.quantified:
            t = sc.quantified[0]
            a = self.fresh()
            sc = apply({t: a}, Scheme(sc.quantified[1:], sc.qual))
            node = Derivation("ForallE", (), env, e, sc, (node,), (t, a))
        while sc.context:
            pi = sc.context[0]
            self.preds.append(pi)
            sc = _qual(sc.context[1:], sc.body)
            node = Derivation("ThenE", (), env, e, sc, (node,), (pi, ASSUME))
        return node, sc.body

    def infer(self, env: dict, e: Expr):
        if isinstance(e, Var):
            if e.name in env:
                return self.instantiate(Derivation("Var", (), env, e, env[e.name]), env, e)
            if e.name in BUILTINS:
                node = Derivation("Const", (), env, e, BUILTINS[e.name].scheme, payload=e.name)
                return self.instantiate(node, env, e)
            raise TypeCheckError(f"unbound variable {e.name}", "unbound-variable", _site(e))
        if isinstance(e, Const):
            t = literal_type(e.value)
            return Derivation("Const", (), env, e, mono(t), payload=e.value), t
        if isinstance(e, Lam):
            a = self.fresh()
            inner = dict(env)
            inner[e.var] = mono(a)
            n1, t1 = self.infer(inner, e.body)
            t = Arrow(a, t1)
            return Derivation("LamI", (), env, e, mono(t), (n1,)), t
        if isinstance(e, App):
            n1, t1 = self.infer(env, e.fun)
            n2, t2 = self.infer(env, e.arg)
            r = self.fresh()
            self.unify(t1, Arrow(t2, r), e)
            return Derivation("AppE", (), env, e, mono(r), (n1, n2)), r
        if isinstance(e, Mu):
            a = self.fresh()
            inner = dict(env)
            inner[e.var] = mono(a)
            n1, t1 = self.infer(inner, e.body)
            self.unify(t1, a, e)
            return Derivation("Mu", (), env, e, mono(a), (n1,)), a
        if isinstance(e, Let):
            n1, t1 = self.infer(env, e.bound)
            t1s = apply(self.S, t1)
            fixed = ftv(apply(self.S, env)) | ftv(apply(self.S, self.preds))
            gen = [v for v in ftv_ordered(t1s) if v not in fixed]
            node = n1
            qual = QualType((), t1s)
            for i in range(len(gen) - 1, -1, -1):
                node = Derivation("ForallI", (), env, e.bound, Scheme(tuple(gen[i:]), qual),
                                  (node,), gen[i])
            sigma = Scheme(tuple(gen), qual)
            inner = dict(env)
            inner[e.var] = sigma
            n2, t2 = self.infer(inner, e.body)
            return Derivation("Let", (), env, e, mono(t2), (node, n2)), t2
        raise TypeError(e)


def _site(e: Expr):
    pos = getattr(e, "pos", None)
    return f"{pos[0]}:{pos[1]}" if pos else None


def _dedupe(preds) -> tuple:
    out = []
    for p in preds:
        if p not in out:
            out.append(p)
    return tuple(out)


def _bound_vars(node: Derivation) -> set:
    return {n.payload for n in node.walk() if n.rule == "ForallI"}


def _free_internal(node: Derivation) -> list:
    bound = _bound_vars(node)
    seen = []
    envs = set()
    for n in node.walk():
        items = [n.scheme, list(n.preds)]
        if id(n.env) not in envs:
            envs.add(id(n.env))
            items.append(list(n.env.values()))
        for v in ftv_ordered(items):
            if is_internal(v) and v not in bound and v not in seen:
                seen.append(v)
        if n.rule == "ForallE":
            for v in ftv_ordered(n.payload[1]):
                if is_internal(v) and v not in bound and v not in seen:
                    seen.append(v)
    return seen


def _readable(t, avoid):
    """``t`` with internal variables renamed to short names, for messages."""
    internal = [v for v in ftv_ordered(t) if is_internal(v)]
    fresh = _nice_names(len(internal), set(avoid) | ftv(t))
    return apply({v: TVar(n) for v, n in zip(internal, fresh)}, t)


def _nice_names(n: int, avoid) -> list:
    out = []
    pool = ["t", "u", "v", "w", "a", "b", "c", "d"]
    i = 0
    k = 0
    while len(out) < n:
        if i < len(pool):
            cand = pool[i]
        else:
            k += 1
            cand = f"t{k}"
        i += 1
        if cand not in avoid:
            out.append(cand)
    return out


def infer(ctx: ClassContext, env: dict, e: Expr):
    """Principal ``(P, tau, derivation)`` for ``e`` under ``env``.

    Predicates are improved eagerly; internal type variables are renamed to
    readable names. Every node of the derivation carries the context ``P``.
    """
    inf = Inferencer(ctx)
    node, t = inf.infer(env, e)
    P = apply(inf.S, inf.preds)
    V = improve(ctx, P, keep=ftv(env))
    S = compose(V, inf.S)
    node = subst_derivation(S, node)
    t = apply(S, t)
    P = _dedupe(apply(S, inf.preds))
    free = [v for v in ftv_ordered([t, list(P)]) if is_internal(v)]
    for v in _free_internal(node):
        if v not in free:
            free.append(v)
    avoid = ftv(env) | {v for v in _bound_vars(node)}
    names = _nice_names(len(free), avoid)
    R = {v: TVar(n) for v, n in zip(free, names)}
    node = subst_derivation(R, node)
    P = apply(R, P)
    node = _rebase(node, P, ctx)
    return P, apply(R, t), node


def infer_scheme(ctx: ClassContext, env: dict, e: Expr) -> Scheme:
    """The generalised principal scheme (closed environments only)."""
    P, t, _ = infer(ctx, env, e)
    fixed = ftv(env)
    qs = [v for v in ftv_ordered([t, list(P)]) if v not in fixed]
    return Scheme(tuple(qs), QualType(P, t))


def check_scheme(ctx: ClassContext, env: dict, e: Expr, sc: Scheme, site: str | None = None,
                 check_ambiguous: bool = True) -> Derivation:
    """Derivation of ``|- e : sc`` or a :class:`TypeCheckError`."""
    if check_ambiguous:
        amb = check_ambiguity(ctx, sc)
        if amb:
            raise TypeCheckError(f"ambiguous type {show_scheme(sc)}: {{{', '.join(sorted(amb))}}} "
                                 f"not determined by the body", "ambiguous", site)
    env_vars = ftv(env)
    clash = set(sc.quantified) & env_vars
    if clash:
        raise TypeCheckError(f"quantified {sorted(clash)} also free in the environment",
                             "predicate-escape", site)
    Q, body = sc.context, sc.body
    try:
        U = improve(ctx, Q, keep=env_vars)
    except ImprovementClash as exc:
        raise TypeCheckError(f"declared context is unsatisfiable: {exc}", "improvement-clash",
                             site) from exc
    Qi = _dedupe(apply(U, Q)) if U else tuple(Q)
    bi = apply(U, body)
    declared = ftv(list(Qi)) | ftv(bi) | env_vars

    inf = Inferencer(ctx)
    node, t = inf.infer(env, e)
    t = apply(inf.S, t)
    try:
        M = match_onto(t, bi)
        if any(not is_internal(v) and M[v] != TVar(v) for v in M):
            raise UnifyError("rigid variable", "clash")
    except UnifyError as exc:
        raise TypeCheckError(f"declared type {show_scheme(sc)} is more general than the "
                             f"inferred type {show_type(_readable(t, ftv(sc) | set(sc.quantified)))}",
                             "declared-too-general", site) from exc
    S = compose(M, inf.S)

    P = apply(S, inf.preds)
    try:
        V = improve(ctx, list(Qi) + list(P), keep=declared)
    except ImprovementClash as exc:
        raise TypeCheckError(str(exc), "improvement-clash", site) from exc
    forced = {v: t for v, t in V.items() if v in declared}
    if forced:
        raise TypeCheckError(f"declared type {show_scheme(sc)} is more general than its "
                             f"dependencies allow ({show_subst(forced)})",
                             "declared-too-general", site)
    S = compose(V, S)
    P = _dedupe(apply(S, inf.preds))
    quantified = set(sc.quantified)
    for p in P:
        try:
            entail(ctx.axioms, Qi, p, ctx.entail_depth)
        except EntailError as exc:
            internal = [v for v in ftv(p) if is_internal(v)]
            if exc.kind == "depth-exhausted":
                kind = "depth-exhausted"
            elif internal:
                kind = "ambiguous"
            elif ftv(p) & quantified:
                kind = "predicate-escape"
            else:
                kind = "unsatisfied"
            raise TypeCheckError(f"cannot satisfy {show_pred(p)} from the declared context: {exc}",
                                 kind, site) from exc

    node = subst_derivation(S, node)
    defaults = {v: DEFAULT_TYPE for v in _free_internal(node)}
    node = subst_derivation(defaults, node)
    node = _rebase(node, Qi, ctx)

    if U:
        node = Derivation("Impr", tuple(Q), env, e, mono(body), (node,), dict(U))
    for i in range(len(Q) - 1, -1, -1):
        node = Derivation("ThenI", tuple(Q[:i]), env, e, _qual(Q[i:], body), (node,), Q[i])
    for i in range(len(sc.quantified) - 1, -1, -1):
        node = Derivation("ForallI", (), env, e, Scheme(sc.quantified[i:], sc.qual), (node,),
                          sc.quantified[i])
    return node


# -- replay ------------------------------------------------------------------------

class ReplayError(TypeCheckError):
    kind = "replay"


def _env_eq(a: dict, b: dict) -> bool:
    return a.keys() == b.keys() and all(scheme_alpha_eq(a[k], b[k]) for k in a)


def replay(ctx: ClassContext, node: Derivation) -> bool:
    """Re-check every rule application locally; raises :class:`ReplayError`."""
    for n in node.walk():
        _replay_one(ctx, n)
    return True


def _fail(n: Derivation, why: str):
    raise ReplayError(f"{n.rule} at {show_expr(n.expr)}: {why}")


def _replay_one(ctx: ClassContext, n: Derivation) -> None:
    r, e, sc, ps = n.rule, n.expr, n.scheme, n.premises
    same = all(p.expr is e or p.expr == e for p in ps)

    def need(cond, why):
        if not cond:
            _fail(n, why)

    if r == "Var":
        need(isinstance(e, Var) and e.name in n.env, "variable not in the environment")
        need(scheme_alpha_eq(n.env[e.name], sc), "scheme differs from the environment")
    elif r == "Const":
        if isinstance(e, Const):
            need(sc == mono(literal_type(e.value)), "literal type")
        else:
            need(isinstance(e, Var) and e.name not in n.env and e.name in BUILTINS, "constant")
            need(scheme_alpha_eq(BUILTINS[e.name].scheme, sc), "constant scheme")
    elif r in ("LamI", "Mu"):
        need(isinstance(e, Lam if r == "LamI" else Mu), "expression shape")
        (p,) = ps
        need(p.expr == e.body and p.preds == n.preds and sc.is_mono() and p.scheme.is_mono(),
             "premise shape")
        need(e.var in p.env and p.env[e.var].is_mono(), "bound variable must be monomorphic")
        rest = {k: v for k, v in p.env.items() if k != e.var}
        outer = {k: v for k, v in n.env.items() if k != e.var}
        need(_env_eq(rest, outer), "environment")
        arg = p.env[e.var].body
        if r == "LamI":
            need(sc.body == Arrow(arg, p.type), "function type")
        else:
            need(sc.body == arg == p.type, "fixpoint type")
    elif r == "AppE":
        need(isinstance(e, App) and len(ps) == 2, "expression shape")
        f, a = ps
        need(f.expr == e.fun and a.expr == e.arg, "subterms")
        need(all(p.preds == n.preds and _env_eq(p.env, n.env) for p in ps), "context")
        need(f.scheme.is_mono() and a.scheme.is_mono() and sc.is_mono(), "monotypes")
        need(f.type == Arrow(a.type, sc.body), "application type")
    elif r == "Let":
        need(isinstance(e, Let) and len(ps) == 2, "expression shape")
        b, body = ps
        need(b.expr == e.bound and body.expr == e.body, "subterms")
        need(b.preds == n.preds == body.preds and _env_eq(b.env, n.env), "context")
        need(e.var in body.env and scheme_alpha_eq(body.env[e.var], b.scheme), "let binding")
        rest = {k: v for k, v in body.env.items() if k != e.var}
        outer = {k: v for k, v in n.env.items() if k != e.var}
        need(_env_eq(rest, outer), "environment")
        need(sc.is_mono() and sc == body.scheme, "body type")
    elif r == "ThenI":
        (p,) = ps
        need(same and _env_eq(p.env, n.env), "premise")
        need(p.preds == n.preds + (n.payload,), "premise context must extend by the predicate")
        need(not p.scheme.quantified and not sc.quantified, "qualified types only")
        need(sc.context == (n.payload,) + p.scheme.context and sc.body == p.scheme.body,
             "conclusion")
    elif r == "ThenE":
        (p,) = ps
        pi, w = n.payload
        need(same and p.preds == n.preds and _env_eq(p.env, n.env), "premise")
        need(not p.scheme.quantified and p.scheme.context[:1] == (pi,), "premise scheme")
        need(sc.context == p.scheme.context[1:] and sc.body == p.scheme.body, "conclusion")
        need(check_witness(ctx.axioms, n.preds, pi, w), f"witness {w} does not prove {show_pred(pi)}")
    elif r == "ForallI":
        (p,) = ps
        t = n.payload
        need(same and p.preds == n.preds and _env_eq(p.env, n.env), "premise")
        need(t not in ftv(n.env) and t not in ftv(list(n.preds)), f"{t} free in context")
        need(t not in p.scheme.quantified, "variable already bound")
        need(scheme_alpha_eq(sc, Scheme((t,) + p.scheme.quantified, p.scheme.qual)), "conclusion")
    elif r == "ForallE":
        (p,) = ps
        t, ty = n.payload
        need(same and p.preds == n.preds and _env_eq(p.env, n.env), "premise")
        need(p.scheme.quantified[:1] == (t,), "premise must quantify the variable")
        inst = apply({t: ty}, Scheme(p.scheme.quantified[1:], p.scheme.qual))
        need(scheme_alpha_eq(inst, sc), "conclusion")
    elif r == "Impr":
        (p,) = ps
        S = n.payload
        need(same, "premise")
        need(S == improve(ctx, n.preds, keep=ftv(n.env)), "not the improving substitution")
        need(p.preds == _dedupe(apply(S, n.preds)), "premise context")
        need(_env_eq(p.env, apply(S, n.env)), "premise environment")
        need(scheme_alpha_eq(p.scheme, apply(S, sc)), "premise scheme")
    elif r == "Ctxt":
        pass
    else:
        _fail(n, "unknown rule")


# -- programs ----------------------------------------------------------------------

@dataclass(eq=False)
class TypedProgram:
    program: Program
    ctx: ClassContext
    method_env: dict
    method_derivs: dict                      # (method, instance) -> Derivation
    defs: list = field(default_factory=list)  # (name, Scheme, Derivation)
    main: Derivation | None = None
    main_scheme: Scheme | None = None

    @property
    def env(self) -> dict:
        out = dict(self.method_env)
        for name, sc, _ in self.defs:
            out[name] = sc
        return out

    def derivation(self) -> Derivation:
        prem = tuple(self.method_derivs.values()) + tuple(d for _, _, d in self.defs)
        if self.main is not None:
            prem += (self.main,)
            return Derivation("Ctxt", (), {}, self.main.expr, self.main.scheme, prem, self.ctx)
        return Derivation("Ctxt", (), {}, Var("main"), mono(TCon("Unit")), prem, self.ctx)


def check_program(p: Program, entail_depth: int | None = None) -> TypedProgram:
    ctx = build_context(p) if entail_depth is None else build_context(p, entail_depth)
    check_nonoverlap(ctx)
    check_covering(ctx)
    for x, sc in ctx.method_schemes.items():
        amb = check_ambiguity(ctx, sc)
        if amb:
            raise TypeCheckError(f"ambiguous method type {show_scheme(sc)}", "ambiguous",
                                 f"method {x}")
    method_env = dict(ctx.method_schemes)
    derivs = {}
    for (x, d), e in ctx.impls.items():
        derivs[(x, d)] = check_scheme(ctx, method_env, e, ctx.instance_schemes[(x, d)],
                                      site=f"instance {d}, method {x}", check_ambiguous=False)
    tp = TypedProgram(p, ctx, method_env, derivs)
    for b in p.defs:
        env = tp.env
        sc = b.scheme if b.scheme is not None else _principal(ctx, env, b.expr, b.name)
        tp.defs.append((b.name, sc, check_scheme(ctx, env, b.expr, sc, site=b.name)))
    if p.main is not None:
        env = tp.env
        b = p.main
        sc = b.scheme if b.scheme is not None else _principal(ctx, env, b.expr, b.name)
        tp.main = check_scheme(ctx, env, b.expr, sc, site=b.name)
        tp.main_scheme = sc
    return tp


def _principal(ctx, env, e, site) -> Scheme:
    try:
        return infer_scheme(ctx, env, e)
    except TypeCheckError as exc:
        if exc.site is None:
            raise TypeCheckError(str(exc), exc.kind, site) from exc
        raise


def check_expr(tp: TypedProgram, e: Expr, sc: Scheme | None = None) -> Derivation:
    """Derivation for an extra expression in the scope of the program's methods and defs."""
    env = tp.env
    if sc is None:
        sc = infer_scheme(tp.ctx, env, e)
    return check_scheme(tp.ctx, env, e, sc)


# -- printing ----------------------------------------------------------------------

def _show_payload(n: Derivation) -> str:
    if n.rule == "ThenI":
        return show_pred(n.payload)
    if n.rule == "ThenE":
        return f"{show_pred(n.payload[0])} by {n.payload[1]}"
    if n.rule == "ForallI":
        return n.payload
    if n.rule == "ForallE":
        return f"{show_type(n.payload[1])}/{n.payload[0]}"
    if n.rule == "Impr":
        return show_subst(n.payload)
    return ""


def show_derivation(node: Derivation, indent: int = 0) -> str:
    lines = []
    _show(node, indent, lines)
    return "\n".join(lines)


def _show(n: Derivation, indent: int, lines: list) -> None:
    ctx = ", ".join(show_pred(p) for p in n.preds)
    pay = _show_payload(n)
    tag = f"{n.rule}[{pay}]" if pay else n.rule
    subject = n.expr if n.rule != "Ctxt" else Var("program")
    text = show_expr(subject)
    if len(text) > 60:
        text = text[:57] + "..."
    turnstile = f"{ctx} |-" if ctx else "|-"
    lines.append(f"{'  ' * indent}{tag}: {turnstile} {text} : {show_scheme(n.scheme)}")
    for p in n.premises:
        _show(p, indent + 1, lines)


__all__ = ["Derivation", "RULES", "infer", "infer_scheme", "check_scheme", "improve",
           "check_ambiguity", "replay", "ReplayError", "TypedProgram", "check_program",
           "check_expr", "subst_derivation", "show_derivation", "free_vars", "Pred"]

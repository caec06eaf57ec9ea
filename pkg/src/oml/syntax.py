"""Abstract syntax: types, predicates, schemes, terms, programs and substitutions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union


# -- types -------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class TVar:
    name: str

    def __str__(self) -> str:
        return show_type(self)


@dataclass(frozen=True, slots=True)
class TCon:
    name: str

    def __str__(self) -> str:
        return show_type(self)


@dataclass(frozen=True, slots=True)
class Arrow:
    dom: "Type"
    cod: "Type"

    def __str__(self) -> str:
        return show_type(self)


Type = Union[TVar, TCon, Arrow]


def arrows(*types: Type) -> Type:
    """``arrows(a, b, c)`` is ``a -> b -> c``."""
    result = types[-1]
    for t in reversed(types[:-1]):
        result = Arrow(t, result)
    return result


def type_height(t: Type) -> int:
    if isinstance(t, Arrow):
        return 1 + max(type_height(t.dom), type_height(t.cod))
    return 0


def is_ground(t: Type) -> bool:
    if isinstance(t, TVar):
        return False
    if isinstance(t, Arrow):
        return is_ground(t.dom) and is_ground(t.cod)
    return True


@dataclass(frozen=True, slots=True)
class Pred:
    cls: str
    args: tuple

    def __str__(self) -> str:
        return show_pred(self)


@dataclass(frozen=True, slots=True)
class QualType:
    context: tuple
    body: Type

    def __str__(self) -> str:
        return show_scheme(Scheme((), self))


@dataclass(frozen=True, slots=True)
class Scheme:
    quantified: tuple
    qual: QualType

    def __post_init__(self):
        if len(set(self.quantified)) != len(self.quantified):
            raise ValueError(f"duplicate quantified variables in {self.quantified}")

    @property
    def context(self) -> tuple:
        return self.qual.context

    @property
    def body(self) -> Type:
        return self.qual.body

    def is_mono(self) -> bool:
        return not self.quantified and not self.qual.context

    def __str__(self) -> str:
        return show_scheme(self)


def mono(t: Type) -> Scheme:
    return Scheme((), QualType((), t))


def scheme(quantified: Iterable[str], context: Iterable[Pred], body: Type) -> Scheme:
    return Scheme(tuple(quantified), QualType(tuple(context), body))


@dataclass(frozen=True, slots=True)
class ConstrainedScheme:
    outer: tuple
    scheme: Scheme

    def __str__(self) -> str:
        preds = ", ".join(show_pred(p) for p in self.outer)
        return f"({preds} | {show_scheme(self.scheme)})"


# -- terms -------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    pos: tuple | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Const:
    """Literal constant: an integer literal, ``true`` or ``false``."""

    value: object
    pos: tuple | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Lam:
    var: str
    body: "Expr"
    pos: tuple | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App:
    fun: "Expr"
    arg: "Expr"
    pos: tuple | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Mu:
    var: str
    body: "Expr"
    pos: tuple | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Let:
    var: str
    bound: "Expr"
    body: "Expr"
    pos: tuple | None = field(default=None, compare=False, repr=False)


Expr = Union[Var, Const, Lam, App, Mu, Let]


def apps(f: Expr, *args: Expr) -> Expr:
    for a in args:
        f = App(f, a)
    return f


def compose_expr(f: Expr, g: Expr) -> Expr:
    """Surface ``f . g``: the composition combinator applied to both sides."""
    comb = Lam("f", Lam("g", Lam("x", App(Var("f"), App(Var("g"), Var("x"))))))
    return App(App(comb, f), g)


# -- declarations --------------------------------------------------------------

@dataclass(frozen=True)
class Axiom:
    name: str
    quantified: tuple
    context: tuple
    head: Pred

    def __str__(self) -> str:
        return f"{self.name} : {_show_axiom(self)}"


def _show_axiom(ax: Axiom) -> str:
    prefix = f"forall {' '.join(ax.quantified)}. " if ax.quantified else ""
    return prefix + _show_context(ax.context) + show_pred(ax.head)


@dataclass(frozen=True)
class FundepDecl:
    cls: str
    determiners: frozenset
    determined: frozenset

    def __str__(self) -> str:
        return f"fundep {self.cls} {_show_ixs(self.determiners)} ~> {_show_ixs(self.determined)}"


def _show_ixs(ixs) -> str:
    return "{" + ", ".join(str(i) for i in sorted(ixs)) + "}"


@dataclass(frozen=True)
class ClassDecl:
    name: str
    params: tuple
    methods: tuple  # of (name, Scheme)
    pos: tuple | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class InstanceDecl:
    axiom: Axiom
    impls: tuple  # of (method name, Expr)
    pos: tuple | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Binding:
    name: str
    scheme: Scheme | None
    expr: Expr | None
    pos: tuple | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    classes: tuple = ()
    instances: tuple = ()
    fundeps: tuple = ()
    externals: tuple = ()       # (name, Scheme) signatures without a binding
    defs: tuple = ()            # Binding, excluding main
    main: Binding | None = None

    @property
    def main_name(self) -> str | None:
        return self.main.name if self.main else None


# -- free variables ------------------------------------------------------------

def ftv(subject) -> set:
    """Free type variables of a type, predicate, qualified type, scheme,
    constrained scheme, axiom, or an environment (mapping or sequence)."""
    out: set = set()
    _ftv(subject, out)
    return out


def _ftv(s, out: set) -> None:
    if isinstance(s, TVar):
        out.add(s.name)
    elif isinstance(s, Arrow):
        _ftv(s.dom, out)
        _ftv(s.cod, out)
    elif isinstance(s, TCon):
        pass
    elif isinstance(s, Pred):
        for a in s.args:
            _ftv(a, out)
    elif isinstance(s, QualType):
        for p in s.context:
            _ftv(p, out)
        _ftv(s.body, out)
    elif isinstance(s, Scheme):
        inner: set = set()
        _ftv(s.qual, inner)
        out.update(inner - set(s.quantified))
    elif isinstance(s, ConstrainedScheme):
        for p in s.outer:
            _ftv(p, out)
        _ftv(s.scheme, out)
    elif isinstance(s, Axiom):
        inner = set()
        for p in s.context:
            _ftv(p, inner)
        _ftv(s.head, inner)
        out.update(inner - set(s.quantified))
    elif isinstance(s, Mapping):
        for v in s.values():
            _ftv(v, out)
    elif isinstance(s, (tuple, list, frozenset, set)):
        for v in s:
            _ftv(v, out)
    else:
        raise TypeError(f"ftv: unsupported {type(s).__name__}")


def ftv_ordered(subject) -> list:
    """Free type variables in order of first occurrence (left to right)."""
    seen: list = []
    _ftv_ordered(subject, seen, frozenset())
    return seen


def _ftv_ordered(s, seen: list, bound: frozenset) -> None:
    if isinstance(s, TVar):
        if s.name not in bound and s.name not in seen:
            seen.append(s.name)
    elif isinstance(s, Arrow):
        _ftv_ordered(s.dom, seen, bound)
        _ftv_ordered(s.cod, seen, bound)
    elif isinstance(s, Pred):
        for a in s.args:
            _ftv_ordered(a, seen, bound)
    elif isinstance(s, QualType):
        for p in s.context:
            _ftv_ordered(p, seen, bound)
        _ftv_ordered(s.body, seen, bound)
    elif isinstance(s, Scheme):
        _ftv_ordered(s.qual, seen, bound | set(s.quantified))
    elif isinstance(s, (tuple, list)):
        for v in s:
            _ftv_ordered(v, seen, bound)


# -- substitutions ---------------------------------------------------------------

Subst = dict  # str -> Type


def apply(S: Mapping, s):
    """Apply substitution ``S`` homomorphically; schemes are renamed to avoid capture."""
    if not S:
        return s
    if isinstance(s, TVar):
        return S.get(s.name, s)
    if isinstance(s, Arrow):
        d = apply(S, s.dom)
        c = apply(S, s.cod)
        if d is s.dom and c is s.cod:
            return s
        return Arrow(d, c)
    if isinstance(s, TCon):
        return s
    if isinstance(s, Pred):
        return Pred(s.cls, tuple(apply(S, a) for a in s.args))
    if isinstance(s, QualType):
        return QualType(tuple(apply(S, p) for p in s.context), apply(S, s.body))
    if isinstance(s, Scheme):
        return _apply_scheme(S, s)
    if isinstance(s, ConstrainedScheme):
        return ConstrainedScheme(tuple(apply(S, p) for p in s.outer), apply(S, s.scheme))
    if isinstance(s, tuple):
        return tuple(apply(S, x) for x in s)
    if isinstance(s, list):
        return [apply(S, x) for x in s]
    if isinstance(s, dict):
        return {k: apply(S, v) for k, v in s.items()}
    raise TypeError(f"apply: unsupported {type(s).__name__}")


def _apply_scheme(S: Mapping, s: Scheme) -> Scheme:
    if not s.quantified:
        return Scheme((), apply(S, s.qual))
    bound = set(s.quantified)
    inner = {k: v for k, v in S.items() if k not in bound}
    if not inner:
        return s
    relevant = ftv(s.qual) - bound
    inner = {k: v for k, v in inner.items() if k in relevant}
    if not inner:
        return s
    range_vars = ftv(list(inner.values()))
    clash = bound & range_vars
    if not clash:
        return Scheme(s.quantified, apply(inner, s.qual))
    avoid = range_vars | ftv(s.qual) | bound | set(inner)
    renaming = {}
    names = []
    for q in s.quantified:
        if q in clash:
            fresh = fresh_name(q, avoid)
            avoid.add(fresh)
            renaming[q] = TVar(fresh)
            names.append(fresh)
        else:
            names.append(q)
    qual = apply(renaming, s.qual)
    return Scheme(tuple(names), apply(inner, qual))


def fresh_name(base: str, avoid) -> str:
    stem = base.rstrip("0123456789'")
    for i in itertools.count(1):
        cand = f"{stem}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError("unreachable")


def compose(S2: Mapping, S1: Mapping) -> dict:
    """``compose(S2, S1)`` applies ``S1`` first, then ``S2``."""
    out = {k: apply(S2, v) for k, v in S1.items()}
    for k, v in S2.items():
        if k not in out:
            out[k] = v
    return {k: v for k, v in out.items() if not (isinstance(v, TVar) and v.name == k)}


def show_subst(S: Mapping) -> str:
    if not S:
        return "identity"
    return ", ".join(f"{k} ↦ {show_type(S[k])}" for k in sorted(S))


# -- pretty printing ------------------------------------------------------------

def show_type(t: Type) -> str:
    if isinstance(t, Arrow):
        return f"{_show_atype(t.dom)} -> {show_type(t.cod)}"
    return t.name


def _show_atype(t: Type) -> str:
    if isinstance(t, Arrow):
        return f"({show_type(t)})"
    return t.name


def show_pred(p: Pred) -> str:
    return " ".join([p.cls] + [_show_atype(a) for a in p.args])


def _show_context(ctx) -> str:
    if not ctx:
        return ""
    if len(ctx) == 1:
        return f"{show_pred(ctx[0])} => "
    return "(" + ", ".join(show_pred(p) for p in ctx) + ") => "


def show_scheme(s: Scheme) -> str:
    prefix = f"forall {' '.join(s.quantified)}. " if s.quantified else ""
    return prefix + _show_context(s.qual.context) + show_type(s.qual.body)


def show_expr(e: Expr) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        return str(e.value)
    if isinstance(e, Lam):
        return f"\\{e.var}. {show_expr(e.body)}"
    if isinstance(e, Mu):
        return f"mu {e.var}. {show_expr(e.body)}"
    if isinstance(e, Let):
        return f"let {e.var} = {show_expr(e.bound)} in {show_expr(e.body)}"
    if isinstance(e, App):
        f = show_expr(e.fun)
        if isinstance(e.fun, (Lam, Mu, Let)):
            f = f"({f})"
        a = show_expr(e.arg)
        if not isinstance(e.arg, (Var, Const)):
            a = f"({a})"
        return f"{f} {a}"
    raise TypeError(e)


def show_program(p: Program) -> str:
    lines = []
    for c in p.classes:
        ms = " ".join(f"{m} : {show_scheme(s)};" for m, s in c.methods)
        params = " ".join(c.params)
        lines.append(f"class {c.name} {params} where {{ {ms} }}")
    for fd in p.fundeps:
        lines.append(str(fd))
    for inst in p.instances:
        ax = inst.axiom
        body = " ".join(f"{m} = {show_expr(e)};" for m, e in inst.impls)
        lines.append(f"instance {ax.name} : {_show_axiom(ax)} where {{ {body} }}")
    for name, s in p.externals:
        lines.append(f"{name} : {show_scheme(s)}")
    for b in list(p.defs) + ([p.main] if p.main else []):
        if b.scheme is not None:
            lines.append(f"{b.name} : {show_scheme(b.scheme)}")
        lines.append(f"{b.name} = {show_expr(b.expr)}")
    return "\n".join(lines) + "\n"


# -- term utilities ---------------------------------------------------------------

def free_vars(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, (Lam, Mu)):
        return free_vars(e.body) - {e.var}
    if isinstance(e, App):
        return free_vars(e.fun) | free_vars(e.arg)
    if isinstance(e, Let):
        return free_vars(e.bound) | (free_vars(e.body) - {e.var})
    raise TypeError(e)


def bound_names(e: Expr) -> set:
    if isinstance(e, (Var, Const)):
        return set()
    if isinstance(e, (Lam, Mu)):
        return {e.var} | bound_names(e.body)
    if isinstance(e, App):
        return bound_names(e.fun) | bound_names(e.arg)
    if isinstance(e, Let):
        return {e.var} | bound_names(e.bound) | bound_names(e.body)
    raise TypeError(e)


def subst_expr(e: Expr, x: str, n: Expr) -> Expr:
    """Capture-avoiding ``[n/x]e``."""
    fv_n = free_vars(n)
    return _subst_expr(e, x, n, fv_n)


def _subst_expr(e: Expr, x: str, n: Expr, fv_n: set) -> Expr:
    if isinstance(e, Var):
        return n if e.name == x else e
    if isinstance(e, Const):
        return e
    if isinstance(e, App):
        return App(_subst_expr(e.fun, x, n, fv_n), _subst_expr(e.arg, x, n, fv_n))
    if isinstance(e, (Lam, Mu)):
        if e.var == x:
            return e
        var, body = e.var, e.body
        if var in fv_n and x in free_vars(body):
            new = fresh_name(var, fv_n | free_vars(body) | {x})
            body = _subst_expr(body, var, Var(new), {new})
            var = new
        return type(e)(var, _subst_expr(body, x, n, fv_n))
    if isinstance(e, Let):
        bound = _subst_expr(e.bound, x, n, fv_n)
        if e.var == x:
            return Let(e.var, bound, e.body)
        var, body = e.var, e.body
        if var in fv_n and x in free_vars(body):
            new = fresh_name(var, fv_n | free_vars(body) | {x})
            body = _subst_expr(body, var, Var(new), {new})
            var = new
        return Let(var, bound, _subst_expr(body, x, n, fv_n))
    raise TypeError(e)


def _debruijn(e: Expr, env: tuple):
    if isinstance(e, Var):
        for i, v in enumerate(env):
            if v == e.name:
                return ("bv", i)
        return ("fv", e.name)
    if isinstance(e, Const):
        return ("k", type(e.value).__name__, e.value)
    if isinstance(e, Lam):
        return ("lam", _debruijn(e.body, (e.var,) + env))
    if isinstance(e, Mu):
        return ("mu", _debruijn(e.body, (e.var,) + env))
    if isinstance(e, App):
        return ("app", _debruijn(e.fun, env), _debruijn(e.arg, env))
    if isinstance(e, Let):
        return ("let", _debruijn(e.bound, env), _debruijn(e.body, (e.var,) + env))
    raise TypeError(e)


def alpha_key(e: Expr):
    """A hashable key equal for exactly the alpha-equivalent terms."""
    return _debruijn(e, ())


def alpha_eq(a: Expr, b: Expr) -> bool:
    return alpha_key(a) == alpha_key(b)


def scheme_alpha_key(s: Scheme):
    renaming = {q: TVar(f"#{i}") for i, q in enumerate(s.quantified)}
    return (len(s.quantified), apply(renaming, s.qual))


def scheme_alpha_eq(a: Scheme, b: Scheme) -> bool:
    return scheme_alpha_key(a) == scheme_alpha_key(b)


def expr_size(e: Expr) -> int:
    if isinstance(e, (Var, Const)):
        return 1
    if isinstance(e, (Lam, Mu)):
        return 1 + expr_size(e.body)
    if isinstance(e, App):
        return 1 + expr_size(e.fun) + expr_size(e.arg)
    if isinstance(e, Let):
        return 1 + expr_size(e.bound) + expr_size(e.body)
    raise TypeError(e)

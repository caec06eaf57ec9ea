"""Interpretation of typing derivations in the finite frame.

``Interpreter.sv(node, S, eta)`` is the meaning of a derivation under a ground
substitution ``S`` and an environment ``eta`` mapping term variables to scheme
values. Polymorphic results are lazy: a ForallI node answers a lookup at a
ground type by matching the type against its body, so only demanded entries
are ever computed. Enumeration (``items``) is limited to the universe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .builtins import denote, literal_value
from .classctx import ClassContext
from .domain import (EMPTY, MISSING, FiniteSchemeValue, Frame, SchemeValue, Singleton)
from .errors import InterpError, UniverseError
from .ground import GroundUniverse, ground_instances, instance_subst
from .syntax import (Arrow, ConstrainedScheme, Const, Scheme, apply, free_vars, ftv,
                     is_ground, show_type)
from .unify import try_match

DEFAULT_FIX_CAP = 1000


class Generalized(SchemeValue):
    """The union over instantiations of a ForallI premise."""

    def __init__(self, interp: "Interpreter", node, S: dict, eta: dict):
        self.interp = interp
        self.node = node
        self.S = S
        self.eta = eta
        bound = set(node.scheme.quantified)
        self.pattern = apply({k: v for k, v in S.items() if k not in bound}, node.scheme.body)

    def lookup(self, t):
        var = self.node.payload
        M = try_match(self.pattern, t)
        if M is None:
            return MISSING
        candidates = [M[var]] if var in M else self.interp.universe.members
        premise = self.node.premises[0]
        for ty in candidates:
            S = dict(self.S)
            S[var] = ty
            v = self.interp.sv(premise, S, self.eta).lookup(t)
            if v is not MISSING:
                return v
        return MISSING

    def items(self, universe) -> list:
        out = []
        for t in universe:
            v = self.lookup(t)
            if v is not MISSING:
                out.append((t, v))
        return out


def _mono_items(value: SchemeValue, t) -> list:
    v = value.lookup(t)
    return [] if v is MISSING else [(t, v)]


class Restricted(SchemeValue):
    """A scheme value restricted to the ground instances of ``scheme``."""

    def __init__(self, interp: "Interpreter", inner: SchemeValue, scheme: Scheme):
        self.interp = interp
        self.inner = inner
        self.scheme = scheme

    def lookup(self, t):
        if not self.interp.member(self.scheme, t):
            return MISSING
        return self.inner.lookup(t)

    def items(self, universe) -> list:
        if not self.scheme.quantified:
            return _mono_items(self, self.scheme.body)
        return [(t, v) for t, v in self.inner.items(universe) if self.interp.member(self.scheme, t)]


class BuiltinValue(SchemeValue):
    def __init__(self, interp: "Interpreter", name: str, scheme: Scheme):
        self.interp = interp
        self.name = name
        self.scheme = scheme

    def lookup(self, t):
        if not self.interp.member(self.scheme, t):
            return MISSING
        return self.interp.builtin(self.name, t)

    def items(self, universe) -> list:
        if not self.scheme.quantified:
            return _mono_items(self, self.scheme.body)
        return [(t, self.lookup(t)) for t in universe if self.interp.member(self.scheme, t)]


class _Demand(Exception):
    """A method was demanded at an instance its table does not yet cover."""

    def __init__(self, name: str, t):
        super().__init__(name, t)
        self.name = name
        self.t = t


class MethodValue(FiniteSchemeValue):
    """One component of the method tuple. A lookup at a missing instance of the
    method's scheme signals a demand so the caller can widen the table."""

    def __init__(self, interp: "Interpreter", name: str, entries: dict):
        super().__init__(entries)
        self.interp = interp
        self.name = name

    def lookup(self, t):
        v = self.entries.get(t, MISSING)
        if v is MISSING and self.interp.member(self.interp.ctx.method_schemes[self.name], t):
            raise _Demand(self.name, t)
        return v


@dataclass(eq=False)
class Interpreter:
    ctx: ClassContext
    universe: GroundUniverse
    frame: Frame = field(default_factory=Frame)
    fix_cap: int = DEFAULT_FIX_CAP
    memo: dict = field(default_factory=dict, repr=False)
    _info: dict = field(default_factory=dict, repr=False)
    _member: dict = field(default_factory=dict, repr=False)
    _builtins: dict = field(default_factory=dict, repr=False)
    demand_cap: int = 10_000
    _extra: dict = field(default_factory=dict, repr=False)
    _methods: dict | None = field(default=None, repr=False)

    # -- helpers --
    def member(self, sc: Scheme, t) -> bool:
        key = (sc, t)
        hit = self._member.get(key)
        if hit is None:
            hit = is_ground(t) and instance_subst(self.ctx, sc, t, self.universe) is not None
            self._member[key] = hit
        return hit

    def builtin(self, name: str, t):
        key = (name, t)
        v = self._builtins.get(key)
        if v is None:
            v = self._builtins[key] = denote(self.frame, name, t)
        return v

    def info(self, node):
        """(node, free type variables of the subtree, free term variables)."""
        got = self._info.get(id(node))
        if got is None:
            tv = set(ftv(list(node.preds))) | ftv(node.scheme)
            if node.rule == "ForallE":
                tv |= ftv(node.payload[1])
            elif node.rule in ("ThenI",):
                tv |= ftv(node.payload)
            elif node.rule == "Impr":
                tv |= set(node.payload)
            for p in node.premises:
                tv |= set(self.info(p)[1])
            if node.rule == "ForallI":
                tv.discard(node.payload)
            got = (node, tuple(sorted(tv)), tuple(sorted(free_vars(node.expr))))
            self._info[id(node)] = got
        return got

    def _key(self, tag, node, S, eta):
        _, tv, fv = self.info(node)
        try:
            types = tuple(S[v] for v in tv)
        except KeyError as exc:
            raise InterpError(f"substitution does not ground {exc.args[0]} at "
                              f"{node.rule}", "open-substitution") from exc
        vals = tuple(eta[x].memo_key() if x in eta else None for x in fv)
        return (tag, id(node), types, vals)

    # -- scheme-valued meaning --
    def sv(self, node, S: dict, eta: dict) -> SchemeValue:
        key = self._key("sv", node, S, eta)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        out = self._sv(node, S, eta)
        self.memo[key] = out
        return out

    def _sv(self, node, S, eta) -> SchemeValue:
        r = node.rule
        if r == "Var":
            name = node.expr.name
            if name not in eta:
                raise InterpError(f"no value for {name}", "unbound")
            return eta[name]
        if r == "Const":
            if isinstance(node.expr, Const):
                t = node.scheme.body
                return Singleton(t, literal_value(self.frame, node.expr.value))
            return BuiltinValue(self, node.payload, node.scheme)
        if r == "ThenI":
            if self.ctx.entails_ground(apply(S, node.payload)):
                return self.sv(node.premises[0], S, eta)
            return EMPTY
        if r == "ThenE":
            return self.sv(node.premises[0], S, eta)
        if r == "ForallI":
            return Generalized(self, node, S, eta)
        if r == "ForallE":
            inner = self.sv(node.premises[0], S, eta)
            return Restricted(self, inner, apply(S, node.scheme))
        if r == "Impr":
            S2 = self._unimprove(node.payload, S)
            if S2 is None:
                return EMPTY
            return self.sv(node.premises[0], S2, eta)
        if r in ("LamI", "AppE", "Mu", "Let"):
            t = apply(S, node.scheme.body)
            return Singleton(t, self.val(node, S, eta))
        raise InterpError(f"cannot interpret rule {r}")

    @staticmethod
    def _unimprove(U: dict, S: dict):
        """``S2`` with ``S2 . U = S`` on the variables of ``S``, or None."""
        S2 = {k: v for k, v in S.items() if k not in U}
        for v, ty in U.items():
            if v not in S:
                continue
            M = try_match(apply(S2, ty), S[v])
            if M is None:
                return None
            S2.update(M)
        return S2

    # -- monotype meaning --
    def val(self, node, S: dict, eta: dict):
        key = self._key("val", node, S, eta)
        hit = self.memo.get(key, MISSING)
        if hit is not MISSING:
            return hit
        out = self._val(node, S, eta)
        self.memo[key] = out
        return out

    def _val(self, node, S, eta):
        r = node.rule
        frame = self.frame
        if r == "LamI":
            T = apply(S, node.scheme.body)
            body = node.premises[0]
            x = node.expr.var

            def cell(v, T=T):
                inner = dict(eta)
                inner[x] = Singleton(T.dom, v)
                return self.val(body, S, inner)
            return frame.fun(T, cell)
        if r == "AppE":
            f, a = node.premises
            ft = apply(S, f.scheme.body)
            return frame.app(self.val(f, S, eta), self.val(a, S, eta), ft)
        if r == "Mu":
            T = apply(S, node.scheme.body)
            body = node.premises[0]
            x = node.expr.var
            cur = frame.bottom(T)
            for _ in range(self.fix_cap):
                inner = dict(eta)
                inner[x] = Singleton(T, cur)
                nxt = frame.force(self.val(body, S, inner))
                if nxt == cur:
                    return cur
                cur = nxt
            raise InterpError(f"fixpoint iteration cap exceeded at {show_type(T)}", "fix-cap")
        if r == "Let":
            b, body = node.premises
            inner = dict(eta)
            inner[node.expr.var] = self.sv(b, S, eta)
            return self.val(body, S, inner)
        # Var, Const, ThenE/ForallE chains, Impr: look the type up in the scheme value
        t = apply(S, node.scheme.body)
        v = self.sv_chain(node, S, eta).lookup(t)
        if v is MISSING:
            raise InterpError(f"{r} node has no value at {show_type(t)}", "missing-instance")
        return v

    def sv_chain(self, node, S, eta) -> SchemeValue:
        # ThenE and ForallE only restrict; a monotype lookup can go straight to the source
        while node.rule in ("ThenE", "ForallE"):
            node = node.premises[0]
        return self._sv(node, S, eta) if node.rule in ("Var", "Const") else self.sv(node, S, eta)

    # -- entry point with checks --
    def interp(self, node, S: dict | None = None, eta: dict | None = None,
               check_env: bool = True) -> SchemeValue:
        S = dict(S or {})
        eta = dict(eta or {})
        for p in node.preds:
            q = apply(S, p)
            if not is_ground_pred(q):
                raise InterpError(f"substitution leaves {q} open", "open-substitution")
            if not self.ctx.entails_ground(q):
                return EMPTY
        if check_env:
            self.check_env(node, S, eta)
        return self.sv(node, S, eta)

    def check_env(self, node, S: dict, eta: dict) -> None:
        for x in sorted(free_vars(node.expr)):
            if x not in node.env:
                continue
            if x not in eta:
                raise InterpError(f"environment has no value for {x}", "env-mismatch")
            sc = apply(S, node.env[x])
            want = ground_instances(self.ctx, sc, self.universe)
            got = eta[x].items(self.universe)
            if [k for k, _ in got] != want and sorted(map(str, (k for k, _ in got))) != sorted(map(str, want)):
                raise InterpError(f"environment value for {x} has the wrong instances",
                                  "env-mismatch")
            for k, v in got:
                if not self.frame.well_formed(v, k):
                    raise InterpError(f"environment value for {x} is ill-formed at "
                                      f"{show_type(k)}", "env-mismatch")

    # -- methods --
    def method_step(self, tp, b: dict) -> dict:
        """One application of the method functional to the tuple ``b``."""
        eta = {x: MethodValue(self, x, entries) for x, entries in b.items()}
        out = {}
        for x, entries in b.items():
            new = {}
            for t in entries:
                found = MISSING
                for d in self.ctx.instances_of(x):
                    v = self.sv(tp.method_derivs[(x, d)], {}, eta).lookup(t)
                    if v is MISSING:
                        continue
                    if found is not MISSING:
                        raise InterpError(f"instances overlap for {x} at {show_type(t)}",
                                          "overlap")
                    found = v
                if found is MISSING:
                    raise InterpError(f"no instance defines {x} at {show_type(t)}",
                                      "missing-instance")
                new[t] = self.frame.force(found)
            out[x] = new
        return out

    def method_bottom(self) -> dict:
        out = {}
        for x, sc in self.ctx.method_schemes.items():
            keys = ground_instances(self.ctx, sc, self.universe)
            keys += sorted(self._extra.get(x, ()), key=str)
            out[x] = {t: self.frame.bottom(t) for t in keys}
        return out

    def _iterate(self, tp, trace: list | None = None) -> dict:
        b = self.method_bottom()
        for _ in range(self.fix_cap):
            nxt = self.method_step(tp, b)
            self.memo.clear()
            if trace is not None:
                trace.append(nxt)
            if nxt == b:
                return b
            b = nxt
        raise InterpError("method fixpoint iteration cap exceeded", "fix-cap")

    def _widening(self, tp, body):
        """Run ``body(methods)``; on a demand outside the tables, add the instance
        and recompute the fixpoint from bottom. A failed run leaves the tables as
        they were."""
        saved = ({x: set(ts) for x, ts in self._extra.items()}, self._methods)
        try:
            while True:
                if self._methods is None:
                    try:
                        self._methods = self._iterate(tp)
                    except _Demand as d:
                        self._widen(d)
                        continue
                try:
                    return body(self._methods)
                except _Demand as d:
                    self._widen(d)
        except Exception:
            self._extra, self._methods = saved
            self.memo.clear()
            raise

    def _widen(self, d: _Demand) -> None:
        self._extra.setdefault(d.name, set()).add(d.t)
        self._methods = None
        self.memo.clear()
        if sum(len(v) for v in self._extra.values()) > self.demand_cap:
            raise UniverseError(f"method {d.name} demanded at too many instances outside "
                                f"the universe (last {show_type(d.t)})")

    def method_fixpoint(self, tp) -> dict:
        """The least method tuple, each table keyed by the method's instances in U."""
        full = self._widening(tp, lambda b: b)
        return {x: {t: v for t, v in entries.items() if t in self.universe}
                for x, entries in full.items()}

    def program_env(self, tp, methods: dict) -> dict:
        eta = {x: MethodValue(self, x, entries) for x, entries in methods.items()}
        for name, _, d in tp.defs:
            eta[name] = self.sv(d, {}, eta)
        return eta

    def evaluate(self, tp, node, S: dict | None = None, eta: dict | None = None
                 ) -> FiniteSchemeValue:
        """Meaning of ``node`` under the program's methods and definitions, forced
        at every instance in U."""
        def body(methods):
            env = self.program_env(tp, methods)
            env.update(eta or {})
            v = self.interp(node, S, env, check_env=False)
            return FiniteSchemeValue({k: self.frame.force(x) for k, x in v.items(self.universe)})
        return self._widening(tp, body)

    def evaluate_at(self, tp, node, t, S: dict | None = None, eta: dict | None = None):
        """The forced value of ``node`` at the single ground type ``t`` (which may lie
        outside U); MISSING when ``t`` is not an instance."""
        def body(methods):
            env = self.program_env(tp, methods)
            env.update(eta or {})
            v = self.interp(node, S, env, check_env=False).lookup(t)
            return v if v is MISSING else self.frame.force(v)
        return self._widening(tp, body)

    def interp_program(self, tp, S: dict | None = None, eta: dict | None = None
                       ) -> FiniteSchemeValue:
        if tp.main is None:
            raise InterpError("program has no main", "no-main")
        return self.evaluate(tp, tp.main, S, eta)


def is_ground_pred(p) -> bool:
    return all(is_ground(a) for a in p.args)


def interp_deriv(ctx, universe, node, S=None, eta=None, frame: Frame | None = None):
    return Interpreter(ctx, universe, frame or Frame()).interp(node, S, eta)


def method_fixpoint(tp, universe, frame: Frame | None = None, fix_cap: int = DEFAULT_FIX_CAP):
    return Interpreter(tp.ctx, universe, frame or Frame(), fix_cap).method_fixpoint(tp)


def interp_program(tp, universe, S=None, eta=None, frame: Frame | None = None,
                   fix_cap: int = DEFAULT_FIX_CAP):
    return Interpreter(tp.ctx, universe, frame or Frame(), fix_cap).interp_program(tp, S, eta)


def expected_keys(ctx, node, S: dict, universe) -> list:
    """``gr(S P | S sigma)`` over the universe, the key set a meaning must have."""
    cs = ConstrainedScheme(tuple(apply(S, list(node.preds))), apply(S, node.scheme))
    return ground_instances(ctx, cs, universe)


__all__ = ["Interpreter", "Generalized", "Restricted", "BuiltinValue", "MethodValue",
           "interp_deriv", "method_fixpoint", "interp_program", "expected_keys", "Arrow"]

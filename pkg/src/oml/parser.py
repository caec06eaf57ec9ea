"""Tokenizer and recursive-descent parser for the surface language.

Top-level declarations start in column 1; continuation lines must be
indented. Inside ``{ ... }`` blocks entries are separated by ``;``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError
from .syntax import (
    App, Arrow, Axiom, Binding, ClassDecl, Const, FundepDecl, InstanceDecl, Lam,
    Let, Mu, Pred, Program, QualType, Scheme, TCon, TVar, Var, compose_expr,
    ftv_ordered,
)

KEYWORDS = {"class", "instance", "where", "forall", "mu", "let", "in", "fundep", "true", "false"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>->|=>|~>|[\\.(){},;:=])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str   # name | int | sym | kw | eof
    value: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        val = m.group()
        col = i - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            pass
        elif kind == "name":
            tokens.append(Token("kw" if val in KEYWORDS else "name", val, line, col))
        else:
            tokens.append(Token(kind, val, line, col))
        i = m.end()
    tokens.append(Token("eof", "", line, len(text) - line_start + 1))
    return tokens


class Parser:
    def __init__(self, text: str, toplevel: bool = False):
        self.toks = tokenize(text)
        self.i = 0
        # when set, a token in column 1 on a later line ends the current declaration
        self.decl_line: int | None = None
        self.toplevel = toplevel

    # -- token helpers --
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at_boundary(self) -> bool:
        t = self.tok
        if t.kind == "eof":
            return True
        return self.decl_line is not None and t.col == 1 and t.line > self.decl_line

    def peek(self, value: str, kind: str | None = None) -> bool:
        if self.at_boundary():
            return False
        t = self.tok
        return t.value == value and (kind is None or t.kind == kind)

    def accept(self, value: str) -> bool:
        if self.peek(value) and self.tok.kind in ("sym", "kw"):
            self.i += 1
            return True
        return False

    def expect(self, value: str) -> Token:
        if not (self.peek(value) and self.tok.kind in ("sym", "kw")):
            self.error(f"expected {value!r}")
        t = self.tok
        self.i += 1
        return t

    def error(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.value)
        raise ParseError(f"{msg}, found {found}", t.line, t.col)

    def name(self) -> Token:
        if self.at_boundary() or self.tok.kind != "name":
            self.error("expected a name")
        t = self.tok
        self.i += 1
        return t

    def is_name(self) -> bool:
        return not self.at_boundary() and self.tok.kind == "name"

    def done(self):
        if self.tok.kind != "eof":
            self.error("unexpected trailing input")

    # -- types --
    def type_(self):
        dom = self.atype()
        if self.accept("->"):
            return Arrow(dom, self.type_())
        return dom

    def atype(self):
        if self.accept("("):
            t = self.type_()
            self.expect(")")
            return t
        tok = self.name()
        return TCon(tok.value) if tok.value[0].isupper() else TVar(tok.value)

    def starts_atype(self) -> bool:
        return self.is_name() or self.peek("(", "sym")

    def pred(self) -> Pred:
        tok = self.name()
        if not tok.value[0].isupper():
            raise ParseError(f"class names are capitalised: {tok.value!r}", tok.line, tok.col)
        args = []
        while self.starts_atype():
            args.append(self.atype())
        if not args:
            raise ParseError(f"predicate {tok.value} needs at least one argument", tok.line, tok.col)
        return Pred(tok.value, tuple(args))

    def preds(self) -> tuple:
        if self.accept("("):
            ps = [self.pred()]
            while self.accept(","):
                ps.append(self.pred())
            self.expect(")")
            return tuple(ps)
        return (self.pred(),)

    def maybe_context(self) -> tuple:
        save = self.i
        try:
            ps = self.preds()
            if self.accept("=>"):
                return ps
        except ParseError:
            pass
        self.i = save
        return ()

    def quantifier(self) -> tuple | None:
        if not self.accept("forall"):
            return None
        names = []
        while self.is_name():
            names.append(self.name().value)
        self.expect(".")
        return tuple(names)

    def scheme(self, exclude=()) -> Scheme:
        """Parse a scheme; without ``forall`` every free variable not in
        ``exclude`` is quantified in order of first occurrence."""
        start = self.tok
        quant = self.quantifier()
        ctx = self.maybe_context()
        body = self.type_()
        qual = QualType(ctx, body)
        if quant is None:
            quant = tuple(v for v in ftv_ordered(qual) if v not in set(exclude))
        if len(set(quant)) != len(quant):
            raise ParseError("duplicate quantified variable", start.line, start.col)
        return Scheme(quant, qual)

    # -- expressions --
    def expr(self):
        t = self.tok
        pos = (t.line, t.col)
        if self.accept("\\"):
            names = [self.name().value]
            while self.is_name():
                names.append(self.name().value)
            self.expect(".")
            body = self.expr()
            for n in reversed(names):
                body = Lam(n, body, pos)
            return body
        if self.accept("mu"):
            n = self.name().value
            self.expect(".")
            return Mu(n, self.expr(), pos)
        if self.accept("let"):
            n = self.name().value
            self.expect("=")
            bound = self.expr()
            self.expect("in")
            return Let(n, bound, self.expr(), pos)
        left = self.appexpr()
        if self.accept("."):
            return compose_expr(left, self.expr())
        return left

    def starts_aexpr(self) -> bool:
        if self.at_boundary():
            return False
        t = self.tok
        return t.kind in ("name", "int") or t.value in ("true", "false") or (t.kind == "sym" and t.value == "(")

    def appexpr(self):
        if not self.starts_aexpr():
            self.error("expected an expression")
        e = self.aexpr()
        while self.starts_aexpr():
            a = self.aexpr()
            e = App(e, a, e.pos)
        return e

    def aexpr(self):
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "name":
            self.i += 1
            return Var(t.value, pos)
        if t.kind == "int":
            self.i += 1
            return Const(int(t.value), pos)
        if self.accept("true"):
            return Const(True, pos)
        if self.accept("false"):
            return Const(False, pos)
        self.expect("(")
        e = self.expr()
        self.expect(")")
        return e

    # -- declarations --
    def indexset(self) -> frozenset:
        if self.tok.kind == "int" and not self.at_boundary():
            v = int(self.tok.value)
            self.i += 1
            return frozenset({v})
        self.expect("{")
        out = set()
        if not self.peek("}"):
            while True:
                if self.tok.kind != "int":
                    self.error("expected a parameter index")
                out.add(int(self.tok.value))
                self.i += 1
                if not self.accept(","):
                    break
        self.expect("}")
        return frozenset(out)

    def program(self) -> Program:
        classes, instances, fundeps = [], [], []
        sigs, binds, order = {}, {}, []
        while self.tok.kind != "eof":
            t = self.tok
            if t.col != 1:
                raise ParseError("declarations must start in column 1", t.line, t.col)
            self.decl_line = None
            start = self.tok
            self.decl_line = start.line
            pos = (start.line, start.col)
            if self.accept("class"):
                classes.append(self.class_decl(pos))
            elif self.accept("instance"):
                instances.append(self.instance_decl(pos))
            elif self.accept("fundep"):
                cls = self.name().value
                xs = self.indexset()
                self.expect("~>")
                ys = self.indexset()
                fundeps.append(FundepDecl(cls, xs, ys))
            else:
                tok = self.name()
                if self.accept(":"):
                    if tok.value in sigs:
                        raise ParseError(f"duplicate signature for {tok.value!r}", tok.line, tok.col, "duplicate")
                    sigs[tok.value] = (self.scheme(), pos)
                elif self.accept("="):
                    if tok.value in binds:
                        raise ParseError(f"duplicate binding for {tok.value!r}", tok.line, tok.col, "duplicate")
                    binds[tok.value] = (self.expr(), pos)
                else:
                    self.error("expected ':' or '=' after a top-level name")
                if tok.value not in order:
                    order.append(tok.value)
            self.decl_line = start.line
            while self.accept(";"):
                pass
            if not self.at_boundary():
                self.error("unexpected token after declaration")
        return self._assemble(classes, instances, fundeps, sigs, binds, order)

    def class_decl(self, pos) -> ClassDecl:
        name = self.name().value
        params = []
        while self.is_name():
            params.append(self.name().value)
        self.expect("where")
        self.expect("{")
        methods = []
        saved, self.decl_line = self.decl_line, None
        while not self.peek("}"):
            m = self.name()
            self.expect(":")
            methods.append((m.value, self.scheme(exclude=params)))
            if not self.accept(";"):
                break
        self.expect("}")
        self.decl_line = saved
        bad = [q for _, s in methods for q in s.quantified if q in params]
        if bad:
            raise ParseError(f"method signature rebinds class parameter {bad[0]!r}", pos[0], pos[1])
        return ClassDecl(name, tuple(params), tuple(methods), pos)

    def instance_decl(self, pos) -> InstanceDecl:
        name = self.name().value
        self.expect(":")
        quant = self.quantifier()
        ctx = self.maybe_context()
        head = self.pred()
        if quant is None:
            quant = tuple(ftv_ordered((head,) + ctx))
        missing = [v for v in ftv_ordered((head,) + ctx) if v not in quant]
        if missing:
            raise ParseError(f"instance {name}: unquantified variable {missing[0]!r}", pos[0], pos[1])
        self.expect("where")
        self.expect("{")
        impls = []
        saved, self.decl_line = self.decl_line, None
        while not self.peek("}"):
            m = self.name()
            self.expect("=")
            impls.append((m.value, self.expr()))
            if not self.accept(";"):
                break
        self.expect("}")
        self.decl_line = saved
        seen = set()
        for m, _ in impls:
            if m in seen:
                raise ParseError(f"instance {name}: duplicate method {m!r}", pos[0], pos[1], "duplicate")
            seen.add(m)
        return InstanceDecl(Axiom(name, quant, ctx, head), tuple(impls), pos)

    def _assemble(self, classes, instances, fundeps, sigs, binds, order) -> Program:
        _no_dups([c.name for c in classes], "class", classes)
        _no_dups([i.axiom.name for i in instances], "instance", instances)
        methods = [m for c in classes for m, _ in c.methods]
        _no_dups(methods, "method", classes)
        for n in order:
            if n in methods:
                p = sigs.get(n, binds.get(n))[1]
                raise ParseError(f"top-level declaration shadows method {n!r}", p[0], p[1], "duplicate")
        externals, defs, main = [], [], None
        for n in order:
            if n in binds:
                expr, pos = binds[n]
                sch = sigs[n][0] if n in sigs else None
                b = Binding(n, sch, expr, pos)
                if n == "main":
                    main = b
                else:
                    defs.append(b)
            else:
                externals.append((n, sigs[n][0]))
        return Program(tuple(classes), tuple(instances), tuple(fundeps),
                       tuple(externals), tuple(defs), main)


def _no_dups(names, what, decls):
    seen = set()
    for n, d in zip(names, list(decls) + [None] * len(names)):
        if n in seen:
            pos = getattr(d, "pos", None) or (0, 0)
            raise ParseError(f"duplicate {what} name {n!r}", pos[0], pos[1], "duplicate")
        seen.add(n)


def parse_program(text: str) -> Program:
    return Parser(text, toplevel=True).program()


def _parse_with(text: str, rule):
    p = Parser(text)
    out = rule(p)
    p.done()
    return out


def parse_expr(text: str):
    return _parse_with(text, Parser.expr)


def parse_type(text: str):
    return _parse_with(text, Parser.type_)


def parse_scheme(text: str) -> Scheme:
    return _parse_with(text, Parser.scheme)


def parse_pred(text: str) -> Pred:
    return _parse_with(text, Parser.pred)


def parse_preds(text: str) -> tuple:
    """Comma-separated predicates, optionally parenthesised; empty text is ``()``."""
    if not text.strip():
        return ()

    def rule(p: Parser):
        if p.peek("(", "sym"):
            save = p.i
            try:
                ps = p.preds()
                if p.tok.kind == "eof":
                    return ps
            except ParseError:
                pass
            p.i = save
        ps = [p.pred()]
        while p.accept(","):
            ps.append(p.pred())
        return tuple(ps)

    return _parse_with(text, rule)

"""Command-line front end: ``oml <command> FILE [options]``.

Exit status is 0 when a program is accepted (or two terms are equal), 1 for a
rejection, an inequality or any diagnostic, and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from .domain import MISSING, Frame
from .entail import DEFAULT_DEPTH, entail
from .equality import normalize, oracle_equiv, show_path
from .errors import OmlError
from .ground import ground_instances, instance_subst, universe
from .interp import DEFAULT_FIX_CAP, Interpreter
from .parser import parse_expr, parse_pred, parse_preds, parse_program, parse_scheme, parse_type
from .syntax import show_expr, show_pred, show_scheme, show_subst, show_type
from .typecheck import check_expr, check_program, improve, show_derivation


@dataclass(frozen=True)
class RunConfig:
    base: tuple = ("Int", "Bool")
    depth: int = 2
    int_size: int = 2
    entail_depth: int = DEFAULT_DEPTH
    fix_cap: int = DEFAULT_FIX_CAP
    carrier_cap: int = 10**6
    structured: bool = False

    def universe(self):
        return universe(self.base, self.depth)

    def frame(self) -> Frame:
        return Frame(self.int_size, self.carrier_cap)


class Report:
    """Collects output as text lines or key=value records."""

    def __init__(self, structured: bool):
        self.structured = structured
        self.lines = []

    def say(self, text: str, **fields) -> None:
        if self.structured:
            self.lines.append(" ".join(f"{k}={_quote(v)}" for k, v in fields.items()))
        else:
            self.lines.append(text)

    def emit(self, out) -> None:
        for line in self.lines:
            print(line, file=out)


def _quote(v) -> str:
    s = str(v)
    if not s or any(c in s for c in ' "\\='):
        return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return s


def _positive(s: str) -> int:
    n = int(s)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _natural(s: str) -> int:
    n = int(s)
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def _base(s: str) -> tuple:
    names = tuple(x.strip() for x in s.split(",") if x.strip())
    if not names:
        raise argparse.ArgumentTypeError("needs at least one type constant")
    return names


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file")
    common.add_argument("--base", type=_base, default=RunConfig.base)
    common.add_argument("--depth", type=_natural, default=RunConfig.depth)
    common.add_argument("--int-size", type=_positive, default=RunConfig.int_size)
    common.add_argument("--entail-depth", type=_positive, default=RunConfig.entail_depth)
    common.add_argument("--fix-cap", type=_positive, default=RunConfig.fix_cap)
    common.add_argument("--carrier-cap", type=_positive, default=RunConfig.carrier_cap)
    common.add_argument("--structured", action="store_true",
                        help="print key=value records instead of prose")

    ap = argparse.ArgumentParser(prog="oml", description="Type classes, qualified types and "
                                 "their specialization semantics.")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", parents=[common], help="type-check a program")
    p.add_argument("--trace", action="store_true", help="print main's derivation")
    p = sub.add_parser("entail", parents=[common], help="resolve a predicate")
    p.add_argument("--goal", required=True)
    p.add_argument("--assume", default="")
    p = sub.add_parser("gr", parents=[common], help="ground instances of a scheme")
    p.add_argument("--scheme", required=True)
    p = sub.add_parser("eval", parents=[common], help="evaluate main")
    p.add_argument("--at")
    p = sub.add_parser("equiv", parents=[common], help="compare two terms semantically")
    p.add_argument("--lhs", required=True)
    p.add_argument("--rhs", required=True)
    p.add_argument("--scheme", required=True)
    p = sub.add_parser("improve", parents=[common], help="improving substitution of a context")
    p.add_argument("--preds", required=True)
    p = sub.add_parser("normalize", parents=[common], help="rewrite a term to normal form")
    p.add_argument("--lhs", required=True)
    p.add_argument("--scheme", required=True)
    p.add_argument("--trace", action="store_true", help="print each rewrite step")
    return ap


def _config(args) -> RunConfig:
    return RunConfig(args.base, args.depth, args.int_size, args.entail_depth, args.fix_cap,
                     args.carrier_cap, args.structured)


def _load(args, cfg: RunConfig):
    with open(args.file, encoding="utf-8") as fh:
        return parse_program(fh.read())


def cmd_check(args, cfg, rep: Report) -> int:
    tp = check_program(_load(args, cfg), cfg.entail_depth)
    for (x, d) in tp.method_derivs:
        rep.say(f"ok instance {d} method {x} : {show_scheme(tp.ctx.instance_schemes[(x, d)])}",
                verdict="ok", instance=d, method=x,
                scheme=show_scheme(tp.ctx.instance_schemes[(x, d)]))
    for name, sc, _ in tp.defs:
        rep.say(f"ok {name} : {show_scheme(sc)}", verdict="ok", name=name, scheme=show_scheme(sc))
    if tp.main is not None:
        rep.say(f"ok main : {show_scheme(tp.main_scheme)}", verdict="ok", name="main",
                scheme=show_scheme(tp.main_scheme))
        if args.trace:
            for line in show_derivation(tp.main).splitlines():
                rep.say(line, derivation=line)
    for w in tp.ctx.warnings:
        rep.say(f"warning: {w}", warning=w)
    rep.say("accepted", result="accepted")
    return 0


def cmd_entail(args, cfg, rep: Report) -> int:
    tp = check_program(_load(args, cfg), cfg.entail_depth)
    goal = parse_pred(args.goal)
    assume = parse_preds(args.assume) if args.assume.strip() else ()
    w = entail(tp.ctx.axioms, tuple(assume), goal, cfg.entail_depth)
    rep.say(str(w), goal=show_pred(goal), witness=w)
    return 0


def cmd_gr(args, cfg, rep: Report) -> int:
    tp = check_program(_load(args, cfg), cfg.entail_depth)
    sc = parse_scheme(args.scheme)
    found = ground_instances(tp.ctx, sc, cfg.universe())
    for t in found:
        rep.say(show_type(t), instance=show_type(t))
    rep.say(f"{len(found)} instance(s)", count=len(found))
    return 0


def cmd_eval(args, cfg, rep: Report) -> int:
    tp = check_program(_load(args, cfg), cfg.entail_depth)
    if tp.main is None:
        raise OmlError("program has no main", "no-main")
    U = cfg.universe()
    it = Interpreter(tp.ctx, U, cfg.frame(), cfg.fix_cap)
    if args.at:
        t = parse_type(args.at)
        if instance_subst(tp.ctx, tp.main_scheme, t, U) is None:
            raise OmlError(f"{show_type(t)} is not a ground instance of main's type "
                           f"{show_scheme(tp.main_scheme)}", "not-an-instance")
        v = it.evaluate_at(tp, tp.main, t)
        if v is MISSING:
            raise OmlError(f"main has no value at {show_type(t)}", "missing-instance")
        shown = it.frame.show(v, t)
        rep.say(shown, type=show_type(t), value=shown)
        return 0
    vals = it.interp_program(tp)
    for t, v in vals.items(U):
        shown = it.frame.show(v, t)
        rep.say(f"{show_type(t)} : {shown}", type=show_type(t), value=shown)
    return 0


def cmd_equiv(args, cfg, rep: Report) -> int:
    tp = check_program(_load(args, cfg), cfg.entail_depth)
    lhs, rhs = parse_expr(args.lhs), parse_expr(args.rhs)
    sc = parse_scheme(args.scheme)
    it = Interpreter(tp.ctx, cfg.universe(), cfg.frame(), cfg.fix_cap)
    res = oracle_equiv(tp, lhs, rhs, sc, it.universe, interp=it)
    if res:
        rep.say(str(res), result="equal", instances=res.keys)
        return 0
    rep.say(str(res), result="unequal", witness=show_type(res.witness), lhs=res.shown[0],
            rhs=res.shown[1])
    return 1


def cmd_improve(args, cfg, rep: Report) -> int:
    tp = check_program(_load(args, cfg), cfg.entail_depth)
    P = parse_preds(args.preds)
    U = improve(tp.ctx, P)
    rep.say(show_subst(U), substitution=show_subst(U))
    return 0


def cmd_normalize(args, cfg, rep: Report) -> int:
    tp = check_program(_load(args, cfg), cfg.entail_depth)
    M = parse_expr(args.lhs)
    sc = parse_scheme(args.scheme)
    check_expr(tp, M, sc)
    res = normalize(tp, M, sc)
    if args.trace:
        for s in res.steps:
            rep.say(str(s), rule=s.rule, path=show_path(s.path), step=s)
    rep.say(show_expr(res.term) + ("  (fuel exhausted)" if res.exhausted else ""),
            term=show_expr(res.term), scheme=show_scheme(res.scheme),
            exhausted=str(res.exhausted).lower())
    return 0


COMMANDS = {"check": cmd_check, "entail": cmd_entail, "gr": cmd_gr, "eval": cmd_eval,
            "equiv": cmd_equiv, "improve": cmd_improve, "normalize": cmd_normalize}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    cfg = _config(args)
    rep = Report(cfg.structured)
    try:
        code = COMMANDS[args.command](args, cfg, rep)
    except OSError as exc:
        print(f"oml: cannot read {args.file}: {exc.strerror}", file=err)
        return 2
    except OmlError as exc:
        rep.emit(out)
        if cfg.structured:
            print(f"result=rejected kind={exc.kind} message={_quote(exc)}", file=out)
        else:
            msg = str(exc)
            print(f"rejected: {msg}" if exc.kind in msg else f"rejected: {exc.kind}: {msg}",
                  file=out)
        return 1
    rep.emit(out)
    return code


if __name__ == "__main__":
    sys.exit(main())

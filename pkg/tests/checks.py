"""Property checks shared by the module tests and the acceptance suite."""

import itertools

from oml.domain import Frame
from oml.ground import ground_instances, universe
from oml.interp import Interpreter, expected_keys

CHAIN = ("ForallI", "ThenI", "Impr")


def chain(node):
    """The derivation's outer ForallI/ThenI/Impr spine, ending at the first other node."""
    out = [node]
    while node.rule in CHAIN:
        node = node.premises[0]
        out.append(node)
    return out


def free_quantified(top, node):
    bound = [n.payload for n in chain(top) if n.rule == "ForallI"]
    inner = set()
    for n in chain(node):
        if n.rule == "ForallI":
            inner.add(n.payload)
    return [v for v in bound if v not in inner]


def soundness_violations(tp, U, subst_universe=None, frame=None):
    """Key-set and well-formedness violations of the typing soundness property,
    over every ground substitution for every node on each top-level spine."""
    it = Interpreter(tp.ctx, U, frame or Frame())
    SU = subst_universe or U
    tops = list(tp.method_derivs.values()) + [d for _, _, d in tp.defs]
    if tp.main is not None:
        tops.append(tp.main)

    def run(methods):
        bad = []
        eta = it.program_env(tp, methods)
        for top in tops:
            for node in chain(top):
                names = free_quantified(top, node)
                for combo in itertools.product(SU.members, repeat=len(names)):
                    S = dict(zip(names, combo))
                    v = it.interp(node, S, eta, check_env=False)
                    got = [k for k, _ in v.items(U)]
                    want = expected_keys(tp.ctx, node, S, U)
                    if set(got) != set(want):
                        bad.append((node.rule, S, got, want))
                    # values above the universe exist but their carriers are too big to scan
                    for k, x in v.items(U):
                        if k in U and not it.frame.well_formed(x, k):
                            bad.append((node.rule, S, k, "ill-formed"))
        return bad
    return it._widening(tp, run)


def method_keys_match(tp, U):
    """For each method, the instance-wise ground sets partition the method's."""
    out = {}
    for x, sc in tp.ctx.method_schemes.items():
        whole = set(ground_instances(tp.ctx, sc, U))
        parts = [set(ground_instances(tp.ctx, tp.ctx.instance_schemes[(x, d)], U))
                 for d in tp.ctx.instances_of(x)]
        union = set().union(*parts) if parts else set()
        disjoint = sum(len(p) for p in parts) == len(union)
        out[x] = (whole == union, disjoint)
    return out


def default_universe():
    return universe(["Int", "Bool"], 2)


def step_violations(tp, M, at, it):
    """Rewrite steps from ``M`` at ``at`` that break typing or change the meaning."""
    from oml.equality import oracle_equiv, rewrite_candidates
    from oml.typecheck import check_scheme

    bad = []
    for step, new in rewrite_candidates(tp, M, at):
        if step.rule == "ImprStep":
            improved = step.payload[1]
            a = it.evaluate(tp, check_scheme(tp.ctx, tp.env, M, at))
            b = it.evaluate(tp, check_scheme(tp.ctx, tp.env, M, improved))
            ka, kb = dict(a.items(it.universe)), dict(b.items(it.universe))
            if set(ka) != set(kb) or any(not it.frame.val_eq(ka[k], kb[k], k) for k in ka):
                bad.append((str(step), "meaning changed"))
            continue
        try:
            res = oracle_equiv(tp, M, new, at, it.universe, interp=it)
        except Exception as exc:  # a step must stay well-typed
            bad.append((str(step), repr(exc)))
            continue
        if not res:
            bad.append((str(step), str(res)))
    return bad


def late_derivation(tp, top, S):
    """Instantiate the closed derivation ``top`` at ``S`` by ForallE steps, then
    discharge its context by ThenE steps at the root."""
    from oml.entail import entail
    from oml.syntax import QualType, Scheme, apply
    from oml.typecheck import Derivation

    node = top
    while node.scheme.quantified:
        q = node.scheme.quantified[0]
        sc = apply({q: S[q]}, Scheme(node.scheme.quantified[1:], node.scheme.qual))
        node = Derivation("ForallE", node.preds, node.env, node.expr, sc, (node,), (q, S[q]))
    while node.scheme.context:
        pi = node.scheme.context[0]
        w = entail(tp.ctx.axioms, node.preds, pi, tp.ctx.entail_depth)
        sc = Scheme((), QualType(node.scheme.context[1:], node.scheme.body))
        node = Derivation("ThenE", node.preds, node.env, node.expr, sc, (node,), (pi, w))
    return node


def coherence_violations(tp, U, frame=None):
    """Different derivations of main that must mean the same thing."""
    from oml.ground import instance_subst
    from oml.syntax import QualType, Scheme, mono
    from oml.typecheck import check_scheme, replay

    it = Interpreter(tp.ctx, U, frame or Frame())
    M, sc = tp.main.expr, tp.main_scheme
    bad = []
    base = it.evaluate(tp, tp.main)
    # quantifiers introduced in the opposite order, predicates assumed in the opposite order
    flipped = Scheme(tuple(reversed(sc.quantified)),
                     QualType(tuple(reversed(sc.context)), sc.body))
    other = it.evaluate(tp, check_scheme(tp.ctx, tp.env, M, flipped))
    for k, v in base.items(U):
        if not it.frame.val_eq(v, other.lookup(k), k):
            bad.append(("permuted", k))
    # predicates resolved at each occurrence versus once at the root
    for k in ground_instances(tp.ctx, sc, U):
        early = check_scheme(tp.ctx, tp.env, M, mono(k))
        late = late_derivation(tp, tp.main, instance_subst(tp.ctx, sc, k, U))
        replay(tp.ctx, late)
        a = it.evaluate_at(tp, early, k)
        b = it.evaluate_at(tp, late, k)
        if not it.frame.val_eq(a, b, k):
            bad.append(("early-late", k))
    return bad


def without_ground_context(ctx, sc):
    """``sc`` with its ground, entailed predicates discharged; None if one fails."""
    from oml.syntax import QualType, Scheme, is_ground

    keep = []
    for p in sc.context:
        if all(is_ground(a) for a in p.args):
            if not ctx.entails_ground(p):
                return None
        else:
            keep.append(p)
    return Scheme(sc.quantified, QualType(tuple(keep), sc.body))

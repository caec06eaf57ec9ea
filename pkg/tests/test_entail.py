import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import typed
from oml.entail import ASSUME, ByAxiom, check_witness, entail, entail_all, entails
from oml.errors import EntailError
from oml.ground import universe
from oml.parser import parse_pred, parse_program
from oml.syntax import Pred, TVar, apply, ftv
from oml.typecheck import check_program

U = universe(["Int", "Bool"], 2)


@pytest.fixture
def A():
    return typed("id2").ctx.axioms


def test_entail_arrow(A):
    w = entail(A, (), parse_pred("Id2 (Int -> Int)"))
    assert w == ByAxiom("dArr", (ByAxiom("dInt"), ByAxiom("dInt")))
    assert str(w) == "dArr(dInt, dInt)"


def test_assumption_is_tried_first(A):
    assert entail(A, (parse_pred("Eq t"),), parse_pred("Eq t")) is ASSUME
    assert str(ASSUME) == "-"
    # even when an axiom would also match
    assert entail(A, (parse_pred("Id2 Int"),), parse_pred("Id2 Int")) is ASSUME


def test_no_bool_instance(A):
    with pytest.raises(EntailError) as info:
        entail(A, (), parse_pred("Id2 Bool"))
    assert info.value.kind == "no-matching-axiom"


def test_entail_all(A):
    assert entail_all(A, (), [parse_pred("Id2 Int")] * 2) == [ByAxiom("dInt"), ByAxiom("dInt")]
    assert entail_all(A, (), []) == []
    with pytest.raises(EntailError) as info:
        entail_all(A, (), [parse_pred("Id2 Int"), parse_pred("Id2 Bool")])
    assert info.value.index == 1


def test_depth_exhaustion_is_distinct():
    p = parse_program("class C t where { m : t -> t }\n"
                      "instance d : forall t. C t => C t where { m = \\x. x }")
    A = check_program(p).ctx.axioms
    with pytest.raises(EntailError) as info:
        entail(A, (), parse_pred("C Int"), depth_budget=10)
    assert info.value.kind == "depth-exhausted"
    with pytest.raises(EntailError):
        entails(A, (), parse_pred("C Int"), 10)


def test_open_goal_with_assumptions(A):
    P = (parse_pred("Id2 t"), parse_pred("Id2 u"))
    w = entail(A, P, parse_pred("Id2 (t -> u)"))
    assert str(w) == "dArr(-, -)"
    assert check_witness(A, P, parse_pred("Id2 (t -> u)"), w)


@pytest.mark.parametrize("name", ["id2", "eq", "elems"])
def test_witnesses_replay_on_universe_goals(name):
    ctx = typed(name).ctx
    for cls, n in ctx.arity.items():
        for args in _tuples(n):
            goal = Pred(cls, args)
            try:
                w = entail(ctx.axioms, (), goal)
            except EntailError:
                continue
            assert check_witness(ctx.axioms, (), goal, w)
            assert not check_witness(ctx.axioms, (), goal, ByAxiom("nope"))


def _tuples(n):
    small = universe(["Int", "Bool"], 1).members
    if n == 1:
        return [(t,) for t in U.members]
    return [(a, b) for a in small for b in small]


goals = st.sampled_from(["Id2 t", "Id2 (t -> u)", "Id2 (t -> Int)", "Eq (t -> u)", "Eq t"])


@settings(max_examples=60, deadline=None)
@given(goals, st.sampled_from(U.members), st.sampled_from(U.members))
def test_closure_under_ground_substitution(text, a, b):
    ctx = typed("eq").ctx if text.startswith("Eq") else typed("id2").ctx
    goal = parse_pred(text)
    P = tuple(Pred(goal.cls, (TVar(v),)) for v in sorted(ftv(goal)))
    if not entails(ctx.axioms, P, goal):
        return
    S = {"t": a, "u": b}
    SP = tuple(apply(S, p) for p in P)
    assert entails(ctx.axioms, SP, apply(S, goal))


def test_nonoverlap_gives_unique_choice():
    ctx = typed("eq").ctx
    from oml.entail import matching_axioms
    for t in U.members:
        assert len(matching_axioms(ctx.axioms, Pred("Eq", (t,)))) <= 1

import pytest
from hypothesis import given

from conftest import ACCEPTED, REJECTED, load
from strategies import exprs, substs, types
from oml.errors import ParseError
from oml.parser import parse_expr, parse_program, parse_scheme, parse_type
from oml.syntax import (Arrow, FundepDecl, Lam, Pred, TCon, TVar, Var, alpha_eq, apply,
                        compose, free_vars, ftv, show_expr, show_program, show_subst,
                        subst_expr)

INT = TCon("Int")
BOOL = TCon("Bool")
t, u = TVar("t"), TVar("u")


def test_parse_id2_program():
    p = load("id2")
    assert [c.name for c in p.classes] == ["Id2"]
    assert [i.axiom.name for i in p.instances] == ["dInt", "dArr"]


def test_composition_is_sugar():
    p = load("id2")
    body = dict(p.instances[1].impls)["id2"]
    # \f. id2 . f . id2 applied to x reduces to id2 (f (id2 x)); check the shape
    assert isinstance(body, Lam) and body.var == "f"
    assert free_vars(body) == {"id2"}


def test_program_without_classes():
    p = parse_program("main : Int -> Int\nmain = \\x. x")
    assert p.classes == () or list(p.classes) == []
    assert not p.instances
    assert p.main.name == "main"


def test_fundep_declaration():
    p = load("elems")
    assert p.fundeps == (FundepDecl("Elems", frozenset({0}), frozenset({1})),) or \
        list(p.fundeps) == [FundepDecl("Elems", frozenset({0}), frozenset({1}))]


@pytest.mark.parametrize("text", [
    "class C t where { m : t }\nclass C u where { n : u }",
    "main = \\x.",
    "main : Int ->",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_program(text)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as info:
        parse_program("main : Int\nmain = (\\x. x")
    assert info.value.line == 2


def test_ftv_examples():
    assert ftv(parse_type("t -> Int")) == {"t"}
    assert ftv(parse_scheme("forall t. Eq t => t -> u")) == {"u"}
    assert ftv(Pred("Elems", (TVar("c"), TVar("e")))) == {"c", "e"}


def test_apply_examples():
    assert apply({"t": INT}, Arrow(t, t)) == Arrow(INT, INT)
    assert apply({"t": INT, "u": BOOL}, Pred("Elems", (t, u))) == Pred("Elems", (INT, BOOL))
    assert apply({"t": Arrow(u, u)}, Pred("Id2", (t,))) == Pred("Id2", (Arrow(u, u),))


def test_apply_avoids_capture_in_schemes():
    sc = parse_scheme("forall u. t -> u")
    out = apply({"t": u}, sc)
    assert ftv(out) == {"u"}
    assert out.body.dom == u and out.body.cod != u


def test_compose_examples():
    S = {"t": INT}
    assert compose({}, S) == S
    assert compose({"u": BOOL}, {"t": u}) == {"t": BOOL, "u": BOOL}
    assert show_subst({}) == "identity"
    assert show_subst({"e2": TVar("e")}) == "e2 ↦ e"


@given(substs, substs, types())
def test_compose_law(S2, S1, ty):
    assert apply(compose(S2, S1), ty) == apply(S2, apply(S1, ty))


@given(substs, substs, substs, types())
def test_compose_associative(S3, S2, S1, ty):
    left = compose(compose(S3, S2), S1)
    right = compose(S3, compose(S2, S1))
    assert apply(left, ty) == apply(right, ty)
    assert apply(compose({}, S1), ty) == apply(S1, ty) == apply(compose(S1, {}), ty)


@given(substs, types())
def test_ftv_of_application(S, ty):
    expected = set()
    for v in ftv(ty):
        expected |= ftv(S.get(v, TVar(v)))
    assert ftv(apply(S, ty)) == expected


@given(exprs())
def test_expr_print_parse_roundtrip(e):
    assert alpha_eq(parse_expr(show_expr(e)), e)


@given(types())
def test_type_print_parse_roundtrip(ty):
    assert parse_type(str(ty)) == ty


@pytest.mark.parametrize("name", ACCEPTED + REJECTED)
def test_program_roundtrip(name):
    p = load(name)
    q = parse_program(show_program(p))
    assert show_program(q) == show_program(p)


def test_subst_expr_avoids_capture():
    e = parse_expr("\\y. x y")
    out = subst_expr(e, "x", Var("y"))
    assert free_vars(out) == {"y"}
    assert not alpha_eq(out, parse_expr("\\y. y y"))

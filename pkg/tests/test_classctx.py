import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import load, typed
from oml.classctx import (ambiguous_vars, build_context, check_covering, check_nonoverlap,
                          covering_violations, fd_closure, instantiate_fundeps)
from oml.errors import ContextError
from oml.parser import parse_pred, parse_program, parse_scheme
from oml.syntax import scheme_alpha_eq, show_scheme


def test_signatures():
    ctx = typed("id2").ctx
    pattern, sc = ctx.sigs["id2"]
    assert str(pattern) == "Id2 t" and show_scheme(sc) == "t -> t"
    pattern, sc = typed("eq").ctx.sigs["eq"]
    assert str(pattern) == "Eq t" and show_scheme(sc) == "t -> t -> Bool"


def test_method_schemes():
    assert show_scheme(typed("id2").ctx.method_schemes["id2"]) == "forall t. Id2 t => t -> t"
    assert show_scheme(typed("eq").ctx.method_schemes["eq"]) == "forall t. Eq t => t -> t -> Bool"


def test_method_own_variables_follow_class_variables():
    ctx = build_context(parse_program("class M t where { ret : forall a. a -> t }"))
    assert ctx.method_schemes["ret"].quantified == ("t", "a")


def test_instance_method_schemes():
    ctx = typed("id2").ctx
    want = parse_scheme("forall t u. (Id2 t, Id2 u) => (t -> u) -> t -> u")
    assert scheme_alpha_eq(ctx.instance_schemes[("id2", "dArr")], want)
    assert show_scheme(ctx.instance_schemes[("id2", "dInt")]) == "Int -> Int"
    eq_arr = typed("eq").ctx.instance_schemes[("eq", "dEqArr")]
    assert [str(p) for p in eq_arr.context] == ["Eq t", "Eq u"]


def test_instance_method_scheme_renames_method_variables():
    ctx = build_context(parse_program(
        "class M t where { ret : forall a. a -> t }\n"
        "instance d : forall a. M (a -> a) where { ret = \\x. \\y. y }"))
    sc = ctx.instance_schemes[("ret", "d")]
    assert len(set(sc.quantified)) == 2


def test_missing_implementation():
    with pytest.raises(ContextError) as info:
        build_context(parse_program("class C t where { m : t; n : t }\n"
                                    "instance d : C Int where { m = 0 }"))
    assert info.value.kind == "missing-implementation"


@pytest.mark.parametrize("text,kind", [
    ("instance d : C Int where { }", "unknown-class"),
    ("class C t where { m : t }\ninstance d : C Int Int where { m = 0 }", "arity-mismatch"),
    ("foo : Int", "unknown-external"),
    ("not : Int -> Int", "external-mismatch"),
])
def test_build_errors(text, kind):
    with pytest.raises(ContextError) as info:
        build_context(parse_program(text))
    assert info.value.kind == kind


def test_duplicate_instance_is_a_parse_error():
    from oml.errors import ParseError
    with pytest.raises(ParseError) as info:
        parse_program("class C t where { m : t }\ninstance d : C Int where { m = 0 }\n"
                      "instance d : C Bool where { m = true }")
    assert info.value.kind == "duplicate"


def test_nonoverlap_examples():
    check_nonoverlap(typed("id2").ctx)
    with pytest.raises(ContextError) as info:
        check_nonoverlap(build_context(load("univ")))
    assert "Univ Bool ~ Univ t" in str(info.value)
    with pytest.raises(ContextError) as info:
        check_nonoverlap(build_context(load("fundep_overlap")))
    assert info.value.detail["indices"] == frozenset({0})


def test_fd_closure_examples():
    assert fd_closure({"c"}, [({"c"}, {"e"})]) == {"c", "e"}
    assert fd_closure({"a", "z"}, []) == {"a", "z"}
    assert fd_closure({"a"}, [({"a"}, {"b"}), ({"b"}, {"c"})]) == {"a", "b", "c"}


names = st.sampled_from("abcde")
deps = st.lists(st.tuples(st.frozensets(names, max_size=2), st.frozensets(names, max_size=2)),
                max_size=5)


@given(st.frozensets(names), deps)
def test_fd_closure_is_least_closed_superset(J, F):
    out = fd_closure(J, F)
    assert J <= out
    for u, v in F:
        if u <= out:
            assert v <= out
    # least: every element is reachable by naive iteration
    naive = set(J)
    for _ in range(len(F) + 1):
        for u, v in F:
            if u <= naive:
                naive |= v
    assert out == naive


def test_instantiate_fundeps():
    ctx = typed("elems").ctx
    assert instantiate_fundeps(ctx, [parse_pred("Elems c e")]) == [({"c"}, {"e"})]
    assert instantiate_fundeps(typed("id2").ctx, [parse_pred("Id2 t")]) == []
    assert instantiate_fundeps(ctx, [parse_pred("Elems (t -> u) e")]) == [({"t", "u"}, {"e"})]


def test_covering():
    check_covering(typed("elems").ctx)
    ctx = build_context(load("uncovered"))
    (ax, fd, esc), = covering_violations(ctx)
    assert ax.name == "dIntAny" and esc == {"e"}
    with pytest.raises(ContextError) as info:
        check_covering(ctx)
    assert info.value.kind == "uncovered"


def test_list_like_instance_is_covered():
    ctx = build_context(parse_program(
        "class Elems c e where { empty : c }\nfundep Elems {0} ~> {1}\n"
        "instance dArr : forall t. Elems (t -> t) t where { empty = \\x. x }"))
    check_covering(ctx)


def test_ambiguous_vars():
    ctx = typed("elems").ctx
    assert ambiguous_vars(ctx, parse_scheme("forall c e. Elems c e => c -> c")) == frozenset()
    assert ambiguous_vars(ctx, parse_scheme("forall c e. Elems c e => e -> e")) == {"c"}

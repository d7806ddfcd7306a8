import random

import pytest
from hypothesis import given, settings, strategies as st

from dlfd.parser import (
    DLFDSyntaxError,
    EmptyPathListError,
    LexError,
    PfdPositionError,
    parse_axiom,
    parse_concept,
    parse_terminology,
    render_terminology,
)
from dlfd.syntax import (
    All,
    And,
    Axiom,
    Bot,
    ConstraintKind,
    Not,
    Or,
    Pfd,
    Plain,
    Prim,
    RhsAnd,
    Signature,
    Terminology,
    Top,
    classify_axiom,
    conj,
    desugar_asymmetric_pfds,
    desugar_concept,
    is_sugared,
    signature_of,
)

import gen

A, B, C, X = Prim("A"), Prim("B"), Prim("C"), Prim("X")


# -- parsing --------------------------------------------------------------

def test_parse_disjointness():
    assert parse_terminology("A & B <= Bot;") == Terminology([Axiom(And(A, B), Plain(Bot()))])


def test_parse_asymmetric_pfd():
    t = parse_terminology("A <= fd(B : f -> h);")
    assert t == Terminology([Axiom(A, Pfd(B, [("f",)], ("h",)))])


def test_pfd_on_left_is_rejected():
    with pytest.raises(DLFDSyntaxError) as info:
        parse_terminology("fd(B : f -> h) <= A;")
    assert isinstance(info.value, PfdPositionError)
    assert (info.value.line, info.value.col) == (1, 1)


@pytest.mark.parametrize("text", [
    "A <= ~fd(A : f -> id);",
    "A <= all f . fd(A : f -> id);",
    "A <= B | fd(A : f -> id);",
    "A <= fd(fd(A : f -> id) : f -> id);",
])
def test_pfd_in_forbidden_positions(text):
    with pytest.raises(PfdPositionError):
        parse_terminology(text)


def test_empty_path_list_reports_position():
    with pytest.raises(EmptyPathListError) as info:
        parse_terminology("A <= B;\nA <= fd(A : -> id);")
    assert (info.value.line, info.value.col) == (2, 13)


def test_lexical_error_position():
    with pytest.raises(LexError) as info:
        parse_terminology("A <= B;\n  A $ B <= C;")
    assert (info.value.line, info.value.col) == (2, 5)


@pytest.mark.parametrize("text", ["A <= B", "A B <= C;", "A <= all id . B;", "all <= B;", "<= B;"])
def test_syntax_errors(text):
    with pytest.raises(DLFDSyntaxError):
        parse_terminology(text)


def test_comments_and_whitespace():
    t = parse_terminology("# header\nA   <=\n  B ; # trailing\n\n")
    assert t == Terminology([Axiom(A, Plain(B))])


def test_precedence_and_associativity():
    assert parse_concept("A | B & ~C") == Or(A, And(B, Not(C)))
    assert parse_concept("A & B & C") == And(And(A, B), C)
    assert parse_concept("all f . A & B") == And(All("f", A), B)
    assert parse_concept("~all f . A") == Not(All("f", A))


def test_paths_and_primed_features():
    a = parse_axiom("C <= fd(C : f.g, a' -> id)")
    assert a.rhs == Pfd(C, [("f", "g"), ("a'",)], ())


def test_rhs_conjunction_with_pfd():
    a = parse_axiom("X <= all a . A & fd(X : a -> id)")
    assert a.rhs == RhsAnd(Plain(All("a", A)), Pfd(X, [("a",)], ()))
    assert classify_axiom(a) is ConstraintKind.PFD


def test_pfd_free_conjunction_has_one_encoding():
    with pytest.raises(ValueError):
        RhsAnd(Plain(A), Plain(B))
    assert conj(A, B) == Plain(And(A, B))


def test_invalid_names():
    with pytest.raises(ValueError):
        Prim("Top")
    with pytest.raises(ValueError):
        All("id", A)
    with pytest.raises(ValueError):
        Prim("1x")


# -- rendering ------------------------------------------------------------

def test_render_identity_pfd():
    t = Terminology([Axiom(X, Pfd(X, [("a",)], ()))])
    assert render_terminology(t) == "X <= fd(X : a -> id);\n"


def test_render_empty():
    assert render_terminology(Terminology()) == ""


def test_render_parenthesizes_right_operands():
    t = Terminology([
        Axiom(And(A, And(B, C)), Plain(Or(A, Or(B, C)))),
        Axiom(Not(And(A, B)), RhsAnd(Pfd(A, [("f",)], ()), Plain(And(A, B)))),
        Axiom(A, RhsAnd(Plain(Or(A, B)), RhsAnd(Plain(B), Pfd(A, [("f",)], ("g",))))),
    ])
    text = render_terminology(t)
    assert text.splitlines() == [
        "A & (B & C) <= A | (B | C);",
        "~(A & B) <= fd(A : f -> id) & (A & B);",
        "A <= (A | B) & (B & fd(A : f -> g));",
    ]
    assert parse_terminology(text) == t


NAMES = ["A", "B", "_u_A_B"]
FEATS = ["f", "g", "a'"]

concepts = st.recursive(
    st.one_of(st.sampled_from(NAMES).map(Prim), st.just(Top()), st.just(Bot())),
    lambda sub: st.one_of(
        st.builds(And, sub, sub),
        st.builds(Or, sub, sub),
        st.builds(Not, sub),
        st.builds(All, st.sampled_from(FEATS), sub),
    ),
    max_leaves=8,
)
paths = st.lists(st.sampled_from(FEATS), max_size=3).map(tuple)
pfds = st.builds(Pfd, concepts, st.lists(paths, min_size=1, max_size=3).map(tuple), paths)
rhss = st.lists(st.one_of(concepts, pfds), min_size=1, max_size=4).map(lambda ps: conj(*ps))
terminologies = st.lists(st.builds(Axiom, concepts, rhss), max_size=5).map(Terminology)


@settings(max_examples=300)
@given(terminologies)
def test_round_trip(t):
    text = render_terminology(t)
    assert parse_terminology(text) == t
    assert render_terminology(parse_terminology(text)) == text


# -- desugaring -----------------------------------------------------------

def test_desugar_or():
    t1, t2 = Prim("T1"), Prim("T2")
    assert desugar_concept(Or(t1, t2)) == Not(And(Not(t1), Not(t2)))


def test_desugar_top_bot_use_least_name():
    assert desugar_concept(Top(), anchor="A") == Not(And(A, Not(A)))
    assert desugar_concept(And(B, Bot())) == And(B, And(B, Not(B)))
    assert desugar_concept(Top()) == Not(And(Prim("_c0"), Not(Prim("_c0"))))


def test_desugar_idempotent_on_random_asts():
    rng = random.Random(7)
    for _ in range(1000):
        c = gen.concept(rng, ["A", "B", "C"], ["f", "g"], rng.randint(0, 5))
        once = desugar_concept(c)
        assert not is_sugared(once)
        assert desugar_concept(once) == once


# -- classification -------------------------------------------------------

def test_classify():
    assert classify_axiom(Axiom(A, Pfd(B, [("f",)], ("h",)))) is ConstraintKind.PFD
    assert classify_axiom(Axiom(A, All("f", X))) is ConstraintKind.SIMPLE
    mixed = Axiom(A, RhsAnd(Plain(All("f", X)), Pfd(A, [("a",)], ())))
    assert classify_axiom(mixed) is ConstraintKind.PFD


# -- asymmetric PFD symmetrization --------------------------------------

def test_asymmetric_pfd_becomes_union_triple():
    t = parse_terminology("A <= fd(B : f -> h);")
    expected = parse_terminology(
        "A <= _u_A_B;\nB <= _u_A_B;\n_u_A_B <= fd(_u_A_B : f -> h);"
    )
    assert desugar_asymmetric_pfds(t) == expected


def test_union_is_shared_per_pair():
    t = parse_terminology("B <= fd(A : f -> h);\nA <= fd(B : h -> f);\nX <= fd(X : a -> id);")
    out = desugar_asymmetric_pfds(t)
    assert render_terminology(out).splitlines() == [
        "B <= _u_A_B;",
        "A <= _u_A_B;",
        "_u_A_B <= fd(_u_A_B : f -> h);",
        "_u_A_B <= fd(_u_A_B : h -> f);",
        "X <= fd(X : a -> id);",
    ]


def test_symmetric_and_non_primitive_pfds_untouched():
    t = parse_terminology("X <= fd(X : a -> id);\nA & B <= fd(C : f -> id);\nA <= fd(~B : f -> id);")
    assert desugar_asymmetric_pfds(t) == t


# -- signatures -----------------------------------------------------------

def test_signature_examples():
    assert signature_of(Terminology()) == Signature(frozenset(), frozenset(), 0)
    sig = signature_of(parse_terminology("C <= fd(C : f.g -> id);"))
    assert sig == Signature(frozenset({"C"}), frozenset({"f", "g"}), 2)


def test_signature_counts_every_position():
    t = parse_terminology("all k . A <= fd(~B : f, g.h.i -> id) & all m . C;")
    sig = signature_of(t)
    assert sig.concepts == {"A", "B", "C"}
    assert sig.features == {"k", "f", "g", "h", "i", "m"}
    assert sig.max_path_len == 3

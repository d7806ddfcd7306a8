import json
import random

import pytest

from dlfd.interp import (
    InterpretationError,
    UnknownNameError,
    build_interpretation,
    check_axiom,
    check_terminology,
    eval_concept,
    eval_path,
    interpretation_from_dict,
    is_finite_countermodel,
    load_interpretation,
    dump_interpretation,
    satisfies,
    to_dot,
)
from dlfd.parser import parse_axiom, parse_rhs, parse_terminology
from dlfd.syntax import Terminology, desugar_concept, Prim, Pfd

import gen


def one_point(**concepts):
    return build_interpretation(1, {"f": [0]}, concepts)


# -- construction ---------------------------------------------------------

def test_one_point_model():
    i = build_interpretation(1, {"f": [0]}, {"C": {0}})
    assert i.n == 1 and i.features["f"] == (0,) and i.concepts["C"] == {0}


@pytest.mark.parametrize("n, feats, concs", [
    (2, {"f": [1]}, {}),
    (2, {"f": [0, 2]}, {}),
    (2, {"f": [0, -1]}, {}),
    (0, {}, {}),
    (2, {}, {"C": {5}}),
])
def test_invalid_interpretations(n, feats, concs):
    with pytest.raises(InterpretationError):
        build_interpretation(n, feats, concs)


def test_json_round_trip(tmp_path):
    i = build_interpretation(3, {"g": [1, 2, 0], "f": [0, 0, 0]}, {"B": {2, 0}, "A": set()})
    p = tmp_path / "m.dlfdmodel"
    dump_interpretation(i, p)
    data = json.loads(p.read_text())
    assert data == {"n": 3, "features": {"f": [0, 0, 0], "g": [1, 2, 0]},
                    "concepts": {"A": [], "B": [0, 2]}}
    assert load_interpretation(p) == i


def test_json_rejects_duplicates():
    with pytest.raises(InterpretationError):
        interpretation_from_dict({"n": 2, "features": {}, "concepts": {"C": [0, 0]}})


# -- paths ----------------------------------------------------------------

def test_identity_path():
    i = build_interpretation(5, {"f": [0] * 5})
    assert eval_path(i, (), 3) == 3


def test_path_composition_order():
    i = build_interpretation(3, {"f": [1, 2, 0], "g": [0, 0, 0]})
    assert eval_path(i, ("f", "g"), 0) == 0
    # f is applied first: g(f(0)) = 2 while f(g(0)) would be 1
    i2 = build_interpretation(3, {"f": [1, 1, 1], "g": [2, 2, 2]})
    assert eval_path(i2, ("f", "g"), 0) == 2


def test_unknown_feature():
    with pytest.raises(UnknownNameError):
        eval_path(one_point(), ("zz",), 0)


# -- concept semantics ----------------------------------------------------

def test_intersection():
    i = build_interpretation(3, {}, {"C1": {0, 1}, "C2": {1, 2}})
    assert eval_concept(i, parse_rhs("C1 & C2")) == {1}


def test_pfd_excludes_disagreeing_pair():
    # f is constant, so 2 also agrees with 0 and 1 on f and is excluded too
    i = build_interpretation(3, {"f": [2, 2, 2], "g": [0, 1, 2]}, {"C": {0, 1}})
    assert eval_concept(i, parse_rhs("fd(C : f -> g)")) == set()
    # once f separates 2 from the members of C, 2 is in vacuously
    i = build_interpretation(3, {"f": [2, 2, 0], "g": [0, 1, 2]}, {"C": {0, 1}})
    assert eval_concept(i, parse_rhs("fd(C : f -> g)")) == {2}


def test_identity_pfd_is_everything():
    for rng, i in _random_cases(4, 200):
        p = gen.path(rng, ["f", "g"])
        c = gen.concept(rng, ["A", "B", "C"], ["f", "g"], 2)
        assert eval_concept(i, Pfd(c, [p], p)) == set(i.domain)


def test_pfd_over_empty_concept_is_everything():
    i = build_interpretation(2, {"f": [0, 1], "g": [1, 1]}, {"D": set()})
    assert eval_concept(i, parse_rhs("fd(D : f -> g)")) == {0, 1}


def test_sugar_semantics():
    i = build_interpretation(3, {"f": [1, 2, 0]}, {"A": {0}, "B": {2}})
    assert eval_concept(i, parse_rhs("A | B")) == {0, 2}
    assert eval_concept(i, parse_rhs("Top")) == {0, 1, 2}
    assert eval_concept(i, parse_rhs("Bot")) == set()
    assert eval_concept(i, parse_rhs("all f . B")) == {1}


def test_unknown_concept():
    with pytest.raises(UnknownNameError):
        eval_concept(one_point(), parse_rhs("Nope"))


def _random_cases(seed, count, n_max=4):
    rng = random.Random(seed)
    for _ in range(count):
        n = rng.randint(1, n_max)
        yield rng, gen.interpretation(rng, n, ["A", "B", "C"], ["f", "g"])


def test_desugaring_preserves_extension():
    for rng, i in _random_cases(1, 1000):
        c = gen.concept(rng, ["A", "B", "C"], ["f", "g"], rng.randint(0, 4))
        assert eval_concept(i, c) == eval_concept(i, desugar_concept(c, anchor="A"))


def test_pfd_anti_monotone_in_quantified_concept():
    for rng, i in _random_cases(2, 500):
        lhs = [gen.path(rng, ["f", "g"]) for _ in range(rng.randint(1, 2))]
        rhs = gen.path(rng, ["f", "g"])
        small = eval_concept(i, Pfd(Prim("A") & Prim("B"), lhs, rhs))
        large = eval_concept(i, Pfd(Prim("A"), lhs, rhs))
        assert large <= small


def test_pfd_reflexive_vacuity():
    # with the partner set restricted to {x}, x is never excluded
    for rng, i in _random_cases(3, 300):
        for x in i.domain:
            single = i.with_concepts({"S": {x}})
            p = Pfd(Prim("S"), [gen.path(rng, ["f", "g"])], gen.path(rng, ["f", "g"]))
            assert x in eval_concept(single, p)


# -- checking -------------------------------------------------------------

def test_reflexive_axiom_satisfied():
    assert check_axiom(one_point(C={0}), parse_axiom("C <= C")) is None


def test_injectivity_violation_witness():
    i = build_interpretation(2, {"f": [0, 0]}, {"A": {0, 1}})
    a = parse_axiom("A <= fd(A : f -> id)")
    w = check_axiom(i, a)
    assert (w.kind, w.x, w.y) == ("pfd", 0, 1)
    assert w.agreeing == ((("f",), 0),)
    assert w.disagreeing == ((), 0, 1)
    assert w.replay(i, a)


def test_simple_violation_is_least_element():
    i = build_interpretation(4, {}, {"A": {1, 2, 3}, "B": {1}})
    a = parse_axiom("A <= B")
    w = check_axiom(i, a)
    assert (w.kind, w.x) == ("simple", 2) and w.replay(i, a)


def test_mixed_rhs_witness_names_failing_conjunct():
    i = build_interpretation(2, {"f": [0, 0]}, {"A": {0, 1}, "B": {0, 1}})
    a = parse_axiom("A <= B & fd(A : f -> id)")
    w = check_axiom(i, a)
    assert w.kind == "pfd" and w.replay(i, a)


def test_witnesses_replay_on_random_inputs():
    rng = random.Random(5)
    seen = 0
    for _ in range(400):
        n = rng.randint(1, 4)
        i = gen.interpretation(rng, n, ["A", "B"], ["f", "g"])
        t = gen.terminology(rng, ["A", "B"], ["f", "g"], max_axioms=3, pfd_prob=0.5)
        report = check_terminology(i, t)
        assert report.ok == all(s is None for s in report.statuses)
        assert report.ok == satisfies(i, t)
        for k, w in enumerate(report.statuses):
            if w is not None:
                seen += 1
                assert w.axiom_index == k and w.replay(i, t[k])
    assert seen > 50


def test_empty_terminology_always_satisfied():
    assert check_terminology(one_point(), Terminology()).ok


def test_missing_concepts():
    t = parse_terminology("A <= B;")
    i = build_interpretation(2, {}, {"A": set()})
    with pytest.raises(UnknownNameError):
        check_terminology(i, t)
    assert check_terminology(i, t, default_empty_concepts=True).ok


def test_countermodel():
    t = parse_terminology("A <= B;")
    i = build_interpretation(2, {}, {"A": {0}, "B": {0}, "C": {1}})
    assert is_finite_countermodel(i, t, parse_axiom("C <= A"))
    assert not is_finite_countermodel(i, t, parse_axiom("A <= B"))
    bad = build_interpretation(2, {}, {"A": {0, 1}, "B": {0}, "C": {1}})
    assert not is_finite_countermodel(bad, t, parse_axiom("C <= A"))
    assert not is_finite_countermodel(one_point(C={0}), Terminology(), parse_axiom("C <= C"))


# -- DOT --------------------------------------------------------------------

def test_dot_single_self_loop():
    dot = to_dot(one_point(C={0}))
    assert dot.count("->") == 1 and 'label="0: C"' in dot
    assert to_dot(one_point(), hide_selfloops=True).count("->") == 0


def test_dot_nodes_only():
    dot = to_dot(build_interpretation(3, {}, {}))
    assert dot.count("[label=") == 3 and "->" not in dot

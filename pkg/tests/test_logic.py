import pytest

from tccs import experiments, library
from tccs.history import initial_ext
from tccs.logic import (
    FF, TT, Conj, DiamondAct, DiamondCo, EqCo, HascoPred, Var, fragment_violations, free_vars,
    ftn, parse_formula, permute, render_formula, sat, sat_canco, sat_eq, sat_hasco, substitute,
    translate_canco_to_hasco, translate_eq_to_canco, translate_hasco_to_eq,
)
from tccs.syntax import ActName, ParseError, Permutation, TransName

x, y = Var("x"), Var("y")
m1, m2 = TransName("m1", True), TransName("m2", True)


def proc(name):
    return initial_ext(library.process(name))


def test_parse_eq_formula():
    f = parse_formula("<x(a)><y(b)> x =co y")
    assert f == DiamondAct("x", ActName("a"), DiamondAct("y", ActName("b"), EqCo(x, y)))


def test_parse_tt_and_canco():
    assert parse_formula("tt") == Conj(())
    f = parse_formula("<x(a)><y(b)><co{x,y}> tt")
    assert f.body.body == DiamondCo(frozenset({x, y}), TT)
    assert fragment_violations(f, "canco") == []
    assert fragment_violations(f, "hasco")


def test_parse_rejects_open_formula_when_closed():
    with pytest.raises(ParseError):
        parse_formula("hasco(x)", closed=True)
    assert free_vars(parse_formula("hasco(x)")) == {x}


def test_render_round_trip():
    for text in list(library.FORMULAS.values()) + ["ff", "~<tau>tt", "hasco(#m1) -> [tau]ff",
                                                    "<x('a)>(hasco(x) | #m1 =co x)"]:
        f = parse_formula(text)
        assert parse_formula(render_formula(f)) == f


def test_substitute_and_permute():
    assert substitute(HascoPred(x), "x", m1) == HascoPred(m1)
    assert permute(HascoPred(m1), Permutation.swap(m1, m2)) == HascoPred(m2)
    f = DiamondAct("x", ActName("a"), HascoPred(x))
    assert substitute(f, "x", m1) == f
    assert ftn(parse_formula("hasco(#m1) & <x(a)>hasco(x)")) == {m1}


def test_intro_formulas():
    f = parse_formula(library.FORMULAS["hasco_intro"])
    assert sat_hasco(proc("Q2"), f) is True and sat_hasco(proc("P2"), f) is False
    g = parse_formula(library.FORMULAS["eq_intro"])
    assert sat_eq(proc("P3"), g) is True and sat_eq(proc("Q3"), g) is False
    h = parse_formula(library.FORMULAS["canco_intro"])
    assert sat_canco(proc("Q2"), h) is True and sat_canco(proc("P2"), h) is False


def test_trivial_truths():
    assert sat_hasco(proc("P1"), TT) is True
    assert sat_canco(proc("P1"), parse_formula("<co{#m7}> tt")) is False


def test_committed_pair_eq_predicate():
    c1, c2 = library.committed_pair()
    f = parse_formula("#l =co #k")
    assert sat_eq(c2, f) is True and sat_eq(c1, f) is False


def test_fragment_violation_raises():
    with pytest.raises(ValueError):
        sat_hasco(proc("P1"), parse_formula("#m1 =co #m1"))


def test_strong_tau_reading_differs_from_weak():
    f = parse_formula("<tau><tau> tt")
    c = initial_ext(library.resolve("tau.0"))
    assert sat("hasco", c, f) is True
    assert sat("hasco", c, f, strong_tau=True) is False


def test_hasco_to_eq_translation():
    assert translate_hasco_to_eq(HascoPred(x)) == EqCo(x, x)
    assert translate_hasco_to_eq(TT) == TT
    f = parse_formula(library.FORMULAS["hasco_intro"])
    g = translate_hasco_to_eq(f)
    for name in ("Q2", "P2"):
        assert sat_hasco(proc(name), f) == sat_eq(proc(name), g)


def test_canco_to_hasco_translation():
    assert translate_canco_to_hasco(TT, [x]) == TT
    assert all(c.ok for c in experiments.ex_6_2())


def test_eq_to_canco_translation():
    assert translate_eq_to_canco(EqCo(m1, m1), (), {(m1, m1)}) == TT
    assert translate_eq_to_canco(EqCo(m1, m2), (), {(m1, m1)}) == FF
    assert all(c.ok for c in experiments.ex_6_6())

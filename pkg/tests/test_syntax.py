import pytest

from tccs import library
from tccs.syntax import (
    CO, ZERO, ActName, Dormant, NameSubstitution, Par, ParseError, Permutation, Restrict, Running,
    Sum, TransName, apply_permutation, apply_substitution, check_well_formed, drop_inert,
    free_transaction_names, is_well_formed, parse_process, prefix, render, term_size,
    top_level_commit_split,
)

k, l, m = TransName("k"), TransName("l"), TransName("m")


def test_parse_running_transaction():
    p = parse_process("txn l { a.co } else { 0 }")
    assert p == Running(prefix(ActName("a"), CO), l, ZERO)


def test_parse_zero():
    assert parse_process("0") == Sum(())


def test_parse_q2_shape():
    q2 = library.process("Q2")
    assert isinstance(q2, Restrict) and q2.action == "p"
    assert isinstance(q2.body, Par)
    left, right = q2.body.left, q2.body.right
    assert left.name == TransName("k1") and right.name == TransName("k2")
    assert len(left.default.branches) == 2
    assert right.default.branches[0][1].branches[0][0] == ActName("p", True)


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as exc:
        parse_process("a.(b")
    assert "col" in str(exc.value) or "line" in str(exc.value)


def test_unbound_variable_is_rejected():
    with pytest.raises(ParseError):
        parse_process("rec X. a.Y")
    problems = check_well_formed(parse_process("rec X. a.Y", closed=False))
    assert [v.condition for v in problems] == [1]


def test_nested_named_transaction_violates_condition_3():
    p = parse_process("txn k { txn l { a.co } else { 0 } } else { 0 }")
    assert 3 in [v.condition for v in check_well_formed(p)]


def test_library_processes_are_well_formed():
    for name in library.SOURCES:
        assert is_well_formed(library.process(name)), name


def test_dormant_inside_running_default_is_rejected():
    p = parse_process("txn k { txn { a.co } else { 0 } } else { 0 }")
    assert not is_well_formed(p)


def test_unguarded_recursion_is_rejected():
    assert not is_well_formed(parse_process("rec X. X", closed=False))
    assert is_well_formed(parse_process("rec X. txn { a.co } else { X }"))


def test_free_transaction_names():
    assert free_transaction_names(library.process("P2")) == {TransName("k1"), TransName("k2")}
    assert free_transaction_names(parse_process("a.b.0")) == frozenset()
    r = Running(CO, m, ZERO)
    assert free_transaction_names(Par(r, r)) == {m}


def test_permutation_swaps_one_name():
    p1 = library.process("P1")
    assert render(apply_permutation(p1, Permutation.swap(l, m))) == "txn m { a.co } else { 0 }"
    assert apply_permutation(p1, Permutation()) == p1


def test_permutation_rejects_non_bijections():
    with pytest.raises(ValueError):
        Permutation(((k, l), (m, l)))


def test_substitution_merges_transactions():
    p = parse_process("txn k1 { a.co } else { 0 } | txn k2 { b.co } else { 0 }")
    sigma = NameSubstitution(frozenset({TransName("k1"), TransName("k2")}), m)
    assert free_transaction_names(apply_substitution(p, sigma)) == {m}
    assert apply_substitution(p, NameSubstitution(frozenset(), m)) == p


def test_substitution_target_outside_domain():
    with pytest.raises(ValueError):
        NameSubstitution(frozenset({k}), k)


def test_top_level_commit_split():
    assert top_level_commit_split(parse_process("co | a.0")) == parse_process("a.0")
    rest = top_level_commit_split(parse_process("a.0 | (0 | co)"))
    assert rest is not None and drop_inert(rest) == parse_process("a.0")
    assert top_level_commit_split(parse_process("a.co")) is None


def test_drop_inert():
    assert drop_inert(parse_process("0 | 0 | (0 | a.0)")) == parse_process("a.0")
    assert drop_inert(parse_process("nu a. b.0")) == parse_process("b.0")
    assert drop_inert(parse_process("nu a. a.0")) == parse_process("nu a. a.0")


def test_term_size_counts_constructors():
    assert term_size(ZERO) == 1
    assert term_size(parse_process("a.0")) == 2


def test_render_round_trip_on_examples():
    for text in library.SOURCES.values():
        p = parse_process(text)
        assert parse_process(render(p)) == p


def test_render_dormant():
    p = Dormant(prefix(ActName("a"), CO), ZERO)
    assert parse_process(render(p)) == p

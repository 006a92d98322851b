from tccs import experiments, library
from tccs.reduction import (
    ActionLabel, eliminate_commits, enumerate_action_steps, enumerate_reconfig_steps, fresh_name,
    has_barb, reduction_steps, weak_barb,
)
from tccs.syntax import TAU, ActName, Par, TransName, parse_process, render

n1 = TransName("n1")


def test_p1_has_one_tentative_action():
    steps = enumerate_action_steps(library.process("P1"), n1)
    assert len(steps) == 1
    (tr,) = steps
    assert tr.label == ActionLabel(ActName("a"), n1)
    assert tr.renamed == {TransName("l")}
    assert render(tr.target) == "txn n1 { co } else { 0 }"


def test_plain_synchronisation():
    p = parse_process("a.0 | 'a.0")
    taus = [t for t in enumerate_action_steps(p) if t.label == ActionLabel(TAU)]
    assert [t.target for t in taus] == [Par(parse_process("0"), parse_process("0"))]


def test_transactional_synchronisation_merges_names():
    p = parse_process("txn k1 { a.co } else { 0 } | txn k2 { 'a.co } else { 0 }")
    merged = [t for t in enumerate_action_steps(p, n1) if t.label == ActionLabel(TAU, n1)]
    assert len(merged) == 1
    assert merged[0].renamed == {TransName("k1"), TransName("k2")}
    assert merged[0].sigma.target == n1


def test_commit_is_broadcast():
    p = parse_process("txn m { co } else { 0 } | txn m { w_1 | co } else { 0 }")
    commits = [t for t in enumerate_reconfig_steps(p) if t.kind == "co"]
    assert len(commits) == 1
    assert "txn" not in render(commits[0].target)
    assert has_barb(commits[0].target, "w_1")


def test_abort_without_commit():
    re = enumerate_reconfig_steps(library.process("P1"))
    assert {(t.kind, render(t.target)) for t in re} == {("ab", "0")}


def test_dormant_activation():
    re = enumerate_reconfig_steps(parse_process("txn { a.0 } else { 0 }"), n1)
    assert {(t.kind, render(t.target)) for t in re} == {("new", "txn n1 { a } else { 0 }")}


def test_eliminate_commits():
    assert render(eliminate_commits(parse_process("co"))) == "0"
    assert render(eliminate_commits(parse_process("co | a.co"))) == "0 | a.co"
    assert render(eliminate_commits(parse_process("0"))) == "0"


def test_reduction_steps_of_inert():
    assert reduction_steps(parse_process("0")) == frozenset()


def test_barbs():
    assert weak_barb(parse_process("w_1.0"), "w_1") is True
    assert weak_barb(parse_process("rec X. tau.X"), "w_1") is False
    assert not has_barb(parse_process("nu w_1. w_1.0"), "w_1")


def test_residual_barbs_of_the_observer_example():
    s1 = parse_process(experiments.S1_23)
    target = experiments.components(parse_process(
        "txn m2 { co } else { 0 } | txn m2 { w_2 | co } else { 0 }"))
    (s1p,) = [s for s in reduction_steps(s1) if experiments.components(s) == target]
    assert weak_barb(s1p, "w_2") is True
    assert weak_barb(s1p, "w_1") is False


def test_fresh_name_skips_used_names():
    assert fresh_name([n1]) == TransName("n2")
    assert fresh_name([n1], external=True) == TransName("m1", True)

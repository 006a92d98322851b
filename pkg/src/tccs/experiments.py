"""Built-in experiment table behind ``tccs repro``.

Each experiment returns a list of ``Check`` results; an experiment passes when
all of its checks do.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Callable

from . import library
from .bisim import Bisimilar, NotBisimilar, RelationOk, check_bisim, verify_relation
from .corpus import random_formula, random_pair, random_finite_process
from .history import (
    Aborted, Configuration, Tentative, commit_consistent,
    eq_consistent, initial_ext, initial_std, isr_set,
)
from .logic import (
    DiamondAct, DiamondCo, DiamondTau, Neg, Var, conj, box_tau, iff, HascoPred, parse_formula,
    sat, sat_canco, sat_eq, sat_hasco, translate_canco_to_hasco, translate_eq_to_canco,
    TT,
)
from .lts import SearchBounds, steps
from .reduction import canonical_process, reduction_steps, weak_barb
from .syntax import (
    ActName, Par, Restrict, Running, TransName, ZERO, drop_inert, free_actions, free_transaction_names,
    parse_process, render,
)


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


# ---------------------------------------------------------------------------
# Helpers shared with the acceptance tests

def components(p) -> list:
    """Name-independent shape of the parallel components of ``p``: the
    components are grouped by transaction name, restrictions on channels
    the body no longer uses are dropped, and each name is rendered as ``@``."""
    groups: dict = {}

    def walk(q):
        if isinstance(q, Par):
            walk(q.left)
            walk(q.right)
        elif isinstance(q, Restrict) and q.action not in free_actions(q.body):
            walk(q.body)
        elif q != ZERO:
            names = free_transaction_names(q)
            key = next(iter(names)) if len(names) == 1 else None
            text = _text(q)
            if key is not None:
                text = text.replace(f"txn {key} ", "txn @ ")
            groups.setdefault(key, []).append(text)

    walk(drop_inert(p))
    return sorted(tuple(sorted(g)) for g in groups.values())


def _text(q) -> str:
    """Rendering that sorts parallel components, so ``w_1 | co`` and
    ``co | w_1`` read the same."""
    if isinstance(q, Par):
        pieces = []

        def flat(r):
            if isinstance(r, Par):
                flat(r.left)
                flat(r.right)
            else:
                pieces.append(_text(r))

        flat(q)
        return "(" + " | ".join(sorted(pieces)) + ")"
    if isinstance(q, Running):
        return f"txn {q.name} {{ {_text(q.default)} }} else {{ {_text(q.alternative)} }}"
    return render(q)


def reachable(p, limit: int = 50_000) -> list:
    start = canonical_process(p)
    seen = {start}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        for r in reduction_steps(q):
            r = canonical_process(r)
            if r not in seen:
                if len(seen) >= limit:
                    raise RuntimeError("reduction graph too large")
                seen.add(r)
                queue.append(r)
    return list(seen)


R_23 = ("txn m { co } else { 0 } | txn m { co } else { 0 } | "
        "txn m { w_1 | co } else { 0 } | txn m { w_2 | co } else { 0 }")
S1_23 = ("txn m1 { co } else { 0 } | txn m1 { w_1 | co } else { 0 } | "
         "txn m2 { co } else { 0 } | txn m2 { w_2 | co } else { 0 }")


def relation_29():
    """The relation of the standard-bisimulation example for P1 and P2_29,
    one representative per fresh name."""
    k = TransName("k", True)
    star, b = Tentative(k, None), Tentative(k, ActName("b"))
    body = parse_process("txn k { 0 } else { 0 }")
    body = type(body)(body.default, k, body.alternative)
    return [
        (initial_std(library.process("P1")), initial_std(library.process("P2_29"))),
        (Configuration((star,), ZERO), Configuration((b,), body)),
        (Configuration((star,), ZERO), Configuration((Aborted(),), ZERO)),
    ]


def flatten_disjuncts(f) -> frozenset:
    """Disjunct set of ``f`` with diamonds distributed over disjunctions."""
    from .logic import _as_disjunction

    parts = _as_disjunction(f)
    if parts is not None:
        return frozenset().union(*(flatten_disjuncts(p) for p in parts))
    if isinstance(f, DiamondTau):
        return frozenset(DiamondTau(d) for d in flatten_disjuncts(f.body))
    if isinstance(f, DiamondAct):
        return frozenset(DiamondAct(f.var, f.action, d) for d in flatten_disjuncts(f.body))
    if isinstance(f, DiamondCo):
        return frozenset(DiamondCo(f.values, d) for d in flatten_disjuncts(f.body))
    return frozenset([f])


def normal_form(f):
    """Disjunction-insensitive shape used for structural comparison."""
    return frozenset(_shape(d) for d in flatten_disjuncts(f))


def _shape(f):
    if isinstance(f, DiamondTau):
        return ("tau", normal_form(f.body))
    if isinstance(f, DiamondAct):
        return ("act", f.var, f.action, normal_form(f.body))
    if isinstance(f, DiamondCo):
        return ("co", f.values, normal_form(f.body))
    return ("atom", f)


# ---------------------------------------------------------------------------
# Experiments

B = SearchBounds()


def ex_2_3(seed: int = 0) -> list[Check]:
    p2, q2, o = (library.process(n) for n in ("P2", "Q2", "O"))
    out = []
    r = parse_process(R_23)
    target = components(r)
    states = reachable(Par(q2, o))
    out.append(Check("Q2 | O reaches R", any(components(s) == target for s in states)))
    dichotomy = True
    for s in reachable(r):
        w1, w2 = weak_barb(s, "w_1"), weak_barb(s, "w_2")
        if w1 is None or w2 is None or w1 != w2:
            dichotomy = False
            break
    out.append(Check("every residual of R has both barbs or neither", dichotomy))
    s1 = parse_process(S1_23)
    s1p = [s for s in reduction_steps(s1)
           if components(s) == components(parse_process(
               "txn m2 { co } else { 0 } | txn m2 { w_2 | co } else { 0 }"))]
    out.append(Check("S1 aborts m1 into S1'", len(s1p) == 1))
    if s1p:
        out.append(Check("S1' has w_2 but not w_1",
                         weak_barb(s1p[0], "w_2") is True and weak_barb(s1p[0], "w_1") is False))
    out.append(Check("ftn(P2) = {k1, k2}",
                     {k.name for k in free_transaction_names(p2)} == {"k1", "k2"}))
    for kind in ("standard", "hasco", "eq", "canco"):
        mk = initial_std if kind == "standard" else initial_ext
        v = check_bisim(kind, mk(p2), mk(q2), B, formula=False)
        out.append(Check(f"P2, Q2 not {kind}-bisimilar", isinstance(v, NotBisimilar)))
    return out


def ex_2_9(seed: int = 0) -> list[Check]:
    p1, p2 = library.process("P1"), library.process("P2_29")
    out = []
    c = initial_std(p1)
    k_steps = [s for s in steps("std", c) if s.rule == "star"]
    out.append(Check("P1 has a degenerate k-step", bool(k_steps)))
    for kind in ("standard", "hasco", "eq", "canco"):
        mk = initial_std if kind == "standard" else initial_ext
        v = check_bisim(kind, mk(p1), mk(p2), B, formula=False)
        out.append(Check(f"P1, P2_29 {kind}-bisimilar", isinstance(v, Bisimilar)))
    rel = relation_29()
    out.append(Check("R u Id is a bisimulation",
                     isinstance(verify_relation("standard", rel, B, include_identity=True),
                                RelationOk)))
    out.append(Check("R without the k(b) pair is not",
                     not isinstance(verify_relation("standard", [rel[0], rel[2]], B,
                                                    include_identity=True), RelationOk)))
    return out


def ex_3_2(seed: int = 0) -> list[Check]:
    c = initial_ext(library.process("Q2"))
    m1, m2 = TransName("m1", True), TransName("m2", True)
    firsts = [s.target for s in steps("ext", c, alphabet=("a",), ext_name=m1)
              if s.rule == "k(a)"]
    seconds = [s.target for d in firsts for s in steps("ext", d, alphabet=("b",), ext_name=m2)
               if s.rule == "k(a)"]
    merged = [s.target for d in seconds for s in steps("ext", d) if s.rule == "k(tau)"]
    ok = any(isr_set(d) == {m1, m2} and len(d.eq.classes) == 1
             and len(d.eq.class_of(m1)) == 5 for d in merged)
    out = [Check("Q2 reaches C_Q with one merged class of five names", ok)]
    p = initial_ext(library.process("P2"))
    firsts = [s.target for s in steps("ext", p, alphabet=("a",), ext_name=m1) if s.rule == "k(a)"]
    seconds = [s.target for d in firsts for s in steps("ext", d, alphabet=("b",), ext_name=m2)
               if s.rule == "k(a)"]
    out.append(Check("P2 keeps m1, m2 in separate classes",
                     bool(seconds) and all(not d.eq.related(m1, m2) for d in seconds)))
    return out


def _golden(logic: str, formula: str, holds: str, fails: str) -> list[Check]:
    f = parse_formula(formula)
    a = sat(logic, initial_ext(library.process(holds)), f, B)
    b = sat(logic, initial_ext(library.process(fails)), f, B)
    return [Check(f"{holds} satisfies {formula}", a is True),
            Check(f"{fails} does not", b is False)]


def ex_4_3(seed: int = 0) -> list[Check]:
    return _golden("hasco", library.FORMULAS["hasco_intro"], "Q2", "P2")


def ex_4_7(seed: int = 0) -> list[Check]:
    return _golden("eq", library.FORMULAS["eq_intro"], "P3", "Q3")


def ex_4_12(seed: int = 0) -> list[Check]:
    return _golden("canco", library.FORMULAS["canco_intro"], "Q2", "P2")


def ex_4_8(seed: int = 0, suite: int = 300) -> list[Check]:
    c1, c2 = library.committed_pair()
    f = parse_formula("#l =co #k")
    out = [Check("commit-consistent", commit_consistent(c1, c2)),
           Check("not eq-consistent", not eq_consistent(c1, c2)),
           Check("l =co k separates them", sat_eq(c1, f, B) is False and sat_eq(c2, f, B) is True)]
    rng = random.Random(48 + seed)
    consts = (TransName("k", True), TransName("l", True))
    same = all(sat_hasco(c1, g, B) == sat_hasco(c2, g, B)
               for g in (random_formula(rng, "hasco", 3, constants=consts) for _ in range(suite)))
    out.append(Check(f"{suite} random hasco formulas do not separate them", same))
    return out


def phi_62():
    x, y = Var("x"), Var("y")
    core = conj(Neg(HascoPred(x)), Neg(HascoPred(y)),
                box_tau(iff(HascoPred(x), HascoPred(y))),
                DiamondTau(conj(HascoPred(x), HascoPred(y))))
    return DiamondAct("x", ActName("a"), DiamondAct("y", ActName("b"), core))


def ex_6_2(seed: int = 0) -> list[Check]:
    f = parse_formula(library.FORMULAS["canco_intro"])
    t = translate_canco_to_hasco(f)
    q2, p2 = (initial_ext(library.process(n)) for n in ("Q2", "P2"))
    out = [Check("translation keeps the verdicts",
                 sat_hasco(q2, t, B) is True and sat_hasco(p2, t, B) is False),
           Check("phi' keeps the verdicts",
                 sat_hasco(q2, phi_62(), B) is True and sat_hasco(p2, phi_62(), B) is False)]
    out.append(Check("translation contains the conjuncts of phi'", contains_62(t)))
    return out


def contains_62(t) -> bool:
    """``<x(a)><y(b)>`` followed by a tau step into a conjunction holding
    nHasco(x,y), [tau]EquiCo(x,y) and <tau>Hasco(x,y)."""
    from .logic import Conj, equico, hasco_all, nhasco

    x, y = Var("x"), Var("y")

    def parts(f):
        if isinstance(f, Conj):
            return set().union(*(parts(p) for p in f.parts)) if f.parts else set()
        return {f}

    def inner(f):
        if not isinstance(f, DiamondTau):
            return False
        ps = parts(f.body)
        nh = parts(nhasco({x, y})) <= ps
        eq = box_tau(equico({x, y})) in ps
        tau_h = any(isinstance(p, DiamondTau) and parts(hasco_all({x, y})) <= parts(p.body)
                    for p in ps)
        return nh and eq and tau_h

    if not (isinstance(t, DiamondAct) and t.var == "x"):
        return False
    for p in parts(t.body):
        if isinstance(p, DiamondAct) and p.var == "y":
            if any(inner(q) for q in parts(p.body)):
                return True
    return False


def expected_66():
    """The expansion as printed, with diamonds over disjunctions distributed
    the way the printed derivation does."""
    from .logic import disj, FF

    x, y = Var("x"), Var("y")
    a, b = ActName("a"), ActName("b")

    def co(*vs):
        return frozenset(vs)

    t_y = disj(DiamondCo(co(y), DiamondTau(FF)), DiamondTau(FF))
    t_xy = disj(DiamondCo(co(x, y), DiamondTau(TT)),
                DiamondCo(co(x), DiamondCo(co(y), DiamondTau(FF))),
                DiamondCo(co(x), DiamondTau(FF)),
                DiamondCo(co(y), DiamondCo(co(x), DiamondTau(FF))),
                DiamondCo(co(y), DiamondTau(FF)),
                DiamondTau(FF))
    return DiamondAct("x", a, disj(
        DiamondCo(co(x), DiamondTau(DiamondAct("y", b, t_y))),
        DiamondTau(DiamondCo(co(x), DiamondAct("y", b, t_y))),
        DiamondTau(DiamondAct("y", b, t_xy))))


def ex_6_6(seed: int = 0) -> list[Check]:
    f = parse_formula(library.FORMULAS["eq_intro"])
    t = translate_eq_to_canco(f)
    out = [Check("expansion matches the printed one", normal_form(t) == normal_form(expected_66()))]
    p3, q3 = (initial_ext(library.process(n)) for n in ("P3", "Q3"))
    out.append(Check("translation keeps the verdicts",
                     sat_canco(p3, t, B) is True and sat_canco(q3, t, B) is False))
    return out


def _pairs_agree(n: int, seed: int) -> list[Check]:
    rng = random.Random(seed)
    bad = 0
    for _ in range(n):
        p, q = random_pair(rng)
        verdicts = set()
        for kind in ("standard", "hasco", "eq", "canco"):
            mk = initial_std if kind == "standard" else initial_ext
            v = check_bisim(kind, mk(p), mk(q), SearchBounds(max_states=2_000), formula=False)
            if isinstance(v, (Bisimilar, NotBisimilar)):
                verdicts.add(type(v))
        bad += len(verdicts) > 1
    return [Check(f"{n} random pairs: all four bisimilarities agree", bad == 0,
                  f"{bad} disagreements")]


def th_3_9(seed: int = 0) -> list[Check]:
    return _pairs_agree(25, 39 + seed)


def th_5_6(seed: int = 0) -> list[Check]:
    return _pairs_agree(25, 56 + seed)


def _translation_suite(logic_from: str, logic_to: str, translate, n: int, seed: int):
    rng = random.Random(seed)
    bad = 0
    for _ in range(n):
        c = initial_ext(random_finite_process(rng, 6))
        f = random_formula(rng, logic_from, 3)
        a, b = sat(logic_from, c, f, B), sat(logic_to, c, translate(f), B)
        bad += a is not None and b is not None and a != b
    return [Check(f"{n} random formulas keep their truth value", bad == 0, f"{bad} mismatches")]


def th_6_4(seed: int = 0) -> list[Check]:
    return _translation_suite("canco", "hasco", translate_canco_to_hasco, 25, 64 + seed)


def th_6_7(seed: int = 0) -> list[Check]:
    return _translation_suite("eq", "canco", translate_eq_to_canco, 25, 67 + seed)


EXPERIMENTS: dict[str, Callable[[], list[Check]]] = {
    "2.3": ex_2_3,
    "2.9": ex_2_9,
    "3.2": ex_3_2,
    "4.3": ex_4_3,
    "4.7": ex_4_7,
    "4.8": ex_4_8,
    "4.12": ex_4_12,
    "6.2": ex_6_2,
    "6.6": ex_6_6,
    "3.9": th_3_9,
    "5.6": th_5_6,
    "6.4": th_6_4,
    "6.7": th_6_7,
}


def run(ident: str, seed: int = 0) -> dict[str, list[Check]]:
    """Run one experiment, or all of them; ``seed`` shifts the random suites."""
    if ident == "all":
        return {k: fn(seed) for k, fn in EXPERIMENTS.items()}
    if ident not in EXPERIMENTS:
        raise KeyError(ident)
    return {ident: EXPERIMENTS[ident](seed)}

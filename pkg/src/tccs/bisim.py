"""Bounded checkers for the four weak bisimulations.

A check explores the graph of configuration pairs reachable from the input
pair, then computes the greatest fixpoint by repeatedly removing pairs that
fail their consistency predicate or have a challenge with no surviving
response.  Pairs beyond the bounds are assumed related, and a challenge whose
responses could not all be enumerated is never counted as failed, so a
``NotBisimilar`` verdict is sound even when bounds were hit; only a missing
refutation under a hit bound gives ``Unknown``.

Pairs are identified up to a pair-level canonical key: names are renamed
canonically (external names jointly, since both sides share labels) and
history entries that can no longer influence the game are dropped.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .history import (
    Committed, Configuration, ExtConfiguration, Tentative, commit_consistent,
    consistent, eq_consistent, eq_holds, hasco_set, permute_config,
)
from .logic import (
    Conj, DiamondAct, DiamondCo, DiamondTau, EqCo, Formula, HascoPred, ModelChecker, Neg, Var,
    conj,
)
from .lts import (
    CoLabel, SearchBounds, config_names, default_alphabet, state_key, steps,
    weak_moves, weak_steps,
)
from .syntax import TAU, Permutation, TransName, free_transaction_names

__all__ = [
    "BISIM_KINDS", "Bisimilar", "NotBisimilar", "Unknown", "Verdict", "check_bisim",
    "verify_relation", "RelationOk", "Counterexample", "distinguishing_formula", "pair_key",
    "lts_kind",
]

BISIM_KINDS = ("standard", "hasco", "eq", "canco")
_LTS_OF = {"standard": "std", "hasco": "ext", "eq": "ext", "canco": "cs"}
_LOGIC_OF = {"hasco": "hasco", "eq": "eq", "canco": "canco"}


def lts_kind(kind: str) -> str:
    try:
        return _LTS_OF[kind]
    except KeyError:
        raise ValueError(f"unknown bisimulation kind {kind!r}") from None


@dataclass
class Bisimilar:
    relation: list  # pairs of configurations closed under the game, up to pair_key

    exit_code = 0


@dataclass
class NotBisimilar:
    reason: str
    trace: list = field(default_factory=list)
    formula: Optional[Formula] = None

    exit_code = 1


@dataclass
class Unknown:
    reason: str

    exit_code = 2


Verdict = Union[Bisimilar, NotBisimilar, Unknown]


# ---------------------------------------------------------------------------
# Consistency and canonical pair keys

def _consistency_failure(kind: str, c1, c2) -> Optional[str]:
    if kind == "standard":
        return None if consistent(c1.history, c2.history) else "histories are not consistent"
    if kind == "hasco":
        return None if commit_consistent(c1, c2) else "committed names differ"
    if kind == "eq":
        return None if eq_consistent(c1, c2) else "committed-together predicates differ"
    return None


def _ext_prune(c: ExtConfiguration, drop: frozenset) -> ExtConfiguration:
    """Remove aborted entries and the given committed names."""
    gone = {e.name for e in c.history if e.state == "ab"} | drop
    if not gone:
        return c
    history = tuple(e for e in c.history if e.name not in gone)
    keep = c.eq.carrier - gone
    return ExtConfiguration(c.eq.restrict(keep), history, c.process)


def _std_dead(entry, live: frozenset) -> bool:
    if isinstance(entry, Tentative):
        return entry.action is None and entry.name not in live
    return True


def _std_entry_value(entry):
    return entry.action if isinstance(entry, Committed) else None


def pair_key(kind: str, c1, c2):
    """Canonical identity of a pair of configurations for the game."""
    ok = _consistency_failure(kind, c1, c2) is None
    if kind == "standard":
        live1 = free_transaction_names(c1.process)
        live2 = free_transaction_names(c2.process)
        keep = [i for i, (a, b) in enumerate(zip(c1.history, c2.history))
                if not (_std_dead(a, live1) and _std_dead(b, live2)
                        and _std_entry_value(a) == _std_entry_value(b))]
        keep += range(min(len(c1.history), len(c2.history)),
                      max(len(c1.history), len(c2.history)))
        h1 = tuple(c1.history[i] for i in keep if i < len(c1.history))
        h2 = tuple(c2.history[i] for i in keep if i < len(c2.history))
        return (ok, state_key(Configuration(h1, c1.process)),
                state_key(Configuration(h2, c2.process)))
    if kind == "canco":
        both = hasco_set(c1) | hasco_set(c2)
    else:
        both = hasco_set(c1) & hasco_set(c2) if ok else frozenset()
    d1, d2 = _ext_prune(c1, both), _ext_prune(c2, both)
    order = []
    for e in d1.history + d2.history:
        if e.name not in order:
            order.append(e.name)
    targets = [TransName(f"m{i}", True) for i in range(1, len(order) + 1)]
    if order != targets:
        pi = Permutation.extending(order, targets)
        d1, d2 = permute_config(d1, pi), permute_config(d2, pi)
    return (ok, state_key(d1), state_key(d2))


# ---------------------------------------------------------------------------
# The game

def _externals(c) -> frozenset:
    return frozenset(k for k in config_names(c) if k.external)


@dataclass
class _Challenge:
    side: int
    label: object
    target: object
    responses: list  # pair keys
    complete: bool


@dataclass
class _Node:
    c1: object
    c2: object
    depth: int
    failure: Optional[str] = None
    challenges: Optional[list] = None  # None while unexplored


class _Game:
    def __init__(self, kind: str, bounds: SearchBounds, alphabet, challenger: Optional[str]):
        if kind not in BISIM_KINDS:
            raise ValueError(f"unknown bisimulation kind {kind!r}")
        if challenger not in ("strong", "definition"):
            raise ValueError("challenger must be 'strong' or 'definition'")
        self.kind = kind
        self.lts = _LTS_OF[kind]
        self.bounds = bounds
        self.alphabet = alphabet
        self.challenger = challenger
        self.nodes: dict = {}
        self.bound_hit = False
        self.removed: dict = {}  # key -> (rank, reason, challenge index or None)
        self._weak_cache: dict = {}

    # -- moves --------------------------------------------------------------
    def _respond(self, c, label):
        key = (c, label)
        if key not in self._weak_cache:
            self._weak_cache[key] = weak_steps(self.lts, c, label, self.bounds)
        return self._weak_cache[key]

    def _challenges(self, c, other) -> tuple[list, bool]:
        avoid = _externals(other)
        if self.kind == "standard":
            return ([(s.label, s.target) for s in steps(self.lts, c, avoid=avoid)
                     if s.challenger], True)
        strong = [(s.label, s.target) for s in steps(self.lts, c, avoid=avoid,
                                                     alphabet=self.alphabet)]
        if self.challenger == "strong":
            return strong, True
        weak, exhaustive = weak_moves(self.lts, c, self.bounds, avoid=avoid,
                                      alphabet=self.alphabet)
        if self.kind == "canco":
            # strong for tau and k(a), weak for commit labels
            moves = [m for m in strong if not isinstance(m[0], CoLabel)]
            moves += [m for m in weak if isinstance(m[0], CoLabel)]
            return moves, exhaustive
        return weak, exhaustive

    # -- exploration ----------------------------------------------------------
    def add(self, c1, c2, depth: int):
        key = pair_key(self.kind, c1, c2)
        if key not in self.nodes:
            if len(self.nodes) >= self.bounds.max_states:
                self.bound_hit = True
                return key, False
            self.nodes[key] = _Node(c1, c2, depth)
            return key, True
        return key, False

    def explore(self, c1, c2):
        root, _ = self.add(c1, c2, 0)
        queue = deque([root])
        while queue:
            key = queue.popleft()
            node = self.nodes[key]
            node.failure = _consistency_failure(self.kind, node.c1, node.c2)
            if node.failure is not None or key[1] == key[2]:
                # identical sides are related by the identity relation
                node.challenges = []
                continue
            if node.depth >= self.bounds.depth:
                self.bound_hit = True
                continue
            node.challenges = []
            for side, mine, other in ((1, node.c1, node.c2), (2, node.c2, node.c1)):
                moves, exhaustive = self._challenges(mine, other)
                if not exhaustive:
                    self.bound_hit = True
                for label, target in moves:
                    res = self._respond(other, label)
                    complete = res.exhaustive
                    responses = []
                    for r in res:
                        pair = (target, r) if side == 1 else (r, target)
                        k, new = self.add(*pair, node.depth + 1)
                        if k in self.nodes:
                            responses.append(k)
                            if new:
                                queue.append(k)
                        else:
                            complete = False
                    if not complete:
                        self.bound_hit = True
                    node.challenges.append(_Challenge(side, label, target, responses, complete))
        return root

    def solve(self) -> None:
        for key, node in self.nodes.items():
            if node.failure is not None:
                self.removed[key] = (0, node.failure, None)
        rank = 0
        changed = True
        while changed:
            rank += 1
            changed = False
            batch = {}
            for key, node in self.nodes.items():
                if key in self.removed or not node.challenges:
                    continue
                for i, ch in enumerate(node.challenges):
                    if ch.complete and all(r in self.removed for r in ch.responses):
                        side = "left" if ch.side == 1 else "right"
                        batch[key] = (rank, f"{side} move {ch.label} cannot be matched", i)
                        break
            if batch:
                self.removed.update(batch)
                changed = True

    def rank(self, c1, c2) -> Optional[int]:
        entry = self.removed.get(pair_key(self.kind, c1, c2))
        return None if entry is None else entry[0]


def _trace(game: _Game, root) -> list[str]:
    out = []
    key = root
    seen = set()
    while key in game.removed and key not in seen:
        seen.add(key)
        node = game.nodes[key]
        rank, reason, idx = game.removed[key]
        out.append(f"{node.c1}  vs  {node.c2}: {reason}")
        if idx is None:
            break
        ch = node.challenges[idx]
        if not ch.responses:
            break
        key = min(ch.responses, key=lambda k: game.removed[k][0])
    return out


def check_bisim(kind: str, c1, c2, bounds: SearchBounds = SearchBounds(), *,
                alphabet=None, challenger: str = "strong",
                formula: bool = True) -> Verdict:
    """Decide (within bounds) whether ``c1`` and ``c2`` are ``kind``-bisimilar.

    With ``challenger="strong"`` (the default) every challenge is a single
    step; ``"definition"`` uses the shape each definition states literally
    (weak challenges for hasco and eq, weak commit-label challenges for
    canco).  Both shapes give the same verdicts; strong ones are cheaper.
    Degenerate moves range over ``alphabet`` (default: the free channels of
    both processes, both polarities).
    """
    extended = isinstance(c1, ExtConfiguration)
    if extended != (kind != "standard") or extended != isinstance(c2, ExtConfiguration):
        raise TypeError(f"{kind} bisimulation needs "
                        f"{'plain' if kind == 'standard' else 'extended'} configurations")
    if alphabet is None:
        alphabet = default_alphabet(c1.process) | default_alphabet(c2.process)
    game = _Game(kind, bounds, frozenset(alphabet), challenger)
    root = game.explore(c1, c2)
    game.solve()
    if root in game.removed:
        verdict = NotBisimilar(game.removed[root][1], _trace(game, root))
        if formula and kind != "standard":
            verdict.formula = _extract(game, c1, c2)
        return verdict
    if game.bound_hit:
        return Unknown(f"search bounds reached after {len(game.nodes)} pairs")
    relation = [(n.c1, n.c2) for k, n in game.nodes.items() if k not in game.removed]
    return Bisimilar(relation)


# ---------------------------------------------------------------------------
# Distinguishing formulas

class _Budget(Exception):
    pass


def _neg(f: Formula) -> Formula:
    return f.body if isinstance(f, Neg) else Neg(f)


def _abstract(f: Formula, k: TransName, x: str) -> Formula:
    from .logic import _map_values
    return _map_values(f, lambda v, _: Var(x) if v == k else v)


def _extract(game: _Game, c1, c2, max_size: int = 5_000) -> Optional[Formula]:
    budget = [max_size]
    counter = [0]

    def literal(a, b) -> Formula:
        if game.kind == "hasco":
            diff = sorted(hasco_set(a) ^ hasco_set(b), key=lambda k: k.name)
            k = diff[0]
            f = HascoPred(k)
            return f if k in hasco_set(a) else _neg(f)
        names = sorted(hasco_set(a) | hasco_set(b), key=lambda k: k.name)
        for i, k in enumerate(names):
            for k2 in names[i:]:
                if eq_holds(a, k, k2) != eq_holds(b, k, k2):
                    f = EqCo(k, k2)
                    return f if eq_holds(a, k, k2) else _neg(f)
        raise AssertionError("no differing predicate")

    def dist(a, b) -> Formula:
        """A formula satisfied by ``a`` and not by ``b``."""
        budget[0] -= 1
        if budget[0] < 0:
            raise _Budget
        r = game.rank(a, b)
        if r is None:
            raise _Budget
        if r == 0:
            return literal(a, b)
        for side, mine, other in ((1, a, b), (2, b, a)):
            moves, _ = game._challenges(mine, other)
            for label, target in moves:
                responses = game._respond(other, label)
                if not responses.exhaustive:
                    continue
                ranks = [game.rank(*((target, d) if side == 1 else (d, target)))
                         for d in responses]
                if any(x is None or x >= r for x in ranks):
                    continue
                # each part holds of the challenger's target and fails for one response
                if side == 1:
                    parts = [dist(target, d) for d in responses]
                else:
                    parts = [_neg(dist(d, target)) for d in responses]
                parts = list(dict.fromkeys(parts))
                body = conj(*parts) if parts else Conj(())
                f = _diamond(label, body)
                return f if side == 1 else _neg(f)
        raise _Budget

    def _diamond(label, body: Formula) -> Formula:
        if label == TAU:
            return DiamondTau(body)
        if isinstance(label, CoLabel):
            return DiamondCo(label.names, body)
        counter[0] += 1
        x = f"x{counter[0]}"
        return DiamondAct(x, label.action, _abstract(body, label.name, x))

    try:
        f = dist(c1, c2)
    except (_Budget, RecursionError):
        return None
    checker = ModelChecker(_LOGIC_OF[game.kind], game.bounds)
    if checker.check(c1, f) is True and checker.check(c2, f) is False:
        return f
    return None


def distinguishing_formula(kind: str, c1, c2, bounds: SearchBounds = SearchBounds(),
                           **kw) -> Optional[Formula]:
    """A formula of the kind's logic true of ``c1`` and false of ``c2``.

    Raises ``ValueError`` unless the pair is found not bisimilar.
    """
    if kind == "standard":
        return None
    verdict = check_bisim(kind, c1, c2, bounds, **kw)
    if not isinstance(verdict, NotBisimilar):
        raise ValueError("configurations are not known to be distinguishable")
    return verdict.formula


# ---------------------------------------------------------------------------
# Checking a candidate relation

@dataclass
class RelationOk:
    pairs: int


@dataclass
class Counterexample:
    pair: tuple
    clause: str
    move: Optional[str] = None


def verify_relation(kind: str, relation: Iterable[tuple], bounds: SearchBounds = SearchBounds(),
                    *, include_identity: bool = False, alphabet=None,
                    challenger: str = "strong") -> Union[RelationOk, Counterexample]:
    """Check that ``relation`` (optionally with the identity) is a
    ``kind``-bisimulation up to the canonical pair key."""
    pairs = list(relation)
    if alphabet is None:
        alphabet = frozenset().union(*(default_alphabet(c.process) for p in pairs for c in p))
    game = _Game(kind, bounds, frozenset(alphabet), challenger)
    keys = {pair_key(kind, a, b) for a, b in pairs}

    def related(a, b) -> bool:
        if include_identity and state_key(a) == state_key(b):
            return True
        return pair_key(kind, a, b) in keys

    for a, b in pairs:
        failure = _consistency_failure(kind, a, b)
        if failure:
            return Counterexample((a, b), "consistency: " + failure)
        for side, mine, other in ((1, a, b), (2, b, a)):
            moves, _ = game._challenges(mine, other)
            for label, target in moves:
                res = game._respond(other, label)
                ok = any(related(*((target, d) if side == 1 else (d, target))) for d in res)
                if not ok:
                    who = "left" if side == 1 else "right"
                    return Counterexample((a, b), f"transfer: {who} move unmatched",
                                          f"{label} to {target}")
    return RelationOk(len(pairs))

"""Seeded random generators for processes, formulas and permutations."""

from __future__ import annotations

import random
from typing import Optional

from .history import initial_ext
from .logic import (
    TT, DiamondAct, DiamondCo, DiamondTau, EqCo, Formula, HascoPred, Neg, Var, conj,
)
from .lts import SearchBounds, explore, skeleton_key
from .syntax import (
    CO, ZERO, ActName, Dormant, Par, Permutation, Process, ProcVar, Rec, Restrict, Running, Sum,
    TAU, TransName, is_well_formed, term_size,
)

__all__ = [
    "random_process", "random_finite_process", "random_pair", "random_formula",
    "random_permutation", "is_finite_state",
]

TXN_NAMES = ("k", "l")


class _Gen:
    def __init__(self, rng: random.Random, actions, rec: float) -> None:
        self.rng = rng
        self.actions = tuple(actions)
        self.rec = rec

    def prefix(self):
        r = self.rng.random()
        if r < 0.12:
            return TAU
        return ActName(self.rng.choice(self.actions), self.rng.random() < 0.4)

    def plain(self, budget: int, with_co: bool, var: Optional[str] = None) -> Process:
        """A process without named or dormant transactions."""
        r = self.rng.random()
        if budget <= 1 or r < 0.2:
            leaves = [ZERO] + ([CO] if with_co else []) + ([ProcVar(var)] if var else [])
            return self.rng.choice(leaves)
        if r < 0.65:
            n = 1 if budget < 4 or self.rng.random() < 0.7 else 2
            branches = []
            for _ in range(n):
                share = max(1, (budget - n) // n)
                branches.append((self.prefix(), self.plain(share, with_co, var)))
            return Sum(tuple(branches))
        if r < 0.85 and budget >= 3:
            left = self.rng.randint(1, budget - 2)
            return Par(self.plain(left, with_co, var), self.plain(budget - 1 - left, with_co, var))
        return Restrict(self.rng.choice(self.actions), self.plain(budget - 1, with_co, var))

    def top(self, budget: int) -> Process:
        r = self.rng.random()
        if budget >= 3 and r < 0.45:
            body = self.rng.randint(1, budget - 2)
            alt = self.plain(budget - 1 - body, False) if self.rng.random() < 0.3 else ZERO
            default = self.plain(body, True)
            if self.rng.random() < 0.25:
                return Dormant(default, alt)
            return Running(default, TransName(self.rng.choice(TXN_NAMES)), alt)
        if budget >= 3 and r < 0.65:
            left = self.rng.randint(1, budget - 2)
            return Par(self.top(left), self.top(budget - 1 - left))
        if budget >= 2 and r < 0.72:
            return Restrict(self.rng.choice(self.actions), self.top(budget - 1))
        if budget >= 4 and r < 0.72 + self.rec:
            return self.recursive(budget)
        return self.plain(budget, False)

    def recursive(self, budget: int) -> Process:
        # Recursion only through a dormant transaction's alternative: plain
        # recursive prefixes keep spawning tentative actions and never close.
        body = self.plain(budget - 2, True)
        return Rec("X", Dormant(body, ProcVar("X")))


def random_process(rng: random.Random, max_size: int = 8, *, actions=("a", "b"),
                   rec: float = 0.05) -> Process:
    """A random well-formed process of size at most ``max_size``."""
    gen = _Gen(rng, actions, rec)
    while True:
        p = gen.top(rng.randint(max(1, max_size // 2), max_size))
        if term_size(p) <= max_size and is_well_formed(p):
            return p


def is_finite_state(p: Process, max_states: int = 2_000) -> bool:
    lts = explore("ext", initial_ext(p), SearchBounds(max_states=max_states, depth=10_000),
                  key=skeleton_key)
    return lts.exhaustive


def random_finite_process(rng: random.Random, max_size: int = 8, **kw) -> Process:
    while True:
        p = random_process(rng, max_size, **kw)
        if is_finite_state(p):
            return p


def random_pair(rng: random.Random, max_size: int = 8, **kw) -> tuple[Process, Process]:
    """Either two independent processes or a process and a small variant of it,
    so that both equivalent and inequivalent pairs occur."""
    p = random_finite_process(rng, max_size, **kw)
    r = rng.random()
    if r < 0.4:
        return p, random_finite_process(rng, max_size, **kw)
    if r < 0.55:
        return p, Par(p, ZERO)
    if r < 0.7:
        names = sorted({k for k in _names(p)}, key=lambda k: k.name)
        fresh = [TransName(f"r{i}") for i in range(len(names))]
        from .syntax import apply_permutation
        return p, apply_permutation(p, Permutation.extending(names, fresh))
    q = _mutate(rng, p)
    if term_size(q) <= max_size + 2 and is_well_formed(q) and is_finite_state(q):
        return p, q
    return p, random_finite_process(rng, max_size, **kw)


def _names(p: Process):
    from .syntax import free_transaction_names
    return free_transaction_names(p)


def _mutate(rng: random.Random, p: Process) -> Process:
    """Change one subterm: add a branch, drop a branch, or swap a prefix."""
    if isinstance(p, Par):
        if rng.random() < 0.5:
            return Par(_mutate(rng, p.left), p.right)
        return Par(p.left, _mutate(rng, p.right))
    if isinstance(p, Restrict):
        return Restrict(p.action, _mutate(rng, p.body))
    if isinstance(p, Running):
        return Running(_mutate(rng, p.default), p.name, p.alternative)
    if isinstance(p, Dormant):
        return Dormant(_mutate(rng, p.default), p.alternative)
    if isinstance(p, Sum):
        branches = list(p.branches)
        r = rng.random()
        if branches and r < 0.3:
            branches.pop(rng.randrange(len(branches)))
        elif branches and r < 0.6:
            i = rng.randrange(len(branches))
            branches.append(branches[i])
        else:
            mu = ActName(rng.choice("ab"), rng.random() < 0.4)
            branches.append((mu, rng.choice([ZERO, CO])))
        return Sum(tuple(branches))
    return p


def random_formula(rng: random.Random, logic: str, depth: int = 3, *, actions=("a", "b"),
                   constants=(), bound: tuple = ()) -> Formula:
    """A random closed formula of ``logic`` with modal depth at most ``depth``."""
    values = [Var(x) for x in bound] + list(constants)
    r = rng.random()
    if depth == 0 or r < 0.25:
        if not values or rng.random() < 0.15:
            return TT if rng.random() < 0.5 else Neg(TT)
        if logic == "hasco":
            return HascoPred(rng.choice(values))
        if logic == "eq":
            return EqCo(rng.choice(values), rng.choice(values))
        if depth > 0:
            k = rng.randint(1, min(2, len(values)))
            return DiamondCo(frozenset(rng.sample(values, k)),
                             random_formula(rng, logic, depth - 1, actions=actions,
                                            constants=constants, bound=bound))
        return TT
    if r < 0.4:
        return Neg(random_formula(rng, logic, depth, actions=actions, constants=constants,
                                  bound=bound))
    if r < 0.55:
        return conj(*(random_formula(rng, logic, depth, actions=actions, constants=constants,
                                     bound=bound) for _ in range(2)))
    if r < 0.7:
        return DiamondTau(random_formula(rng, logic, depth - 1, actions=actions,
                                         constants=constants, bound=bound))
    if logic == "canco" and values and r < 0.8:
        k = rng.randint(1, min(2, len(values)))
        return DiamondCo(frozenset(rng.sample(values, k)),
                         random_formula(rng, logic, depth - 1, actions=actions,
                                        constants=constants, bound=bound))
    x = f"x{len(bound) + 1}"
    action = ActName(rng.choice(actions), rng.random() < 0.3)
    return DiamondAct(x, action, random_formula(rng, logic, depth - 1, actions=actions,
                                                constants=constants, bound=bound + (x,)))


def random_permutation(rng: random.Random, names, *, extra: int = 2,
                       kind_preserving: bool = True) -> Permutation:
    """A random permutation moving ``names`` among themselves and a few
    fresh names."""
    names = sorted(set(names), key=lambda k: (k.external, k.name))
    groups = [[k for k in names if not k.external], [k for k in names if k.external]]
    if not kind_preserving:
        groups = [names]
    mapping = {}
    for i, group in enumerate(groups):
        if not group:
            continue
        ext = group[0].external
        pool = list(group) + [TransName(f"z{i}_{j}", ext) for j in range(extra)]
        image = rng.sample(pool, len(pool))
        mapping.update(zip(pool, image))
    return Permutation.from_mapping(mapping)

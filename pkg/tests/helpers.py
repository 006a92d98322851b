"""Shared pieces for the trace-based and equivariance tests."""

from __future__ import annotations

import random

from tccs.history import initial_ext, initial_std
from tccs.lts import ActLabel, CoLabel, config_names, state_key, steps
from tccs.syntax import TAU, ActName, Permutation, TransName

ALPHABET = (ActName("a"), ActName("a", True), ActName("b"), ActName("b", True))


def initial(kind: str, p):
    return initial_std(p) if kind == "std" else initial_ext(p)


def walk(kind: str, c, rng: random.Random, length: int):
    """Random trace of at most ``length`` steps as ``(source, step)`` pairs."""
    out = []
    for _ in range(length):
        moves = steps(kind, c, alphabet=ALPHABET)
        if not moves:
            break
        s = rng.choice(moves)
        out.append((c, s))
        c = s.target
    return out, c


def random_state(kind: str, rng: random.Random, p, max_len: int = 5):
    return walk(kind, initial(kind, p), rng, rng.randint(0, max_len))[1]


def eftn(c) -> frozenset:
    return frozenset(k for k in config_names(c) if k.external)


def label_names(label) -> frozenset:
    if isinstance(label, ActLabel):
        return frozenset((label.name,))
    if isinstance(label, CoLabel):
        return frozenset(label.names)
    if isinstance(label, TransName):
        return frozenset((label,))
    return frozenset()


def permute_label(label, pi: Permutation):
    if isinstance(label, ActLabel):
        return ActLabel(pi(label.name), label.action)
    if isinstance(label, CoLabel):
        return CoLabel(frozenset(map(pi, label.names)))
    if isinstance(label, TransName):
        return pi(label)
    return label


def step_set(kind: str, c, **kw) -> set:
    return {(s.label, s.rule, s.challenger, state_key(s.target)) for s in steps(kind, c, **kw)}


def is_tau(label) -> bool:
    return label == TAU

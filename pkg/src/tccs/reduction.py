"""Process-level semantics: action steps, reconfigurations, reductions, barbs.

Action steps carry a label that is either plain (``a``, ``'a``, ``tau``) or
transactional (``k(mu)``) together with the set of transaction names that the
step renames to ``k``.  Reconfigurations commit, abort or activate
transactions.  Fresh names are chosen deterministically: the smallest
``n1, n2, ...`` (internal) or ``#m1, #m2, ...`` (external) not already used.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .syntax import (
    CO, ZERO, ActName, Commit, Dormant, NameSubstitution, Par, Permutation, Prefix, Process, Rec,
    Restrict, Running, Sum, Tau, TAU, TransName, apply_permutation, apply_substitution,
    free_transaction_names,
    top_level_commit_split, unfold,
)

__all__ = [
    "ActionLabel", "ActionTransition", "ReconfigTransition", "fresh_name",
    "enumerate_action_steps", "enumerate_reconfig_steps", "eliminate_commits",
    "reduction_steps", "weak_barb", "has_barb", "process_names", "canonical_process",
    "SENTINEL",
]

# Placeholder for the fresh name of a transactional step; callers rename it.
SENTINEL = TransName("?")


def fresh_name(avoid: Iterable[TransName], external: bool = False) -> TransName:
    """The first name of the requested kind that is not in ``avoid``."""
    used = {k.name for k in avoid if k.external == external}
    stem = "m" if external else "n"
    i = 1
    while f"{stem}{i}" in used:
        i += 1
    return TransName(f"{stem}{i}", external)


@dataclass(frozen=True, order=True)
class ActionLabel:
    mu: Prefix
    txn: Optional[TransName] = None

    @property
    def plain(self) -> bool:
        return self.txn is None

    def __str__(self) -> str:
        return str(self.mu) if self.txn is None else f"{self.txn}({self.mu})"


@dataclass(frozen=True)
class ActionTransition:
    label: ActionLabel
    renamed: frozenset[TransName]
    target: Process

    @property
    def sigma(self) -> Optional[NameSubstitution]:
        if self.label.txn is None:
            return None
        return NameSubstitution(self.renamed, self.label.txn)

    def __str__(self) -> str:
        ren = ""
        if self.renamed:
            ren = " [" + ",".join(sorted(map(str, self.renamed))) + f"->{self.label.txn}]"
        return f"--{self.label}-->{ren} {self.target}"


@dataclass(frozen=True)
class ReconfigTransition:
    kind: str  # "co", "ab" or "new"
    name: TransName
    target: Process

    def __str__(self) -> str:
        return f"--{self.kind} {self.name}--> {self.target}"


# ---------------------------------------------------------------------------
# Action steps

def _rename(p: Process, names: frozenset, k: TransName) -> Process:
    return apply_substitution(p, NameSubstitution(names, k)) if names else p


def _action_steps(p: Process, k: TransName) -> list[tuple[ActionLabel, frozenset, Process]]:
    if isinstance(p, Sum):
        out = []
        for mu, q in p.branches:
            out.append((ActionLabel(mu), frozenset(), q))
            if isinstance(mu, ActName):
                out.append((ActionLabel(mu, k), frozenset(), Running(Par(q, CO), k, p)))
        return out
    if isinstance(p, Par):
        left = _action_steps(p.left, k)
        right = _action_steps(p.right, k)
        out = [(lab, dom, Par(t, _rename(p.right, dom, k))) for lab, dom, t in left]
        out += [(lab, dom, Par(_rename(p.left, dom, k), t)) for lab, dom, t in right]
        for lab1, dom1, t1 in left:
            if not isinstance(lab1.mu, ActName):
                continue
            for lab2, dom2, t2 in right:
                if lab2.mu != lab1.mu.inverse() or lab1.plain != lab2.plain:
                    continue
                if lab1.plain:
                    out.append((ActionLabel(TAU), frozenset(), Par(t1, t2)))
                else:
                    out.append((ActionLabel(TAU, k), dom1 | dom2,
                                Par(_rename(t1, dom2, k), _rename(t2, dom1, k))))
        return out
    if isinstance(p, Restrict):
        return [(lab, dom, Restrict(p.action, t))
                for lab, dom, t in _action_steps(p.body, k)
                if not (isinstance(lab.mu, ActName) and lab.mu.name == p.action)]
    if isinstance(p, Rec):
        return _action_steps(unfold(p), k)
    if isinstance(p, Running):
        return [(ActionLabel(lab.mu, k), frozenset((p.name,)), Running(t, k, p.alternative))
                for lab, _, t in _action_steps(p.default, k) if lab.plain]
    return []


def enumerate_action_steps(p: Process, fresh: Optional[TransName] = None, *,
                           avoid: Iterable[TransName] = ()) -> frozenset[ActionTransition]:
    """All action transitions of ``p``.

    Transactional steps use ``fresh`` as their new name; by default the first
    internal name not occurring in ``p`` or ``avoid``.
    """
    if fresh is None:
        fresh = fresh_name(free_transaction_names(p) | frozenset(avoid))
    return frozenset(ActionTransition(lab, dom, t) for lab, dom, t in _action_steps(p, fresh))


# ---------------------------------------------------------------------------
# Reconfigurations

def eliminate_commits(p: Process) -> Process:
    """Replace every unguarded ``co`` (outside prefixes, ``rec`` and dormant
    transactions) by ``0``."""
    if isinstance(p, Commit):
        return ZERO
    if isinstance(p, Par):
        return Par(eliminate_commits(p.left), eliminate_commits(p.right))
    if isinstance(p, Restrict):
        return Restrict(p.action, eliminate_commits(p.body))
    return p


def _broadcast(p: Process, kind: str, k: TransName) -> Optional[Process]:
    if isinstance(p, Running):
        if p.name != k:
            return None
        if kind == "ab":
            return p.alternative
        if top_level_commit_split(p.default) is None:
            return None
        return eliminate_commits(p.default)
    if isinstance(p, Par):
        left = _broadcast(p.left, kind, k)
        right = _broadcast(p.right, kind, k)
        if left is not None and right is not None:
            return Par(left, right)
        if left is not None and k not in free_transaction_names(p.right):
            return Par(left, p.right)
        if right is not None and k not in free_transaction_names(p.left):
            return Par(p.left, right)
        return None
    if isinstance(p, Restrict):
        body = _broadcast(p.body, kind, k)
        return None if body is None else Restrict(p.action, body)
    return None


def _activations(p: Process, k: TransName) -> list[Process]:
    if isinstance(p, Dormant):
        return [Running(p.default, k, p.alternative)]
    if isinstance(p, Par):
        return ([Par(t, p.right) for t in _activations(p.left, k)]
                + [Par(p.left, t) for t in _activations(p.right, k)])
    if isinstance(p, Restrict):
        return [Restrict(p.action, t) for t in _activations(p.body, k)]
    if isinstance(p, Rec):
        return _activations(unfold(p), k)
    return []


def enumerate_reconfig_steps(p: Process, fresh: Optional[TransName] = None, *,
                             avoid: Iterable[TransName] = ()) -> frozenset[ReconfigTransition]:
    """Commits and aborts of every transaction in ``p`` plus activations of
    dormant transactions under the name ``fresh``."""
    names = free_transaction_names(p)
    out = set()
    for k in names:
        for kind in ("co", "ab"):
            t = _broadcast(p, kind, k)
            if t is not None:
                out.add(ReconfigTransition(kind, k, t))
    if fresh is None:
        fresh = fresh_name(names | frozenset(avoid))
    for t in _activations(p, fresh):
        out.add(ReconfigTransition("new", fresh, t))
    return frozenset(out)


# ---------------------------------------------------------------------------
# Reductions and barbs

def reduction_steps(p: Process, *, avoid: Iterable[TransName] = ()) -> frozenset[Process]:
    """Targets of internal moves: plain tau, reconfigurations and k(tau)."""
    out = set()
    for tr in enumerate_action_steps(p, avoid=avoid):
        if isinstance(tr.label.mu, Tau):
            out.add(tr.target)
    for tr in enumerate_reconfig_steps(p, avoid=avoid):
        out.add(tr.target)
    return frozenset(out)


def has_barb(p: Process, omega: str) -> bool:
    """``omega`` is offered at top level, i.e. ``p`` is congruent to
    ``Q1 | omega.Q2``."""
    if isinstance(p, Sum):
        return len(p.branches) == 1 and p.branches[0][0] == ActName(omega)
    if isinstance(p, Par):
        return has_barb(p.left, omega) or has_barb(p.right, omega)
    if isinstance(p, Restrict):
        return p.action != omega and has_barb(p.body, omega)
    return False


def process_names(p: Process) -> list[TransName]:
    """Transaction names in first-occurrence order of a left-to-right walk."""
    seen: dict = {}

    def walk(q: Process) -> None:
        if isinstance(q, Sum):
            for _, r in q.branches:
                walk(r)
        elif isinstance(q, Par):
            walk(q.left)
            walk(q.right)
        elif isinstance(q, (Restrict, Rec)):
            walk(q.body)
        elif isinstance(q, Running):
            seen.setdefault(q.name, None)
            walk(q.default)
            walk(q.alternative)
        elif isinstance(q, Dormant):
            walk(q.default)
            walk(q.alternative)

    walk(p)
    return list(seen)


def canonical_process(p: Process) -> Process:
    """Rename all transaction names to ``n1, n2, ...`` in occurrence order."""
    names = process_names(p)
    targets = [TransName(f"n{i}") for i in range(1, len(names) + 1)]
    return apply_permutation(p, Permutation.extending(names, targets))


def weak_barb(p: Process, omega: str, *, max_states: int = 10_000) -> Optional[bool]:
    """Whether some reduct of ``p`` offers ``omega``; None if the search was cut."""
    start = canonical_process(p)
    seen = {start}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        if has_barb(q, omega):
            return True
        for r in reduction_steps(q):
            r = canonical_process(r)
            if r not in seen:
                if len(seen) >= max_states:
                    return None
                seen.add(r)
                queue.append(r)
    return False

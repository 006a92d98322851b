"""Configuration-level transition systems, weak moves and canonical forms.

Three systems are provided, selected by a kind string:

``"std"``  plain configurations; labels are ``TAU`` or a bare transaction name.
``"ext"``  extended configurations; labels ``TAU`` or ``ActLabel(k, a)``.
``"cs"``   as ``"ext"`` but commits of externally visible transactions are
           labelled ``CoLabel(K)``.

Every step function draws its fresh names deterministically from the names of
the configuration plus an optional ``avoid`` set, so a single representative is
produced for each rule instance.  State identity during searches uses
``state_key``, which renames names canonically and forgets internal names that
can no longer influence behaviour.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

from .history import (
    Configuration, Equivalence, ExtConfiguration, ExtEntry, Tentative,
    abort_names, commit_names, extend_equivalence, permute_config, substitute_history,
)
from .reduction import (
    SENTINEL, enumerate_action_steps, enumerate_reconfig_steps, fresh_name, process_names,
)
from .syntax import (
    ActName, NameSubstitution, Permutation, Process, TAU, Tau, TransName,
    apply_substitution, drop_inert, free_actions, free_transaction_names,
)

__all__ = [
    "SearchBounds", "ActLabel", "CoLabel", "StepRecord", "KINDS", "std_steps", "ext_steps",
    "cs_steps", "steps", "config_names", "canonicalize", "state_key", "skeleton_key",
    "tau_closure", "weak_steps", "weak_moves", "WeakResult", "LTS", "explore", "default_alphabet",
    "label_str",
]

KINDS = ("std", "ext", "cs")


@dataclass(frozen=True)
class SearchBounds:
    max_states: int = 10_000
    tau_bound: int = 2_000
    depth: int = 64

    def __post_init__(self) -> None:
        if min(self.max_states, self.tau_bound, self.depth) <= 0:
            raise ValueError("bounds must be positive")


@dataclass(frozen=True, order=True)
class ActLabel:
    name: TransName
    action: ActName

    def __str__(self) -> str:
        return f"{self.name}({self.action})"


@dataclass(frozen=True)
class CoLabel:
    names: frozenset

    def __str__(self) -> str:
        return "co{" + ",".join(sorted(map(str, self.names))) + "}"


Label = Union[Tau, TransName, ActLabel, CoLabel]


def label_str(label) -> str:
    return str(label)


@dataclass(frozen=True)
class StepRecord:
    label: object
    target: object
    rule: str
    challenger: bool = True


# ---------------------------------------------------------------------------
# Step functions

def config_names(c) -> frozenset:
    names = set(free_transaction_names(c.process))
    for e in c.history:
        if isinstance(e, (Tentative, ExtEntry)):
            names.add(e.name)
    if isinstance(c, ExtConfiguration):
        names |= c.eq.carrier
    return frozenset(names)


def _instantiate(t: Process, k: TransName) -> Process:
    return apply_substitution(t, NameSubstitution(frozenset((SENTINEL,)), k))


def default_alphabet(p: Process) -> frozenset:
    return frozenset(ActName(a, out) for a in free_actions(p) for out in (False, True))


def std_steps(c: Configuration, *, avoid: Iterable[TransName] = (),
              ext_name: Optional[TransName] = None) -> list[StepRecord]:
    """Transitions of a plain configuration."""
    used = config_names(c) | frozenset(avoid)
    k_in = fresh_name(used)
    k_ex = ext_name or fresh_name(used, external=True)
    out = []
    h, p = c.history, c.process
    for tr in enumerate_action_steps(c.process, SENTINEL):
        mu, t = tr.label.mu, tr.target
        if tr.label.plain:
            if isinstance(mu, Tau):
                out.append(StepRecord(TAU, Configuration(h, t), "tau"))
            continue
        k = k_in if isinstance(mu, Tau) else k_ex
        sigma = NameSubstitution(tr.renamed, k)
        h2 = substitute_history(h, sigma)
        t = _instantiate(t, k)
        if isinstance(mu, Tau):
            out.append(StepRecord(TAU, Configuration(h2, t), "k(tau)"))
        else:
            out.append(StepRecord(k, Configuration(h2 + (Tentative(k, mu),), t), "k(a)"))
    for tr in enumerate_reconfig_steps(p, k_in):
        if tr.kind == "new":
            out.append(StepRecord(TAU, Configuration(h, tr.target), "new"))
        elif tr.kind == "co":
            out.append(StepRecord(TAU, Configuration(commit_names(h, tr.name), tr.target), "co"))
        else:
            out.append(StepRecord(TAU, Configuration(abort_names(h, tr.name), tr.target), "ab"))
    out.append(StepRecord(k_ex, Configuration(h + (Tentative(k_ex, None),), p), "star",
                          challenger=False))
    return out


def _extended(c: ExtConfiguration, commit_sensitive: bool, avoid, alphabet,
              ext_name) -> list[StepRecord]:
    used = config_names(c) | frozenset(avoid)
    if ext_name is not None:
        used |= {ext_name}
    k_in = fresh_name(used)
    k_ex = ext_name or fresh_name(used, external=True)
    out = []
    e, h, p = c.eq, c.history, c.process
    for tr in enumerate_action_steps(p, SENTINEL):
        mu, t = tr.label.mu, tr.target
        if tr.label.plain:
            if isinstance(mu, Tau):
                out.append(StepRecord(TAU, ExtConfiguration(e, h, t), "tau"))
            continue
        k = k_in if isinstance(mu, Tau) else k_ex
        e2 = extend_equivalence(e, NameSubstitution(tr.renamed, k))
        t = _instantiate(t, k)
        if isinstance(mu, Tau):
            out.append(StepRecord(TAU, ExtConfiguration(e2, h, t), "k(tau)"))
        else:
            out.append(StepRecord(ActLabel(k, mu), ExtConfiguration(e2, h + (ExtEntry(k, mu),), t),
                                  "k(a)"))
    for tr in enumerate_reconfig_steps(p, k_in):
        if tr.kind == "new":
            out.append(StepRecord(TAU, ExtConfiguration(e, h, tr.target), "new"))
            continue
        resolve = commit_names if tr.kind == "co" else abort_names
        d = resolve(c.delta, tr.name)
        label: object = TAU
        if tr.kind == "co" and commit_sensitive:
            visible = frozenset(k for k in e.class_of(tr.name) if k.external and k in e.carrier)
            if visible:
                label = CoLabel(visible)
        out.append(StepRecord(label, ExtConfiguration(d.eq, d.history, tr.target), tr.kind))
    if alphabet is None:
        alphabet = default_alphabet(p)
    e_star = e.with_name(k_ex)
    for a in sorted(alphabet):
        out.append(StepRecord(ActLabel(k_ex, a),
                              ExtConfiguration(e_star, h + (ExtEntry(k_ex, "ab"),), p), "star"))
    return out


def ext_steps(c: ExtConfiguration, *, avoid: Iterable[TransName] = (),
              alphabet: Optional[Iterable[ActName]] = None,
              ext_name: Optional[TransName] = None) -> list[StepRecord]:
    """Transitions of an extended configuration.

    Degenerate ``k(a)`` moves are generated for every action in ``alphabet``
    (default: both polarities of the free channels of the process).
    """
    return _extended(c, False, avoid, alphabet, ext_name)


def cs_steps(c: ExtConfiguration, *, avoid: Iterable[TransName] = (),
             alphabet: Optional[Iterable[ActName]] = None,
             ext_name: Optional[TransName] = None) -> list[StepRecord]:
    """Commit-sensitive transitions: like ``ext_steps`` but commits of
    transactions related to external names are labelled ``co(K)``."""
    return _extended(c, True, avoid, alphabet, ext_name)


def steps(kind: str, c, **kw) -> list[StepRecord]:
    if kind == "std":
        kw.pop("alphabet", None)
        return std_steps(c, **kw)
    if kind == "ext":
        return ext_steps(c, **kw)
    if kind == "cs":
        return cs_steps(c, **kw)
    raise ValueError(f"unknown LTS kind {kind!r}")


# ---------------------------------------------------------------------------
# Canonical forms

def _canon_names(n: int, external: bool) -> list[TransName]:
    stem = "m" if external else "n"
    return [TransName(f"{stem}{i}", external) for i in range(1, n + 1)]


def _order_classes(e: Equivalence, rank: dict) -> list[frozenset]:
    """Classes in an order that does not depend on the spelling of names
    outside ``rank``."""
    def key(cls):
        ranked = sorted(rank[k] for k in cls if k in rank)
        return (ranked, len(cls))
    return sorted(e.classes, key=key)


def canonicalize(c):
    """Rename the configuration's names canonically.

    Extended configurations keep every external name that occurs in the
    history fixed; all other names are renamed in first-occurrence order
    (process first, then the equivalence).  Plain configurations rename all
    names (process first, then history), preserving the kind of each name.
    Returns the canonical configuration and the permutation applied.
    """
    if isinstance(c, ExtConfiguration):
        fixed = {e.name for e in c.history}
        order: list[TransName] = [k for k in process_names(c.process) if k not in fixed]
        rank = {k: i for i, k in enumerate(sorted(fixed, key=lambda k: k.name))}
        base = len(rank)
        for i, k in enumerate(order):
            rank[k] = base + i
        for cls in _order_classes(c.eq, rank):
            for k in sorted(cls - set(rank), key=lambda k: (k.external, k.name)):
                order.append(k)
                rank[k] = len(rank)
    else:
        fixed = set()
        order = list(process_names(c.process))
        seen = set(order)
        for e in c.history:
            if isinstance(e, Tentative) and e.name not in seen:
                order.append(e.name)
                seen.add(e.name)
    sources, targets = [], []
    for external in (False, True):
        group = [k for k in order if k.external == external]
        taken = {k.name for k in fixed if k.external == external}
        names = [t for t in _canon_names(len(group) + len(taken), external) if t.name not in taken]
        sources += group
        targets += names[:len(group)]
    if sources == targets:
        return c, Permutation()
    pi = Permutation.extending(sources, targets)
    # Fixed names must not move: the extension only touches sources/targets,
    # and targets avoid fixed names by construction.
    return permute_config(c, pi), pi


def _prune(c):
    """Forget internal names of the equivalence that no longer occur in the
    process; they cannot influence any future step or observation."""
    if not isinstance(c, ExtConfiguration):
        return c
    keep = {k for k in c.eq.carrier if k.external} | set(free_transaction_names(c.process))
    if keep >= c.eq.carrier:
        return c
    return ExtConfiguration(c.eq.restrict(keep), c.history, c.process)


def _tidy(c):
    p = drop_inert(c.process)
    if isinstance(c, ExtConfiguration):
        return ExtConfiguration(c.eq, c.history, p)
    return Configuration(c.history, p)


_KEY_CACHE: dict = {}


def state_key(c):
    """Identity of a state up to renaming and garbage internal names."""
    key = _KEY_CACHE.get(c)
    if key is None:
        if len(_KEY_CACHE) > 200_000:
            _KEY_CACHE.clear()
        key = _KEY_CACHE[c] = canonicalize(_prune(_tidy(c)))[0]
    return key


def _dead_std(e, live: frozenset) -> bool:
    if isinstance(e, Tentative):
        return e.action is None and e.name not in live
    return True


def skeleton_key(c):
    """State identity that also forgets resolved history entries.

    Committed and aborted entries (and, for plain configurations, degenerate
    entries whose transaction can never return) are dropped and the remaining
    names renamed in order.  Used to measure the size of a behaviour
    independently of how much history has accumulated.
    """
    if isinstance(c, ExtConfiguration):
        live = tuple(e for e in c.history if e.tentative)
        keep = {e.name for e in live} | set(free_transaction_names(c.process))
        c2 = ExtConfiguration(c.eq.restrict(keep), live, c.process)
        order = [e.name for e in live]
        pi = Permutation.extending(order, _canon_names(len(order), True))
        return state_key(permute_config(c2, pi))
    live_names = free_transaction_names(c.process)
    h = tuple(e for e in c.history if not _dead_std(e, live_names))
    return state_key(Configuration(h, c.process))


# ---------------------------------------------------------------------------
# Weak moves

@dataclass
class WeakResult:
    configs: list
    exhaustive: bool

    def __iter__(self):
        return iter(self.configs)

    def __len__(self) -> int:
        return len(self.configs)


def tau_closure(kind: str, c, bounds: SearchBounds = SearchBounds(), *,
                avoid: Iterable[TransName] = (), key=state_key) -> WeakResult:
    """All configurations reachable by internal steps, deduplicated by ``key``."""
    avoid = frozenset(avoid)
    seen = {key(c): c}
    queue = deque([c])
    exhaustive = True
    while queue:
        d = queue.popleft()
        for s in steps(kind, d, avoid=avoid, alphabet=()):
            if s.label != TAU:
                continue
            k = key(s.target)
            if k in seen:
                continue
            if len(seen) >= bounds.tau_bound:
                exhaustive = False
                continue
            seen[k] = s.target
            queue.append(s.target)
    return WeakResult(list(seen.values()), exhaustive)


def weak_steps(kind: str, c, label, bounds: SearchBounds = SearchBounds(), *,
               avoid: Iterable[TransName] = (), key=state_key) -> WeakResult:
    """Weak successors of ``c`` under ``label``.

    For ``TAU`` this is the reflexive internal closure; otherwise internal
    closure, one ``label`` step, internal closure.  A visible label's
    transaction name must be fresh for ``c``.
    """
    avoid = frozenset(avoid)
    before = tau_closure(kind, c, bounds, avoid=avoid, key=key)
    if label == TAU:
        return before
    exhaustive = before.exhaustive
    kw: dict = {}
    if isinstance(label, ActLabel):
        kw = {"ext_name": label.name, "alphabet": (label.action,)}
        avoid = avoid | {label.name}
    elif isinstance(label, TransName):
        kw = {"ext_name": label}
        avoid = avoid | {label}
    found: dict = {}
    for d in before:
        for s in steps(kind, d, avoid=avoid, **kw):
            if s.label != label:
                continue
            after = tau_closure(kind, s.target, bounds, avoid=avoid, key=key)
            exhaustive &= after.exhaustive
            for e in after:
                found.setdefault(key(e), e)
            if len(found) > bounds.max_states:
                return WeakResult(list(found.values()), False)
    return WeakResult(list(found.values()), exhaustive)


# ---------------------------------------------------------------------------
# Exploration

@dataclass
class LTS:
    kind: str
    states: list = field(default_factory=list)
    transitions: list = field(default_factory=list)  # (source id, label, rule, target id)
    exhaustive: bool = True

    def records(self) -> Iterator[dict]:
        outgoing: dict = {i: [] for i in range(len(self.states))}
        for src, label, rule, dst in self.transitions:
            outgoing[src].append({"label": str(label), "rule": rule, "target": dst})
        for i, s in enumerate(self.states):
            rec = {"id": i, "state": str(s), "history": _history_text(s),
                   "transitions": outgoing[i]}
            yield rec


def _history_text(c) -> str:
    from .history import render_equivalence, render_history
    if isinstance(c, ExtConfiguration):
        return f"E = {render_equivalence(c.eq)}; H = {render_history(c.history)}"
    return render_history(c.history)


def explore(kind: str, c, bounds: SearchBounds = SearchBounds(), *, key=skeleton_key,
            alphabet: Optional[Iterable[ActName]] = None) -> LTS:
    """Breadth-first reachable states (up to ``key``) with their transitions."""
    if alphabet is None:
        alphabet = default_alphabet(c.process)
    alphabet = tuple(sorted(alphabet))
    lts = LTS(kind)
    first = key(c)
    ids = {first: 0}
    lts.states.append(first)
    queue = deque([first])
    depth = {0: 0}
    while queue:
        d = queue.popleft()
        src = ids[d]
        if depth[src] >= bounds.depth:
            lts.exhaustive = False
            continue
        for s in steps(kind, d, alphabet=alphabet):
            k = key(s.target)
            if k not in ids:
                if len(ids) >= bounds.max_states:
                    lts.exhaustive = False
                    continue
                ids[k] = len(lts.states)
                depth[ids[k]] = depth[src] + 1
                lts.states.append(k)
                queue.append(k)
            lts.transitions.append((src, s.label, s.rule, ids[k]))
    return lts


def weak_moves(kind: str, c, bounds: SearchBounds = SearchBounds(), *,
               avoid: Iterable[TransName] = (), alphabet: Optional[Iterable[ActName]] = None,
               key=state_key) -> tuple[list, bool]:
    """Every weak move ``c ==label==> d`` as ``(label, d)`` pairs.

    Visible labels use one fresh external name (fresh for ``c`` and ``avoid``).
    """
    avoid = frozenset(avoid)
    before = tau_closure(kind, c, bounds, avoid=avoid, key=key)
    exhaustive = before.exhaustive
    out = {(TAU, key(d)): (TAU, d) for d in before}
    for d in before:
        for s in steps(kind, d, avoid=avoid, alphabet=alphabet):
            if s.label == TAU or not s.challenger:
                continue
            after = tau_closure(kind, s.target, bounds, avoid=avoid, key=key)
            exhaustive &= after.exhaustive
            for e in after:
                out.setdefault((s.label, key(e)), (s.label, e))
            if len(out) > bounds.max_states:
                return list(out.values()), False
    return list(out.values()), exhaustive

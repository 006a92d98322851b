"""Histories, extended histories, configurations and consistency predicates.

A plain history is a tuple of entries indexed from 1 in interaction order:
``Committed(a)`` (``a``, or the degenerate star when the action is None),
``Tentative(k, a)`` (``k(a)`` / ``k(*)``) and ``Aborted()``.

An extended history pairs an equivalence ``E`` over transaction names with a
tuple of ``ExtEntry(k, state)`` where the state is an action (tentative),
``"co"`` or ``"ab"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .syntax import (
    ActName, NameSubstitution, Permutation, Process, TransName, apply_permutation,
    free_transaction_names, render,
)

__all__ = [
    "Committed", "Tentative", "Aborted", "Entry", "History", "ExtEntry", "Equivalence",
    "ExtHistory", "Configuration", "ExtConfiguration", "hasco_set", "isr_set", "hasab_set",
    "history_names", "commit_names", "abort_names", "extend_equivalence", "consistent",
    "commit_consistent", "eq_holds", "eq_consistent", "vcons", "acons", "precedes",
    "ext_violations", "std_violations", "render_history", "render_equivalence",
    "permute_history", "permute_config", "substitute_history", "initial_std", "initial_ext",
]


# ---------------------------------------------------------------------------
# Plain histories

@dataclass(frozen=True, order=True)
class Committed:
    action: Optional[ActName]  # None is the degenerate star

    def __str__(self) -> str:
        return "*" if self.action is None else str(self.action)


@dataclass(frozen=True, order=True)
class Tentative:
    name: TransName
    action: Optional[ActName]

    def __str__(self) -> str:
        return f"{self.name}({'*' if self.action is None else self.action})"


@dataclass(frozen=True, order=True)
class Aborted:
    def __str__(self) -> str:
        return "ab"


Entry = Union[Committed, Tentative, Aborted]
History = tuple  # tuple[Entry, ...]


@dataclass(frozen=True)
class Configuration:
    history: tuple
    process: Process

    def __str__(self) -> str:
        return f"<{render_history(self.history)} . {render(self.process)}>"


def initial_std(p: Process) -> Configuration:
    return Configuration((), p)


def substitute_history(h: tuple, sigma: NameSubstitution) -> tuple:
    if not sigma.domain:
        return h
    return tuple(Tentative(sigma(e.name), e.action) if isinstance(e, Tentative) else e for e in h)


def std_violations(c: Configuration) -> list[str]:
    """Configuration well-formedness: ``k(*)`` needs ``k`` absent from the
    process and ``k(a)`` needs ``k`` present."""
    names = free_transaction_names(c.process)
    out = []
    for i, e in enumerate(c.history, 1):
        if isinstance(e, Tentative):
            if e.action is None and e.name in names:
                out.append(f"entry {i}: {e} but {e.name} occurs in the process")
            if e.action is not None and e.name not in names:
                out.append(f"entry {i}: {e} but {e.name} does not occur in the process")
    return out


# ---------------------------------------------------------------------------
# Equivalences over transaction names

@dataclass(frozen=True)
class Equivalence:
    """An equivalence relation over a finite carrier, stored as its classes."""

    classes: frozenset  # frozenset[frozenset[TransName]]

    @classmethod
    def of(cls, classes: Iterable[Iterable[TransName]] = ()) -> "Equivalence":
        blocks = [frozenset(c) for c in classes]
        seen: set = set()
        for b in blocks:
            if not b or seen & b:
                raise ValueError("classes must be nonempty and disjoint")
            seen |= b
        return cls(frozenset(blocks))

    @classmethod
    def identity(cls, names: Iterable[TransName]) -> "Equivalence":
        return cls.of([n] for n in set(names))

    @classmethod
    def universal(cls, names: Iterable[TransName]) -> "Equivalence":
        names = set(names)
        return cls.of([names] if names else [])

    @property
    def carrier(self) -> frozenset:
        return frozenset().union(*self.classes)

    def class_of(self, k: TransName) -> frozenset:
        for c in self.classes:
            if k in c:
                return c
        return frozenset((k,))

    def related(self, a: TransName, b: TransName) -> bool:
        return a == b and a in self.carrier or any(a in c and b in c for c in self.classes)

    def pairs(self) -> frozenset:
        return frozenset((a, b) for c in self.classes for a in c for b in c)

    def with_name(self, k: TransName) -> "Equivalence":
        if k in self.carrier:
            return self
        return Equivalence(self.classes | {frozenset((k,))})

    def permute(self, pi: Permutation) -> "Equivalence":
        return Equivalence(frozenset(frozenset(map(pi, c)) for c in self.classes))

    def restrict(self, names: Iterable[TransName]) -> "Equivalence":
        keep = frozenset(names)
        return Equivalence(frozenset(c & keep for c in self.classes if c & keep))

    def __str__(self) -> str:
        return render_equivalence(self)


def extend_equivalence(e: Equivalence, sigma: NameSubstitution) -> Equivalence:
    """The least equivalence containing ``e`` that relates the target of
    ``sigma`` to itself and to every name in its domain."""
    if sigma.target in e.carrier:
        raise ValueError(f"substitution target {sigma.target} is not fresh for E")
    merged = {sigma.target} | set(sigma.domain)
    rest = []
    for c in e.classes:
        if c & sigma.domain:
            merged |= c
        else:
            rest.append(c)
    return Equivalence(frozenset(rest) | {frozenset(merged)})


def _name_key(k: TransName):
    return (not k.external, k.name)


def render_equivalence(e: Equivalence) -> str:
    def show(k: TransName) -> str:
        return str(k) if k.external else "%" + k.name
    blocks = sorted(sorted(c, key=_name_key) for c in e.classes)
    return "{" + ", ".join("{" + ",".join(show(k) for k in b) + "}" for b in blocks) + "}"


# ---------------------------------------------------------------------------
# Extended histories

@dataclass(frozen=True, order=True)
class ExtEntry:
    name: TransName
    state: Union[ActName, str]  # an action (tentative), "co" or "ab"

    @property
    def tentative(self) -> bool:
        return isinstance(self.state, ActName)

    def __str__(self) -> str:
        return f"{self.name}({self.state})"


@dataclass(frozen=True)
class ExtHistory:
    eq: Equivalence
    history: tuple  # tuple[ExtEntry, ...]

    def __str__(self) -> str:
        return f"{render_equivalence(self.eq)}; {render_history(self.history)}"


@dataclass(frozen=True)
class ExtConfiguration:
    eq: Equivalence
    history: tuple
    process: Process

    @property
    def delta(self) -> ExtHistory:
        return ExtHistory(self.eq, self.history)

    def __str__(self) -> str:
        return f"<{render_equivalence(self.eq)}; {render_history(self.history)} . {render(self.process)}>"


def initial_ext(p: Process) -> ExtConfiguration:
    return ExtConfiguration(Equivalence.of(), (), p)


def render_history(h: tuple) -> str:
    return "{" + ", ".join(f"{i}: {e}" for i, e in enumerate(h, 1)) + "}"


def hasco_set(d) -> frozenset:
    return frozenset(e.name for e in d.history if e.state == "co")


def isr_set(d) -> frozenset:
    return frozenset(e.name for e in d.history if e.tentative)


def hasab_set(d) -> frozenset:
    return frozenset(e.name for e in d.history if e.state == "ab")


def history_names(d) -> frozenset:
    return frozenset(e.name for e in d.history)


def _resolve(d, k: TransName, state: str):
    if isinstance(d, tuple):
        out = []
        for e in d:
            if isinstance(e, Tentative) and e.name == k:
                out.append(Committed(e.action) if state == "co" else Aborted())
            else:
                out.append(e)
        return tuple(out)
    group = d.eq.class_of(k)
    history = tuple(ExtEntry(e.name, state) if e.tentative and e.name in group else e
                    for e in d.history)
    if isinstance(d, ExtConfiguration):
        return ExtConfiguration(d.eq, history, d.process)
    return ExtHistory(d.eq, history)


def commit_names(d, k: TransName):
    """``d \\co k`` for a plain history, extended history or configuration."""
    return _resolve(d, k, "co")


def abort_names(d, k: TransName):
    """``d \\ab k`` for a plain history, extended history or configuration."""
    return _resolve(d, k, "ab")


def ext_violations(c) -> list[str]:
    """Violations of the four extended-configuration conditions.

    ``c`` may be an ExtHistory (then only the history conditions apply).
    """
    out = []
    names = [e.name for e in c.history]
    if len(set(names)) != len(names):
        out.append("(i) history names are not distinct")
    for e in c.history:
        if not e.name.external:
            out.append(f"(i) history name {e.name} is not external")
    carrier = c.eq.carrier
    trn = set(names)
    for k in carrier:
        if k.external and k not in trn:
            out.append(f"(ii) external {k} related by E but absent from the history")
    for k in trn:
        if k not in carrier:
            out.append(f"(ii) history name {k} missing from E")
    hasco = hasco_set(c)
    for cls in c.eq.classes:
        ext = {k for k in cls if k.external}
        if ext and 0 < len(ext & hasco) < len(ext):
            out.append("(ii) an E-class mixes committed and uncommitted names")
    if isinstance(c, ExtConfiguration):
        ftn = free_transaction_names(c.process)
        if ftn & hasco:
            out.append("(iii) committed name occurs in the process")
        for cls in c.eq.classes:
            if len(cls & ftn) > 1:
                out.append("(iv) two related names occur in the process")
    return out


# ---------------------------------------------------------------------------
# Consistency predicates

def _committed_action(e) -> Optional[ActName]:
    return e.action if isinstance(e, Committed) else None


def consistent(h1: tuple, h2: tuple) -> bool:
    """Same domain and the same committed actions at every index."""
    return len(h1) == len(h2) and all(
        _committed_action(a) == _committed_action(b) for a, b in zip(h1, h2))


def commit_consistent(c1, c2) -> bool:
    return hasco_set(c1) == hasco_set(c2)


def eq_holds(d, k: TransName, k2: TransName) -> bool:
    hasco = hasco_set(d)
    return k in hasco and k2 in hasco and d.eq.related(k, k2)


def eq_consistent(c1, c2) -> bool:
    names = sorted(hasco_set(c1) | hasco_set(c2), key=_name_key)
    for i, k in enumerate(names):
        for k2 in names[i:]:
            if eq_holds(c1, k, k2) != eq_holds(c2, k, k2):
                return False
    return True


def vcons(d1, d2) -> bool:
    if not commit_consistent(d1, d2) or len(d1.history) != len(d2.history):
        return False
    for a, b in zip(d1.history, d2.history):
        if a.name != b.name:
            return False
        if a.tentative and b.tentative and a.state != b.state:
            return False
    return True


def acons(h1: tuple, h2: tuple) -> bool:
    for a, b in zip(h1, h2):
        if (isinstance(a, Tentative) and isinstance(b, Tentative)
                and a.action is not None and b.action is not None and a.action != b.action):
            return False
    return True


def precedes(h: tuple, d) -> bool:
    """``h`` is related entrywise to the extended history ``d``."""
    if len(h) != len(d.history):
        return False
    for e, f in zip(h, d.history):
        if isinstance(e, Tentative) and e.action is not None:
            if not (f.state == e.action and d.eq.related(e.name, f.name)):
                return False
        elif isinstance(e, Tentative) or isinstance(e, Aborted):
            if f.state != "ab":
                return False
        elif isinstance(e, Committed) and e.action is not None:
            if f.state != "co":
                return False
    return True


# ---------------------------------------------------------------------------
# Permutations

def permute_history(h: tuple, pi: Permutation) -> tuple:
    out = []
    for e in h:
        if isinstance(e, Tentative):
            out.append(Tentative(pi(e.name), e.action))
        elif isinstance(e, ExtEntry):
            out.append(ExtEntry(pi(e.name), e.state))
        else:
            out.append(e)
    return tuple(out)


def permute_config(c, pi: Permutation):
    if pi.is_identity():
        return c
    if isinstance(c, ExtConfiguration):
        return ExtConfiguration(c.eq.permute(pi), permute_history(c.history, pi),
                                apply_permutation(c.process, pi))
    if isinstance(c, ExtHistory):
        return ExtHistory(c.eq.permute(pi), permute_history(c.history, pi))
    return Configuration(permute_history(c.history, pi), apply_permutation(c.process, pi))

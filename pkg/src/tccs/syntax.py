"""Process terms for CCS with communicating transactions.

The AST is immutable; every operation here returns a new term.  The concrete
grammar is::

    P ::= 0 | co | X | mu.P | mu | P + P | P | P | nu a. P | rec X. P
        | txn k { P } else { P }      (running transaction named k)
        | txn { P } else { P }        (dormant transaction)
    mu ::= a | 'a | tau

Prefixing binds tightest, then ``+``, then ``|``.  The bodies of ``nu`` and
``rec`` extend as far to the right as possible.  Transaction names written
``#m`` are external; bare names are internal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Union

__all__ = [
    "ActName", "Tau", "TAU", "Prefix", "TransName",
    "Process", "Sum", "Par", "Restrict", "ProcVar", "Rec", "Running", "Dormant", "Commit",
    "ZERO", "CO", "prefix", "par", "NameSubstitution", "Permutation", "ParseError",
    "Violation", "parse_process", "render", "check_well_formed", "is_well_formed",
    "free_transaction_names", "free_process_vars", "free_actions", "apply_permutation",
    "apply_substitution", "unfold", "top_level_commit_split", "parallel_components",
    "term_size", "is_barb_action",
]


# ---------------------------------------------------------------------------
# Names

@dataclass(frozen=True, order=True, slots=True)
class ActName:
    """A channel name with a polarity; ``output`` marks the co-action."""

    name: str
    output: bool = False

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("action names must be nonempty")

    def inverse(self) -> "ActName":
        return ActName(self.name, not self.output)

    def __str__(self) -> str:
        return ("'" if self.output else "") + self.name


@dataclass(frozen=True, order=True, slots=True)
class Tau:
    def __str__(self) -> str:
        return "tau"


TAU = Tau()
Prefix = Union[ActName, Tau]


@dataclass(frozen=True, order=True, slots=True)
class TransName:
    name: str
    external: bool = False

    def __str__(self) -> str:
        return ("#" if self.external else "") + self.name


def is_barb_action(a: ActName) -> bool:
    return a.name.startswith("w_")


# ---------------------------------------------------------------------------
# Terms

class Process:
    """Base class of process terms."""

    __slots__ = ()

    def __str__(self) -> str:
        return render(self)


def _cached_hash(self) -> int:
    # Terms are hashed constantly during state-space searches; cache per node.
    h = self._h
    if h is None:
        h = hash((type(self).__name__,) + tuple(getattr(self, f) for f in self._hashed))
        object.__setattr__(self, "_h", h)
    return h


def _hash_slot():
    return field(default=None, init=False, repr=False, compare=False)


@dataclass(frozen=True, slots=True)
class Sum(Process):
    """Guarded choice; the empty sum is the inert process 0."""

    branches: tuple[tuple[Prefix, Process], ...] = ()
    _h: Optional[int] = _hash_slot()
    _hashed = ('branches',)
    __hash__ = _cached_hash


@dataclass(frozen=True, slots=True)
class Par(Process):
    left: Process
    right: Process
    _h: Optional[int] = _hash_slot()
    _hashed = ('left', 'right')
    __hash__ = _cached_hash


@dataclass(frozen=True, slots=True)
class Restrict(Process):
    action: str
    body: Process
    _h: Optional[int] = _hash_slot()
    _hashed = ('action', 'body')
    __hash__ = _cached_hash


@dataclass(frozen=True, slots=True)
class ProcVar(Process):
    name: str
    _h: Optional[int] = _hash_slot()
    _hashed = ('name',)
    __hash__ = _cached_hash


@dataclass(frozen=True, slots=True)
class Rec(Process):
    var: str
    body: Process
    _h: Optional[int] = _hash_slot()
    _hashed = ('var', 'body')
    __hash__ = _cached_hash


@dataclass(frozen=True, slots=True)
class Running(Process):
    default: Process
    name: TransName
    alternative: Process
    _h: Optional[int] = _hash_slot()
    _hashed = ('default', 'name', 'alternative')
    __hash__ = _cached_hash


@dataclass(frozen=True, slots=True)
class Dormant(Process):
    default: Process
    alternative: Process
    _h: Optional[int] = _hash_slot()
    _hashed = ('default', 'alternative')
    __hash__ = _cached_hash


@dataclass(frozen=True, slots=True)
class Commit(Process):
    _h: Optional[int] = _hash_slot()
    _hashed = ()
    __hash__ = _cached_hash



ZERO = Sum(())
CO = Commit()


def prefix(mu: Prefix, cont: Process = ZERO) -> Sum:
    return Sum(((mu, cont),))


def par(*ps: Process) -> Process:
    """Left-nested parallel composition of one or more processes."""
    if not ps:
        return ZERO
    out = ps[0]
    for p in ps[1:]:
        out = Par(out, p)
    return out


# ---------------------------------------------------------------------------
# Renamings

@dataclass(frozen=True)
class NameSubstitution:
    """Renames every name in ``domain`` to ``target``."""

    domain: frozenset[TransName]
    target: TransName

    def __post_init__(self) -> None:
        if self.target in self.domain:
            raise ValueError("substitution target must not be in its domain")

    def __call__(self, k: TransName) -> TransName:
        return self.target if k in self.domain else k

    def __str__(self) -> str:
        dom = ",".join(str(k) for k in sorted(self.domain))
        return f"{{{dom}}}->{self.target}"


@dataclass(frozen=True)
class Permutation:
    """A finitely supported bijection on transaction names."""

    pairs: tuple[tuple[TransName, TransName], ...] = ()
    _map: Mapping[TransName, TransName] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        m = {a: b for a, b in self.pairs if a != b}
        if len(m) != len(self.pairs) or set(m) != set(m.values()):
            raise ValueError("not a bijection on its support")
        object.__setattr__(self, "pairs", tuple(sorted(m.items())))
        object.__setattr__(self, "_map", m)

    @classmethod
    def from_mapping(cls, m: Mapping[TransName, TransName]) -> "Permutation":
        return cls(tuple((a, b) for a, b in m.items() if a != b))

    @classmethod
    def extending(cls, sources: list, targets: list) -> "Permutation":
        """A bijection sending ``sources[i]`` to ``targets[i]`` (both lists
        duplicate-free), acting only on names in either list."""
        m = dict(zip(sources, targets))
        spare_dom = sorted(set(targets) - set(sources))
        spare_img = sorted(set(sources) - set(targets))
        m.update(zip(spare_dom, spare_img))
        return cls.from_mapping(m)

    @classmethod
    def swap(cls, a: TransName, b: TransName) -> "Permutation":
        return cls(((a, b), (b, a))) if a != b else cls()

    def __call__(self, k: TransName) -> TransName:
        return self._map.get(k, k)

    @property
    def support(self) -> frozenset[TransName]:
        return frozenset(self._map)

    def inverse(self) -> "Permutation":
        return Permutation(tuple((b, a) for a, b in self.pairs))

    def then(self, other: "Permutation") -> "Permutation":
        """The permutation applying ``self`` first and ``other`` second."""
        keys = self.support | other.support
        return Permutation.from_mapping({k: other(self(k)) for k in keys})

    def kind_preserving(self) -> bool:
        return all(a.external == b.external for a, b in self.pairs)

    def is_identity(self) -> bool:
        return not self.pairs


# ---------------------------------------------------------------------------
# Traversals

def _map_names(p: Process, f) -> Process:
    if isinstance(p, Sum):
        if not p.branches:
            return p
        return Sum(tuple((mu, _map_names(q, f)) for mu, q in p.branches))
    if isinstance(p, Par):
        return Par(_map_names(p.left, f), _map_names(p.right, f))
    if isinstance(p, Restrict):
        return Restrict(p.action, _map_names(p.body, f))
    if isinstance(p, Rec):
        return Rec(p.var, _map_names(p.body, f))
    if isinstance(p, Running):
        return Running(_map_names(p.default, f), f(p.name), _map_names(p.alternative, f))
    if isinstance(p, Dormant):
        return Dormant(_map_names(p.default, f), _map_names(p.alternative, f))
    return p


def apply_permutation(p: Process, pi: Permutation) -> Process:
    if pi.is_identity():
        return p
    return _map_names(p, pi)


def apply_substitution(p: Process, sigma: NameSubstitution) -> Process:
    if not sigma.domain:
        return p
    return _map_names(p, sigma)


def _transaction_names(p: Process, out: set) -> None:
    if isinstance(p, Sum):
        for _, q in p.branches:
            _transaction_names(q, out)
    elif isinstance(p, Par):
        _transaction_names(p.left, out)
        _transaction_names(p.right, out)
    elif isinstance(p, (Restrict, Rec)):
        _transaction_names(p.body, out)
    elif isinstance(p, Running):
        out.add(p.name)
        _transaction_names(p.default, out)
        _transaction_names(p.alternative, out)
    elif isinstance(p, Dormant):
        _transaction_names(p.default, out)
        _transaction_names(p.alternative, out)


def free_transaction_names(p: Process) -> frozenset[TransName]:
    out: set = set()
    _transaction_names(p, out)
    return frozenset(out)


def free_process_vars(p: Process) -> frozenset[str]:
    if isinstance(p, ProcVar):
        return frozenset((p.name,))
    if isinstance(p, Rec):
        return free_process_vars(p.body) - {p.var}
    return frozenset().union(*(free_process_vars(q) for q in _children(p)))


def free_actions(p: Process) -> frozenset[str]:
    """Channel identifiers occurring free (not under a matching ``nu``)."""
    if isinstance(p, Sum):
        out: set = set()
        for mu, q in p.branches:
            if isinstance(mu, ActName):
                out.add(mu.name)
            out |= free_actions(q)
        return frozenset(out)
    if isinstance(p, Restrict):
        return free_actions(p.body) - {p.action}
    return frozenset().union(*(free_actions(q) for q in _children(p)))


def _children(p: Process) -> tuple[Process, ...]:
    if isinstance(p, Sum):
        return tuple(q for _, q in p.branches)
    if isinstance(p, Par):
        return (p.left, p.right)
    if isinstance(p, (Restrict, Rec)):
        return (p.body,)
    if isinstance(p, (Running, Dormant)):
        return (p.default, p.alternative)
    return ()


def _substitute_var(p: Process, var: str, q: Process) -> Process:
    if isinstance(p, ProcVar):
        return q if p.name == var else p
    if isinstance(p, Rec):
        if p.var == var:
            return p
        return Rec(p.var, _substitute_var(p.body, var, q))
    if isinstance(p, Sum):
        if not p.branches:
            return p
        return Sum(tuple((mu, _substitute_var(r, var, q)) for mu, r in p.branches))
    if isinstance(p, Par):
        return Par(_substitute_var(p.left, var, q), _substitute_var(p.right, var, q))
    if isinstance(p, Restrict):
        return Restrict(p.action, _substitute_var(p.body, var, q))
    if isinstance(p, Running):
        return Running(_substitute_var(p.default, var, q), p.name,
                       _substitute_var(p.alternative, var, q))
    if isinstance(p, Dormant):
        return Dormant(_substitute_var(p.default, var, q), _substitute_var(p.alternative, var, q))
    return p


def unfold(p: Rec) -> Process:
    """One unfolding ``P{rec X.P / X}``.

    Substituted terms are closed in well-formed input, so no capture of
    restricted channels can occur.
    """
    return _substitute_var(p.body, p.var, p)


def term_size(p: Process) -> int:
    """Constructor count; each prefix counts one and ``0`` counts one."""
    if isinstance(p, Sum):
        if not p.branches:
            return 1
        return sum(1 + term_size(q) for _, q in p.branches)
    return 1 + sum(term_size(q) for q in _children(p))


def drop_inert(p: Process) -> Process:
    """Remove ``0`` parallel components and restrictions of unused channels.

    Both are structural congruences that preserve every transition, so state
    keys built on the result merge only behaviourally identical terms.
    """
    if isinstance(p, Sum):
        if not p.branches:
            return p
        return Sum(tuple((mu, drop_inert(q)) for mu, q in p.branches))
    if isinstance(p, Par):
        left, right = drop_inert(p.left), drop_inert(p.right)
        if left == ZERO:
            return right
        if right == ZERO:
            return left
        return Par(left, right)
    if isinstance(p, Restrict):
        body = drop_inert(p.body)
        return body if p.action not in free_actions(body) else Restrict(p.action, body)
    if isinstance(p, Rec):
        return Rec(p.var, drop_inert(p.body))
    if isinstance(p, Running):
        return Running(drop_inert(p.default), p.name, drop_inert(p.alternative))
    if isinstance(p, Dormant):
        return Dormant(drop_inert(p.default), drop_inert(p.alternative))
    return p


def parallel_components(p: Process) -> Iterator[Process]:
    """Maximal non-parallel subterms reachable through ``|``."""
    if isinstance(p, Par):
        yield from parallel_components(p.left)
        yield from parallel_components(p.right)
    else:
        yield p


# ---------------------------------------------------------------------------
# Structural congruence needed for the commit rule

def top_level_commit_split(p: Process) -> Optional[Process]:
    """Return ``P''`` with ``p`` congruent to ``co | P''``, or None.

    The congruence used is the commutative monoid of ``|`` with unit ``0``,
    together with moving ``co`` out of restrictions (``co`` has no channels).
    The first top-level ``co`` in left-to-right order is removed.
    """
    if isinstance(p, Commit):
        return ZERO
    if isinstance(p, Par):
        if isinstance(p.left, Commit):
            return p.right
        if isinstance(p.right, Commit):
            return p.left
        left = top_level_commit_split(p.left)
        if left is not None:
            return Par(left, p.right)
        right = top_level_commit_split(p.right)
        return None if right is None else Par(p.left, right)
    if isinstance(p, Restrict):
        body = top_level_commit_split(p.body)
        return None if body is None else Restrict(p.action, body)
    return None


# ---------------------------------------------------------------------------
# Well-formedness

@dataclass(frozen=True)
class Violation:
    condition: int
    subterm: Process
    message: str

    def __str__(self) -> str:
        return f"condition {self.condition}: {self.message} in `{render(self.subterm)}`"


def check_well_formed(p: Process) -> list[Violation]:
    """All well-formedness violations of ``p``; empty means well-formed."""
    out: list[Violation] = []
    free = free_process_vars(p)
    if free:
        out.append(Violation(1, p, "unbound process variable(s) " + ", ".join(sorted(free))))

    def named_inside(q: Process, where: str, owner: Process) -> None:
        if free_transaction_names(q):
            out.append(Violation(3, owner, f"named transaction inside {where}"))

    def dormant_inside(q: Process, where: str, owner: Process) -> None:
        if _contains_dormant(q):
            out.append(Violation(4, owner, f"dormant transaction inside {where}"))

    def walk(q: Process) -> None:
        if isinstance(q, Running):
            named_inside(q.default, "a transaction default", q)
            named_inside(q.alternative, "a transaction alternative", q)
            dormant_inside(q.default, "a transaction default", q)
            if free_process_vars(q.default):
                out.append(Violation(5, q, "open transaction default"))
        elif isinstance(q, Dormant):
            named_inside(q.default, "a transaction default", q)
            named_inside(q.alternative, "a transaction alternative", q)
            dormant_inside(q.default, "a transaction default", q)
            if free_process_vars(q.default):
                out.append(Violation(5, q, "open transaction default"))
        elif isinstance(q, Sum):
            for _, r in q.branches:
                named_inside(r, "a sum branch", q)
                dormant_inside(r, "a sum branch", q)
        elif isinstance(q, Rec):
            named_inside(q.body, "a recursion body", q)
            if _unguarded(q.body, q.var):
                out.append(Violation(6, q, f"unguarded occurrence of {q.var}"))
        for r in _children(q):
            walk(r)

    walk(p)
    return out


def _unguarded(p: Process, x: str) -> bool:
    """Whether ``x`` occurs free outside every prefix and dormant transaction.
    Unfolding such a term never reaches a prefix, so it has no well-defined
    set of transitions."""
    if isinstance(p, ProcVar):
        return p.name == x
    if isinstance(p, (Sum, Dormant)):
        return False
    if isinstance(p, Rec) and p.var == x:
        return False
    return any(_unguarded(q, x) for q in _children(p))


def is_well_formed(p: Process) -> bool:
    return not check_well_formed(p)


def _contains_dormant(p: Process) -> bool:
    return isinstance(p, Dormant) or any(_contains_dormant(q) for q in _children(p))


# ---------------------------------------------------------------------------
# Rendering

def render(p: Process) -> str:
    return _render(p, top=True)


def _render(p: Process, top: bool = False) -> str:
    if isinstance(p, Sum):
        if not p.branches:
            return "0"
        return " + ".join(_render_branch(mu, q) for mu, q in p.branches)
    if isinstance(p, Par):
        left = _render(p.left)
        if isinstance(p.left, (Restrict, Rec)):
            left = f"({left})"
        right = _render(p.right)
        if isinstance(p.right, (Par, Restrict, Rec)):
            right = f"({right})"
        return f"{left} | {right}"
    if isinstance(p, Restrict):
        return f"nu {p.action}. {_render(p.body, top=True)}"
    if isinstance(p, Rec):
        return f"rec {p.var}. {_render(p.body, top=True)}"
    if isinstance(p, ProcVar):
        return p.name
    if isinstance(p, Commit):
        return "co"
    if isinstance(p, Running):
        return f"txn {p.name} {{ {_render(p.default, True)} }} else {{ {_render(p.alternative, True)} }}"
    if isinstance(p, Dormant):
        return f"txn {{ {_render(p.default, True)} }} else {{ {_render(p.alternative, True)} }}"
    raise TypeError(f"not a process: {p!r}")


def _render_branch(mu: Prefix, q: Process) -> str:
    if q == ZERO:
        return str(mu)
    body = _render(q)
    if isinstance(q, (Par, Restrict, Rec)) or (isinstance(q, Sum) and len(q.branches) > 1):
        body = f"({body})"
    return f"{mu}.{body}"


# ---------------------------------------------------------------------------
# Parsing

class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<name>[#']?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[.+|(){}])
  | (?P<zero>0)
""", re.VERBOSE)

_KEYWORDS = {"nu", "rec", "txn", "else", "tau", "co"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[_Tok] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("punct", "name", "zero")

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r} but found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def parse(self) -> Process:
        if self.tok.kind == "eof":
            raise self.error("empty input")
        p = self.par()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return p

    def par(self) -> Process:
        p = self.choice()
        while self.at("|"):
            self.i += 1
            p = Par(p, self.choice())
        return p

    def choice(self) -> Process:
        start = self.tok
        p = self.unit()
        if not self.at("+"):
            return p
        branches = list(self._as_branches(p, start))
        while self.at("+"):
            self.i += 1
            start = self.tok
            branches.extend(self._as_branches(self.unit(), start))
        return Sum(tuple(branches))

    def _as_branches(self, p: Process, tok: _Tok):
        if not isinstance(p, Sum) or not p.branches:
            raise self.error("operands of '+' must be prefix-guarded", tok)
        return p.branches

    def unit(self) -> Process:
        tok = self.tok
        if tok.kind == "zero":
            self.i += 1
            return ZERO
        if tok.kind == "punct":
            if tok.text == "(":
                self.i += 1
                p = self.par()
                self.expect(")")
                return p
            raise self.error(f"unexpected {tok.text!r}")
        if tok.kind == "eof":
            raise self.error("unexpected end of input")
        text = tok.text
        if text == "co":
            self.i += 1
            return CO
        if text == "nu":
            self.i += 1
            a = self.plain_name("channel name")
            self.expect(".")
            return Restrict(a, self.par())
        if text == "rec":
            self.i += 1
            var = self.tok
            if var.kind != "name" or not var.text[0].isupper():
                raise self.error("expected a process variable (uppercase)")
            self.i += 1
            self.expect(".")
            return Rec(var.text, self.par())
        if text == "txn":
            self.i += 1
            name: Optional[TransName] = None
            if not self.at("{"):
                t = self.tok
                if t.kind != "name" or t.text.startswith("'") or t.text.lstrip("#") in _KEYWORDS:
                    raise self.error("expected a transaction name or '{'")
                self.i += 1
                name = TransName(t.text.lstrip("#"), t.text.startswith("#"))
            self.expect("{")
            default = self.par()
            self.expect("}")
            self.expect("else")
            self.expect("{")
            alternative = self.par()
            self.expect("}")
            return Dormant(default, alternative) if name is None else Running(default, name, alternative)
        if text == "else":
            raise self.error("unexpected 'else'")
        if text.startswith("#"):
            raise self.error("external names may only name transactions")
        if text[0].isupper():
            self.i += 1
            return ProcVar(text)
        # prefix
        self.i += 1
        mu: Prefix
        if text == "tau":
            mu = TAU
        elif text.startswith("'"):
            mu = ActName(text[1:], True)
        else:
            mu = ActName(text)
        if self.at("."):
            self.i += 1
            return Sum(((mu, self.unit()),))
        return Sum(((mu, ZERO),))

    def plain_name(self, what: str) -> str:
        t = self.tok
        if t.kind != "name" or t.text[0] in "#'" or t.text[0].isupper() or t.text in _KEYWORDS:
            raise self.error(f"expected a {what}")
        self.i += 1
        return t.text


def parse_process(text: str, *, closed: bool = True) -> Process:
    """Parse concrete syntax; with ``closed`` reject unbound process variables."""
    p = _Parser(text).parse()
    if closed:
        free = free_process_vars(p)
        if free:
            raise ParseError("unbound process variable " + ", ".join(sorted(free)), 1, 1)
    return p

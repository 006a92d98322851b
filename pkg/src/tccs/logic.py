"""Modal logics over extended configurations and translations between them.

One AST serves the three logics; ``fragment_violations`` tells which logic a
formula belongs to.  Disjunction, implication, equivalence, ``ff`` and the box
``[tau]`` are sugar over negation, conjunction and diamonds, and the renderer
recognises those shapes again so that ``parse_formula(render_formula(f)) == f``.

Formula grammar::

    f ::= tt | ff | ~f | f & f | f | f | f -> f | f <-> f
        | <tau>f | [tau]f | <x(a)>f | <x('a)>f | <co{v,...}>f
        | hasco(v) | v =co v | (f)
    v ::= #name (external transaction name) | x (variable)

Satisfaction is three-valued: True, False or None when a search bound was hit
and the determined sub-results do not settle the answer.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .history import ExtConfiguration, eq_holds, hasco_set
from .lts import (
    ActLabel, CoLabel, SearchBounds, config_names, state_key, steps, tau_closure, weak_steps,
)
from .reduction import fresh_name
from .syntax import TAU, ActName, ParseError, Permutation, TransName

__all__ = [
    "Var", "Value", "Formula", "DiamondTau", "DiamondAct", "Neg", "Conj", "HascoPred", "EqCo",
    "DiamondCo", "TT", "FF", "conj", "disj", "implies", "iff", "box_tau", "parse_formula",
    "render_formula", "substitute", "free_vars", "ftn", "permute", "fragment_violations",
    "LOGICS", "sat", "sat_hasco", "sat_eq", "sat_canco", "ModelChecker",
    "translate_hasco_to_eq", "translate_canco_to_hasco", "translate_eq_to_canco",
    "hasco_all", "nhasco", "equico", "formula_depth",
]

LOGICS = ("hasco", "eq", "canco")


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


Value = Union[TransName, Var]


def _value_key(v: Value):
    return (isinstance(v, Var), v.name)


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class DiamondTau(Formula):
    body: Formula


@dataclass(frozen=True)
class DiamondAct(Formula):
    var: str
    action: ActName
    body: Formula


@dataclass(frozen=True)
class Neg(Formula):
    body: Formula


@dataclass(frozen=True)
class Conj(Formula):
    parts: tuple

    def __post_init__(self) -> None:
        if len(self.parts) == 1:
            raise ValueError("use conj() for single conjuncts")


@dataclass(frozen=True)
class HascoPred(Formula):
    value: Value


@dataclass(frozen=True)
class EqCo(Formula):
    left: Value
    right: Value


@dataclass(frozen=True)
class DiamondCo(Formula):
    values: frozenset
    body: Formula

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("<co{...}> needs at least one value")


TT = Conj(())
FF = Neg(TT)


def conj(*parts: Formula) -> Formula:
    return parts[0] if len(parts) == 1 else Conj(tuple(parts))


def disj(*parts: Formula) -> Formula:
    if len(parts) == 1:
        return parts[0]
    return Neg(Conj(tuple(Neg(p) for p in parts)))


def implies(a: Formula, b: Formula) -> Formula:
    return Neg(Conj((a, Neg(b))))


def iff(a: Formula, b: Formula) -> Formula:
    return Conj((implies(a, b), implies(b, a)))


def box_tau(f: Formula) -> Formula:
    return Neg(DiamondTau(Neg(f)))


# ---------------------------------------------------------------------------
# Parsing

_FTOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op><->|->|=co|[<>\[\](){},~&|'])
  | (?P<const>\#[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)

_RESERVED = {"tt", "ff", "hasco", "tau", "co"}


class _FormulaParser:
    def __init__(self, text: str) -> None:
        self.toks = []
        pos, line, start = 0, 1, 0
        while pos < len(text):
            m = _FTOKEN.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
            if m.lastgroup != "ws":
                self.toks.append((m.lastgroup, m.group(), line, pos - start + 1))
            for i, ch in enumerate(m.group()):
                if ch == "\n":
                    line, start = line + 1, pos + i + 1
            pos = m.end()
        self.i = 0
        self.end = (line, pos - start + 1)

    def peek(self, k: int = 0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def error(self, msg: str):
        tok = self.peek()
        line, col = (tok[2], tok[3]) if tok else self.end
        return ParseError(msg, line, col)

    def at(self, text: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok[0] in ("op", "ident") and tok[1] == text

    def expect(self, text: str) -> None:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        self.i += 1

    def formula(self) -> Formula:
        left = self.implication()
        if self.at("<->"):
            self.i += 1
            return iff(left, self.implication())
        return left

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.at("->"):
            self.i += 1
            return implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.at("|"):
            self.i += 1
            parts.append(self.conjunction())
        return disj(*parts)

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.at("&"):
            self.i += 1
            parts.append(self.unary())
        return conj(*parts)

    def unary(self) -> Formula:
        if self.at("~"):
            self.i += 1
            return Neg(self.unary())
        if self.at("[") and self.at("tau", 1):
            self.i += 2
            self.expect("]")
            return box_tau(self.unary())
        if self.at("<"):
            self.i += 1
            if self.at("tau"):
                self.i += 1
                self.expect(">")
                return DiamondTau(self.unary())
            if self.at("co") and self.at("{", 1):
                self.i += 2
                values = [self.value()]
                while self.at(","):
                    self.i += 1
                    values.append(self.value())
                self.expect("}")
                self.expect(">")
                return DiamondCo(frozenset(values), self.unary())
            var = self.ident()
            self.expect("(")
            output = False
            if self.at("'"):
                self.i += 1
                output = True
            action = self.ident()
            self.expect(")")
            self.expect(">")
            return DiamondAct(var, ActName(action, output), self.unary())
        return self.atom()

    def atom(self) -> Formula:
        if self.at("tt"):
            self.i += 1
            return TT
        if self.at("ff"):
            self.i += 1
            return FF
        if self.at("hasco"):
            self.i += 1
            self.expect("(")
            v = self.value()
            self.expect(")")
            return HascoPred(v)
        if self.at("("):
            self.i += 1
            f = self.formula()
            self.expect(")")
            return f
        left = self.value()
        self.expect("=co")
        return EqCo(left, self.value())

    def ident(self) -> str:
        tok = self.peek()
        if tok is None or tok[0] != "ident" or tok[1] in _RESERVED:
            raise self.error("expected an identifier")
        self.i += 1
        return tok[1]

    def value(self) -> Value:
        tok = self.peek()
        if tok is not None and tok[0] == "const":
            self.i += 1
            return TransName(tok[1][1:], external=True)
        return Var(self.ident())


def parse_formula(text: str, *, closed: bool = False) -> Formula:
    p = _FormulaParser(text)
    if not p.toks:
        raise p.error("empty formula")
    f = p.formula()
    if p.peek() is not None:
        raise p.error(f"unexpected {p.peek()[1]!r}")
    if closed and free_vars(f):
        names = ", ".join(sorted(v.name for v in free_vars(f)))
        raise ParseError(f"unbound variable(s) {names}", 1, 1)
    return f


# ---------------------------------------------------------------------------
# Rendering

_IFF, _IMP, _OR, _AND, _UNARY = range(1, 6)


def _as_implication(f: Formula):
    if (isinstance(f, Neg) and isinstance(f.body, Conj) and len(f.body.parts) == 2
            and isinstance(f.body.parts[1], Neg)):
        return f.body.parts[0], f.body.parts[1].body
    return None


def _as_disjunction(f: Formula):
    if (isinstance(f, Neg) and isinstance(f.body, Conj) and len(f.body.parts) >= 2
            and all(isinstance(p, Neg) for p in f.body.parts)):
        return [p.body for p in f.body.parts]
    return None


def _as_iff(f: Formula):
    if isinstance(f, Conj) and len(f.parts) == 2:
        a, b = _as_implication(f.parts[0]), _as_implication(f.parts[1])
        if a and b and a == (b[1], b[0]):
            return a
    return None


def _show_value(v: Value) -> str:
    return str(v)


def _render(f: Formula, level: int) -> str:
    def wrap(text: str, own: int) -> str:
        return f"({text})" if own < level else text

    if f == TT:
        return "tt"
    if f == FF:
        return "ff"
    pair = _as_iff(f)
    if pair:
        return wrap(f"{_render(pair[0], _IMP)} <-> {_render(pair[1], _IMP)}", _IFF)
    if isinstance(f, Conj):
        return wrap(" & ".join(_render(p, _UNARY) for p in f.parts), _AND)
    if isinstance(f, Neg):
        if isinstance(f.body, DiamondTau) and isinstance(f.body.body, Neg):
            return "[tau]" + _render(f.body.body.body, _UNARY)
        parts = _as_disjunction(f)
        if parts:
            return wrap(" | ".join(_render(p, _AND) for p in parts), _OR)
        imp = _as_implication(f)
        if imp:
            return wrap(f"{_render(imp[0], _OR)} -> {_render(imp[1], _IMP)}", _IMP)
        return "~" + _render(f.body, _UNARY)
    if isinstance(f, DiamondTau):
        return "<tau>" + _render(f.body, _UNARY)
    if isinstance(f, DiamondAct):
        return f"<{f.var}({f.action})>" + _render(f.body, _UNARY)
    if isinstance(f, DiamondCo):
        vals = ",".join(_show_value(v) for v in sorted(f.values, key=_value_key))
        return f"<co{{{vals}}}>" + _render(f.body, _UNARY)
    if isinstance(f, HascoPred):
        return f"hasco({_show_value(f.value)})"
    if isinstance(f, EqCo):
        return wrap(f"{_show_value(f.left)} =co {_show_value(f.right)}", _UNARY)
    raise TypeError(f"not a formula: {f!r}")


def render_formula(f: Formula) -> str:
    return _render(f, 0)


# ---------------------------------------------------------------------------
# Names and variables

def _map_values(f: Formula, fn, bound: frozenset = frozenset()) -> Formula:
    """Apply ``fn(value, bound)`` to every value occurrence."""
    if isinstance(f, DiamondTau):
        return DiamondTau(_map_values(f.body, fn, bound))
    if isinstance(f, DiamondAct):
        return DiamondAct(f.var, f.action, _map_values(f.body, fn, bound | {f.var}))
    if isinstance(f, Neg):
        return Neg(_map_values(f.body, fn, bound))
    if isinstance(f, Conj):
        return Conj(tuple(_map_values(p, fn, bound) for p in f.parts))
    if isinstance(f, HascoPred):
        return HascoPred(fn(f.value, bound))
    if isinstance(f, EqCo):
        return EqCo(fn(f.left, bound), fn(f.right, bound))
    if isinstance(f, DiamondCo):
        return DiamondCo(frozenset(fn(v, bound) for v in f.values),
                         _map_values(f.body, fn, bound))
    raise TypeError(f"not a formula: {f!r}")


def _values(f: Formula, bound: frozenset = frozenset()):
    if isinstance(f, (DiamondTau, Neg)):
        yield from _values(f.body, bound)
    elif isinstance(f, DiamondAct):
        yield from _values(f.body, bound | {f.var})
    elif isinstance(f, Conj):
        for p in f.parts:
            yield from _values(p, bound)
    elif isinstance(f, HascoPred):
        yield f.value, bound
    elif isinstance(f, EqCo):
        yield f.left, bound
        yield f.right, bound
    elif isinstance(f, DiamondCo):
        for v in f.values:
            yield v, bound
        yield from _values(f.body, bound)


def substitute(f: Formula, x: str, k: TransName) -> Formula:
    """``f[k/x]``: replace the free occurrences of variable ``x`` by ``k``."""
    if not k.external:
        raise ValueError("only external names may be substituted for variables")
    return _map_values(f, lambda v, bound: k if v == Var(x) and x not in bound else v)


def free_vars(f: Formula) -> frozenset:
    return frozenset(v for v, bound in _values(f) if isinstance(v, Var) and v.name not in bound)


def ftn(f: Formula) -> frozenset:
    """Transaction-name constants of ``f``."""
    return frozenset(v for v, _ in _values(f) if isinstance(v, TransName))


def permute(f: Formula, pi: Permutation) -> Formula:
    return _map_values(f, lambda v, _: pi(v) if isinstance(v, TransName) else v)


def formula_depth(f: Formula) -> int:
    if isinstance(f, (DiamondTau, DiamondAct, DiamondCo)):
        return 1 + formula_depth(f.body)
    if isinstance(f, Neg):
        return formula_depth(f.body)
    if isinstance(f, Conj):
        return max((formula_depth(p) for p in f.parts), default=0)
    return 0


def fragment_violations(f: Formula, logic: str) -> list[str]:
    forbidden = {"hasco": (EqCo, DiamondCo), "eq": (HascoPred, DiamondCo),
                 "canco": (HascoPred, EqCo)}[logic]
    out = []

    def walk(g: Formula) -> None:
        if isinstance(g, forbidden):
            out.append(f"{type(g).__name__} is not part of the {logic} logic")
        for child in _children(g):
            walk(child)
    walk(f)
    return out


def _children(f: Formula) -> tuple:
    if isinstance(f, (DiamondTau, DiamondAct, Neg, DiamondCo)):
        return (f.body,)
    if isinstance(f, Conj):
        return f.parts
    return ()


# ---------------------------------------------------------------------------
# Satisfaction

class ModelChecker:
    """Memoising checker for one logic at fixed bounds."""

    def __init__(self, logic: str, bounds: SearchBounds = SearchBounds(), *,
                 strong_tau: bool = False) -> None:
        if logic not in LOGICS:
            raise ValueError(f"unknown logic {logic!r}")
        self.logic = logic
        self.kind = "cs" if logic == "canco" else "ext"
        self.bounds = bounds
        self.strong_tau = strong_tau
        self.memo: dict = {}

    def check(self, c: ExtConfiguration, f: Formula) -> Optional[bool]:
        bad = fragment_violations(f, self.logic)
        if bad:
            raise ValueError(bad[0])
        if free_vars(f):
            raise ValueError("formula is not closed")
        return self._sat(c, f)

    def _sat(self, c: ExtConfiguration, f: Formula) -> Optional[bool]:
        key = (state_key(c), f)
        if key in self.memo:
            return self.memo[key]
        result = self._eval(c, f)
        self.memo[key] = result
        return result

    def _exists(self, succs, exhaustive: bool, f: Formula) -> Optional[bool]:
        unknown = not exhaustive
        for d in succs:
            r = self._sat(d, f)
            if r:
                return True
            if r is None:
                unknown = True
        return None if unknown else False

    def _eval(self, c: ExtConfiguration, f: Formula) -> Optional[bool]:
        if isinstance(f, Conj):
            unknown = False
            for p in f.parts:
                r = self._sat(c, p)
                if r is False:
                    return False
                if r is None:
                    unknown = True
            return None if unknown else True
        if isinstance(f, Neg):
            r = self._sat(c, f.body)
            return None if r is None else not r
        if isinstance(f, HascoPred):
            return f.value in hasco_set(c)
        if isinstance(f, EqCo):
            return eq_holds(c, f.left, f.right)
        if isinstance(f, DiamondTau):
            if self.strong_tau:
                succs = [s.target for s in steps(self.kind, c, alphabet=()) if s.label == TAU]
                return self._exists(succs, True, f.body)
            res = tau_closure(self.kind, c, self.bounds)
            return self._exists(res, res.exhaustive, f.body)
        if isinstance(f, DiamondAct):
            k = fresh_name(config_names(c) | ftn(f), external=True)
            res = weak_steps(self.kind, c, ActLabel(k, f.action), self.bounds)
            return self._exists(res, res.exhaustive, substitute(f.body, f.var, k))
        if isinstance(f, DiamondCo):
            res = weak_steps(self.kind, c, CoLabel(frozenset(f.values)), self.bounds)
            return self._exists(res, res.exhaustive, f.body)
        raise TypeError(f"not a formula: {f!r}")


def sat(logic: str, c: ExtConfiguration, f: Formula, bounds: SearchBounds = SearchBounds(),
        *, strong_tau: bool = False) -> Optional[bool]:
    return ModelChecker(logic, bounds, strong_tau=strong_tau).check(c, f)


def sat_hasco(c, f, bounds: SearchBounds = SearchBounds(), **kw) -> Optional[bool]:
    return sat("hasco", c, f, bounds, **kw)


def sat_eq(c, f, bounds: SearchBounds = SearchBounds(), **kw) -> Optional[bool]:
    return sat("eq", c, f, bounds, **kw)


def sat_canco(c, f, bounds: SearchBounds = SearchBounds(), **kw) -> Optional[bool]:
    return sat("canco", c, f, bounds, **kw)


# ---------------------------------------------------------------------------
# Translations

def _sorted(values: Iterable[Value]) -> list:
    return sorted(set(values), key=_value_key)


def hasco_all(values: Iterable[Value]) -> Formula:
    return conj(*(HascoPred(v) for v in _sorted(values)))


def nhasco(values: Iterable[Value]) -> Formula:
    return conj(*(Neg(HascoPred(v)) for v in _sorted(values)))


def equico(values: Iterable[Value]) -> Formula:
    vs = _sorted(values)
    return conj(*(iff(HascoPred(a), HascoPred(b)) for a, b in itertools.combinations(vs, 2)))


def translate_hasco_to_eq(f: Formula) -> Formula:
    """Replace every ``hasco(v)`` by ``v =co v``."""
    if isinstance(f, HascoPred):
        return EqCo(f.value, f.value)
    if isinstance(f, DiamondTau):
        return DiamondTau(translate_hasco_to_eq(f.body))
    if isinstance(f, DiamondAct):
        return DiamondAct(f.var, f.action, translate_hasco_to_eq(f.body))
    if isinstance(f, Neg):
        return Neg(translate_hasco_to_eq(f.body))
    if isinstance(f, Conj):
        return Conj(tuple(translate_hasco_to_eq(p) for p in f.parts))
    raise ValueError(f"{type(f).__name__} is not part of the hasco logic")


def translate_canco_to_hasco(f: Formula, running: Iterable[Value] = ()) -> Formula:
    """Translate a commit-label formula into one over ``hasco`` predicates.

    ``running`` is the set of values standing for transactions that may still
    commit.
    """
    r = frozenset(running)
    if isinstance(f, DiamondCo):
        a = f.values
        psi = conj(hasco_all(a), nhasco(r - a))
        return DiamondTau(conj(nhasco(a | r), box_tau(equico(a)),
                               DiamondTau(conj(psi, translate_canco_to_hasco(f.body, r - a)))))
    if isinstance(f, DiamondAct):
        r2 = r | {Var(f.var)}
        return DiamondAct(f.var, f.action, conj(nhasco(r2), translate_canco_to_hasco(f.body, r2)))
    if isinstance(f, DiamondTau):
        return DiamondTau(conj(nhasco(r), translate_canco_to_hasco(f.body, r)))
    if isinstance(f, Neg):
        return Neg(translate_canco_to_hasco(f.body, r))
    if isinstance(f, Conj):
        return Conj(tuple(translate_canco_to_hasco(p, r) for p in f.parts))
    raise ValueError(f"{type(f).__name__} is not part of the canco logic")


def _nonempty_subsets(values: frozenset) -> list[frozenset]:
    vs = _sorted(values)
    out = []
    for n in range(1, len(vs) + 1):
        out += [frozenset(c) for c in itertools.combinations(vs, n)]
    return out


def _close_relation(pairs: frozenset, block: frozenset) -> frozenset:
    return pairs | frozenset((a, b) for a in block for b in block)


def translate_eq_to_canco(f: Formula, running: Iterable[Value] = (),
                          relation: Iterable[tuple] = ()) -> Formula:
    """Translate an ``=co`` formula into one over commit labels.

    ``running`` holds values of transactions that may still commit and
    ``relation`` the pairs of values known to have committed together.
    """
    r = frozenset(running)
    e = frozenset(relation)
    if isinstance(f, EqCo):
        return TT if (f.left, f.right) in e else FF
    if isinstance(f, Neg):
        return Neg(translate_eq_to_canco(f.body, r, e))
    if isinstance(f, Conj):
        return Conj(tuple(translate_eq_to_canco(p, r, e) for p in f.parts))
    if isinstance(f, (DiamondAct, DiamondTau)):
        disjuncts = [DiamondCo(a, translate_eq_to_canco(f, r - a, _close_relation(e, a)))
                     for a in _nonempty_subsets(r)]
        if isinstance(f, DiamondAct):
            rest = translate_eq_to_canco(DiamondTau(f.body), r | {Var(f.var)}, e)
            disjuncts.append(DiamondAct(f.var, f.action, rest))
        else:
            disjuncts.append(DiamondTau(translate_eq_to_canco(f.body, r, e)))
        return disj(*disjuncts)
    raise ValueError(f"{type(f).__name__} is not part of the eq logic")

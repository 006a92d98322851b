"""Named processes and configurations used by the worked examples."""

from __future__ import annotations

from .history import Equivalence, ExtConfiguration, ExtEntry
from .syntax import ZERO, Process, TransName, parse_process

SOURCES = {
    "P1": "txn l { a.co } else { 0 }",
    "P2_29": "txn l { a.co + b.0 } else { 0 }",
    "P2": "txn k1 { a.co } else { 0 } | txn k2 { b.co } else { 0 }",
    "Q2": "nu p.(txn k1 { a.p.co + a.co } else { 0 } | txn k2 { b.'p.co + b.co } else { 0 })",
    "P3": "txn k { a.b.co + b.a.co } else { 0 }",
    "Q3": "txn k1 { a.co } else { 0 } | txn k2 { b.co } else { 0 }",
    "O": "txn l1 { 'a.(co | w_1) } else { 0 } | txn l2 { 'b.(co | w_2) } else { 0 }",
}

# Formulas quoted by the examples.
FORMULAS = {
    "hasco_intro": "<x(a)><y(b)>(~hasco(x) & <tau>hasco(x) & [tau](hasco(x) <-> hasco(y)))",
    "eq_intro": "<x(a)><y(b)> x =co y",
    "canco_intro": "<x(a)><y(b)><co{x,y}> tt",
}


def process(name: str) -> Process:
    try:
        return parse_process(SOURCES[name])
    except KeyError:
        raise KeyError(f"unknown library process {name!r}") from None


def resolve(text: str) -> Process:
    """A library name or process source text."""
    return process(text) if text in SOURCES else parse_process(text)


def committed_pair() -> tuple[ExtConfiguration, ExtConfiguration]:
    """Two finished configurations with the same committed names k and l,
    committed separately in the first and together in the second."""
    k, l = TransName("k", True), TransName("l", True)
    history = (ExtEntry(k, "co"), ExtEntry(l, "co"))
    return (ExtConfiguration(Equivalence.identity([k, l]), history, ZERO),
            ExtConfiguration(Equivalence.universal([k, l]), history, ZERO))

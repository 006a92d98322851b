"""Slow reference implementations used to cross-check the optimised code.

Nothing here calls the enumerators under test.  The process-level interpreter
works top-down: for every candidate label it asks which premises each rule
needs and searches for them, instead of building transitions bottom-up.
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache

from tccs.syntax import (
    CO, ZERO, ActName, Commit, Dormant, Par, ProcVar, Process, Rec, Restrict, Running, Sum,
    TAU, Tau, TransName,
)

PREFIXES = (ActName("a"), ActName("a", True), ActName("b"), ActName("b", True), TAU)


# ---------------------------------------------------------------------------
# Term enumeration

@lru_cache(None)
def terms(n: int) -> tuple:
    """Every term of size exactly ``n`` over actions a, b, names k, l and
    the variable X (well-formed or not)."""
    out = []
    if n == 1:
        out += [ZERO, CO, ProcVar("X")]
    out += _sums(n)
    for left in range(1, n - 1):
        for p in terms(left):
            for q in terms(n - 1 - left):
                out.append(Par(p, q))
                out.append(Dormant(p, q))
                out += [Running(p, TransName(k), q) for k in "kl"]
    if n >= 2:
        for p in terms(n - 1):
            out += [Restrict("a", p), Restrict("b", p), Rec("X", p)]
    return tuple(out)


@lru_cache(None)
def _sums(n: int) -> tuple:
    out = []
    for first in range(2, n + 1):
        for mu in PREFIXES:
            for cont in terms(first - 1):
                branch = ((mu, cont),)
                if first == n:
                    out.append(Sum(branch))
                else:
                    out += [Sum(branch + rest.branches) for rest in _sums(n - first)]
    return tuple(out)


# ---------------------------------------------------------------------------
# Independent helpers

@lru_cache(maxsize=100_000)
def o_names(p: Process) -> frozenset:
    if isinstance(p, Running):
        return frozenset([p.name]) | o_names(p.default) | o_names(p.alternative)
    if isinstance(p, Sum):
        return frozenset().union(*(o_names(q) for _, q in p.branches))
    if isinstance(p, Par):
        return o_names(p.left) | o_names(p.right)
    if isinstance(p, (Restrict, Rec)):
        return o_names(p.body)
    if isinstance(p, Dormant):
        return o_names(p.default) | o_names(p.alternative)
    return frozenset()


def o_rename(p: Process, dom: frozenset, k: TransName) -> Process:
    if not dom:
        return p
    if isinstance(p, Running):
        name = k if p.name in dom else p.name
        return Running(o_rename(p.default, dom, k), name, o_rename(p.alternative, dom, k))
    if isinstance(p, Sum):
        return Sum(tuple((mu, o_rename(q, dom, k)) for mu, q in p.branches))
    if isinstance(p, Par):
        return Par(o_rename(p.left, dom, k), o_rename(p.right, dom, k))
    if isinstance(p, Restrict):
        return Restrict(p.action, o_rename(p.body, dom, k))
    if isinstance(p, Rec):
        return Rec(p.var, o_rename(p.body, dom, k))
    if isinstance(p, Dormant):
        return Dormant(o_rename(p.default, dom, k), o_rename(p.alternative, dom, k))
    return p


def o_subst_var(p: Process, x: str, q: Process) -> Process:
    if isinstance(p, ProcVar):
        return q if p.name == x else p
    if isinstance(p, Rec):
        return p if p.var == x else Rec(p.var, o_subst_var(p.body, x, q))
    if isinstance(p, Sum):
        return Sum(tuple((mu, o_subst_var(r, x, q)) for mu, r in p.branches))
    if isinstance(p, Par):
        return Par(o_subst_var(p.left, x, q), o_subst_var(p.right, x, q))
    if isinstance(p, Restrict):
        return Restrict(p.action, o_subst_var(p.body, x, q))
    if isinstance(p, Running):
        return Running(o_subst_var(p.default, x, q), p.name, o_subst_var(p.alternative, x, q))
    if isinstance(p, Dormant):
        return Dormant(o_subst_var(p.default, x, q), o_subst_var(p.alternative, x, q))
    return p


@lru_cache(maxsize=100_000)
def norm(p: Process):
    """Flatten ``|``, drop ``0`` components and restrictions of channels the
    body does not use; the order of the remaining components is kept."""
    if isinstance(p, Par):
        parts = [q for q in _flat(norm(p.left)) + _flat(norm(p.right)) if q != ("0",)]
        if not parts:
            return ("0",)
        return parts[0] if len(parts) == 1 else ("par",) + tuple(parts)
    if isinstance(p, Sum):
        if not p.branches:
            return ("0",)
        return ("sum",) + tuple((mu, norm(q)) for mu, q in p.branches)
    if isinstance(p, Restrict):
        body = norm(p.body)
        return ("nu", p.action, body) if p.action in _free_channels(p.body) else body
    if isinstance(p, Rec):
        return ("rec", p.var, norm(p.body))
    if isinstance(p, Running):
        return ("run", p.name, norm(p.default), norm(p.alternative))
    if isinstance(p, Dormant):
        return ("dorm", norm(p.default), norm(p.alternative))
    if isinstance(p, Commit):
        return ("co",)
    return ("var", p.name)


def _free_channels(p: Process) -> set:
    if isinstance(p, Restrict):
        return _free_channels(p.body) - {p.action}
    if isinstance(p, Sum):
        out = set()
        for mu, q in p.branches:
            if isinstance(mu, ActName):
                out.add(mu.name)
            out |= _free_channels(q)
        return out
    if isinstance(p, Par):
        return _free_channels(p.left) | _free_channels(p.right)
    if isinstance(p, Rec):
        return _free_channels(p.body)
    if isinstance(p, (Running, Dormant)):
        return _free_channels(p.default) | _free_channels(p.alternative)
    return set()


def _flat(t) -> list:
    return list(t[1:]) if t[0] == "par" else [t]


@lru_cache(maxsize=100_000)
def _actions(p: Process) -> frozenset:
    if isinstance(p, Sum):
        out = set()
        for mu, q in p.branches:
            if isinstance(mu, ActName):
                out.add(mu.name)
            out |= _actions(q)
        return frozenset(out)
    if isinstance(p, Par):
        return _actions(p.left) | _actions(p.right)
    if isinstance(p, Restrict):
        return frozenset({p.action}) | _actions(p.body)
    if isinstance(p, Rec):
        return _actions(p.body)
    if isinstance(p, (Running, Dormant)):
        return _actions(p.default) | _actions(p.alternative)
    return frozenset()


# ---------------------------------------------------------------------------
# Action steps, top-down

def _labels(p: Process, k: TransName) -> list:
    mus = [TAU] + [ActName(a, o) for a in sorted(_actions(p)) for o in (False, True)]
    return [(None, mu) for mu in mus] + [(k, mu) for mu in mus]


def derive(p: Process, label, k: TransName) -> set:
    """All ``(renamed, target)`` with ``p --label--> target``; ``label`` is
    ``(None, mu)`` for plain steps or ``(k, mu)`` for transactional ones."""
    scope, mu = label
    out = set()
    if isinstance(p, Sum):
        for nu, q in p.branches:
            if nu != mu:
                continue
            if scope is None:
                out.add((frozenset(), q))
            elif isinstance(mu, ActName):
                out.add((frozenset(), Running(Par(q, CO), k, p)))
    elif isinstance(p, Par):
        for dom, t in derive(p.left, label, k):
            out.add((dom, Par(t, o_rename(p.right, dom, k))))
        for dom, t in derive(p.right, label, k):
            out.add((dom, Par(o_rename(p.left, dom, k), t)))
        if isinstance(mu, Tau):
            for a in sorted(_actions(p)):
                for pol in (False, True):
                    left_mu, right_mu = ActName(a, pol), ActName(a, not pol)
                    for d1, t1 in derive(p.left, (scope, left_mu), k):
                        for d2, t2 in derive(p.right, (scope, right_mu), k):
                            if scope is None:
                                out.add((frozenset(), Par(t1, t2)))
                            else:
                                out.add((d1 | d2, Par(o_rename(t1, d2, k), o_rename(t2, d1, k))))
    elif isinstance(p, Restrict):
        if not (isinstance(mu, ActName) and mu.name == p.action):
            out |= {(dom, Restrict(p.action, t)) for dom, t in derive(p.body, label, k)}
    elif isinstance(p, Rec):
        out |= derive(o_subst_var(p.body, p.var, p), label, k)
    elif isinstance(p, Running):
        if scope is not None:
            for dom, t in derive(p.default, (None, mu), k):
                out.add((frozenset([p.name]), Running(t, k, p.alternative)))
    return out


def naive_action_steps(p: Process, k: TransName) -> set:
    """``(scope, mu, renamed, normalised target)`` for every action step."""
    return {(scope, mu, dom, norm(t))
            for scope, mu in _labels(p, k) for dom, t in derive(p, (scope, mu), k)}


# ---------------------------------------------------------------------------
# Reconfigurations

def _components(p: Process, path=()):
    """Top-level components with the restriction path above them."""
    if isinstance(p, Par):
        yield from _components(p.left, path + ("L",))
        yield from _components(p.right, path + ("R",))
    elif isinstance(p, Restrict):
        yield from _components(p.body, path + ("N",))
    else:
        yield path, p


def _replace(p: Process, path, new: Process) -> Process:
    if not path:
        return new
    step, rest = path[0], path[1:]
    if step == "L":
        return Par(_replace(p.left, rest, new), p.right)
    if step == "R":
        return Par(p.left, _replace(p.right, rest, new))
    return Restrict(p.action, _replace(p.body, rest, new))


def _has_top_co(p: Process) -> bool:
    return any(isinstance(q, Commit) for _, q in _components(p))


def _strip_co(p: Process) -> Process:
    for path, q in list(_components(p)):
        if isinstance(q, Commit):
            p = _replace(p, path, ZERO)
    return p


def naive_reconfig_steps(p: Process, fresh: TransName) -> set:
    """``(kind, name, normalised target)`` for every reconfiguration."""
    out = set()
    comps = list(_components(p))
    for k in {q.name for _, q in comps if isinstance(q, Running)}:
        mine = [(path, q) for path, q in comps if isinstance(q, Running) and q.name == k]
        aborted, committed = p, p
        for path, q in mine:
            aborted = _replace(aborted, path, q.alternative)
        out.add(("ab", k, norm(aborted)))
        if all(_has_top_co(q.default) for _, q in mine):
            for path, q in mine:
                committed = _replace(committed, path, _strip_co(q.default))
            out.add(("co", k, norm(committed)))

    def activate(q: Process):
        for path, r in _components(q):
            if isinstance(r, Dormant):
                yield _replace(q, path, Running(r.default, fresh, r.alternative))
            elif isinstance(r, Rec):
                unfolded = o_subst_var(r.body, r.var, r)
                for s in activate(unfolded):
                    yield _replace(q, path, s)

    for t in activate(p):
        out.add(("new", fresh, norm(t)))
    return out


# ---------------------------------------------------------------------------
# Configuration-level transitions

def _o_close(classes: frozenset, dom: frozenset, k: TransName) -> frozenset:
    """Smallest equivalence containing ``classes`` that relates ``k`` and all
    of ``dom``; computed by repeated merging of overlapping blocks."""
    blocks = [set(c) for c in classes] + [set(dom) | {k}]
    merged = True
    while merged:
        merged = False
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                if blocks[i] & blocks[j]:
                    blocks[i] |= blocks.pop(j)
                    merged = True
                    break
            if merged:
                break
    return frozenset(frozenset(b) for b in blocks)


def _class(classes: frozenset, k) -> frozenset:
    for c in classes:
        if k in c:
            return c
    return frozenset([k])


def naive_ext_steps(c, k_in: TransName, k_ex: TransName, alphabet, commit_sensitive: bool) -> set:
    """Extended (or commit-sensitive) steps as ``(label, classes, history,
    normalised process)`` tuples, where history entries are ``(name, state)``."""
    classes = frozenset(frozenset(b) for b in c.eq.classes)
    hist = tuple((e.name, e.state) for e in c.history)
    p = c.process
    out = set()
    for scope, mu in _labels(p, k_ex):
        for dom, t in derive(p, (scope, mu), k_ex):
            if scope is None:
                if isinstance(mu, Tau):
                    out.add(("tau", classes, hist, norm(t)))
                continue
            name = k_in if isinstance(mu, Tau) else k_ex
            t = o_rename(t, frozenset([k_ex]), name) if name != k_ex else t
            cls = _o_close(classes, dom, name)
            if isinstance(mu, Tau):
                out.add(("tau", cls, hist, norm(t)))
            else:
                out.add((("act", name, mu), cls, hist + ((name, mu),), norm(t)))
    for kind, k, t in naive_reconfig_steps(p, k_in):
        if kind == "new":
            out.add(("tau", classes, hist, t))
            continue
        group = _class(classes, k)
        state = "co" if kind == "co" else "ab"
        h2 = tuple((n, state if n in group and s not in ("co", "ab") else s) for n, s in hist)
        label = "tau"
        if kind == "co" and commit_sensitive:
            visible = frozenset(n for n in group if n.external)
            if visible and any(k in blk for blk in classes):
                label = ("co", visible)
        out.add((label, classes, h2, t))
    for a in alphabet:
        out.add((("act", k_ex, a), classes | {frozenset([k_ex])}, hist + ((k_ex, "ab"),),
                 norm(p)))
    return out


def naive_std_steps(c, k_in: TransName, k_ex: TransName) -> set:
    """Standard steps as ``(label, history, normalised process, challenger)``
    with history entries ``("t", name, action)``, ``("c", action)`` or ``("ab",)``."""
    hist = tuple(_std_entry(e) for e in c.history)
    p = c.process
    out = set()

    def rename_hist(h, dom, k):
        return tuple(("t", k if e[1] in dom else e[1], e[2]) if e[0] == "t" else e for e in h)

    for scope, mu in _labels(p, k_ex):
        for dom, t in derive(p, (scope, mu), k_ex):
            if scope is None:
                if isinstance(mu, Tau):
                    out.add(("tau", hist, norm(t), True))
                continue
            name = k_in if isinstance(mu, Tau) else k_ex
            t = o_rename(t, frozenset([k_ex]), name) if name != k_ex else t
            h = rename_hist(hist, dom, name)
            if isinstance(mu, Tau):
                out.add(("tau", h, norm(t), True))
            else:
                out.add((name, h + (("t", name, mu),), norm(t), True))
    for kind, k, t in naive_reconfig_steps(p, k_in):
        if kind == "co":
            hist2 = tuple(("c", e[2]) if e[0] == "t" and e[1] == k else e for e in hist)
        elif kind == "ab":
            hist2 = tuple(("ab",) if e[0] == "t" and e[1] == k else e for e in hist)
        else:
            hist2 = hist
        out.add(("tau", hist2, t, True))
    out.add((k_ex, hist + (("t", k_ex, None),), norm(p), False))
    return out


def _std_entry(e) -> tuple:
    from tccs.history import Committed, Tentative

    if isinstance(e, Tentative):
        return ("t", e.name, e.action)
    if isinstance(e, Committed):
        return ("c", e.action)
    return ("ab",)


def impl_std_record(s) -> tuple:
    label = "tau" if s.label == TAU else s.label
    return (label, tuple(_std_entry(e) for e in s.target.history), norm(s.target.process),
            s.challenger)


def impl_ext_record(s) -> tuple:
    """The same tuple shape for a step produced by ``tccs.lts``."""
    from tccs.lts import ActLabel, CoLabel

    if isinstance(s.label, ActLabel):
        label = ("act", s.label.name, s.label.action)
    elif isinstance(s.label, CoLabel):
        label = ("co", s.label.names)
    else:
        label = "tau"
    t = s.target
    return (label, frozenset(frozenset(b) for b in t.eq.classes),
            tuple((e.name, e.state) for e in t.history), norm(t.process))


# ---------------------------------------------------------------------------
# Unbounded reachability without canonical forms

def _o_map(p: Process, m: dict) -> Process:
    if not m:
        return p
    if isinstance(p, Running):
        return Running(_o_map(p.default, m), m.get(p.name, p.name), _o_map(p.alternative, m))
    if isinstance(p, Sum):
        return Sum(tuple((mu, _o_map(q, m)) for mu, q in p.branches))
    if isinstance(p, Par):
        return Par(_o_map(p.left, m), _o_map(p.right, m))
    if isinstance(p, Restrict):
        return Restrict(p.action, _o_map(p.body, m))
    if isinstance(p, Rec):
        return Rec(p.var, _o_map(p.body, m))
    if isinstance(p, Dormant):
        return Dormant(_o_map(p.default, m), _o_map(p.alternative, m))
    return p


def brute_key(c):
    """Identity of a configuration up to renaming internal names, found by
    trying every assignment of internal names to a fixed pool and keeping
    the smallest rendering.  Internal names of the equivalence that no
    longer occur in the process are dropped first."""
    from itertools import permutations

    from tccs.history import ExtConfiguration, Tentative

    in_proc = {k for k in o_names(c.process) if not k.external}
    if isinstance(c, ExtConfiguration):
        classes = [frozenset(k for k in b if k.external or k in in_proc) for b in c.eq.classes]
        classes = [b for b in classes if b]
        hist_names = set()
    else:
        classes = []
        hist_names = {e.name for e in c.history if isinstance(e, Tentative) and not e.name.external}
    internal = sorted(in_proc | hist_names | {k for b in classes for k in b if not k.external},
                      key=lambda k: k.name)
    pool = [TransName(f"i{j}") for j in range(len(internal))]
    best = None
    for image in permutations(pool):
        m = dict(zip(internal, image))
        f = lambda k: m.get(k, k)  # noqa: E731
        blocks = sorted(",".join(sorted(str(f(k)) for k in b)) for b in classes)
        hist = []
        for e in c.history:
            if isinstance(e, Tentative):
                hist.append(f"{f(e.name)}({e.action})")
            elif hasattr(e, "name"):
                hist.append(f"{f(e.name)}:{e.state}")
            else:
                hist.append(str(e))
        key = (tuple(blocks), tuple(hist), norm(_o_map(c.process, m)))
        if len(pool) <= 1:
            return key  # a single assignment, nothing to minimise over
        text = repr(key)
        if best is None or text < best:
            best = text
    return best


def bfs_closure(step, start, limit: int = 100_000) -> list:
    """Every state reachable through ``step`` (a function returning
    successor states), deduplicated with ``brute_key``."""
    seen = {brute_key(start): start}
    queue = deque([start])
    while queue:
        c = queue.popleft()
        for d in step(c):
            k = brute_key(d)
            if k not in seen:
                if len(seen) >= limit:
                    raise RuntimeError("closure did not terminate within the limit")
                seen[k] = d
                queue.append(d)
    return list(seen.values())

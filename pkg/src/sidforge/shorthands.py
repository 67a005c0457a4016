"""Lowering extended rules to core rules.

The passes run in a fixed order:

1. ``expand_disequality``: a side condition ``(c1..cn) != ~(b1..bn)`` becomes
   n rules, the i-th with ``ci := bi`` and every other ``cj`` a binary choice;
2. ``expand_binary_vars``: each existential binary variable is peeled off into
   two rules (``b, ~b := zero, one`` and the swap) and a carrier predicate
   ``p'k`` that receives the pair as parameters and allocates the rest of the
   hat-tuple;
3. ``expand_tuples``: a points-to atom with n > 2 fields becomes a chain of
   n - 1 binary cells through fresh predicates ``p~k``;
4. ``expand_choices``: every binary choice ``@`` is replaced by ``zero`` and by
   ``one`` (2**k rules for k choices, k <= 2 once tuples are binary);
5. ``thread_globals``: the global variables are appended to every head and
   every predicate atom.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .syntax import (
    CHOICE,
    NIL,
    PointsTo,
    PredAtom,
    Rule,
    Sid,
    SidError,
    SymbolicHeap,
    complement,
    fresh_var,
    is_var,
    substitute,
)


class MalformedSideCondition(SidError):
    pass


class HatTooShort(SidError):
    pass


class OrphanSubformula(SidError):
    pass


class ChoiceBeforeTupleExpansion(SidError):
    pass


@dataclass(frozen=True)
class GlobalEnv:
    """Ordered global variables: the two binary digits, then the symbols."""

    vars: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if len(set(self.vars)) != len(self.vars) or len(self.vars) < 2:
            raise SidError("globals must be pairwise distinct and include zero and one")

    @property
    def zero(self) -> str:
        return self.vars[0]

    @property
    def one(self) -> str:
        return self.vars[1]


DEFAULT_ENV = GlobalEnv(("zero", "one"))


def _pred_names(rs: Iterable[Rule]) -> set[str]:
    names = set()
    for r in rs:
        names.add(r.head)
        names.update(a.pred for a in r.body.pred_atoms)
    return names


class _Namer:
    """Deterministic fresh predicate names ``<head><sep><k>``."""

    def __init__(self, taken: set[str], sep: str):
        self.taken = set(taken)
        self.sep = sep
        self.counters: dict[str, int] = {}

    def __call__(self, head: str) -> str:
        k = self.counters.get(head, 0)
        while True:
            k += 1
            name = f"{head}{self.sep}{k}"
            if name not in self.taken:
                break
        self.counters[head] = k
        self.taken.add(name)
        return name


def _occurrences(r: Rule, v: str) -> tuple[int, int]:
    """(occurrences in points-to fields, occurrences elsewhere)."""
    in_pts = sum(t == v for a in r.body.points_to for t in a.targets)
    src = sum(a.src == v for a in r.body.points_to)
    other = sum(t == v for a in r.body.atoms if not isinstance(a, PointsTo) for t in a.terms())
    return in_pts, src + other


# ---------------------------------------------------------------------------
# 1. disequality side conditions


def expand_disequality(rs: Sequence[Rule]) -> list[Rule]:
    out = []
    for r in rs:
        if not r.side:
            out.append(r)
            continue
        cs, bs = r.side
        if len(cs) != len(bs) or not cs:
            raise MalformedSideCondition(f"{r.head}: side condition vectors differ in length")
        for c in cs:
            n_pts, n_other = _occurrences(r, c)
            if n_pts > 1 or n_other:
                raise MalformedSideCondition(f"{r.head}: {c} must occur at most once, in the allocated tuple")
            if c in r.params or c in r.body.bound:
                raise MalformedSideCondition(f"{r.head}: {c} is not a side-condition variable")
        for b in bs:
            if b not in r.params:
                raise MalformedSideCondition(f"{r.head}: {b} is not a parameter")
        for i in range(len(cs)):
            m = {c: CHOICE for c in cs}
            m[cs[i]] = bs[i]
            out.append(Rule(r.head, r.params, substitute(r.body, m), r.binary_vars, None))
    return out


# ---------------------------------------------------------------------------
# 2. binary variables


def expand_binary_vars(rs: Sequence[Rule], env: GlobalEnv = DEFAULT_ENV) -> list[Rule]:
    namer = _Namer(_pred_names(rs), "'")
    out: list[Rule] = []
    for r in rs:
        out.extend(_peel(r, namer, env))
    return out


def _peel(r: Rule, namer: _Namer, env: GlobalEnv) -> list[Rule]:
    if not r.binary_vars:
        return [r]
    pts = r.body.points_to
    if len(pts) != 1 or not r.params or pts[0].src != r.params[0]:
        raise SidError(f"{r.head}: binary variables need a single cell allocated by the first parameter")
    cell = pts[0]
    if cell.hat < len(r.binary_vars):
        raise HatTooShort(f"{r.head}: hat of height {cell.hat} for {len(r.binary_vars)} binary variables")
    b, rest = r.binary_vars[0], r.binary_vars[1:]
    used = set(r.params) | {t for a in r.body.atoms for t in a.terms()} | set(r.body.bound)
    used |= set(r.binary_vars) | {complement(v) for v in r.binary_vars}
    y = fresh_var("y", used)
    bbar = fresh_var(f"{b}~bar", used | {y})
    carrier = namer(r.head)
    heads = []
    for pair in ((env.zero, env.one), (env.one, env.zero)):
        body = SymbolicHeap(
            (y,),
            (PointsTo(r.params[0], (NIL, y)), PredAtom(carrier, (y,) + r.params + pair)),
        )
        heads.append(Rule(r.head, r.params, body))
    inner_cell = PointsTo(y, cell.targets[1:], cell.hat - 1)
    atoms = tuple(inner_cell if a is cell else a for a in r.body.atoms)
    inner = substitute(SymbolicHeap(r.body.bound, atoms), {complement(b): bbar})
    side = r.side
    if side:
        side = (side[0], tuple(bbar if t == complement(b) else t for t in side[1]))
    carried = Rule(carrier, (y,) + r.params + (b, bbar), inner, rest, side)
    return heads + _peel(carried, namer, env)


# ---------------------------------------------------------------------------
# 3. tuples


def expand_tuples(rs: Sequence[Rule], env: GlobalEnv | None = None) -> list[Rule]:
    """Chain-encode wide tuples.  Global variables of ``env`` are not carried
    through chain predicates (they are threaded everywhere afterwards)."""
    namer = _Namer(_pred_names(rs), "~")
    glob = frozenset(env.vars) if env else frozenset()
    out: list[Rule] = []
    for r in rs:
        out.extend(_chain(r, namer, glob))
    return out


def _chain(r: Rule, namer: _Namer, glob: frozenset = frozenset()) -> list[Rule]:
    pts = r.body.points_to
    wide = [a for a in pts if len(a.targets) != 2 or a.hat]
    if not wide:
        return [r]
    if len(pts) != 1:
        raise SidError(f"{r.head}: tuple encoding needs exactly one points-to atom")
    cell = pts[0]
    ts = cell.targets
    if len(ts) == 0:
        raise SidError(f"{r.head}: empty tuple")
    if len(ts) <= 2:
        padded = ts + (NIL,) * (2 - len(ts))
        atoms = tuple(PointsTo(cell.src, padded) if a is cell else a for a in r.body.atoms)
        return [Rule(r.head, r.params, SymbolicHeap(r.body.bound, atoms), r.binary_vars, r.side)]
    n = len(ts)
    groups: list[list[PredAtom]] = [[] for _ in range(n)]
    for a in r.body.pred_atoms:
        idx = next((i for i, t in enumerate(ts) if a.args and t == a.args[0] and is_var(t)), None)
        if idx is None:
            raise OrphanSubformula(f"{r.head}: {a} is not rooted at a field of {cell}")
        groups[idx].append(a)
    pure = r.body.pure
    used = set(r.params) | set(r.body.bound) | {t for a in r.body.atoms for t in a.terms()}
    zs = []
    for _ in range(n - 2):
        z = fresh_var(f"z{len(zs) + 1}", used)
        used.add(z)
        zs.append(z)
    names = [namer(r.head) for _ in range(n - 2)]
    order = list(r.params) + list(r.body.bound)

    def cell_of(k: int) -> int:
        # field k lives in chain cell min(k, n-2)
        return min(k, n - 2)

    # each existential is bound in the first chain cell that mentions it
    # (pure atoms stay in the head rule, so their variables stay there too)
    pure_vars = {t for a in pure for t in a.terms()}
    intro: dict[str, int] = {}
    for v in r.body.bound:
        first = min(
            (k for k in range(n) if ts[k] == v or any(v in a.args for a in groups[k])),
            default=0,
        )
        intro[v] = 0 if v in pure_vars else cell_of(first)

    def needed(j: int) -> set[str]:
        need = set()
        for k in range(j, n):
            if is_var(ts[k]):
                need.add(ts[k])
            for a in groups[k]:
                need.update(t for t in a.args if is_var(t))
        return need

    def carried(j: int) -> tuple[str, ...]:
        # variables chain cell j and later cells receive from outside
        need = {v for v in needed(j) if intro.get(v, -1) < j} - glob
        rest = sorted(need - set(order))
        return tuple(v for v in order if v in need) + tuple(rest)

    def bound_at(j: int) -> tuple[str, ...]:
        return tuple(v for v in r.body.bound if intro[v] == j)

    out = []
    # head rule: fields t1 and z1
    args1 = carried(1)
    head_atoms = [PointsTo(cell.src, (ts[0], zs[0]))] + groups[0] + pure + [PredAtom(names[0], (zs[0],) + args1)]
    out.append(Rule(r.head, r.params, SymbolicHeap(bound_at(0) + (zs[0],), tuple(head_atoms)), r.binary_vars, r.side))
    for j in range(1, n - 1):
        params = (zs[j - 1],) + carried(j)
        if j < n - 2:
            nxt = carried(j + 1)
            atoms = [PointsTo(zs[j - 1], (ts[j], zs[j]))] + groups[j] + [PredAtom(names[j], (zs[j],) + nxt)]
            body = SymbolicHeap(bound_at(j) + (zs[j],), tuple(atoms))
        else:
            atoms = [PointsTo(zs[j - 1], (ts[j], ts[j + 1]))] + groups[j] + groups[j + 1]
            body = SymbolicHeap(bound_at(j), tuple(atoms))
        out.append(Rule(names[j - 1], params, body))
    return out


# ---------------------------------------------------------------------------
# 4. binary choices


def expand_choices(rs: Sequence[Rule], env: GlobalEnv = DEFAULT_ENV, naive: bool = False) -> list[Rule]:
    """Replace every ``@`` by ``zero`` / ``one``.

    Unless ``naive`` is set, wide tuples are rejected: eliminating choices
    before tuple encoding multiplies rules by 2**width instead of at most 4.
    """
    out = []
    for r in rs:
        if not naive and any(len(a.targets) != 2 or a.hat for a in r.body.points_to):
            raise ChoiceBeforeTupleExpansion(f"{r.head}: wide tuple left in {r}")
        slots = [(i, j) for i, a in enumerate(r.body.atoms) for j, t in enumerate(a.terms()) if t == CHOICE]
        if not slots:
            out.append(r)
            continue
        for bits in itertools.product((env.zero, env.one), repeat=len(slots)):
            fill = dict(zip(slots, bits))
            atoms = tuple(_fill(a, i, fill) for i, a in enumerate(r.body.atoms))
            out.append(Rule(r.head, r.params, SymbolicHeap(r.body.bound, atoms), r.binary_vars, r.side))
    return out


def _fill(a, i: int, fill: dict):
    terms = [fill.get((i, j), t) for j, t in enumerate(a.terms())]
    if isinstance(a, PointsTo):
        return PointsTo(terms[0], tuple(terms[1:]), a.hat)
    if isinstance(a, PredAtom):
        return PredAtom(a.pred, tuple(terms))
    return type(a)(*terms)


# ---------------------------------------------------------------------------
# 5. globals


def thread_atom(a: PredAtom, env: GlobalEnv) -> PredAtom:
    return PredAtom(a.pred, a.args + env.vars)


def thread_globals(sid: Sid | Sequence[Rule], env: GlobalEnv, arities: Mapping[str, int] | None = None) -> Sid:
    """Append the globals to every head and predicate atom.  ``arities``
    declares predicates that have no rules (their pre-threading arity)."""
    rules = sid.rules if isinstance(sid, Sid) else tuple(sid)
    out = []
    for r in rules:
        clash = set(r.params) & set(env.vars)
        if clash:
            raise SidError(f"{r.head}: parameters {sorted(clash)} collide with global variables")
        if set(r.body.bound) & set(env.vars):
            raise SidError(f"{r.head}: binds a global variable")
        atoms = tuple(thread_atom(a, env) if isinstance(a, PredAtom) else a for a in r.body.atoms)
        out.append(Rule(r.head, r.params + env.vars, SymbolicHeap(r.body.bound, atoms), r.binary_vars, r.side))
    extra = {p: k + len(env.vars) for p, k in (arities or {}).items()}
    if isinstance(sid, Sid):
        extra.update({p: k + len(env.vars) for p, k in sid.arities.items()})
    return Sid.from_rules(out, extra)


# ---------------------------------------------------------------------------

PASSES = ("disequality", "binary-vars", "tuples", "choices", "globals")


def expand_all(
    rs: Sequence[Rule],
    env: GlobalEnv = DEFAULT_ENV,
    emit_after: str | None = None,
    arities: Mapping[str, int] | None = None,
):
    """Run all passes; with ``emit_after`` stop after the named pass and
    return that pass's rule list instead of a core ``Sid``."""
    if emit_after is not None and emit_after not in PASSES:
        raise SidError(f"unknown pass {emit_after!r}; expected one of {PASSES}")
    steps = [
        ("disequality", expand_disequality),
        ("binary-vars", lambda x: expand_binary_vars(x, env)),
        ("tuples", lambda x: expand_tuples(x, env)),
        ("choices", lambda x: expand_choices(x, env)),
    ]
    cur = list(rs)
    for name, fn in steps:
        cur = fn(cur)
        if emit_after == name:
            return cur
    cur = list(dict.fromkeys(cur))
    sid = thread_globals(cur, env, arities)
    if emit_after == "globals":
        return list(sid.rules)
    return sid

"""Structures (store + heap) and strict satisfaction of predicate-free formulas."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Mapping

from .syntax import NIL, Eq, PointsTo, SidError, SymbolicHeap, free_vars

Loc = int
NIL_LOC: Loc = -1
Heap = Mapping[Loc, tuple[Loc, ...]]


class OverlapError(SidError):
    def __init__(self, clash):
        self.clash = frozenset(clash)
        super().__init__(f"heaps overlap on {sorted(self.clash)}")


class UnboundTerm(SidError):
    pass


def heap_disjoint_union(h1: Heap, h2: Heap) -> dict[Loc, tuple[Loc, ...]]:
    clash = set(h1) & set(h2)
    if clash:
        raise OverlapError(clash)
    return {**h1, **h2}


@dataclass(frozen=True)
class Structure:
    store: Mapping[str, Loc]
    heap: Mapping[Loc, tuple[Loc, ...]]

    def __post_init__(self):
        store = dict(self.store)
        store.pop(NIL, None)
        heap = {int(k): tuple(v) for k, v in self.heap.items()}
        if NIL_LOC in heap:
            raise SidError("nil cannot be allocated")
        object.__setattr__(self, "store", store)
        object.__setattr__(self, "heap", heap)

    def loc(self, t: str) -> Loc:
        if t == NIL:
            return NIL_LOC
        try:
            return self.store[t]
        except KeyError:
            raise UnboundTerm(t) from None

    @property
    def locations(self) -> set[Loc]:
        locs = set(self.heap) | set(self.store.values())
        for v in self.heap.values():
            locs.update(v)
        locs.discard(NIL_LOC)
        return locs

    def to_json(self) -> dict:
        return {
            "store": dict(sorted(self.store.items())),
            "heap": {str(k): list(v) for k, v in sorted(self.heap.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "Structure":
        return cls(dict(data["store"]), {int(k): tuple(v) for k, v in data["heap"].items()})

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=False)


def wide_tuple(heap: Heap, loc: Loc, n: int) -> tuple[Loc, ...]:
    """Read an ``n``-tuple stored as right-nested binary cells starting at ``loc``.

    Returns the values and raises ``KeyError`` when a cell is missing.
    """
    cell = heap[loc]
    if n <= 2:
        return cell[:n] if n == 2 else cell[:1]
    return (cell[0],) + wide_tuple(heap, cell[1], n - 1)


def wide_cells(heap: Heap, loc: Loc, n: int) -> list[Loc]:
    """Locations used to store an ``n``-tuple at ``loc`` (``loc`` first)."""
    out = [loc]
    while n > 2:
        loc = heap[loc][1]
        out.append(loc)
        n -= 1
    return out


def write_wide(heap: dict, loc: Loc, values: tuple[Loc, ...], fresh: Iterator[Loc]) -> list[Loc]:
    """Store ``values`` at ``loc`` as a chain of binary cells; return the cells used."""
    values = tuple(values)
    if len(values) == 0:
        values = (NIL_LOC, NIL_LOC)
    elif len(values) == 1:
        values = values + (NIL_LOC,)
    used = [loc]
    while len(values) > 2:
        nxt = next(fresh)
        heap[loc] = (values[0], nxt)
        loc, values = nxt, values[1:]
        used.append(loc)
    heap[loc] = values
    return used


def witness_domain(st: Structure, f: SymbolicHeap) -> list[Loc]:
    """Locations an existential may take: allocated, stored, nil and one fresh."""
    dom = set(st.heap) | {st.store[v] for v in free_vars(f) if v in st.store}
    for v in st.heap.values():
        dom.update(v)
    dom.add(NIL_LOC)
    fresh = max(dom | set(st.store.values()) | {0}) + 1
    return sorted(dom) + [fresh]


def satisfies(st: Structure, f: SymbolicHeap, dom_hint=None) -> bool:
    """Strict-semantics satisfaction for predicate-free ``f``.

    Points-to atoms are matched against heap cells one by one (each atom
    consumes exactly one cell and every cell must be consumed).  Existentials
    not fixed by a match range over ``dom_hint`` or the witness domain.
    """
    if f.pred_atoms:
        raise SidError("satisfies expects a predicate-free formula")
    env = {}
    for v in free_vars(f):
        env[v] = st.loc(v)
    if len(f.points_to) != len(st.heap):
        return False
    domain = list(dom_hint) if dom_hint is not None else witness_domain(st, f)
    return any(True for _ in _match(f, st.heap, env, domain))


def _val(env, t):
    return NIL_LOC if t == NIL else env.get(t)


def _match(f: SymbolicHeap, heap: Heap, env: dict, domain) -> Iterator[dict]:
    """Yield environments extending ``env`` under which ``f`` consumes all of ``heap``."""
    pts = list(f.points_to)
    pure = f.pure

    def go(pending: list[PointsTo], env: dict, used: frozenset) -> Iterator[dict]:
        if not pending:
            unbound = [v for v in f.bound if v not in env]
            yield from assign(unbound, env)
            return
        # prefer an atom whose source is already determined
        idx = next((i for i, a in enumerate(pending) if _val(env, a.src) is not None), None)
        if idx is None:
            v = pending[0].src
            for loc in sorted(set(heap) - used):
                yield from go(pending, {**env, v: loc}, used)
            return
        a = pending[idx]
        rest = pending[:idx] + pending[idx + 1:]
        src = _val(env, a.src)
        if src in used or src not in heap:
            return
        cell = heap[src]
        if len(cell) != len(a.targets):
            return
        new = dict(env)
        for t, l in zip(a.targets, cell):
            cur = _val(new, t)
            if cur is None:
                new[t] = l
            elif cur != l:
                return
        yield from go(rest, new, used | {src})

    def assign(unbound: list[str], env: dict) -> Iterator[dict]:
        if not unbound:
            if all(_pure_ok(a, env) for a in pure):
                yield env
            return
        v = unbound[0]
        for loc in domain:
            yield from assign(unbound[1:], {**env, v: loc})

    yield from go(pts, env, frozenset())


def _pure_ok(a, env) -> bool:
    l, r = _val(env, a.lhs), _val(env, a.rhs)
    return (l == r) if isinstance(a, Eq) else (l != r)

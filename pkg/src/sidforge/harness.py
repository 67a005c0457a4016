"""Heap encodings of pseudo-derivations, bounded entailment and the
end-to-end consistency checks between machines and compiled systems."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

from .atm import Act, Branch, check_pseudo_derivation, enumerate_pseudo_derivations, project, search_derivation, violations
from .pce import NotProgressing
from .reduction import ONE, ZERO, Compiled, ReductionParams, act, bit_terms, bin, compile, from_bits
from .semantics import NIL_LOC, Loc, Structure, write_wide
from .syntax import NIL, PredAtom, Sid, SidError
from .unfolding import (
    Models,
    NotAModel,
    UnfoldingTree,
    canonical_model,
    decorate,
    enumerate_unfolding_trees,
    is_progressing,
    models_sid,
)


class PositionOverflow(SidError):
    pass


# ---------------------------------------------------------------------------
# encoding


@dataclass(frozen=True)
class EncodingWitness:
    h1: Mapping[Loc, tuple[Loc, ...]]
    h2: Mapping[Loc, tuple[Loc, ...]]
    f: Mapping[tuple[int, ...], Loc]  # tree address -> location of its first cell
    decoration: Mapping[Loc, str]

    @property
    def root(self) -> Loc:
        return self.f[()]


def _compiled(p: ReductionParams, compiled: Compiled | None) -> Compiled:
    return compiled if compiled is not None else compile(p)


def encode_pseudo_derivation(
    t: Branch, p: ReductionParams, compiled: Compiled | None = None, check: bool = True
) -> tuple[Structure, EncodingWitness]:
    """The canonical heap of ``t``: the root cell, the constants, the hat
    chain and one wide tuple per tree node (locations in construction order)."""
    m = p.machine
    for _path, b in t.iter_branches():
        if not (0 <= b.pos < 2 ** p.N):
            raise PositionOverflow(f"position {b.pos} needs more than {p.N} bits")
    if not check_pseudo_derivation(m, t, p.N):
        raise SidError("not a pseudo-derivation of the machine")
    fresh = itertools.count()
    x, y, z = next(fresh), next(fresh), next(fresh)
    store = {"x": x}
    for g in p.globals:
        store[g] = next(fresh)
    heap: dict[Loc, tuple[Loc, ...]] = {x: (y, z)}
    for g in p.globals:
        heap[store[g]] = (NIL_LOC, NIL_LOC)
    write_wide(heap, z, tuple(store[g] for g in p.globals), fresh)
    root = next(fresh)
    write_wide(heap, y, (NIL_LOC,) * (p.N + 1) + (root,), fresh)
    h1 = dict(heap)

    val = lambda term: NIL_LOC if term == NIL else store[term]
    f: dict[tuple[int, ...], Loc] = {}
    deco: dict[Loc, str] = {}

    def place_branch(b: Branch, path, loc: Loc):
        f[path] = loc
        deco[loc] = p.root_pred if path == () else b.state
        bits = tuple(val(v) for v in bit_terms(bin(b.pos, p.N)))
        if not b.children:
            write_wide(heap, loc, bits + (val(p.sym(b.leaf_read)),), fresh)
            return
        # children are laid out in the order the compiled rules expect
        kids = sorted(enumerate(b.children), key=lambda ja: (ja[1].read, ja[1].write, ja[1].child.state, ja[1].move))
        kid_locs = [next(fresh) for _ in kids]
        write_wide(heap, loc, bits + tuple(kid_locs), fresh)
        for (j, a), kl in zip(kids, kid_locs):
            place_action(a, path + (j,), kl)

    def place_action(a: Act, path, loc: Loc):
        f[path] = loc
        deco[loc] = act(a.child.state)
        child = next(fresh)
        fields = (val(p.sym(a.read)), val(p.sym(a.write)), val(p.move(a.move)), child)
        write_wide(heap, loc, fields, fresh)
        place_branch(a.child, path + (0,), child)

    place_branch(t, (), root)
    st = Structure(store, heap)
    h2 = {k: v for k, v in heap.items() if k not in h1}
    if check:
        c = _compiled(p, compiled)
        if models_sid(st, c.sid, c.lhs) is not Models.TRUE:
            raise AssertionError("encoding is not a model of the pseudo-derivation predicate")
    return st, EncodingWitness(h1, h2, f, deco)


# ---------------------------------------------------------------------------
# decoding


class _Decoder:
    def __init__(self, st: Structure, p: ReductionParams, deco: Mapping[Loc, str]):
        self.st, self.p, self.deco = st, p, deco
        self.heap = st.heap
        inv = {}
        for v in p.globals:
            inv[st.loc(v)] = v
        self.inv = inv
        self.h2: set[Loc] = set()
        self.f: dict[tuple[int, ...], Loc] = {}

    def fields(self, loc: Loc) -> list[Loc]:
        head = self.deco.get(loc)
        if head is None:
            raise NotAModel(f"location {loc} is not decorated")
        chain = re.compile(re.escape(head) + r"~\d+\Z")
        out, cur = [], loc
        while True:
            if cur not in self.heap or cur in self.h2:
                raise NotAModel(f"tuple at {loc} is broken at {cur}")
            self.h2.add(cur)
            f0, f1 = self.heap[cur]
            nxt = self.deco.get(f1)
            if f1 in self.heap and nxt is not None and chain.match(nxt):
                out.append(f0)
                cur = f1
            else:
                out += [f0, f1]
                return out

    def term(self, loc: Loc) -> str:
        if loc == NIL_LOC:
            return NIL
        if loc not in self.inv:
            raise NotAModel(f"location {loc} is not a constant")
        return self.inv[loc]

    def branch(self, loc: Loc, path, state: str) -> Branch:
        self.f[path] = loc
        N = self.p.N
        fs = self.fields(loc)
        if len(fs) < N + 1:
            raise NotAModel(f"branching cell at {loc} is too short")
        bits = []
        for l in fs[:N]:
            t = self.term(l)
            if t not in (ZERO, ONE):
                raise NotAModel(f"position field at {loc} is not a binary digit")
            bits.append(1 if t == ONE else 0)
        pos = from_bits(bits)
        rest = fs[N:]
        if len(rest) == 1 and (rest[0] == NIL_LOC or rest[0] in self.inv):
            return Branch(state, pos, (), self.p.symbol_of(self.term(rest[0])))
        kids = tuple(self.action(l, path + (j,)) for j, l in enumerate(rest))
        return Branch(state, pos, kids)

    def action(self, loc: Loc, path) -> Act:
        self.f[path] = loc
        pred = self.deco.get(loc, "")
        states = {act(q): q for q in self.p.machine.states}
        if pred not in states:
            raise NotAModel(f"location {loc} is not an action cell")
        fs = self.fields(loc)
        if len(fs) != 4:
            raise NotAModel(f"action cell at {loc} has {len(fs)} fields")
        a, b, u = (self.p.symbol_of(self.term(fs[0])), self.p.symbol_of(self.term(fs[1])), self.term(fs[2]))
        if u not in (ZERO, ONE):
            raise NotAModel(f"move field at {loc} is not a binary digit")
        q = states[pred]
        if self.deco.get(fs[3]) != q:
            raise NotAModel(f"child of {loc} is not decorated by {q}")
        return Act(a, b, "L" if u == ZERO else "R", self.branch(fs[3], path + (0,), q))


def _h1_cells(st: Structure, p: ReductionParams) -> tuple[set[Loc], Loc]:
    heap = st.heap
    x = st.loc("x")
    if x not in heap:
        raise NotAModel("x is not allocated")
    y, z = heap[x]
    cells = {x}
    cur, n = z, len(p.globals)
    while n > 2:
        cells.add(cur)
        cur = heap[cur][1]
        n -= 1
    cells.add(cur)
    cells |= {st.loc(g) for g in p.globals}
    cur = y
    for _ in range(p.N + 1):
        if cur not in heap or heap[cur][0] != NIL_LOC:
            raise NotAModel("hat chain is malformed")
        cells.add(cur)
        nxt = heap[cur][1]
        root, cur = nxt, nxt
    return cells, root


def decode_with_witness(
    st: Structure, p: ReductionParams, compiled: Compiled | None = None
) -> tuple[Branch, EncodingWitness]:
    c = _compiled(p, compiled)
    try:
        deco = decorate(st, c.lhs, c.sid)
    except (NotAModel, KeyError, SidError) as e:
        raise NotAModel(f"not a model of {c.lhs}: {e}") from None
    h1c, root = _h1_cells(st, p)
    if deco.get(root) != p.root_pred:
        raise NotAModel("tree root is not decorated by the initial state")
    d = _Decoder(st, p, deco)
    t = d.branch(root, (), p.machine.initial)
    if d.h2 & h1c or d.h2 | h1c != set(st.heap):
        raise NotAModel("heap does not split into constants and tree")
    h1 = {k: st.heap[k] for k in h1c}
    h2 = {k: st.heap[k] for k in d.h2}
    return t, EncodingWitness(h1, h2, dict(d.f), {l: deco[l] for l in d.f.values()})


def decode_structure(st: Structure, p: ReductionParams, bound: int = 12, compiled: Compiled | None = None) -> Branch:
    """Read the pseudo-derivation encoded by a model of ``p_M``.

    Membership is decided exactly (the system is progressing), so ``bound``
    only matters for callers passing non-progressing systems elsewhere."""
    t, _w = decode_with_witness(st, p, compiled)
    return t


def same_tree(a: Branch, b: Branch) -> bool:
    """Equality of labelled trees up to reordering of siblings."""
    if (a.state, a.pos, len(a.children)) != (b.state, b.pos, len(b.children)):
        return False
    if not a.children:
        return a.leaf_read == b.leaf_read
    rest = list(b.children)
    for x in a.children:
        for k, y in enumerate(rest):
            if (x.read, x.write, x.move) == (y.read, y.write, y.move) and same_tree(x.child, y.child):
                del rest[k]
                break
        else:
            return False
    return True


def check_encoding(st: Structure, t: Branch, p: ReductionParams, compiled: Compiled | None = None) -> bool:
    """Whether ``st`` is a model of ``p_M`` that encodes ``t``: the heap splits
    into the constant part and a tree part whose cells, read through the
    decoration, carry exactly the labels of ``t`` (up to sibling order)."""
    c = _compiled(p, compiled)
    try:
        if models_sid(st, c.sid, c.lhs) is not Models.TRUE:
            return False
        decoded, _w = decode_with_witness(st, p, c)
    except (NotAModel, SidError, KeyError):
        return False
    return same_tree(decoded, t)


# ---------------------------------------------------------------------------
# isomorphism


def canonical_form(heap: Mapping[Loc, tuple[Loc, ...]], root: Loc, names: Mapping[Loc, str]) -> tuple:
    """Canonical labelling of the part of ``heap`` reachable from ``root``:
    named locations keep their names, the others are numbered in depth-first
    order of first visit.  Unreachable cells are summarized by their count."""
    labels: dict[Loc, str] = {}
    order: list[Loc] = []

    def label(l: Loc) -> str:
        if l == NIL_LOC:
            return NIL
        if l in names:
            return names[l]
        if l not in labels:
            labels[l] = f"#{len(labels)}"
            order.append(l)
        return labels[l]

    stack = [root]
    seen = set()
    cells = []
    label(root)
    while stack:
        l = stack.pop()
        if l in seen or l not in heap:
            continue
        seen.add(l)
        fields = tuple(label(v) for v in heap[l])
        cells.append((label(l), fields))
        for v in reversed(heap[l]):
            if v in heap and v not in seen:
                stack.append(v)
    return tuple(cells), len(set(heap) - seen)


def isomorphic(h_a, root_a: Loc, names_a, h_b, root_b: Loc, names_b) -> bool:
    return canonical_form(h_a, root_a, names_a) == canonical_form(h_b, root_b, names_b)


def global_names(st: Structure, p: ReductionParams) -> dict[Loc, str]:
    return {st.loc(g): g for g in p.globals}


def h2_isomorphic(st_a: Structure, st_b: Structure, p: ReductionParams, compiled: Compiled | None = None) -> bool:
    """Whether the tree parts of two encodings are isomorphic (constants
    matched by name)."""
    c = _compiled(p, compiled)
    _ta, wa = decode_with_witness(st_a, p, c)
    _tb, wb = decode_with_witness(st_b, p, c)
    return isomorphic(wa.h2, wa.root, global_names(st_a, p), wb.h2, wb.root, global_names(st_b, p))


# ---------------------------------------------------------------------------
# bounded entailment


@dataclass(frozen=True)
class HoldsWithinBound:
    bound: int
    models_checked: int

    holds = True

    def to_json(self) -> dict:
        return {"verdict": "HoldsWithinBound", "bound": self.bound, "models_checked": self.models_checked}


@dataclass(frozen=True)
class CounterModel:
    structure: Structure
    lhs_tree: UnfoldingTree
    note: str

    holds = False

    def to_json(self) -> dict:
        return {
            "verdict": "CounterModel",
            "structure": self.structure.to_json(),
            "lhs_tree": self.lhs_tree.to_json(),
            "note": self.note,
        }


EntailmentVerdict = HoldsWithinBound | CounterModel


def iter_lhs_models(
    sid: Sid, lhs: PredAtom, max_nodes: int, weight: Callable[[str], int] | None = None
) -> Iterator[tuple[UnfoldingTree, Structure]]:
    """Canonical models of the unfolding trees of ``lhs`` (weight at most
    ``max_nodes``), skipping trees without one and repeated structures."""
    seen = set()
    for u in enumerate_unfolding_trees(sid, lhs, max_nodes, weight):
        st = canonical_model(u)
        if st is None:
            continue
        key = canonical_form(st.heap, st.loc(lhs.args[0]), {v: k for k, v in st.store.items()})
        if key in seen:
            continue
        seen.add(key)
        yield u, st


def bounded_entailment(
    sid: Sid,
    lhs: PredAtom,
    rhs: PredAtom,
    max_nodes: int = 12,
    weight: Callable[[str], int] | None = None,
) -> EntailmentVerdict:
    """Search the canonical models of ``lhs`` for one that is not a model of
    ``rhs``; membership in ``rhs`` is decided exactly per model."""
    if not is_progressing(sid):
        raise NotProgressing("bounded entailment needs a progressing system")
    n = 0
    for u, st in iter_lhs_models(sid, lhs, max_nodes, weight):
        n += 1
        if models_sid(st, sid, rhs) is Models.TRUE:
            continue
        # self-check before reporting
        if models_sid(st, sid, lhs) is not Models.TRUE:
            raise AssertionError("canonical model does not satisfy the left-hand side")
        return CounterModel(st, u, f"no unfolding of {rhs} covers the heap")
    return HoldsWithinBound(max_nodes, n)


def compiled_entailment(c: Compiled, max_nodes: int = 12) -> EntailmentVerdict:
    """``p_M(x) |= c_M(x)`` with the bound counted in tree nodes."""
    return bounded_entailment(c.sid, c.lhs, c.rhs, max_nodes, c.weight)


# ---------------------------------------------------------------------------
# lemma suites


@dataclass
class LemmaReport:
    k: int
    trees: int = 0
    round_trips: int = 0
    violating: int = 0
    failures: list[str] = field(default_factory=list)
    derivation_found: bool = False
    verdict: str = ""

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "pseudo_derivations": self.trees,
            "round_trips": self.round_trips,
            "violating": self.violating,
            "derivation_found": self.derivation_found,
            "entailment": self.verdict,
            "failures": list(self.failures),
            "ok": self.ok,
        }


def verify_lemmas(p: ReductionParams, k: int = 7, compiled: Compiled | None = None) -> LemmaReport:
    """For every pseudo-derivation with at most ``k`` nodes: the encoding
    decodes back to it, and it is a model of ``c_M`` exactly when it breaks a
    tape condition.  Then the bounded entailment agrees with a direct search
    for derivations of the same size."""
    c = _compiled(p, compiled)
    m = p.machine
    rep = LemmaReport(k)
    for t in enumerate_pseudo_derivations(m, p.N, k):
        rep.trees += 1
        st, _w = encode_pseudo_derivation(t, p, c)
        try:
            back = decode_structure(st, p, compiled=c)
        except NotAModel as e:
            rep.failures.append(f"decode failed for {t}: {e}")
            continue
        if same_tree(back, t) and check_encoding(st, t, p, c):
            rep.round_trips += 1
        else:
            rep.failures.append(f"round trip differs for {t}")
        bad = bool(violations(m, t, p.N))
        rep.violating += bad
        in_c = models_sid(st, c.sid, c.rhs) is Models.TRUE
        if in_c != bad:
            rep.failures.append(f"c_M membership {in_c} but violations {bad} for {t}")
    d = search_derivation(m, p.N, k)
    rep.derivation_found = d is not None
    verdict = compiled_entailment(c, k)
    rep.verdict = "HoldsWithinBound" if verdict.holds else "CounterModel"
    if verdict.holds == rep.derivation_found:
        rep.failures.append("entailment verdict disagrees with the derivation search")
    if d is not None:
        st, _w = encode_pseudo_derivation(project(d, m), p, c)
        if models_sid(st, c.sid, c.rhs) is Models.TRUE:
            rep.failures.append("the encoding of a derivation is a model of c_M")
    return rep

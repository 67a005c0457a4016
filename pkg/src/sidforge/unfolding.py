"""Unfolding trees, characteristic formulas and inductive satisfaction.

Two model checkers live here.  ``models_sid`` uses a heap-guided search
for progressing systems: every rule allocates its first parameter, so the
cell under an atom's root fixes the rule's points-to atom and the search
never needs to guess a heap split.  For other systems it falls back to
enumerating unfolding trees up to a node bound and checking their
characteristic formulas, which is also the definition-level oracle used in
the tests.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence

from .semantics import NIL_LOC, Loc, Structure, satisfies, witness_domain
from .syntax import (
    NIL,
    Diseq,
    Eq,
    PointsTo,
    PredAtom,
    SidError,
    Rule,
    Sid,
    SymbolicHeap,
    exists,
    free_vars,
    parse_atom,
    parse_formula,
    sep,
    substitute,
)

NodeAddr = tuple[int, ...]


class NotAModel(SidError):
    pass


class Models(enum.Enum):
    TRUE = "True"
    FALSE_WITHIN_BOUND = "FalseWithinBound"

    def __bool__(self) -> bool:
        return self is Models.TRUE


@dataclass(frozen=True)
class UnfoldingTree:
    """A node labelled by a predicate atom and the instantiated body of the rule used.

    ``children[k]`` unfolds the k-th predicate atom of ``body`` (canonical
    atom order), which fixes the occurrence/child correspondence.
    """

    atom: PredAtom
    rule: int
    body: SymbolicHeap
    children: tuple["UnfoldingTree", ...] = ()

    def __post_init__(self):
        preds = self.body.pred_atoms
        if len(preds) != len(self.children):
            raise SidError("children do not match the predicate atoms of the body")
        for a, c in zip(preds, self.children):
            if c.atom != a:
                raise SidError(f"child labelled {c.atom} for occurrence {a}")

    def nodes(self) -> dict[NodeAddr, "UnfoldingTree"]:
        out: dict[NodeAddr, UnfoldingTree] = {}
        stack: list[tuple[NodeAddr, UnfoldingTree]] = [((), self)]
        while stack:
            addr, t = stack.pop()
            out[addr] = t
            for k, c in enumerate(t.children):
                stack.append((addr + (k,), c))
        return dict(sorted(out.items()))

    @property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)

    def to_json(self, addr: NodeAddr = ()) -> dict:
        return {
            "addr": list(addr),
            "atom": str(self.atom),
            "body": str(self.body),
            "children": [c.to_json(addr + (k,)) for k, c in enumerate(self.children)],
        }


def instantiate(rule: Rule, atom: PredAtom) -> SymbolicHeap:
    """The rule body with parameters replaced by the atom's arguments."""
    if len(rule.params) != len(atom.args):
        raise SidError(f"{atom} does not match the arity of {rule.head}")
    return substitute(rule.body, dict(zip(rule.params, atom.args)))


def enumerate_unfolding_trees(
    sid: Sid,
    root: PredAtom,
    max_nodes: int,
    weight: Callable[[str], int] | None = None,
) -> Iterator[UnfoldingTree]:
    """All unfolding trees of ``root`` whose total weight is at most ``max_nodes``.

    The weight of a tree is the sum of ``weight(pred)`` over its nodes
    (default: one per node, i.e. the tree size).  Trees are produced by
    increasing weight; within one weight, rules in file order and children
    in occurrence order.  Zero-weight predicates must not be recursive.
    """
    if max_nodes < 1:
        raise SidError("max_nodes must be positive")
    sid.rules_for(root.pred)
    w = weight or (lambda _p: 1)
    for n in range(0, max_nodes + 1):
        yield from _trees_exact(sid, root, n, w)


def _trees_exact(sid: Sid, atom: PredAtom, n: int, w) -> Iterator[UnfoldingTree]:
    own = w(atom.pred)
    if own > n:
        return
    for idx, rule in sid.rules_for(atom.pred):
        body = instantiate(rule, atom)
        preds = body.pred_atoms
        rest = n - own
        if not preds:
            if rest == 0:
                yield UnfoldingTree(atom, idx, body, ())
            continue
        for split in _compositions(rest, len(preds)):
            yield from _product(atom, idx, body, preds, split, sid, w)


def _product(atom, idx, body, preds, split, sid, w):
    def go(k: int, acc: tuple):
        if k == len(preds):
            yield UnfoldingTree(atom, idx, body, acc)
            return
        for t in _trees_exact(sid, preds[k], split[k], w):
            yield from go(k + 1, acc + (t,))

    yield from go(0, ())


def _compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Ordered ways to write n as a sum of k non-negative integers."""
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def characteristic_formula(u: UnfoldingTree) -> SymbolicHeap:
    """Replace every predicate occurrence by the formula of its subtree."""
    body = u.body
    local = SymbolicHeap((), tuple(a for a in body.atoms if not isinstance(a, PredAtom)))
    parts = [local] + [characteristic_formula(c) for c in u.children]
    return exists(body.bound, sep(*parts))


def is_progressing_rule(r: Rule) -> bool:
    pts = r.body.points_to
    return (
        len(pts) == 1
        and bool(r.params)
        and pts[0].src == r.params[0]
        and len(pts[0].targets) == 2
    )


def is_progressing(sid: Sid) -> bool:
    return all(is_progressing_rule(r) for r in sid.rules)


# ---------------------------------------------------------------------------
# heap-guided search


@dataclass(frozen=True)
class Witness:
    """A located unfolding: the predicate, its argument locations, the rule
    used, the cells consumed by the whole subtree and the sub-witnesses."""

    pred: str
    args: tuple[Loc, ...]
    rule: int
    cells: frozenset
    children: tuple["Witness", ...]

    @property
    def loc(self) -> Loc:
        return self.args[0]

    def iter_nodes(self, addr: NodeAddr = ()) -> Iterator[tuple[NodeAddr, "Witness"]]:
        yield addr, self
        for k, c in enumerate(self.children):
            yield from c.iter_nodes(addr + (k,))

    @property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)


class GuidedSearch:
    """Exact ``|=_S`` for progressing systems over one fixed structure."""

    def __init__(self, sid: Sid, st: Structure, extra_domain: Sequence[Loc] = ()):
        if not is_progressing(sid):
            raise SidError("guided search needs a progressing system")
        self.sid = sid
        self.st = st
        self.heap = st.heap
        dom = set(witness_domain(st, SymbolicHeap())) | set(st.store.values()) | set(extra_domain)
        self.domain = sorted(dom)
        self._memo: dict[tuple, list[tuple[frozenset, Witness]]] = {}
        self._active: set[tuple] = set()
        self._tainted: set[tuple] = set()

    # -- atoms -------------------------------------------------------------
    def solve_atom(self, pred: str, args: tuple[Loc, ...]) -> list[tuple[frozenset, Witness]]:
        """All ways ``pred(args)`` holds on a sub-heap: (cells used, witness)."""
        key = (pred, args)
        if key in self._memo:
            return self._memo[key]
        if key in self._active:
            # a cyclic heap led back to an open goal; results computed below
            # the open goals are context dependent, so they are not cached
            self._tainted |= self._active
            return []
        self._active.add(key)
        out: list[tuple[frozenset, Witness]] = []
        seen = set()
        for idx, rule in self.sid.rules_for(pred):
            env0 = dict(zip(rule.params, args))
            for _env, cells, kids in self._solve_body(rule.body, env0, frozenset()):
                total = cells.union(*(k.cells for k in kids)) if kids else cells
                w = Witness(pred, args, idx, total, kids)
                if w not in seen:
                    seen.add(w)
                    out.append((total, w))
        self._active.discard(key)
        if key not in self._tainted:
            self._memo[key] = out
        self._tainted.discard(key)
        return out

    # -- bodies ------------------------------------------------------------
    def _solve_body(self, body: SymbolicHeap, env: dict, used: frozenset):
        """Yield (env, own cells, child witnesses) for a body under ``env``.

        Cells in ``used`` are unavailable.  Child witnesses are pairwise
        disjoint and disjoint from the body's own cells.
        """
        for env1, own in self._match_points_to(body.points_to, dict(env), used):
            unbound = [v for v in body.bound if v not in env1]
            # a variable first in a predicate atom must be allocated: try cells
            for env2 in self._assign(unbound, env1, body):
                if not all(_pure_holds(a, env2) for a in body.pure):
                    continue
                preds = body.pred_atoms
                arglists = [tuple(_loc(env2, t) for t in a.args) for a in preds]
                for kids, _cells in self._combine(preds, arglists, used | own):
                    yield env2, own, kids

    def _match_points_to(self, pts: list[PointsTo], env: dict, used: frozenset):
        if not pts:
            yield env, frozenset()
            return
        idx = next((i for i, a in enumerate(pts) if _loc(env, a.src) is not None), None)
        if idx is None:
            a = pts[0]
            for l in sorted(set(self.heap) - used):
                yield from self._match_points_to(pts, {**env, a.src: l}, used)
            return
        a = pts[idx]
        src = _loc(env, a.src)
        if src in used or src not in self.heap:
            return
        cell = self.heap[src]
        if len(cell) != len(a.targets):
            return
        new = dict(env)
        for t, l in zip(a.targets, cell):
            cur = _loc(new, t)
            if cur is None:
                new[t] = l
            elif cur != l:
                return
        rest = pts[:idx] + pts[idx + 1:]
        for env2, cells in self._match_points_to(rest, new, used | {src}):
            yield env2, cells | {src}

    def _assign(self, unbound: list[str], env: dict, body: SymbolicHeap):
        if not unbound:
            yield env
            return
        v = unbound[0]
        roots = {a.args[0] for a in body.pred_atoms if a.args}
        cands = sorted(self.heap) if v in roots else self.domain
        for l in cands:
            yield from self._assign(unbound[1:], {**env, v: l}, body)

    def _combine(self, preds, arglists, used: frozenset):
        def go(k: int, used: frozenset, acc: tuple):
            if k == len(preds):
                yield acc, used
                return
            for cells, w in self.solve_atom(preds[k].pred, arglists[k]):
                if cells & used:
                    continue
                yield from go(k + 1, used | cells, acc + (w,))

        yield from go(0, used, ())

    # -- formulas ----------------------------------------------------------
    def witnesses(self, f: SymbolicHeap) -> Iterator[tuple[dict, tuple[Witness, ...]]]:
        """Witnesses that (s,h) |=_S f, consuming every heap cell."""
        env = {}
        for v in free_vars(f):
            env[v] = self.st.loc(v)
        everything = frozenset(self.heap)
        for env2, own, kids in self._solve_body(f, env, frozenset()):
            cells = own.union(*(k.cells for k in kids)) if kids else own
            if cells == everything:
                yield env2, kids


def _loc(env: Mapping[str, Loc], t: str) -> Loc | None:
    return NIL_LOC if t == NIL else env.get(t)


def _pure_holds(a, env) -> bool:
    l, r = _loc(env, a.lhs), _loc(env, a.rhs)
    return (l == r) if isinstance(a, Eq) else (l != r)


def _as_formula(f) -> SymbolicHeap:
    if isinstance(f, SymbolicHeap):
        return f
    if isinstance(f, PredAtom):
        return SymbolicHeap((), (f,))
    return parse_formula(str(f))


def _check_preds(sid: Sid, f: SymbolicHeap):
    for a in f.pred_atoms:
        sid.rules_for(a.pred)


def models_sid(st: Structure, sid: Sid, f, max_nodes: int = 12) -> Models:
    """Decide (s,h) |=_S f.

    For progressing systems the answer is exact whatever ``max_nodes`` is:
    each unfolding-tree node allocates one cell, so the search is bounded by
    the heap itself.  Otherwise unfolding trees with at most ``max_nodes``
    nodes in total are tried.
    """
    f = _as_formula(f)
    _check_preds(sid, f)
    if is_progressing(sid):
        g = GuidedSearch(sid, st)
        return Models.TRUE if next(g.witnesses(f), None) is not None else Models.FALSE_WITHIN_BOUND
    return models_sid_oracle(st, sid, f, max_nodes)


def models_sid_oracle(st: Structure, sid: Sid, f, max_nodes: int) -> Models:
    """Definition-level check: some choice of unfolding trees (at most
    ``max_nodes`` nodes together) whose characteristic formulas, substituted
    for the predicate atoms, is satisfied."""
    f = _as_formula(f)
    _check_preds(sid, f)
    for trees in _tree_tuples(sid, f.pred_atoms, max_nodes):
        if satisfies(st, unfold_formula(f, trees)):
            return Models.TRUE
    return Models.FALSE_WITHIN_BOUND


def unfold_formula(f: SymbolicHeap, trees: Sequence[UnfoldingTree]) -> SymbolicHeap:
    local = SymbolicHeap((), tuple(a for a in f.atoms if not isinstance(a, PredAtom)))
    return exists(f.bound, sep(local, *(characteristic_formula(t) for t in trees)))


def _tree_tuples(sid: Sid, atoms: list[PredAtom], budget: int):
    if not atoms:
        yield ()
        return
    first, rest = atoms[0], atoms[1:]
    for t in enumerate_unfolding_trees(sid, first, max(budget - len(rest), 1)):
        if t.size + len(rest) > budget:
            continue
        for more in _tree_tuples(sid, rest, budget - t.size):
            yield (t,) + more


# ---------------------------------------------------------------------------
# embeddings and decorations


def embed(u: UnfoldingTree, st: Structure) -> dict[NodeAddr, Loc]:
    """Map each node of ``u`` to the location it allocates.

    Follows the tree top-down: the root atom's first argument is evaluated
    in the store, each node's points-to atom must match the cell at its
    location, and matched targets fix the locations of the children.
    Raises ``NotAModel`` unless the result is a bijection onto dom(h) that
    respects every parent/child edge.
    """
    env = {v: st.loc(v) for v in u.atom.args if v != NIL}
    for lam in _embed(u, (), env, st.heap, frozenset()):
        return lam
    raise NotAModel(f"the structure is not a model of the characteristic formula of {u.atom}")


def _embed(u: UnfoldingTree, addr: NodeAddr, env: dict, heap, used: frozenset):
    body = u.body
    pts = body.points_to
    if len(pts) != 1:
        raise SidError("embeddings need progressing rules")
    a = pts[0]
    src = _loc(env, a.src)
    if src is None or src in used or src not in heap:
        return
    cell = heap[src]
    if len(cell) != len(a.targets):
        return
    local = dict(env)
    for t, l in zip(a.targets, cell):
        cur = _loc(local, t)
        if cur is None:
            local[t] = l
        elif cur != l:
            return
    unbound = [v for v in body.bound if v not in local]
    if unbound:
        raise SidError("embeddings need established, connected rules")
    if not all(_pure_holds(p, local) for p in body.pure):
        return
    used = used | {src}

    def go(k: int, used: frozenset, acc: dict):
        if k == len(u.children):
            yield acc, used
            return
        c = u.children[k]
        cenv = {v: local[v] for v in c.atom.args if v != NIL}
        for lam, used2 in _embed_with_used(c, addr + (k,), cenv, heap, used):
            yield from go(k + 1, used2, {**acc, **lam})

    for lam, used_all in go(0, used, {addr: src}):
        if addr == () and used_all != frozenset(heap):
            continue
        yield lam


def _embed_with_used(u, addr, env, heap, used):
    for lam in _embed(u, addr, env, heap, used):
        yield lam, used | frozenset(lam.values())


def decorate(st: Structure, root, sid: Sid, max_nodes: int = 12) -> dict[Loc, str]:
    """A predicate decoration of the heap: each allocated location labelled by
    the predicate whose rule allocated it, for the first witnessing unfolding."""
    atom = parse_atom(root) if isinstance(root, str) else root
    w = first_witness(st, sid, atom, max_nodes)
    return {node.loc: node.pred for _a, node in w.iter_nodes()}


def first_witness(st: Structure, sid: Sid, atom: PredAtom, max_nodes: int = 12) -> Witness:
    if is_progressing(sid):
        g = GuidedSearch(sid, st)
        for _env, kids in g.witnesses(SymbolicHeap((), (atom,))):
            return kids[0]
        raise NotAModel(f"structure is not a model of {atom}")
    for u in enumerate_unfolding_trees(sid, atom, max_nodes):
        try:
            lam = embed(u, st)
        except (NotAModel, SidError):
            continue
        return _witness_from_tree(u, lam, st)
    raise NotAModel(f"no unfolding of {atom} with at most {max_nodes} nodes fits the structure")


def _witness_from_tree(u: UnfoldingTree, lam: dict, st: Structure, addr: NodeAddr = ()) -> Witness:
    kids = tuple(_witness_from_tree(c, lam, st, addr + (k,)) for k, c in enumerate(u.children))
    cells = frozenset({lam[addr]}).union(*(k.cells for k in kids))
    return Witness(u.atom.pred, (lam[addr],), u.rule, cells, kids)


# ---------------------------------------------------------------------------
# canonical models


def canonical_model(u: UnfoldingTree) -> Structure | None:
    """The structure in which every variable of the characteristic formula
    denotes its own location (nil aside).

    Returns ``None`` when that structure is not a model (two atoms allocate
    the same variable, or a disequality between identical terms).  Equality
    atoms between distinct terms are rejected: such formulas have no
    canonical model in this sense.
    """
    f = characteristic_formula(u)
    names = sorted(free_vars(f)) + list(f.bound)
    loc = {v: i for i, v in enumerate(names)}
    heap: dict[Loc, tuple[Loc, ...]] = {}
    for a in f.points_to:
        l = loc[a.src] if a.src != NIL else NIL_LOC
        if l == NIL_LOC or l in heap:
            return None
        heap[l] = tuple(NIL_LOC if t == NIL else loc[t] for t in a.targets)
    for a in f.pure:
        same = a.lhs == a.rhs
        if isinstance(a, Eq) and not same:
            raise SidError("canonical models are undefined for equalities between distinct terms")
        if isinstance(a, Diseq) and same:
            return None
    store = {v: loc[v] for v in free_vars(f)}
    return Structure(store, heap)

"""Progress, connectivity and establishment checks."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

from .semantics import NIL_LOC, Structure
from .syntax import NIL, Diseq, Eq, PredAtom, Rule, Sid, SidError, SymbolicHeap, all_vars, free_vars
from .unfolding import _tree_tuples, is_progressing_rule, unfold_formula

Diagnostic = tuple[int, str]


class NotProgressing(SidError):
    pass


class Established(enum.Enum):
    YES = "Yes"
    NO = "No"
    UNKNOWN_WITHIN_BOUND = "UnknownWithinBound"


@dataclass
class PceReport:
    progressing: bool
    connected: bool
    established: Established
    diagnostics: list[Diagnostic] = field(default_factory=list)
    countermodel: Structure | None = None

    @property
    def ok(self) -> bool:
        return self.progressing and self.connected and self.established is Established.YES

    def to_json(self) -> dict:
        out = {
            "progressing": self.progressing,
            "connected": self.connected,
            "established": self.established.value,
            "diagnostics": [[i, msg] for i, msg in self.diagnostics],
        }
        if self.countermodel is not None:
            out["countermodel"] = self.countermodel.to_json()
        return out

    def __str__(self) -> str:
        lines = [
            f"progressing: {self.progressing}",
            f"connected: {self.connected}",
            f"established: {self.established.value}",
        ]
        lines += [f"  rule {i}: {msg}" for i, msg in self.diagnostics]
        return "\n".join(lines)


def check_progressing(sid: Sid) -> tuple[bool, list[Diagnostic]]:
    diags = []
    for i, r in enumerate(sid.rules):
        if is_progressing_rule(r):
            continue
        pts = r.body.points_to
        if not pts:
            diags.append((i, f"{r.head}: body has no points-to atom"))
        elif len(pts) > 1:
            diags.append((i, f"{r.head}: body has {len(pts)} points-to atoms"))
        elif not r.params or pts[0].src != r.params[0]:
            diags.append((i, f"{r.head}: allocates {pts[0].src} instead of its first parameter"))
        else:
            diags.append((i, f"{r.head}: points-to atom has {len(pts[0].targets)} fields, expected 2"))
    return not diags, diags


def check_connected(sid: Sid) -> tuple[bool, list[Diagnostic]]:
    ok, _ = check_progressing(sid)
    if not ok:
        raise NotProgressing("connectivity is only defined for progressing systems")
    diags = []
    for i, r in enumerate(sid.rules):
        targets = set(r.body.points_to[0].targets)
        for a in r.body.pred_atoms:
            if not a.args or a.args[0] not in targets or a.args[0] == NIL:
                diags.append((i, f"{r.head}: {a} is not rooted at a field of the allocated cell"))
    return not diags, diags


# ---------------------------------------------------------------------------
# establishment


def _allocating_positions(sid: Sid) -> set[tuple[str, int]]:
    """Pairs (p, k) such that every rule of p allocates its k-th parameter,
    either directly or by passing it to another such position (least fixed
    point, so the allocation is well-founded)."""
    good: set[tuple[str, int]] = set()
    changed = True
    while changed:
        changed = False
        for p in sid.predicates:
            rules = [r for _i, r in sid.rules_for(p)]
            if not rules:
                continue
            for k in range(sid.arities[p]):
                if (p, k) in good:
                    continue
                if all(_allocated(r.params[k], r.body, good) for r in rules):
                    good.add((p, k))
                    changed = True
    return good


def _allocated(v: str, body: SymbolicHeap, good: set[tuple[str, int]]) -> bool:
    if any(a.src == v for a in body.points_to):
        return True
    return any((a.pred, k) in good for a in body.pred_atoms for k, t in enumerate(a.args) if t == v)


def established_syntactic(sid: Sid) -> tuple[bool, list[Diagnostic]]:
    good = _allocating_positions(sid)
    diags = []
    for i, r in enumerate(sid.rules):
        for z in r.body.bound:
            if not _allocated(z, r.body, good):
                diags.append((i, f"{r.head}: existential {z} is not syntactically allocated"))
    return not diags, diags


def _finite_below(sid: Sid, preds: set[str], bound: int) -> bool:
    """True iff every unfolding tree of these predicates has at most ``bound`` nodes."""
    memo: dict[str, int] = {}
    active: set[str] = set()

    def height(p: str) -> int | None:
        if p in memo:
            return memo[p]
        if p in active:
            return None
        active.add(p)
        best = 0
        for _i, r in sid.rules_for(p):
            size = 1
            for a in r.body.pred_atoms:
                h = height(a.pred)
                if h is None:
                    return None
                size += h
            best = max(best, size)
        active.discard(p)
        memo[p] = best
        return best

    total = 0
    for p in preds:
        h = height(p)
        if h is None:
            return False
        total += h
    return total <= bound


def _small_models(f: SymbolicHeap, fixed: list[str]):
    """All (assignment, heap) pairs satisfying predicate-free ``f`` with its
    existentials opened up, over locations 0..k-1 (k = number of variables).

    Every model is isomorphic to one of these, so the enumeration is complete
    up to renaming of locations.
    """
    names = list(dict.fromkeys(fixed + sorted(all_vars(f))))
    dom = list(range(len(names))) + [NIL_LOC]
    for vals in itertools.product(dom, repeat=len(names)):
        env = dict(zip(names, vals))
        val = lambda t: NIL_LOC if t == NIL else env[t]
        heap = {}
        ok = True
        for a in f.points_to:
            src = val(a.src)
            if src == NIL_LOC or src in heap:
                ok = False
                break
            heap[src] = tuple(val(t) for t in a.targets)
        if not ok:
            continue
        for a in f.pure:
            same = val(a.lhs) == val(a.rhs)
            if isinstance(a, Eq) != same:
                ok = False
                break
        if ok:
            yield env, heap


def established_semantic(sid: Sid, bound: int) -> tuple[Established, list[Diagnostic], Structure | None]:
    """Search the S-models of every rule body (unfoldings up to ``bound``
    nodes) for an existential that is not allocated."""
    exhaustive = True
    for i, r in enumerate(sid.rules):
        opened = SymbolicHeap((), r.body.atoms)
        preds = {a.pred for a in opened.pred_atoms}
        if not _finite_below(sid, preds, bound):
            exhaustive = False
        for trees in _tree_tuples(sid, opened.pred_atoms, bound):
            f = unfold_formula(opened, trees)
            fixed = list(r.params) + list(r.body.bound)
            for env, heap in _small_models(f, fixed):
                for z in r.body.bound:
                    if env[z] not in heap:
                        store = {v: env[v] for v in free_vars(f)}
                        st = Structure(store, heap)
                        return Established.NO, [(i, f"{r.head}: existential {z} may denote an unallocated location")], st
    if exhaustive:
        return Established.YES, [], None
    return Established.UNKNOWN_WITHIN_BOUND, [(-1, f"no counter-model with unfoldings of at most {bound} nodes")], None


def check_established(sid: Sid, bound: int = 4) -> Established:
    return establishment(sid, bound)[0]


def establishment(sid: Sid, bound: int = 4) -> tuple[Established, list[Diagnostic], Structure | None]:
    ok, _diags = established_syntactic(sid)
    if ok:
        return Established.YES, [], None
    return established_semantic(sid, bound)


def check_pce(sid: Sid, establish_bound: int = 4) -> PceReport:
    prog, diags = check_progressing(sid)
    if prog:
        conn, cdiags = check_connected(sid)
        diags += cdiags
    else:
        conn = False
    est, ediags, cm = establishment(sid, establish_bound)
    diags += ediags
    return PceReport(prog, conn, est, diags, cm)

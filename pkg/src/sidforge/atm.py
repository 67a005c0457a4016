"""Alternating Turing machines, derivations and pseudo-derivations.

Transitions are tuples ``(q, read, q2, write, move)`` with ``move`` in
``{"L", "R"}``.  Trees alternate branching nodes (:class:`Branch`) and action
nodes (:class:`Act`); node addresses are tuples of child indices, an action
node's only child having index 0.

A pseudo-derivation's universal leaf records the symbol it reads
(``leaf_read``): a leaf is only legal when no transition reads that symbol,
and the tape conditions must be able to check that read like any other.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterator, Mapping, Sequence

EXISTS = "exists"
FORALL = "forall"
_KIND_ALIASES = {
    "exists": EXISTS, "existential": EXISTS, "or": EXISTS, "∨": EXISTS,
    "forall": FORALL, "universal": FORALL, "and": FORALL, "∧": FORALL,
}
MOVES = ("L", "R")

Path = tuple[int, ...]


class AtmError(ValueError):
    pass


class ReadMismatch(AtmError):
    pass


class FellOffLeft(AtmError):
    pass


@dataclass(frozen=True, order=True)
class Transition:
    state: str
    read: str
    target: str
    write: str
    move: str

    @property
    def key(self) -> tuple[str, str, str, str]:
        """Ordering of universal children: (read, write, target, move)."""
        return (self.read, self.write, self.target, self.move)


@dataclass(frozen=True)
class Atm:
    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    blank: str
    initial: str
    kind: Mapping[str, str]
    delta: tuple[Transition, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        kind = {q: _KIND_ALIASES.get(str(k).lower(), None) for q, k in dict(self.kind).items()}
        object.__setattr__(self, "kind", kind)
        delta = tuple(t if isinstance(t, Transition) else Transition(*t) for t in self.delta)
        object.__setattr__(self, "delta", tuple(sorted(set(delta), key=lambda t: (t.state,) + t.key)))
        if self.blank not in self.alphabet:
            raise AtmError("the blank symbol must belong to the alphabet")
        if self.initial not in self.states:
            raise AtmError("unknown initial state")
        for q in self.states:
            if kind.get(q) is None:
                raise AtmError(f"state {q} has no kind (exists/forall)")
        for t in self.delta:
            if t.state not in self.states or t.target not in self.states:
                raise AtmError(f"unknown state in {t}")
            if t.read not in self.alphabet or t.write not in self.alphabet:
                raise AtmError(f"unknown symbol in {t}")
            if t.write == self.blank:
                raise AtmError(f"{t} writes the blank symbol")
            if t.move not in MOVES:
                raise AtmError(f"move must be L or R in {t}")

    def transitions(self, q: str, a: str) -> tuple[Transition, ...]:
        return tuple(t for t in self.delta if t.state == q and t.read == a)

    def outgoing(self, q: str) -> tuple[Transition, ...]:
        return tuple(t for t in self.delta if t.state == q)

    def is_universal(self, q: str) -> bool:
        return self.kind[q] == FORALL

    @property
    def branching(self) -> int:
        """Largest number of transitions sharing a state and a read symbol."""
        return max((len(self.transitions(q, a)) for q in self.states for a in self.alphabet), default=0)

    @property
    def nonblank(self) -> tuple[str, ...]:
        return tuple(a for a in self.alphabet if a != self.blank)

    def to_json(self) -> dict:
        return {
            "states": list(self.states),
            "alphabet": list(self.alphabet),
            "blank": self.blank,
            "initial": self.initial,
            "kind": dict(self.kind),
            "delta": [[t.state, t.read, t.target, t.write, t.move] for t in self.delta],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Atm":
        return cls(
            tuple(data["states"]),
            tuple(data["alphabet"]),
            data.get("blank", "_"),
            data["initial"],
            dict(data["kind"]),
            tuple(Transition(*t) for t in data["delta"]),
        )

    @classmethod
    def load(cls, path) -> "Atm":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class Config:
    state: str
    tape: tuple[tuple[int, str], ...]  # sorted non-blank cells
    head: int

    def read(self, blank: str) -> str:
        return dict(self.tape).get(self.head, blank)


def tape_write(tape: tuple[tuple[int, str], ...], i: int, sym: str) -> tuple[tuple[int, str], ...]:
    d = dict(tape)
    d[i] = sym
    return tuple(sorted(d.items()))


def moved(i: int, move: str) -> int | None:
    if move == "R":
        return i + 1
    return i - 1 if i > 0 else None


def step(m: Atm, c: Config, tr: Transition) -> Config:
    if tr not in m.delta:
        raise AtmError(f"{tr} is not a transition of the machine")
    if tr.state != c.state:
        raise AtmError(f"{tr} does not start in {c.state}")
    if c.read(m.blank) != tr.read:
        raise ReadMismatch(f"{tr} reads {tr.read} but the tape holds {c.read(m.blank)}")
    j = moved(c.head, tr.move)
    if j is None:
        raise FellOffLeft("the head cannot move left of position 0")
    return Config(tr.target, tape_write(c.tape, c.head, tr.write), j)


# ---------------------------------------------------------------------------
# trees


@dataclass(frozen=True)
class Act:
    read: str
    write: str
    move: str
    child: "Branch"


@dataclass(frozen=True)
class Branch:
    state: str
    pos: int
    children: tuple[Act, ...] = ()
    leaf_read: str | None = None
    tape: tuple[tuple[int, str], ...] | None = None

    @property
    def size(self) -> int:
        return 1 + sum(1 + a.child.size for a in self.children)

    def read_symbol(self) -> str | None:
        if self.children:
            return self.children[0].read
        return self.leaf_read

    def iter_branches(self, path: Path = ()) -> Iterator[tuple[Path, "Branch"]]:
        yield path, self
        for j, a in enumerate(self.children):
            yield from a.child.iter_branches(path + (j, 0))

    def node_at(self, path: Path):
        node = self
        for k, j in enumerate(path):
            node = node.children[j] if k % 2 == 0 else node.child
        return node

    def to_json(self) -> dict:
        out: dict = {"state": self.state, "pos": self.pos}
        if self.tape is not None:
            out["tape"] = {str(i): s for i, s in self.tape}
        if self.leaf_read is not None:
            out["leaf_read"] = self.leaf_read
        out["children"] = [
            {"read": a.read, "write": a.write, "move": a.move, "child": a.child.to_json()} for a in self.children
        ]
        return out

    @classmethod
    def from_json(cls, d: dict) -> "Branch":
        tape = d.get("tape")
        if tape is not None:
            tape = tuple(sorted((int(i), s) for i, s in tape.items()))
        kids = tuple(Act(c["read"], c["write"], c["move"], cls.from_json(c["child"])) for c in d.get("children", ()))
        return cls(d["state"], int(d["pos"]), kids, d.get("leaf_read"), tape)


DerivationTree = Branch
PseudoDerivationTree = Branch


def canonical_tree(t: Branch) -> Branch:
    """Universal children sorted by (read, write, target state, move); tapes dropped."""
    kids = tuple(
        sorted(
            (Act(a.read, a.write, a.move, canonical_tree(a.child)) for a in t.children),
            key=lambda a: (a.read, a.write, a.child.state, a.move),
        )
    )
    return Branch(t.state, t.pos, kids, t.leaf_read if not kids else None)


def project(d: Branch, m: Atm) -> Branch:
    """Forget tapes; a leaf keeps the symbol under its head."""
    kids = tuple(Act(a.read, a.write, a.move, project(a.child, m)) for a in d.children)
    leaf = None
    if not kids:
        leaf = d.leaf_read
        if leaf is None and d.tape is not None:
            leaf = dict(d.tape).get(d.pos, m.blank)
    return Branch(d.state, d.pos, kids, leaf)


# ---------------------------------------------------------------------------
# checks


def _children_match(m: Atm, q: str, kids: Sequence[Act], a: str) -> bool:
    want = sorted(t.key for t in m.transitions(q, a))
    have = sorted((k.read, k.write, k.child.state, k.move) for k in kids)
    return want == have


def check_derivation(m: Atm, t: Branch) -> bool:
    if t.state != m.initial or t.pos != 0 or (t.tape or ()) != ():
        return False
    return _check_d(m, t, Config(t.state, (), 0))


def _check_d(m: Atm, t: Branch, c: Config) -> bool:
    if t.state != c.state or t.pos != c.head:
        return False
    if t.tape is not None and t.tape != c.tape:
        return False
    a = c.read(m.blank)
    if not t.children:
        if t.leaf_read is not None and t.leaf_read != a:
            return False
        return m.is_universal(t.state) and not m.transitions(t.state, a)
    if not m.is_universal(t.state) and len(t.children) != 1:
        return False
    if m.is_universal(t.state) and not _children_match(m, t.state, t.children, a):
        return False
    for k in t.children:
        tr = Transition(t.state, k.read, k.child.state, k.write, k.move)
        try:
            nxt = step(m, c, tr)
        except AtmError:
            return False
        if not _check_d(m, k.child, nxt):
            return False
    return True


def check_pseudo_derivation(m: Atm, t: Branch, N: int) -> bool:
    if t.state != m.initial or t.pos != 0:
        return False
    return all(_pseudo_node_ok(m, b, N) for _p, b in t.iter_branches())


def _pseudo_node_ok(m: Atm, b: Branch, N: int) -> bool:
    if b.state not in m.states or not (0 <= b.pos < 2 ** N):
        return False
    if not b.children:
        return (
            m.is_universal(b.state)
            and b.leaf_read in m.alphabet
            and not m.transitions(b.state, b.leaf_read)
        )
    if b.leaf_read is not None and b.leaf_read != b.children[0].read:
        return False
    if m.is_universal(b.state):
        a = b.children[0].read
        return all(k.read == a for k in b.children) and _children_match(m, b.state, b.children, a)
    if len(b.children) != 1:
        return False
    k = b.children[0]
    return Transition(b.state, k.read, k.child.state, k.write, k.move) in m.delta


def pseudo_to_derivation(m: Atm, t: Branch) -> Branch | None:
    """Relabel branching nodes with the tape obtained by replaying the writes
    from the root; return the result when it is a derivation."""

    def relabel(b: Branch, tape) -> Branch:
        kids = tuple(
            Act(a.read, a.write, a.move, relabel(a.child, tape_write(tape, b.pos, a.write))) for a in b.children
        )
        return Branch(b.state, b.pos, kids, b.leaf_read, tape)

    d = relabel(t, ())
    return d if check_derivation(m, d) else None


@dataclass(frozen=True)
class Violation:
    kind: str  # "I" head move, "II" stale read, "III" non-blank initial read
    at: Path
    witnesses: tuple[Path, ...] = field(default=())

    def to_json(self) -> dict:
        return {"kind": self.kind, "at": list(self.at), "witnesses": [list(p) for p in self.witnesses]}


def violations(m: Atm, t: Branch, N: int) -> list[Violation]:
    """Every violation of the head-move (I), read-after-write (II) and
    blank-initial-tape (III) conditions.

    The read of a branching node is the symbol read by its actions, or the
    recorded symbol of a leaf; it is reported at the first action's address
    (the leaf's own address for leaves).
    """
    out: list[Violation] = []
    size = 2 ** N

    def walk(b: Branch, path: Path, last: dict[int, tuple[Path, Path, str]]):
        a = b.read_symbol()
        read_at = path + (0,) if b.children else path
        if b.pos in last:
            bpath, apath, written = last[b.pos]
            if a != written:
                out.append(Violation("II", read_at, (bpath, apath, path)))
        elif a != m.blank:
            out.append(Violation("III", read_at, (path,)))
        for j, act in enumerate(b.children):
            target = b.pos + 1 if act.move == "R" else b.pos - 1
            cpath = path + (j, 0)
            if not (0 <= target < size) or act.child.pos != target:
                out.append(Violation("I", cpath, (path, path + (j,), cpath)))
            nxt = dict(last)
            nxt[b.pos] = (path, path + (j,), act.write)
            walk(act.child, cpath, nxt)

    walk(t, (), {})
    order = {"I": 0, "II": 1, "III": 2}
    return sorted(out, key=lambda v: (order[v.kind], v.at))


# ---------------------------------------------------------------------------
# enumeration and search


def enumerate_pseudo_derivations(m: Atm, N: int, max_nodes: int) -> Iterator[Branch]:
    """All pseudo-derivations with at most ``max_nodes`` nodes, by size,
    universal children in canonical order."""
    gen = _PseudoGen(m, N)
    for n in range(1, max_nodes + 1):
        yield from gen.exact(m.initial, 0, n)


class _PseudoGen:
    def __init__(self, m: Atm, N: int):
        self.m = m
        self.positions = range(2 ** N)
        self.exact = lru_cache(maxsize=None)(self._exact)

    def _exact(self, q: str, pos: int, n: int) -> tuple[Branch, ...]:
        m = self.m
        out: list[Branch] = []
        if m.is_universal(q):
            for a in m.alphabet:
                trs = m.transitions(q, a)
                if not trs:
                    if n == 1:
                        out.append(Branch(q, pos, (), a))
                    continue
                k = len(trs)
                rest = n - 1 - k
                if rest < k:
                    continue
                for split in _compositions_pos(rest, k):
                    out.extend(self._fan(q, pos, trs, split))
        else:
            if n >= 3:
                for tr in m.outgoing(q):
                    for p in self.positions:
                        for sub in self.exact(tr.target, p, n - 2):
                            out.append(Branch(q, pos, (Act(tr.read, tr.write, tr.move, sub),)))
        return tuple(out)

    def _fan(self, q, pos, trs, split):
        def go(j: int, acc: tuple):
            if j == len(trs):
                yield Branch(q, pos, acc)
                return
            tr = trs[j]
            for p in self.positions:
                for sub in self.exact(tr.target, p, split[j]):
                    yield from go(j + 1, acc + (Act(tr.read, tr.write, tr.move, sub),))

        yield from go(0, ())


def _compositions_pos(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Ordered ways to write n as a sum of k positive integers."""
    if k == 1:
        if n >= 1:
            yield (n,)
        return
    for first in range(1, n - k + 2):
        for rest in _compositions_pos(n - first, k - 1):
            yield (first,) + rest


def search_derivation(m: Atm, N: int, max_nodes: int) -> Branch | None:
    """A smallest derivation from the empty tape using positions below 2**N,
    if one with at most ``max_nodes`` nodes exists."""
    size = 2 ** N

    @lru_cache(maxsize=None)
    def best(c: Config, budget: int) -> Branch | None:
        if budget < 1:
            return None
        a = c.read(m.blank)
        trs = m.transitions(c.state, a)
        if m.is_universal(c.state):
            if not trs:
                return Branch(c.state, c.head, (), a, c.tape)
            kids = []
            used = 1
            for tr in trs:
                j = moved(c.head, tr.move)
                if j is None or j >= size:
                    return None
                # allow each child whatever the others leave over
                sub = best(step(m, c, tr), budget - used - 1)
                if sub is None:
                    return None
                kids.append(Act(tr.read, tr.write, tr.move, sub))
                used += 1 + sub.size
            if used > budget:
                return None
            return Branch(c.state, c.head, tuple(kids), None, c.tape)
        found = None
        for tr in m.outgoing(c.state):
            if tr.read != a:
                continue
            j = moved(c.head, tr.move)
            if j is None or j >= size:
                continue
            sub = best(step(m, c, tr), budget - 2)
            if sub is not None and (found is None or 2 + sub.size < found.size):
                found = Branch(c.state, c.head, (Act(tr.read, tr.write, tr.move, sub),), None, c.tape)
        return found

    d = best(Config(m.initial, (), 0), max_nodes)
    if d is not None:
        d = replace(d)
    return d

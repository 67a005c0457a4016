"""Symbolic heaps, rules and systems of inductive definitions.

Terms are plain strings.  ``"nil"`` is the constant, ``"@"`` marks a binary
choice and a leading ``~`` denotes the complement of a binary variable; the
last two only occur in extended (pre-desugaring) rules.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Mapping, Sequence, Union

NIL = "nil"
CHOICE = "@"

IDENT = r"[A-Za-z_][A-Za-z0-9_'~]*"
_IDENT_RE = re.compile(IDENT + r"\Z")


class SidError(ValueError):
    pass


class ParseError(SidError):
    pass


def is_var(t: str) -> bool:
    return t != NIL and t != CHOICE


def complement(b: str) -> str:
    return b[1:] if b.startswith("~") else "~" + b


@dataclass(frozen=True)
class PointsTo:
    src: str
    targets: tuple[str, ...]
    # number of leading nil fields that form a hat [t]^hat
    hat: int = 0

    def terms(self) -> tuple[str, ...]:
        return (self.src,) + self.targets

    def rename(self, m: Mapping[str, str]) -> "PointsTo":
        return PointsTo(m.get(self.src, self.src), tuple(m.get(t, t) for t in self.targets), self.hat)

    def __str__(self) -> str:
        if self.hat:
            rest = self.targets[self.hat:]
            return f"{self.src} -> [{','.join(rest)}]^{self.hat}"
        return f"{self.src} -> ({','.join(self.targets)})"


@dataclass(frozen=True)
class PredAtom:
    pred: str
    args: tuple[str, ...]

    def terms(self) -> tuple[str, ...]:
        return self.args

    def rename(self, m: Mapping[str, str]) -> "PredAtom":
        return PredAtom(self.pred, tuple(m.get(t, t) for t in self.args))

    def __str__(self) -> str:
        return f"{self.pred}({','.join(self.args)})"


@dataclass(frozen=True)
class Eq:
    lhs: str
    rhs: str

    def terms(self) -> tuple[str, ...]:
        return (self.lhs, self.rhs)

    def rename(self, m: Mapping[str, str]) -> "Eq":
        return Eq(m.get(self.lhs, self.lhs), m.get(self.rhs, self.rhs))

    def __str__(self) -> str:
        return f"{self.lhs} = {self.rhs}"


@dataclass(frozen=True)
class Diseq:
    lhs: str
    rhs: str

    def terms(self) -> tuple[str, ...]:
        return (self.lhs, self.rhs)

    def rename(self, m: Mapping[str, str]) -> "Diseq":
        return Diseq(m.get(self.lhs, self.lhs), m.get(self.rhs, self.rhs))

    def __str__(self) -> str:
        return f"{self.lhs} != {self.rhs}"


Atom = Union[PointsTo, PredAtom, Eq, Diseq]
_RANK = {PointsTo: 0, PredAtom: 1, Eq: 2, Diseq: 3}


def _atom_key(a: Atom):
    return (_RANK[type(a)], str(a))


@dataclass(frozen=True)
class SymbolicHeap:
    """Prenex formula ``\\E bound . a1 * ... * an``.

    Atoms are kept in canonical order so that equality is multiset equality.
    """

    bound: tuple[str, ...] = ()
    atoms: tuple[Atom, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "bound", tuple(self.bound))
        object.__setattr__(self, "atoms", tuple(sorted(self.atoms, key=_atom_key)))
        if len(set(self.bound)) != len(self.bound):
            raise SidError(f"duplicate bound variables in {self.bound}")
        for v in self.bound:
            if not is_var(v):
                raise SidError(f"cannot bind {v!r}")

    @property
    def points_to(self) -> list[PointsTo]:
        return [a for a in self.atoms if isinstance(a, PointsTo)]

    @property
    def pred_atoms(self) -> list[PredAtom]:
        return [a for a in self.atoms if isinstance(a, PredAtom)]

    @property
    def pure(self) -> list[Atom]:
        return [a for a in self.atoms if isinstance(a, (Eq, Diseq))]

    def is_predicate_free(self) -> bool:
        return not self.pred_atoms

    def __str__(self) -> str:
        body = " * ".join(str(a) for a in self.atoms) or "emp"
        if self.bound:
            return f"\\E {' '.join(self.bound)} . {body}"
        return body


def all_vars(f: SymbolicHeap) -> set[str]:
    return {t for a in f.atoms for t in a.terms() if is_var(t)} | set(f.bound)


def free_vars(f: SymbolicHeap) -> set[str]:
    """Variables occurring outside the existential prefix."""
    return {t for a in f.atoms for t in a.terms() if is_var(t)} - set(f.bound)


def fresh_name(base: str, avoid: set[str]) -> str:
    for k in itertools.count(1):
        cand = f"{base}'{k}" if k > 1 else f"{base}'"
        if cand not in avoid:
            return cand
    raise AssertionError  # pragma: no cover


def fresh_var(base: str, avoid: set[str]) -> str:
    """``base`` itself when unused, otherwise a primed variant."""
    return base if base not in avoid else fresh_name(base, avoid)


def substitute(f: SymbolicHeap, m: Mapping[str, str]) -> SymbolicHeap:
    """Simultaneous capture-avoiding substitution of free variables."""
    m = {k: v for k, v in m.items() if k not in f.bound}
    incoming = {v for v in m.values() if is_var(v)}
    avoid = all_vars(f) | incoming | set(m)
    rename: dict[str, str] = {}
    for v in f.bound:
        if v in incoming:
            new = fresh_name(v, avoid)
            avoid.add(new)
            rename[v] = new
    full = {**m, **rename}
    return SymbolicHeap(
        tuple(rename.get(v, v) for v in f.bound),
        tuple(a.rename(full) for a in f.atoms),
    )


def sep(*parts: SymbolicHeap) -> SymbolicHeap:
    """Separating conjunction of prenex formulas, hoisting quantifiers."""
    taken = set().union(*(free_vars(p) for p in parts)) if parts else set()
    bound: list[str] = []
    atoms: list[Atom] = []
    for p in parts:
        ren = {}
        for v in p.bound:
            if v in taken:
                ren[v] = fresh_name(v, taken | all_vars(p))
            taken.add(ren.get(v, v))
        bound.extend(ren.get(v, v) for v in p.bound)
        atoms.extend(a.rename(ren) for a in p.atoms)
    return SymbolicHeap(tuple(bound), tuple(atoms))


def exists(vs: Sequence[str], f: SymbolicHeap) -> SymbolicHeap:
    """``\\E vs . f`` in prenex form; inner binders shadowed by ``vs`` are renamed."""
    ren = {v: fresh_name(v, all_vars(f) | set(vs)) for v in f.bound if v in vs}
    return SymbolicHeap(
        tuple(vs) + tuple(ren.get(v, v) for v in f.bound),
        tuple(a.rename(ren) for a in f.atoms),
    )


@dataclass(frozen=True)
class Rule:
    """``head(params) <= body``.

    ``binary_vars`` and ``side`` are only used by extended rules: the former
    lists existential binary variables (each ``b`` comes with ``~b``), the
    latter a side condition ``(c1..cn) != ~(b1..bn)`` whose ``c`` variables
    are implicitly existential.
    """

    head: str
    params: tuple[str, ...]
    body: SymbolicHeap
    binary_vars: tuple[str, ...] = ()
    side: tuple[tuple[str, ...], tuple[str, ...]] | None = None

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "binary_vars", tuple(self.binary_vars))
        if len(set(self.params)) != len(self.params):
            raise SidError(f"{self.head}: parameters not pairwise distinct")

    def unbound(self) -> set[str]:
        """Free variables of the body that are not parameters (nor binary or
        side-condition variables).  Before global threading these are the
        global variables; in a closed system there are none."""
        allowed = set(self.params) | set(self.binary_vars) | {complement(b) for b in self.binary_vars}
        if self.side:
            allowed |= set(self.side[0])
        return free_vars(self.body) - allowed

    @property
    def is_extended(self) -> bool:
        if self.binary_vars or self.side:
            return True
        for a in self.body.atoms:
            if CHOICE in a.terms():
                return True
            if isinstance(a, PointsTo) and (len(a.targets) != 2 or a.hat):
                return True
        return False

    def __str__(self) -> str:
        s = f"{self.head}({','.join(self.params)}) <= "
        if self.binary_vars:
            s += f"\\Eb {' '.join(self.binary_vars)} . "
        s += str(self.body)
        if self.side:
            cs, bs = self.side
            s += f" | ({','.join(cs)}) != ~({','.join(bs)})"
        return s


ExtendedRule = Rule


@dataclass(frozen=True)
class Sid:
    arities: Mapping[str, int]
    rules: tuple[Rule, ...]

    def __post_init__(self):
        object.__setattr__(self, "arities", dict(self.arities))
        object.__setattr__(self, "rules", tuple(self.rules))
        for r in self.rules:
            self._check(r.head, len(r.params))
            extra = r.unbound()
            if extra:
                raise SidError(f"{r.head}: free variables {sorted(extra)} are not parameters")
            for a in r.body.pred_atoms:
                self._check(a.pred, len(a.args))

    def _check(self, p: str, n: int):
        if p not in self.arities:
            raise SidError(f"predicate {p} has no declared arity")
        if self.arities[p] != n:
            raise SidError(f"predicate {p} used with arity {n}, declared {self.arities[p]}")

    @classmethod
    def from_rules(cls, rules: Iterable[Rule], extra: Mapping[str, int] | None = None) -> "Sid":
        rules = tuple(rules)
        arities = dict(extra or {})
        for r in rules:
            arities.setdefault(r.head, len(r.params))
            for a in r.body.pred_atoms:
                arities.setdefault(a.pred, len(a.args))
        return cls(arities, rules)

    def rules_for(self, pred: str) -> list[tuple[int, Rule]]:
        if pred not in self.arities:
            raise UnknownPredicate(pred)
        return [(i, r) for i, r in enumerate(self.rules) if r.head == pred]

    @property
    def predicates(self) -> list[str]:
        return list(self.arities)

    def __str__(self) -> str:
        return format_sid(self)


class UnknownPredicate(SidError):
    pass


# --------------------------------------------------------------------------
# text grammar

_TOKEN = re.compile(
    r"\s*(?:(?P<op><=|->|!=|\\Eb|\\E|[(),.*=|\[\]^~@])|(?P<num>\d+)|(?P<id>" + IDENT + r"))"
)


def _tokenize(line: str) -> list[str]:
    toks, pos = [], 0
    line = line.rstrip()
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected input at {line[pos:]!r}")
        toks.append(m.group("op") or m.group("num") or m.group("id"))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, toks: list[str]):
        self.toks = toks
        self.i = 0

    def peek(self, k: int = 0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self, expect: str | None = None) -> str:
        t = self.peek()
        if t is None or (expect is not None and t != expect):
            raise ParseError(f"expected {expect or 'token'}, got {t!r}")
        self.i += 1
        return t

    def ident(self) -> str:
        t = self.take()
        if not _IDENT_RE.match(t) or t == NIL:
            raise ParseError(f"expected identifier, got {t!r}")
        return t

    def term(self) -> str:
        t = self.peek()
        if t == "@":
            self.take()
            return CHOICE
        if t == "~":
            self.take()
            return "~" + self.ident()
        if t == NIL:
            return self.take()
        return self.ident()

    def term_list(self, open_="(", close=")") -> list[str]:
        self.take(open_)
        out = []
        if self.peek() != close:
            out.append(self.term())
            while self.peek() == ",":
                self.take()
                out.append(self.term())
        self.take(close)
        return out

    def var_list_until_dot(self) -> list[str]:
        vs = []
        while self.peek() != ".":
            vs.append(self.ident())
        self.take(".")
        return vs

    def atom(self) -> Atom | None:
        if self.peek() == "emp":
            self.take()
            return None
        if self.peek(1) == "(" and self.peek() not in (NIL, "~", "@"):
            p = self.ident()
            return PredAtom(p, tuple(self.term_list()))
        lhs = self.term()
        op = self.take()
        if op == "->":
            if self.peek() == "[":
                inner = self.term_list("[", "]")
                self.take("^")
                h = int(self.take())
                return PointsTo(lhs, (NIL,) * h + tuple(inner), h)
            return PointsTo(lhs, tuple(self.term_list()))
        if op == "=":
            return Eq(lhs, self.term())
        if op == "!=":
            return Diseq(lhs, self.term())
        raise ParseError(f"unknown operator {op!r}")

    def body(self) -> tuple[list[str], list[Atom]]:
        bound = []
        if self.peek() == "\\E":
            self.take()
            bound = self.var_list_until_dot()
        atoms = []
        a = self.atom()
        if a is not None:
            atoms.append(a)
        while self.peek() == "*":
            self.take()
            a = self.atom()
            if a is not None:
                atoms.append(a)
        return bound, atoms

    def rule(self) -> Rule:
        head = self.ident()
        params = self.term_list()
        self.take("<=")
        binary = []
        if self.peek() == "\\Eb":
            self.take()
            binary = self.var_list_until_dot()
        bound, atoms = self.body()
        side = None
        if self.peek() == "|":
            self.take()
            cs = self.term_list()
            self.take("!=")
            self.take("~")
            bs = self.term_list()
            side = (tuple(cs), tuple(bs))
        if self.peek() is not None:
            raise ParseError(f"trailing input {self.toks[self.i:]}")
        return Rule(head, tuple(params), SymbolicHeap(tuple(bound), tuple(atoms)), tuple(binary), side)


def parse_formula(text: str) -> SymbolicHeap:
    p = _Parser(_tokenize(text))
    bound, atoms = p.body()
    if p.peek() is not None:
        raise ParseError(f"trailing input {p.toks[p.i:]}")
    return SymbolicHeap(tuple(bound), tuple(atoms))


def parse_atom(text: str) -> PredAtom:
    p = _Parser(_tokenize(text))
    a = p.atom()
    if not isinstance(a, PredAtom) or p.peek() is not None:
        raise ParseError(f"not a predicate atom: {text!r}")
    return a


def parse_rule(text: str) -> Rule:
    return _Parser(_tokenize(text)).rule()


def parse_rules(text: str) -> list[Rule]:
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(parse_rule(line))
        except SidError as e:
            raise ParseError(f"line {n}: {e}") from None
    return out


def parse_sid(text: str) -> Sid:
    return Sid.from_rules(parse_rules(text))


def format_sid(sid: Sid | Iterable[Rule]) -> str:
    rules = sid.rules if isinstance(sid, Sid) else sid
    return "".join(f"{r}\n" for r in rules)


def rename_rule(r: Rule, m: Mapping[str, str]) -> Rule:
    return replace(r, body=SymbolicHeap(r.body.bound, tuple(a.rename(m) for a in r.body.atoms)))


def iter_terms(f: SymbolicHeap) -> Iterator[str]:
    for a in f.atoms:
        yield from a.terms()

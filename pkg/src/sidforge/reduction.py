"""Compile an alternating Turing machine into a system of inductive definitions.

The compiled system has two roots over the same heaps:

* ``p_M(x)`` describes heap encodings of pseudo-derivations of the machine;
* ``c_M(x)`` describes heap encodings of trees that break at least one of the
  tape conditions (head moves, read-after-write, blank initial tape).

Hence ``p_M(x) |= c_M(x)`` holds iff the machine has no derivation from the
empty tape within the space bound ``2**N``.

Encoding (``N`` position bits, ``zero``/``one`` the binary digits, ``s_<a>``
one global per non-blank symbol, the blank written as ``nil``):

* a branching node at position ``i`` is the tuple ``(bin(i), y1..ym)`` of its
  action children, or ``(bin(i), a)`` for a leaf reading ``a``;
* an action node ``(a, b, mu)`` is the tuple ``(a, b, mu, child)`` with
  ``L`` encoded as ``zero`` and ``R`` as ``one``;
* the root cell points to a hat chain ``[z']^(N+1)`` leading to the tree and
  to the cell holding the constants.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .atm import Atm
from .shorthands import GlobalEnv, expand_all
from .syntax import NIL, PredAtom, Rule, Sid, SidError, parse_rule

ZERO = "zero"
ONE = "one"

LHS_ROOT = "p_M"
RHS_ROOT = "c_M"

RESERVED = frozenset(
    """p_M p_M' c_M Const cell r act_r c1 d1 act_d1 act_e1 f1 d1x act_d1x act_e1x
    c2 d2 act_d2 act_e2 f2 act_f2 g2 act_g2 c3 d3 act_d3 e3 act_f3""".split()
)
_SAFE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class OutOfRange(SidError):
    pass


class NameClash(SidError):
    pass


# ---------------------------------------------------------------------------
# bit vectors


def bin(i: int, N: int) -> tuple[int, ...]:  # noqa: A001 - mirrors the usual notation
    """Big-endian ``N``-bit encoding of ``i``."""
    if N < 1 or not (0 <= i < 2 ** N):
        raise OutOfRange(f"{i} is not a position on a tape of {2 ** N} cells")
    return tuple((i >> (N - 1 - k)) & 1 for k in range(N))


def complement(v: Sequence[int]) -> tuple[int, ...]:
    return tuple(1 - b for b in v)


def from_bits(v: Sequence[int]) -> int:
    out = 0
    for b in v:
        out = 2 * out + b
    return out


def bit_terms(v: Sequence[int]) -> tuple[str, ...]:
    return tuple(ONE if b else ZERO for b in v)


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class ReductionParams:
    machine: Atm
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise OutOfRange("the tape exponent must be at least 1")
        m = self.machine
        for name in m.states:
            if not _SAFE.match(name) or name in RESERVED or f"act_{name}" in RESERVED:
                raise NameClash(f"state name {name!r} is reserved or not a plain identifier")
        for a in m.nonblank:
            if not _SAFE.match(a):
                raise NameClash(f"symbol {a!r} is not a plain identifier")

    @property
    def B(self) -> int:
        return self.machine.branching

    @property
    def env(self) -> GlobalEnv:
        return GlobalEnv((ZERO, ONE) + tuple(self.sym(a) for a in self.machine.nonblank))

    @property
    def globals(self) -> tuple[str, ...]:
        return self.env.vars

    def sym(self, a: str) -> str:
        return NIL if a == self.machine.blank else f"s_{a}"

    def symbol_of(self, term: str) -> str:
        if term == NIL:
            return self.machine.blank
        for a in self.machine.nonblank:
            if self.sym(a) == term:
                return a
        raise SidError(f"{term} does not denote a tape symbol")

    @staticmethod
    def move(mu: str) -> str:
        return ZERO if mu == "L" else ONE

    @property
    def root_pred(self) -> str:
        return root_pred(self.machine.initial)

    @property
    def branching_preds(self) -> frozenset[str]:
        return frozenset(self.machine.states) | {self.root_pred}

    @property
    def action_preds(self) -> frozenset[str]:
        return frozenset(act(q) for q in self.machine.states)


def act(q: str) -> str:
    return f"act_{q}"


def root_pred(q: str) -> str:
    return f"{q}~root"


def _t(*parts) -> str:
    """Comma-join terms, flattening nested sequences."""
    out: list[str] = []
    for p in parts:
        if isinstance(p, str):
            out.append(p)
        else:
            out.extend(p)
    return ",".join(out)


def _rules(lines: Iterable[str]) -> list[Rule]:
    return [parse_rule(s) for s in lines]


def _vec(name: str, N: int) -> tuple[str, ...]:
    return tuple(f"{name}{k}" for k in range(1, N + 1))


def _ys(m: int) -> tuple[str, ...]:
    return tuple(f"y{j}" for j in range(1, m + 1))


def _ex(vs: Sequence[str]) -> str:
    return f"\\E {' '.join(vs)} . " if vs else ""


def _star(*atoms: str) -> str:
    return " * ".join(a for a in atoms if a)


# ---------------------------------------------------------------------------
# pseudo-derivations


X1 = ("x'",)


def _branch_rules(p: ReductionParams, head: str, q: str, bits: Sequence[str]) -> list[str]:
    m = p.machine
    out = []
    for a in m.alphabet:
        trs = m.transitions(q, a)
        A = p.sym(a)
        if not m.is_universal(q):
            for tr in trs:
                child = f"{act(tr.target)}(x',{_t(A, p.sym(tr.write), p.move(tr.move))})"
                out.append(f"{head}(x) <= \\E x' . x -> ({_t(bits, X1)}) * {child}")
        elif not trs:
            out.append(f"{head}(x) <= x -> ({_t(bits, [A])})")
        else:
            ys = _ys(len(trs))
            kids = [
                f"{act(tr.target)}({_t(y, A, p.sym(tr.write), p.move(tr.move))})" for y, tr in zip(ys, trs)
            ]
            out.append(f"{head}(x) <= {_ex(ys)}x -> ({_t(bits, ys)}) * {_star(*kids)}")
    return out


def build_pseudo_rules(p: ReductionParams) -> list[Rule]:
    """Branching and action predicates, ``p_M``, ``p_M'`` and the constants."""
    m = p.machine
    N = p.N
    out: list[str] = []
    for q in m.states:
        out += _branch_rules(p, q, q, ["@"] * N)
    out += _branch_rules(p, p.root_pred, m.initial, [ZERO] * N)
    for q in m.states:
        out.append(f"{act(q)}(x,y,z,u) <= \\E x' . x -> (y,z,u,x') * {q}(x')")
    out.append("p_M(x) <= \\E y z . x -> (y,z) * p_M'(y) * Const(z)")
    out.append(f"p_M'(y) <= \\E z' . y -> [z']^{N + 1} * {p.root_pred}(z')")
    out += _const_rules(p)
    return _rules(out)


def _const_rules(p: ReductionParams) -> list[str]:
    g = p.globals
    cells = " * ".join(f"cell({v})" for v in g)
    return [f"Const(x) <= x -> ({_t(g)}) * {cells}", "cell(x) <= x -> (nil,nil)"]


# ---------------------------------------------------------------------------
# arbitrary trees


def build_r_rules(p: ReductionParams) -> list[Rule]:
    """``r`` accepts any alternating tree, ``act_r`` any action node."""
    m = p.machine
    N = p.N
    out = []
    for n in range(1, p.B + 1):
        ys = _ys(n)
        out.append(f"r(x) <= {_ex(ys)}x -> ({_t(['@'] * N, ys)}) * {_star(*(f'act_r({y})' for y in ys))}")
    for a in m.alphabet:
        out.append(f"r(x) <= x -> ({_t(['@'] * N, [p.sym(a)])})")
    for a in m.alphabet:
        for b in m.nonblank:
            out.append(f"act_r(x) <= \\E y . x -> ({_t(p.sym(a), p.sym(b))},@,y) * r(y)")
    return _rules(out)


def _fan(fields: Sequence[str], m: int, i: int, special: str, side: str = "", extra_ex: Sequence[str] = ()) -> str:
    """Body of a branching cell with ``m`` children, the ``i``-th (1-based)
    continuing with ``special`` (a format string over ``{y}``), the others
    being arbitrary ``act_r`` subtrees."""
    ys = _ys(m)
    kids = [special.format(y=y) if j == i else f"act_r({y})" for j, y in enumerate(ys, 1)]
    body = f"{_ex(tuple(extra_ex) + ys)}x -> ({_t(fields, ys)}) * {_star(*kids)}"
    return body + side


def _side(es: Sequence[str], cs: Sequence[str]) -> str:
    return f" | ({_t(es)}) != ~({_t(cs)})"


def _action_family(p: ReductionParams, head: str, params: str, move: str, cont: str) -> list[str]:
    """``head(x,params) <= \\E y . x -> (a,b,move,y) * cont`` for all a, b."""
    m = p.machine
    out = []
    for a in m.alphabet:
        for b in m.nonblank:
            out.append(f"{head}(x{params}) <= \\E y . x -> ({_t(p.sym(a), p.sym(b), move)},y) * {cont}")
    return out


def _paths(B: int):
    for m in range(1, B + 1):
        for i in range(1, m + 1):
            yield m, i


def build_c1_rules(p: ReductionParams) -> list[Rule]:
    """Trees where some head move does not reach the next branching node."""
    N, B = p.N, p.B
    bs, cs, es = _vec("b", N), _vec("c", N), _vec("e", N)
    bc = _t(bs, cs)
    hat = N + 1
    out = []
    for n in range(N):
        bv = tuple(f"b{k}" for k in range(1, n + 1))
        head = f"\\Eb {' '.join(bv)} . " if bv else ""
        comp = tuple(f"~{b}" for b in bv)
        right_b = bv + (ZERO,) + (ONE,) * (N - 1 - n)
        right_c = comp + (ZERO,) + (ONE,) * (N - 1 - n)
        left_b = bv + (ONE,) + (ZERO,) * (N - 1 - n)
        left_c = comp + (ONE,) + (ZERO,) * (N - 1 - n)
        out.append(f"c1(x) <= {head}\\E y . x -> [y]^{hat} * d1({_t('y', ONE, right_b, right_c)})")
        out.append(f"c1(x) <= {head}\\E y . x -> [y]^{hat} * d1({_t('y', ZERO, left_b, left_c)})")
    for m, i in _paths(B):
        out.append(f"d1(x,u,{bc}) <= " + _fan(["@"] * N, m, i, f"act_d1({{y}},u,{bc})"))
        out.append(f"d1(x,u,{bc}) <= " + _fan(bs, m, i, f"act_e1({{y}},u,{bc})"))
    out += _action_family(p, "act_d1", f",u,{bc}", "@", f"d1(y,u,{bc})")
    out += _action_family(p, "act_e1", f",u,{bc}", "u", f"f1(y,{bc})")
    for m in range(1, B + 1):
        ys = _ys(m)
        kids = _star(*(f"act_r({y})" for y in ys))
        out.append(f"f1(x,{bc}) <= {_ex(ys)}x -> ({_t(es, ys)}) * {kids}{_side(es, cs)}")
    for a in p.machine.alphabet:
        out.append(f"f1(x,{bc}) <= x -> ({_t(es, p.sym(a))}){_side(es, cs)}")
    # moving off either end of the tape
    for move, edge in ((ZERO, ZERO), (ONE, ONE)):
        out.append(f"c1(x) <= \\E y . x -> [y]^{hat} * d1x({_t('y', move, [edge] * N)})")
    for m, i in _paths(B):
        out.append(f"d1x(x,u,{_t(bs)}) <= " + _fan(["@"] * N, m, i, f"act_d1x({{y}},u,{_t(bs)})"))
        out.append(f"d1x(x,u,{_t(bs)}) <= " + _fan(bs, m, i, "act_e1x({y},u)"))
    out += _action_family(p, "act_d1x", f",u,{_t(bs)}", "@", f"d1x(y,u,{_t(bs)})")
    out += _action_family(p, "act_e1x", ",u", "u", "r(y)")
    return _rules(out)


def build_c2_rules(p: ReductionParams) -> list[Rule]:
    """Trees where a read differs from the last write at the same position."""
    m_ = p.machine
    N, B = p.N, p.B
    bs, cs, es = _vec("b", N), _vec("c", N), _vec("e", N)
    bc = _t(bs, cs)
    out = [
        f"c2(x) <= \\Eb {' '.join(bs)} . \\E y . x -> [y]^{N + 1} * d2({_t('y', bs, [f'~{b}' for b in bs])})"
    ]
    for m, i in _paths(B):
        out.append(f"d2(x,{bc}) <= " + _fan(["@"] * N, m, i, f"act_d2({{y}},{bc})"))
        out.append(f"d2(x,{bc}) <= " + _fan(bs, m, i, f"act_e2({{y}},{bc})"))
    out += _action_family(p, "act_d2", f",{bc}", "@", f"d2(y,{bc})")
    # the write at the chosen position; gamma is any other symbol
    for a in m_.alphabet:
        for w in m_.nonblank:
            for g in m_.alphabet:
                if g == w:
                    continue
                G = p.sym(g)
                for nxt in ("f2", "g2"):
                    out.append(
                        f"act_e2(x,{bc}) <= \\E y . x -> ({_t(p.sym(a), p.sym(w))},@,y) * {nxt}({_t('y', G, bc)})"
                    )
    for m, i in _paths(B):
        out.append(f"f2(x,g,{bc}) <= " + _fan(es, m, i, f"act_f2({{y}},g,{bc})", _side(es, cs)))
    out += _action_family(p, "act_f2", f",g,{bc}", "@", f"f2(y,g,{bc})")
    out += _action_family(p, "act_f2", f",g,{bc}", "@", f"g2(y,g,{bc})")
    for m, i in _paths(B):
        out.append(f"g2(x,g,{bc}) <= " + _fan(bs, m, i, "act_g2({y},g)"))
    out.append(f"g2(x,g,{bc}) <= x -> ({_t(bs, 'g')})")
    for w in m_.nonblank:
        out.append(f"act_g2(x,g) <= \\E y . x -> (g,{p.sym(w)},@,y) * r(y)")
    return _rules(out)


def build_c3_rules(p: ReductionParams) -> list[Rule]:
    """Trees where a position is first read with a non-blank symbol."""
    m_ = p.machine
    N, B = p.N, p.B
    bs, cs, es = _vec("b", N), _vec("c", N), _vec("e", N)
    bc = _t(bs, cs)
    out = [
        f"c3(x) <= \\Eb {' '.join(bs)} . \\E y . x -> [y]^{N + 1} * d3({_t('y', bs, [f'~{b}' for b in bs])})",
        # the root is at position 0 and has no ancestor
        f"c3(x) <= \\E y . x -> [y]^{N + 1} * e3({_t('y', [ZERO] * N, [ONE] * N)})",
    ]
    for m, i in _paths(B):
        out.append(f"d3(x,{bc}) <= " + _fan(es, m, i, f"act_d3({{y}},{bc})", _side(es, cs)))
    out += _action_family(p, "act_d3", f",{bc}", "@", f"d3(y,{bc})")
    out += _action_family(p, "act_d3", f",{bc}", "@", f"e3(y,{bc})")
    for m, i in _paths(B):
        out.append(f"e3(x,{bc}) <= " + _fan(bs, m, i, "act_f3({y})"))
    for a in m_.nonblank:
        out.append(f"e3(x,{bc}) <= x -> ({_t(bs, p.sym(a))})")
    for a in m_.nonblank:
        for w in m_.nonblank:
            out.append(f"act_f3(x) <= \\E y . x -> ({_t(p.sym(a), p.sym(w))},@,y) * r(y)")
    return _rules(out)


def build_cM(p: ReductionParams) -> list[Rule]:
    return _rules(f"c_M(x) <= \\E y z . x -> (y,z) * c{i}(y) * Const(z)" for i in (1, 2, 3))


def surface_rules(p: ReductionParams) -> list[Rule]:
    return (
        build_pseudo_rules(p)
        + build_r_rules(p)
        + build_c1_rules(p)
        + build_c2_rules(p)
        + build_c3_rules(p)
        + build_cM(p)
    )


@dataclass(frozen=True)
class Compiled:
    params: ReductionParams
    surface: tuple[Rule, ...]
    sid: Sid
    lhs: PredAtom
    rhs: PredAtom

    @property
    def weighted_preds(self) -> frozenset[str]:
        """Predicates whose rules allocate tree nodes of the pseudo-derivation."""
        return self.params.branching_preds | self.params.action_preds

    def weight(self, pred: str) -> int:
        return 1 if pred in self.weighted_preds else 0

    @property
    def free_vars(self) -> tuple[str, ...]:
        return ("x",) + self.params.globals


def compile(p: ReductionParams) -> Compiled:  # noqa: A001 - the natural name
    surface = surface_rules(p)
    declared = {q: 1 for q in p.machine.states}
    sid = expand_all(surface, p.env, arities=declared)
    g = p.globals
    return Compiled(
        p,
        tuple(surface),
        sid,
        PredAtom(LHS_ROOT, ("x",) + g),
        PredAtom(RHS_ROOT, ("x",) + g),
    )

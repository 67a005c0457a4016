"""Command-line interface.

Exit codes: 0 when the check passes (or the entailment holds), 1 when it
fails (or a counter-model is found), 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .atm import Atm, Branch, check_derivation, check_pseudo_derivation, search_derivation, violations
from .harness import bounded_entailment, compiled_entailment, decode_structure, encode_pseudo_derivation, verify_lemmas
from .pce import check_pce
from .reduction import ReductionParams, compile, surface_rules
from .semantics import NIL_LOC, Structure
from .shorthands import PASSES, GlobalEnv, expand_all
from .syntax import SidError, format_sid, parse_atom, parse_rules, parse_sid


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _json(path: str):
    return json.loads(_read(path))


def _emit(obj, as_json: bool, text: str | None = None):
    if as_json:
        print(json.dumps(obj, indent=2))
    else:
        print(text if text is not None else obj)


def _infer_space_exp(st: Structure) -> int:
    """Number of position bits of an encoding, from its hat chain length."""
    y = st.heap[st.loc("x")][0]
    n = 0
    while y in st.heap and st.heap[y][0] == NIL_LOC:
        n += 1
        y = st.heap[y][1]
    if n < 2:
        raise SidError("structure has no hat chain")
    return n - 1


# ---------------------------------------------------------------------------
# verbs


def cmd_check_pce(a) -> int:
    rep = check_pce(parse_sid(_read(a.sid)), a.bound)
    _emit(rep.to_json(), a.json, str(rep))
    return 0 if rep.ok else 1


def cmd_expand(a) -> int:
    env = GlobalEnv(tuple(a.globals.split(",")))
    out = expand_all(parse_rules(_read(a.sid)), env, a.emit_after)
    print(format_sid(out).rstrip("\n"))
    return 0


def cmd_compile(a) -> int:
    p = ReductionParams(Atm.from_json(_json(a.atm)), a.space_exp)
    text = format_sid(surface_rules(p) if a.surface else compile(p).sid).rstrip("\n")
    if a.output:
        with open(a.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_entail(a) -> int:
    sid = parse_sid(_read(a.sid))
    v = bounded_entailment(sid, parse_atom(a.lhs), parse_atom(a.rhs), a.max_nodes)
    text = f"HoldsWithinBound({a.max_nodes})" if v.holds else "CounterModel " + v.structure.dumps()
    _emit(v.to_json(), a.json, text)
    return 0 if v.holds else 1


def cmd_verify_lemmas(a) -> int:
    p = ReductionParams(Atm.from_json(_json(a.atm)), a.space_exp)
    rep = verify_lemmas(p, a.k)
    _emit(rep.to_json(), True)
    return 0 if rep.ok else 1


def cmd_encode(a) -> int:
    p = ReductionParams(Atm.from_json(_json(a.atm)), a.space_exp)
    st, _w = encode_pseudo_derivation(Branch.from_json(_json(a.pseudo)), p)
    print(st.dumps())
    return 0


def cmd_decode(a) -> int:
    st = Structure.from_json(_json(a.structure))
    n = a.space_exp or _infer_space_exp(st)
    p = ReductionParams(Atm.from_json(_json(a.atm)), n)
    t = decode_structure(st, p)
    print(json.dumps(t.to_json(), indent=2))
    return 0


def cmd_entail_machine(a) -> int:
    c = compile(ReductionParams(Atm.from_json(_json(a.atm)), a.space_exp))
    v = compiled_entailment(c, a.max_nodes)
    text = f"HoldsWithinBound({a.max_nodes})" if v.holds else "CounterModel " + v.structure.dumps()
    _emit(v.to_json(), a.json, text)
    return 0 if v.holds else 1


def cmd_atm_check(a) -> int:
    m = Atm.from_json(_json(a.atm))
    t = Branch.from_json(_json(a.tree))
    ok = check_pseudo_derivation(m, t, a.space_exp) if a.pseudo else check_derivation(m, t)
    print("valid" if ok else "invalid")
    return 0 if ok else 1


def cmd_atm_violations(a) -> int:
    m = Atm.from_json(_json(a.atm))
    vs = violations(m, Branch.from_json(_json(a.tree)), a.space_exp)
    print(json.dumps([v.to_json() for v in vs], indent=2))
    return 0 if not vs else 1


def cmd_atm_search(a) -> int:
    m = Atm.from_json(_json(a.atm))
    d = search_derivation(m, a.space_exp, a.max_nodes)
    if d is None:
        print("null")
        return 1
    print(json.dumps(d.to_json(), indent=2))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sidforge", description="Separation-logic inductive definitions toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("check-pce", help="progress, connectivity and establishment of a rule file")
    s.add_argument("sid")
    s.add_argument(
        "--establish-bound", "--bound", dest="bound", type=int, default=4,
        help="unfolding bound of the semantic establishment check",
    )
    s.add_argument("--json", action="store_true")
    s.set_defaults(fn=cmd_check_pce)

    s = sub.add_parser("expand", help="lower extended rules to core rules")
    s.add_argument("sid")
    s.add_argument("--emit-after", choices=PASSES)
    s.add_argument("--globals", default="zero,one", help="comma-separated global variables, digits first")
    s.set_defaults(fn=cmd_expand)

    s = sub.add_parser("compile", help="compile a machine into a rule system")
    s.add_argument("atm")
    s.add_argument("--space-exp", type=int, required=True)
    s.add_argument("-o", "--output")
    s.add_argument("--surface", action="store_true", help="emit the extended rules before lowering")
    s.set_defaults(fn=cmd_compile)

    s = sub.add_parser("entail", help="bounded entailment check between two atoms")
    s.add_argument("sid")
    s.add_argument("lhs")
    s.add_argument("rhs")
    s.add_argument("--max-nodes", type=int, default=12)
    s.add_argument("--json", action="store_true")
    s.set_defaults(fn=cmd_entail)

    s = sub.add_parser("entail-machine", help="bounded p_M |= c_M for a machine, counting tree nodes")
    s.add_argument("atm")
    s.add_argument("--space-exp", type=int, required=True)
    s.add_argument("--max-nodes", type=int, default=12)
    s.add_argument("--json", action="store_true")
    s.set_defaults(fn=cmd_entail_machine)

    s = sub.add_parser("verify-lemmas", help="exhaustive encoding/decoding and membership checks")
    s.add_argument("atm")
    s.add_argument("--space-exp", type=int, required=True)
    s.add_argument("--k", type=int, default=7)
    s.set_defaults(fn=cmd_verify_lemmas)

    s = sub.add_parser("encode", help="heap encoding of a pseudo-derivation")
    s.add_argument("atm")
    s.add_argument("pseudo")
    s.add_argument("--space-exp", type=int, required=True)
    s.set_defaults(fn=cmd_encode)

    s = sub.add_parser("decode", help="pseudo-derivation encoded by a structure")
    s.add_argument("atm")
    s.add_argument("structure")
    s.add_argument("--space-exp", type=int, default=None, help="defaults to the hat chain length minus one")
    s.set_defaults(fn=cmd_decode)

    atm = sub.add_parser("atm", help="machine utilities")
    asub = atm.add_subparsers(dest="atm_verb", required=True)
    s = asub.add_parser("check-derivation")
    s.add_argument("atm")
    s.add_argument("tree")
    s.add_argument("--pseudo", action="store_true", help="check as a pseudo-derivation")
    s.add_argument("--space-exp", type=int, default=1)
    s.set_defaults(fn=cmd_atm_check)
    s = asub.add_parser("violations")
    s.add_argument("atm")
    s.add_argument("tree")
    s.add_argument("--space-exp", type=int, required=True)
    s.set_defaults(fn=cmd_atm_violations)
    s = asub.add_parser("search")
    s.add_argument("atm")
    s.add_argument("--space-exp", type=int, required=True)
    s.add_argument("--max-nodes", type=int, default=9)
    s.set_defaults(fn=cmd_atm_search)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (SidError, OSError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

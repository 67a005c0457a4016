"""sidforge: symbolic heaps, inductive definitions and a machine-to-entailment compiler."""

__version__ = "0.1.0"

from .atm import Atm, Transition, check_derivation, check_pseudo_derivation, search_derivation, violations
from .harness import bounded_entailment, decode_structure, encode_pseudo_derivation, verify_lemmas
from .pce import check_pce
from .reduction import ReductionParams, compile
from .semantics import Structure, satisfies
from .shorthands import expand_all
from .syntax import Sid, parse_atom, parse_formula, parse_rule, parse_sid
from .unfolding import models_sid

__all__ = [
    "Atm",
    "ReductionParams",
    "Sid",
    "Structure",
    "Transition",
    "bounded_entailment",
    "check_derivation",
    "check_pce",
    "check_pseudo_derivation",
    "compile",
    "decode_structure",
    "encode_pseudo_derivation",
    "expand_all",
    "models_sid",
    "parse_atom",
    "parse_formula",
    "parse_rule",
    "parse_sid",
    "satisfies",
    "search_derivation",
    "verify_lemmas",
    "violations",
]

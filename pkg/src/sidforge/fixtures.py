"""Small reference machines and trees used by the tests, the CLI and the docs.

``example_machine`` has three states over ``{a, b, c, _}``; ``q0`` and ``q2``
are universal and ``q1`` is existential.  It accepts the empty word on a tape
of two cells (``accepting_derivation``).  ``broken_pseudo_derivation`` is a
pseudo-derivation of the same machine that breaks each of the three tape
conditions once.  ``rejecting_machine`` can only move off the left end.
"""
from __future__ import annotations

from .atm import Act, Atm, Branch, Transition

BLANK = "_"


def example_machine() -> Atm:
    delta = [
        Transition("q0", BLANK, "q1", "a", "R"),
        Transition("q0", BLANK, "q2", "b", "R"),
        Transition("q0", "b", "q2", "b", "R"),
        Transition("q0", "b", "q1", "b", "R"),
        Transition("q0", "c", "q2", "c", "R"),
        Transition("q1", BLANK, "q0", "a", "L"),
    ]
    return Atm(
        ("q0", "q1", "q2"),
        ("a", "b", "c", BLANK),
        BLANK,
        "q0",
        {"q0": "forall", "q1": "exists", "q2": "forall"},
        tuple(delta),
    )


def rejecting_machine() -> Atm:
    return Atm(
        ("q0", "q1"),
        ("a", BLANK),
        BLANK,
        "q0",
        {"q0": "forall", "q1": "forall"},
        (Transition("q0", BLANK, "q1", "a", "L"),),
    )


def accepting_derivation() -> Branch:
    """Derivation of ``example_machine`` from the empty tape, with tapes."""
    left = Branch("q0", 0, (), "a", ((0, "a"), (1, "a")))
    q1 = Branch("q1", 1, (Act(BLANK, "a", "L", left),), None, ((0, "a"),))
    right = Branch("q2", 1, (), BLANK, ((0, "b"),))
    return Branch("q0", 0, (Act(BLANK, "a", "R", q1), Act(BLANK, "b", "R", right)), None, ())


def accepting_pseudo_derivation() -> Branch:
    """``accepting_derivation`` with its tapes forgotten."""
    left = Branch("q0", 0, (), "a")
    q1 = Branch("q1", 1, (Act(BLANK, "a", "L", left),))
    right = Branch("q2", 1, (), BLANK)
    return Branch("q0", 0, (Act(BLANK, "a", "R", q1), Act(BLANK, "b", "R", right)))


def broken_pseudo_derivation() -> Branch:
    """A pseudo-derivation of ``example_machine`` that is not a derivation.

    The root reads ``b`` from a blank tape (condition III, address ``(0,)``),
    its first child does not move right (condition I, address ``(0, 0)``),
    and the ``q0`` node below ``q1`` reads ``c`` where ``b`` was written
    (condition II, address ``(1, 0, 0, 0, 0)``).
    """
    stay = Branch("q2", 0, (), "b")
    last = Branch("q2", 1, (), "a")
    q0 = Branch("q0", 0, (Act("c", "c", "R", last),))
    q1 = Branch("q1", 1, (Act(BLANK, "a", "L", q0),))
    return Branch("q0", 0, (Act("b", "b", "R", stay), Act("b", "b", "R", q1)))


BROKEN_VIOLATIONS = (("I", (0, 0)), ("II", (1, 0, 0, 0, 0)), ("III", (0,)))


def hand_built_encoding():
    """Hand-built encoding of ``accepting_pseudo_derivation`` at one position bit.

    Locations are numbered independently of ``encode_pseudo_derivation`` so
    that comparing the two exercises the isomorphism check.
    """
    from .semantics import NIL_LOC as nil
    from .semantics import Structure

    x, y, z, w = 100, 101, 102, 103
    zero, one, s_a, s_b, s_c = 110, 111, 112, 113, 114
    const = [120, 121, 122, 123]
    l0, l1, l2, l3, l4, l5, l6 = 200, 210, 220, 230, 240, 250, 260
    heap = {
        # x -> (y, z), the constant chain and the hat chain
        x: (y, z),
        z: (zero, const[0]),
        const[0]: (one, const[1]),
        const[1]: (s_a, const[2]),
        const[2]: (s_b, s_c),
        zero: (nil, nil),
        one: (nil, nil),
        s_a: (nil, nil),
        s_b: (nil, nil),
        s_c: (nil, nil),
        y: (nil, w),
        w: (nil, l0),
        # q0 at position 0, universal, two children
        l0: (zero, 201),
        201: (l1, l5),
        # act_q1: read blank, write a, move right
        l1: (nil, 211),
        211: (s_a, 212),
        212: (one, l2),
        # q1 at position 1
        l2: (one, l3),
        # act_q0: read blank, write a, move left
        l3: (nil, 231),
        231: (s_a, 232),
        232: (zero, l4),
        # q0 leaf at position 0 reading a
        l4: (zero, s_a),
        # act_q2: read blank, write b, move right
        l5: (nil, 251),
        251: (s_b, 252),
        252: (one, l6),
        # q2 leaf at position 1 reading blank
        l6: (one, nil),
    }
    store = {"x": x, "zero": zero, "one": one, "s_a": s_a, "s_b": s_b, "s_c": s_c}
    return Structure(store, heap)

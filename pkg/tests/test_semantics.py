import pytest

from properties import naive_satisfies, run_oracle, run_perm, run_strict
from sidforge.semantics import NIL_LOC, OverlapError, Structure, heap_disjoint_union, satisfies, witness_domain
from sidforge.syntax import SidError, parse_formula

# frozen oracle values: (store, heap, formula, expected)
CASES = [
    ({"x": 1}, {1: (NIL_LOC, NIL_LOC)}, "x -> (nil,nil)", True),
    ({"x": 1}, {}, "emp", True),
    ({"x": 1}, {1: (NIL_LOC, NIL_LOC)}, "emp", False),
    ({"x": 1, "y": 1}, {}, "x = y", True),
    ({"x": 1, "y": 1}, {1: (NIL_LOC, NIL_LOC)}, "x = y * x -> (nil,nil)", True),
    ({"x": 1, "y": 2}, {}, "x != y", True),
    ({"x": 1, "y": 1}, {}, "x != y", False),
    ({"x": 1}, {1: (2, NIL_LOC), 2: (NIL_LOC, NIL_LOC)}, r"\E y . x -> (y,nil) * y -> (nil,nil)", True),
    ({"x": 1}, {1: (2, NIL_LOC), 2: (NIL_LOC, NIL_LOC)}, r"\E y . x -> (y,nil)", False),
    ({"x": 1}, {1: (1, NIL_LOC)}, r"\E y . x -> (y,nil) * y -> (nil,nil)", False),
    ({"x": 1}, {1: (5, NIL_LOC)}, r"\E y . x -> (y,nil) * y != nil", True),
    ({"x": 1}, {1: (NIL_LOC, NIL_LOC)}, r"\E y . x -> (y,nil) * y != nil", False),
    ({"x": 1, "y": 2}, {1: (NIL_LOC, NIL_LOC), 2: (NIL_LOC, NIL_LOC)}, "x -> (nil,nil) * y -> (nil,nil)", True),
    # an unallocated existential may denote a location outside the structure
    ({"x": 1}, {1: (9, NIL_LOC)}, r"\E y . x -> (y,nil) * y != x", True),
]


@pytest.mark.parametrize("store,heap,text,expected", CASES)
def test_frozen_satisfaction(store, heap, text, expected):
    s = Structure(store, heap)
    f = parse_formula(text)
    assert satisfies(s, f) is expected
    assert naive_satisfies(s, f) is expected


def test_nil_is_never_allocated():
    with pytest.raises(SidError):
        Structure({}, {NIL_LOC: (NIL_LOC, NIL_LOC)})
    assert not satisfies(Structure({}, {}), parse_formula("nil -> (nil,nil)"))


def test_predicate_atoms_are_rejected():
    with pytest.raises(SidError):
        satisfies(Structure({"x": 1}, {}), parse_formula("p(x)"))


def test_disjoint_union():
    assert heap_disjoint_union({1: (2,)}, {2: (1,)}) == {1: (2,), 2: (1,)}
    with pytest.raises(OverlapError):
        heap_disjoint_union({1: (2,)}, {1: (3,)})


def test_witness_domain_has_nil_and_a_fresh_location():
    s = Structure({"x": 1}, {1: (4, NIL_LOC)})
    dom = witness_domain(s, parse_formula(r"\E y . x -> (y,nil)"))
    assert NIL_LOC in dom and 4 in dom and max(dom) > 4


def test_json_round_trip():
    s = Structure({"x": 1, "y": 2}, {1: (2, NIL_LOC)})
    assert Structure.from_json(s.to_json()) == s


def test_property_matches_naive_oracle():
    run_oracle(300)


def test_property_pure_atoms_are_strict():
    run_strict(200)


def test_property_star_commutes():
    run_perm(200)

import pytest

from sidforge.atm import Branch, enumerate_pseudo_derivations, violations
from sidforge.fixtures import accepting_pseudo_derivation, broken_pseudo_derivation, hand_built_encoding
from sidforge.harness import (
    CounterModel,
    HoldsWithinBound,
    PositionOverflow,
    bounded_entailment,
    canonical_form,
    check_encoding,
    decode_structure,
    decode_with_witness,
    encode_pseudo_derivation,
    h2_isomorphic,
    iter_lhs_models,
    same_tree,
    verify_lemmas,
)
from sidforge.pce import NotProgressing
from sidforge.semantics import NIL_LOC, Structure
from sidforge.syntax import SidError, parse_atom, parse_sid
from sidforge.unfolding import Models, NotAModel, models_sid


def test_encoding_of_accepting_tree(params, compiled):
    t = accepting_pseudo_derivation()
    st, w = encode_pseudo_derivation(t, params, compiled)
    assert models_sid(st, compiled.sid, compiled.lhs) is Models.TRUE
    assert models_sid(st, compiled.sid, compiled.rhs) is not Models.TRUE
    assert set(w.h1) | set(w.h2) == set(st.heap) and not set(w.h1) & set(w.h2)
    assert len(w.f) == t.size == 7
    assert check_encoding(st, t, params, compiled)


def test_encoding_of_broken_tree_is_a_counterexample_model(params, compiled):
    st, _w = encode_pseudo_derivation(broken_pseudo_derivation(), params, compiled)
    assert models_sid(st, compiled.sid, compiled.rhs) is Models.TRUE


def test_hand_built_encoding(params, compiled):
    ref = hand_built_encoding()
    t = accepting_pseudo_derivation()
    assert check_encoding(ref, t, params, compiled)
    assert same_tree(decode_structure(ref, params, compiled=compiled), t)
    st, _w = encode_pseudo_derivation(t, params, compiled)
    assert h2_isomorphic(st, ref, params, compiled)


def test_decorations_use_tree_predicates(params, compiled):
    _t, w = decode_with_witness(hand_built_encoding(), params, compiled=compiled)
    labels = set(w.decoration.values())
    assert labels <= compiled.weighted_preds
    assert {"q0~root", "act_q1", "act_q0", "act_q2", "q0", "q1", "q2"} <= labels


def test_isomorphism_detects_a_changed_symbol(params, compiled):
    ref = hand_built_encoding()
    heap = dict(ref.heap)
    heap[260] = (heap[260][0], ref.store["s_a"])  # the q2 leaf now reads a
    other = Structure(ref.store, heap)
    assert not h2_isomorphic(ref, other, params, compiled)


def test_canonical_form_ignores_location_names():
    a = canonical_form({1: (2, NIL_LOC), 2: (NIL_LOC, NIL_LOC)}, 1, {})
    b = canonical_form({7: (9, NIL_LOC), 9: (NIL_LOC, NIL_LOC)}, 7, {})
    assert a == b


def test_round_trip_small_trees(machine, params, compiled):
    for t in enumerate_pseudo_derivations(machine, 1, 5):
        st, _w = encode_pseudo_derivation(t, params, compiled)
        assert same_tree(decode_structure(st, params, compiled=compiled), t)


def test_position_overflow(params, compiled):
    with pytest.raises(PositionOverflow):
        encode_pseudo_derivation(Branch("q0", 2, (), "a"), params, compiled, check=False)


def test_non_models_do_not_decode(params, compiled):
    with pytest.raises(NotAModel):
        decode_structure(Structure({"x": 1, **{g: 10 + i for i, g in enumerate(params.globals)}}, {}), params, compiled=compiled)


def test_binary_tree_entailments(btree):
    sid = parse_sid(
        """
p(x) <= x -> (nil,nil)
p(x) <= \\E y z . x -> (y,z) * p(y) * p(z)
q(x) <= x -> (nil,nil)
q(x) <= \\E y z . x -> (y,z) * q(y) * q(z)
l(x) <= x -> (nil,nil)
"""
    )
    v = bounded_entailment(sid, parse_atom("p(x)"), parse_atom("q(x)"), 7)
    assert isinstance(v, HoldsWithinBound) and v.holds and v.models_checked == 1 + 1 + 2 + 5
    cm = bounded_entailment(sid, parse_atom("p(x)"), parse_atom("l(x)"), 7)
    assert isinstance(cm, CounterModel) and not cm.holds
    assert len(cm.structure.heap) == 3
    assert models_sid(cm.structure, sid, parse_atom("p(x)")) is Models.TRUE
    assert cm.to_json()["verdict"] == "CounterModel"


def test_entailment_needs_progress():
    sid = parse_sid("p(x) <= x -> (nil,nil)\nq(x) <= p(x)")
    with pytest.raises(NotProgressing):
        bounded_entailment(sid, parse_atom("q(x)"), parse_atom("p(x)"), 3)


def test_lhs_models_are_deduplicated(btree):
    models = list(iter_lhs_models(btree, parse_atom("p(x)"), 5))
    assert len(models) == 1 + 1 + 2


def test_lemmas_on_small_trees(params, compiled):
    rep = verify_lemmas(params, 5, compiled)
    assert rep.ok, rep.failures
    assert rep.trees == 9 and rep.round_trips == 9
    assert rep.violating == sum(1 for t in enumerate_pseudo_derivations(params.machine, 1, 5) if violations(params.machine, t, 1))

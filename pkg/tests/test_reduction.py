import pytest
from hypothesis import given
from hypothesis import strategies as st

from sidforge.atm import Atm
from sidforge.fixtures import rejecting_machine
from sidforge.pce import check_connected, check_progressing, established_syntactic
from sidforge.reduction import (
    NameClash,
    OutOfRange,
    ReductionParams,
    bin,
    bit_terms,
    build_c1_rules,
    build_c2_rules,
    build_c3_rules,
    build_cM,
    build_pseudo_rules,
    build_r_rules,
    complement,
    compile,
    from_bits,
    surface_rules,
)
from sidforge.syntax import NIL


def test_bin_is_big_endian():
    assert bin(2, 3) == (0, 1, 0)
    assert complement(bin(2, 3)) == (1, 0, 1)
    assert bit_terms(bin(1, 2)) == ("zero", "one")


@pytest.mark.parametrize("i,n", [(-1, 2), (4, 2), (0, 0)])
def test_bin_out_of_range(i, n):
    with pytest.raises(OutOfRange):
        bin(i, n)


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2**n - 1))))
def test_bin_round_trip(n_i):
    n, i = n_i
    assert from_bits(bin(i, n)) == i
    assert from_bits(complement(bin(i, n))) == 2**n - 1 - i


def test_params(params):
    assert params.B == 2
    assert params.globals == ("zero", "one", "s_a", "s_b", "s_c")
    assert params.sym("_") == NIL and params.symbol_of(NIL) == "_"
    assert params.move("L") == "zero" and params.move("R") == "one"


def test_reserved_state_names_are_rejected(machine):
    data = machine.to_json()
    text = str(data).replace("'q1'", "'c1'")
    clash = Atm.from_json(eval(text))
    with pytest.raises(NameClash):
        ReductionParams(clash, 1)
    with pytest.raises(OutOfRange):
        ReductionParams(machine, 0)


def test_universal_rule_with_two_children(params):
    rules = [str(r) for r in build_pseudo_rules(params)]
    assert (
        r"q0(x) <= \E y1 y2 . x -> (@,y1,y2) * act_q1(y1,nil,s_a,one) * act_q2(y2,nil,s_b,one)" in rules
    )


def test_existential_rule_guesses_one_transition(params):
    rules = [str(r) for r in build_pseudo_rules(params) if r.head == "q1"]
    assert rules == [r"q1(x) <= \E x' . x -> (@,x') * act_q0(x',nil,s_a,zero)"]


def test_leaves_read_symbols_without_transitions(params):
    leaves = {str(r.body) for r in build_pseudo_rules(params) if r.head == "q2"}
    assert leaves == {f"x -> (@,{s})" for s in ("s_a", "s_b", "s_c", "nil")}


def test_root_is_pinned_to_position_zero(params):
    roots = [r for r in build_pseudo_rules(params) if r.head == "q0~root"]
    assert roots and all(r.body.points_to[0].targets[0] == "zero" for r in roots)


def test_r_family_counts(params):
    rs = build_r_rules(params)
    r_rules = [r for r in rs if r.head == "r"]
    act_r = [r for r in rs if r.head == "act_r"]
    assert len(r_rules) == params.B + 4  # B fan-outs and one leaf per symbol
    assert len(act_r) == 4 * 3  # read any symbol, write a non-blank one


def test_c1_choice_rules(params):
    heads = [r for r in build_c1_rules(params) if r.head == "c1"]
    inner = [r for r in heads if r.body.pred_atoms[0].pred == "d1"]
    edges = [r for r in heads if r.body.pred_atoms[0].pred == "d1x"]
    assert len(inner) == 2 * params.N
    assert len(edges) == 2


def test_overwrite_guess_excludes_written_symbol(params):
    for r in build_c2_rules(params):
        if r.head != "act_e2":
            continue
        (cell,) = r.body.points_to
        (nxt,) = r.body.pred_atoms
        assert nxt.args[1] != cell.targets[1]
    guesses = {
        r.body.pred_atoms[0].args[1]
        for r in build_c2_rules(params)
        if r.head == "act_e2" and r.body.points_to[0].targets[1] == "s_b"
    }
    assert guesses == {"s_a", "s_c", NIL}


def test_c_m_rules(params):
    cm = [str(r) for r in build_cM(params)]
    assert cm == [rf"c_M(x) <= \E y z . x -> (y,z) * Const(z) * c{i}(y)" for i in (1, 2, 3)]


# frozen counts for the reference machine at one position bit
def test_frozen_family_sizes(params):
    sizes = [len(f(params)) for f in (build_pseudo_rules, build_r_rules, build_c1_rules, build_c2_rules, build_c3_rules, build_cM)]
    assert sizes == [20, 18, 70, 125, 44, 3]
    assert len(surface_rules(params)) == 280


def test_compiled_core(compiled):
    assert len(compiled.sid.rules) == 937
    assert check_progressing(compiled.sid)[0]
    assert check_connected(compiled.sid)[0]
    assert established_syntactic(compiled.sid)[0]
    assert str(compiled.lhs) == "p_M(x,zero,one,s_a,s_b,s_c)"


def test_compile_rejecting_machine(rejecting):
    p, c = rejecting
    assert check_progressing(c.sid)[0] and check_connected(c.sid)[0]
    assert c.weight("q0") == 1 and c.weight("Const") == 0


def test_surface_counts_are_affine(machine):
    counts = [len(surface_rules(ReductionParams(machine, n))) for n in (1, 2, 3, 4)]
    assert [b - a for a, b in zip(counts, counts[1:])] == [2, 2, 2]


def test_rejecting_machine_fixture():
    assert rejecting_machine().branching == 1

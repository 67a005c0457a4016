import pytest

from sidforge.pce import (
    Established,
    NotProgressing,
    check_connected,
    check_established,
    check_pce,
    check_progressing,
    established_semantic,
    established_syntactic,
)
from sidforge.syntax import parse_sid


def test_binary_trees_are_pce(btree):
    rep = check_pce(btree)
    assert rep.ok
    assert rep.to_json()["established"] == "Yes"


def test_list_segments_are_pce(lists):
    assert check_pce(lists).ok


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("p(x) <= emp", "no points-to"),
        ("p(x) <= x -> (nil,nil) * x -> (nil,nil)", "2 points-to"),
        ("p(x,y) <= y -> (nil,nil)", "instead of its first parameter"),
        ("p(x) <= x -> (nil,nil,nil)", "3 fields"),
    ],
)
def test_progress_diagnostics(text, fragment):
    ok, diags = check_progressing(parse_sid(text))
    assert not ok
    assert fragment in diags[0][1]


def test_connectivity_requires_progress():
    with pytest.raises(NotProgressing):
        check_connected(parse_sid("p(x) <= emp"))


def test_disconnected_child():
    sid = parse_sid("p(x,y) <= x -> (nil,nil) * q(y)\nq(x) <= x -> (nil,nil)")
    ok, diags = check_connected(sid)
    assert not ok and diags[0][0] == 0


def test_dangling_existential_is_not_established():
    sid = parse_sid(r"p(x) <= \E y . x -> (y,nil)")
    assert not established_syntactic(sid)[0]
    verdict, diags, cm = established_semantic(sid, 4)
    assert verdict is Established.NO
    assert cm is not None and cm.store["y"] not in cm.heap


def test_semantic_tier_proves_equality_allocation():
    # y is allocated only because it is forced equal to x
    sid = parse_sid(r"p(x) <= \E y . x -> (nil,nil) * y = x")
    assert not established_syntactic(sid)[0]
    assert check_established(sid) is Established.YES


def test_unknown_within_bound_for_recursive_systems():
    sid = parse_sid(
        r"""
p(x) <= \E y z . x -> (z,nil) * y = x * q(z)
q(x) <= \E z . x -> (z,nil) * q(z)
q(x) <= x -> (nil,nil)
"""
    )
    assert not established_syntactic(sid)[0]
    assert check_established(sid, 3) is Established.UNKNOWN_WITHIN_BOUND


def test_report_text_and_json(btree):
    rep = check_pce(parse_sid(r"p(x) <= \E y . x -> (y,nil)"))
    assert not rep.ok
    assert "established: No" in str(rep)
    assert "countermodel" in rep.to_json()

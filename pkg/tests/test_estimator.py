from sklearn.base import clone
from sklearn.pipeline import Pipeline

from sidforge.estimator import AtmCompiler, EntailmentChecker, ModelChecker, PceChecker, ShorthandExpander
from sidforge.semantics import NIL_LOC, Structure
from sidforge.syntax import Sid

from conftest import BTREE


def test_params_round_trip():
    est = ShorthandExpander(emit_after="tuples")
    assert est.get_params()["emit_after"] == "tuples"
    assert clone(est).set_params(naive=True).naive is True


def test_expander_counts():
    assert len(ShorthandExpander().fit_transform("p(x) <= x -> (@,@,@,@)").rules) == 8
    assert len(ShorthandExpander(naive=True).fit_transform("p(x) <= x -> (@,@,@,@)")) == 16 * 3


def test_compiler_and_checker_pipeline(machine):
    pipe = Pipeline([("compile", AtmCompiler(space_exp=1))])
    c = pipe.fit_transform(machine)
    (rep,) = PceChecker().fit().predict([c.sid])
    assert rep.ok
    assert len(AtmCompiler(surface=True).fit_transform(machine)) == 280


def test_model_checker():
    mc = ModelChecker().fit(BTREE)
    leaf = Structure({"x": 1}, {1: (NIL_LOC, NIL_LOC)})
    assert mc.predict([(leaf, "p(x)"), (Structure({"x": 1}, {}), "p(x)")]) == [True, False]


def test_entailment_checker():
    ec = EntailmentChecker(max_nodes=5).fit(BTREE + "\nl(x) <= x -> (nil,nil)")
    assert isinstance(ec.sid_, Sid)
    (same, leaf) = ec.predict([("p(x)", "p(x)"), ("p(x)", "l(x)")])
    assert same.holds and not leaf.holds

"""scikit-learn style wrappers, so the checks compose with pipelines and
parameter grids (``get_params`` / ``set_params`` come from ``BaseEstimator``)."""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin

from .atm import Atm
from .harness import bounded_entailment
from .pce import check_pce
from .reduction import ReductionParams, compile, surface_rules
from .shorthands import GlobalEnv, expand_all, expand_choices, expand_tuples
from .syntax import Sid, parse_atom, parse_rules, parse_sid
from .unfolding import Models, models_sid


def _as_rules(X):
    if isinstance(X, str):
        return parse_rules(X)
    if isinstance(X, Sid):
        return list(X.rules)
    return list(X)


def _as_sid(X) -> Sid:
    if isinstance(X, Sid):
        return X
    if isinstance(X, str):
        return parse_sid(X)
    return Sid.from_rules(X)


class ShorthandExpander(BaseEstimator, TransformerMixin):
    """Lower extended rules to core rules.

    ``transform`` returns a core ``Sid`` (or a rule list when ``emit_after``
    names an intermediate pass).  With ``naive=True`` only tuples and choices
    are expanded, choices first, for comparing rule counts.
    """

    def __init__(self, globals_=("zero", "one"), emit_after=None, naive=False):
        self.globals_ = globals_
        self.emit_after = emit_after
        self.naive = naive

    def fit(self, X=None, y=None):
        self.env_ = GlobalEnv(tuple(self.globals_))
        return self

    def transform(self, X):
        env = getattr(self, "env_", None) or GlobalEnv(tuple(self.globals_))
        rules = _as_rules(X)
        if self.naive:
            return expand_tuples(expand_choices(rules, env, naive=True), env)
        return expand_all(rules, env, self.emit_after)


class AtmCompiler(BaseEstimator, TransformerMixin):
    """Machine to compiled system; ``transform`` returns the ``Compiled``
    bundle (system, left and right root atoms), or the extended rules when
    ``surface=True``."""

    def __init__(self, space_exp=1, surface=False):
        self.space_exp = space_exp
        self.surface = surface

    def fit(self, X: Atm, y=None):
        self.params_ = ReductionParams(X, self.space_exp)
        return self

    def transform(self, X: Atm):
        p = ReductionParams(X, self.space_exp)
        return surface_rules(p) if self.surface else compile(p)


class PceChecker(BaseEstimator):
    """``predict`` returns one ``PceReport`` per system."""

    def __init__(self, establish_bound=4):
        self.establish_bound = establish_bound

    def fit(self, X=None, y=None):
        return self

    def predict(self, X):
        return [check_pce(_as_sid(s), self.establish_bound) for s in X]


class ModelChecker(BaseEstimator):
    """Fit on a system; ``predict`` decides ``(structure, formula)`` pairs."""

    def __init__(self, max_nodes=12):
        self.max_nodes = max_nodes

    def fit(self, X, y=None):
        self.sid_ = _as_sid(X)
        return self

    def predict(self, X):
        return [models_sid(st, self.sid_, f, self.max_nodes) is Models.TRUE for st, f in X]


class EntailmentChecker(BaseEstimator):
    """Fit on a system; ``predict`` returns a verdict per ``(lhs, rhs)`` pair."""

    def __init__(self, max_nodes=12):
        self.max_nodes = max_nodes

    def fit(self, X, y=None):
        self.sid_ = _as_sid(X)
        return self

    def predict(self, X):
        out = []
        for lhs, rhs in X:
            lhs = parse_atom(lhs) if isinstance(lhs, str) else lhs
            rhs = parse_atom(rhs) if isinstance(rhs, str) else rhs
            out.append(bounded_entailment(self.sid_, lhs, rhs, self.max_nodes))
        return out

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import square_cycle
from kacward.estimators import DecayProfiler, FermionicObservable, KacWardOperator
from kacward.exceptions import InvalidGraphError, NoCertificateError, PreconditionError
from kacward.isoradial import build_lattice, build_square
from kacward.sholo import observable_column
from kacward.validation import check_beta, check_graph, check_positive, check_rows


def test_params_and_clone():
    kw = KacWardOperator(weights=0.3, beta=0.7)
    assert kw.get_params() == {"weights": 0.3, "beta": 0.7}
    c = clone(kw)
    assert c.get_params() == kw.get_params() and c is not kw
    kw.set_params(beta=0.2)
    assert kw.beta == 0.2
    assert DecayProfiler().get_params() == {"beta": 0.5, "r_max": 20, "fit_from": 4}


def test_not_fitted():
    with pytest.raises(NotFittedError):
        KacWardOperator().transform(np.zeros(8))
    with pytest.raises(NotFittedError):
        FermionicObservable().transform([0])
    with pytest.raises(NotFittedError):
        DecayProfiler().score()


def test_fit_on_graph_with_weights():
    kw = KacWardOperator(weights=0.3).fit(square_cycle())
    assert kw.partition_function_ == pytest.approx(1.0081, rel=1e-14)
    assert kw.n_features_in_ == 8
    assert kw.condition_number_ >= 1


def test_fit_on_lattice_uses_beta():
    kw = KacWardOperator(beta=1.0).fit(build_square(1))
    assert kw.partition_function_ == pytest.approx(1.1440174040653646, rel=1e-12)
    lo = KacWardOperator(beta=0.5).fit(build_square(1))
    assert lo.partition_function_ < kw.partition_function_


def test_fit_on_vertex_edge_pair():
    kw = KacWardOperator(weights=0.3).fit(([0, 1, 1 + 1j, 1j], [(0, 1), (1, 2), (2, 3), (3, 0)]))
    assert kw.graph_.n_edges == 4


def test_fit_needs_weights_for_plain_graph():
    with pytest.raises(PreconditionError):
        KacWardOperator().fit(square_cycle())


def test_transform_round_trip():
    kw = KacWardOperator(beta=0.8).fit(build_square(1))
    X = np.random.default_rng(0).normal(size=(3, kw.n_features_in_))
    Y = kw.transform(X)
    assert np.allclose(Y, X @ kw.inverse_.T)
    assert np.allclose(kw.inverse_transform(Y), X, atol=1e-13)


def test_transform_checks_shape():
    kw = KacWardOperator(weights=0.3).fit(square_cycle())
    with pytest.raises(PreconditionError):
        kw.transform(np.zeros((2, 5)))
    with pytest.raises(PreconditionError):
        kw.transform(np.full(8, np.nan))


def test_fermionic_observable_rows():
    L = build_lattice("tri", 2)
    fo = FermionicObservable().fit(L)
    rows = fo.transform([3, 10])
    assert rows.shape == (2, L.graph.n_edges)
    assert np.allclose(rows[1], observable_column(L, 10))
    with pytest.raises(PreconditionError):
        fo.transform([L.graph.n_directed])
    with pytest.raises(PreconditionError):
        FermionicObservable().fit(square_cycle())


def test_decay_profiler():
    dp = DecayProfiler(beta=0.5, r_max=10).fit(build_square(2))
    assert dp.epsilon_ == pytest.approx(0.5235, abs=1e-4)
    assert dp.score() == 1.0
    assert len(dp.profile_.max_entry) == 11
    with pytest.raises(NoCertificateError):
        DecayProfiler(beta=1.0).fit(build_square(1))


def test_validation_helpers():
    with pytest.raises(InvalidGraphError):
        check_graph(42)
    assert check_graph({"vertices": [0, 1], "edges": [(0, 1)]}).n_edges == 1
    with pytest.raises(PreconditionError):
        check_beta(float("nan"))
    with pytest.raises(PreconditionError):
        check_positive("tol", 0)
    assert check_rows(np.ones(4), 4).shape == (1, 4)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banachlab.errors import BudgetError
from banachlab.expander import (
    DisconnectedGraphError,
    abelian_cayley_graph,
    congruence_quotient,
    counting_diagnostic,
    complete_graph,
    cycle_graph,
    edge_average,
    elementary_generators,
    embedding_obstruction_scan,
    lipschitz_distance_check,
    pair_average,
    poincare_ratio,
    poincare_value,
    s2_condition,
    sl3_order,
    spectral_gap,
    telescoping_check,
    variance_identity_error,
)
from banachlab.norms import CoefficientSpace, l2


@pytest.fixture(scope="module")
def sl3_2():
    return congruence_quotient(2)


@pytest.mark.parametrize("m,order", [(2, 168), (3, 5616), (4, 43008), (5, 372000), (6, 168 * 5616)])
def test_sl3_orders(m, order):
    assert sl3_order(m) == order


def test_generators_are_symmetric_and_unimodular():
    gens = elementary_generators()
    assert len(gens) == 12
    for g in gens:
        assert round(np.linalg.det(g)) == 1
        assert any(np.array_equal(np.linalg.inv(g).round().astype(int), h) for h in gens)


@pytest.mark.parametrize("m", [2, 3])
def test_congruence_quotient_structure(m):
    g = congruence_quotient(m)
    assert g.order == sl3_order(m)
    assert g.degree == 12
    assert g.is_symmetric() and g.is_connected()
    assert np.array_equal(g.vertices[0], np.eye(3, dtype=np.int64))
    # neighbors are right translates
    x, s = 17, 5
    assert np.array_equal(g.vertices[g.neighbors[x, s]], (g.vertices[x] @ g.generators[s]) % m)


def test_s2_condition_flags():
    gens = elementary_generators()
    assert not s2_condition(gens, 2)
    assert s2_condition(gens, 3)


def test_budget():
    with pytest.raises(BudgetError):
        congruence_quotient(4, budget=10_000)


@pytest.mark.parametrize("graph,lam", [(complete_graph(4), 4 / 3), (cycle_graph(4), 1.0), (cycle_graph(6), 0.5)])
def test_gap_oracles(graph, lam):
    assert spectral_gap(graph).lambda1 == pytest.approx(lam, abs=1e-12)


def test_sl3_2_gap(sl3_2):
    assert spectral_gap(sl3_2).lambda1 == pytest.approx(0.2642977396, abs=1e-8)


def test_disconnected_rejected():
    with pytest.raises(DisconnectedGraphError):
        spectral_gap(abelian_cayley_graph(6, [2, 4]))
    with pytest.raises(ValueError):
        abelian_cayley_graph(5, [1, 2])


@pytest.mark.parametrize("name", ["K4", "C4", "SL3"])
def test_poincare_matches_inverse_gap(name, sl3_2):
    g = {"K4": complete_graph(4), "C4": cycle_graph(4), "SL3": sl3_2}[name]
    rep = poincare_ratio(g, l2(1), restarts=2)
    assert rep.ratio_lower == pytest.approx(rep.ratio_oracle, abs=1e-4)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 3))
def test_random_fields_below_hilbert_oracle(seed, d):
    g = cycle_graph(7)
    f = np.random.default_rng(seed).standard_normal((7, d))
    assert poincare_value(g, f, l2(d)) <= 1 / spectral_gap(g).lambda1 + 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 4))
def test_variance_identity(seed, d):
    f = np.random.default_rng(seed).standard_normal((30, d))
    assert variance_identity_error(f) <= 1e-9


def test_pair_average_methods():
    f = np.random.default_rng(0).standard_normal((20, 2))
    v2, m2 = pair_average(f, 2.0)
    assert m2 == "variance-identity"
    v2e, me = pair_average(f, 2.0 + 1e-15)  # falls through to exact summation
    assert me == "exact" and v2e == pytest.approx(v2, rel=1e-9)
    assert pair_average(f, 1.5, exact_limit=5, samples=1000)[1].startswith("sampled")


def test_edge_average_of_constant_is_zero():
    assert edge_average(cycle_graph(5), np.ones((5, 2))) == 0.0


def test_telescoping_and_lipschitz(sl3_2):
    f = np.random.default_rng(1).standard_normal((sl3_2.order, 2))
    assert telescoping_check(sl3_2, f, [0, 3, 7, 7])["holds"]
    chk = lipschitz_distance_check(sl3_2)
    assert chk["holds"] and chk["lipschitz"] == 1


def test_counting_diagnostic(sl3_2):
    res = counting_diagnostic(sl3_2, lambda k: k, N=1.0)
    assert all(res["geometric_bound_holds"])
    assert res["K"][0] == sl3_2.order
    assert res["lower_bound_holds"]


def test_counting_stated_bound_fails_at_radius_one():
    g = congruence_quotient(3)
    res = counting_diagnostic(g, lambda k: k, N=1.0)
    # the 1-ball has 13 elements but (#S)^1 = 12
    assert res["K"][1] == 13 * g.order
    assert res["stated_bound_holds"][1] is False
    assert all(res["geometric_bound_holds"])


def test_scan_columns():
    res = embedding_obstruction_scan([2], l2(1), restarts=1)
    row = res["rows"][0]
    assert list(row)[:8] == ["m", "vertices", "degree", "lambda1", "ratio_lower", "ratio_oracle", "space", "seed"]
    assert row["ratio_lower"] == pytest.approx(row["ratio_oracle"], abs=1e-4)


def test_non_hilbert_ratio_has_no_oracle():
    rep = poincare_ratio(complete_graph(5), CoefficientSpace(1.5, 2), restarts=1)
    assert rep.ratio_oracle is None and rep.ratio_lower > 0

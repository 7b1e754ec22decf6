import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banachlab.building import (
    RelativePosition,
    base_vertex,
    diag_vertex,
    in_K,
    lattice_class,
    relative_position_formula,
    formula_sweep_parameters,
    m_minus,
    m_minus_basis,
    m_plus,
    m_plus_basis,
    random_k,
    relative_position,
    sweep_house_factorizations,
    verify_relative_position_formula,
    verify_house_factorizations,
    vertex_type,
)
from banachlab.errors import BudgetError
from banachlab.laurent import LaurentMatrix, LPoly, determinantal_valuations, series_inverse, trunc_mul
from banachlab.residue import LAURENT, RingSpec

primes = st.sampled_from([2, 3, 5])


@st.composite
def polys(draw, p=None):
    p = p or draw(primes)
    coeffs = draw(st.lists(st.integers(0, p - 1), max_size=5))
    return LPoly(p, coeffs, draw(st.integers(-3, 3)))


@st.composite
def poly_triples(draw):
    p = draw(primes)
    return tuple(draw(polys(p)) for _ in range(3))


@settings(max_examples=150, deadline=None)
@given(poly_triples())
def test_lpoly_ring_laws(t):
    f, g, h = t
    assert f + g == g + f
    assert f * g == g * f
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert (f - f).is_zero()


@settings(max_examples=150, deadline=None)
@given(poly_triples())
def test_lpoly_valuation_is_additive(t):
    f, g, _ = t
    assert (f * g).min_valuation() == f.min_valuation() + g.min_valuation()
    assert (f + g).min_valuation() >= min(f.min_valuation(), g.min_valuation())


def test_lpoly_batched():
    f = LPoly(3, [[1, 2], [0, 1]])
    assert f.batch == 2
    assert list(f.valuation()) == [0, 1]
    assert (f * f).item(1) == LPoly.monomial(3, 2)
    assert LPoly(2, [1, 1]) * LPoly(2, [1, 1]) == LPoly(2, [1, 0, 1])


@settings(max_examples=50, deadline=None)
@given(primes, st.lists(st.integers(0, 10), min_size=1, max_size=6), st.integers(1, 8))
def test_series_inverse(p, u, N):
    u[0] = u[0] % p or 1
    v = series_inverse(u, N, p)
    prod = trunc_mul(np.array(u) % p, v, N, p)
    assert prod[0] == 1 and not prod[1:N].any()


def test_adjugate_identity():
    rng = np.random.default_rng(0)
    for p in (2, 3):
        g = random_k(p, rng) @ LaurentMatrix.diag_pi(p, [-2, 1, 0])
        prod = g.adjugate() @ g
        d = g.det()
        assert prod == LaurentMatrix(p, [[d if i == j else 0 for j in range(3)] for i in range(3)])


@pytest.mark.parametrize("p", [2, 3])
def test_random_k_lies_in_k(p):
    rng = np.random.default_rng(p)
    for _ in range(5):
        assert in_K(random_k(p, rng)).all()
    assert not in_K(LaurentMatrix.diag_pi(p, [1, -1, 0])).any()


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("exps", [(0, 0, 0), (0, 2, 5), (1, 1, 3), (-2, 0, 4)])
def test_elementary_divisors_invariant_under_k(p, exps):
    rng = np.random.default_rng(sum(exps) + p)
    for _ in range(3):
        g = random_k(p, rng) @ LaurentMatrix.diag_pi(p, list(exps)) @ random_k(p, rng)
        assert determinantal_valuations(g)[0].tolist() == sorted(exps)


@pytest.mark.parametrize("p", [2, 3])
def test_lattice_class_is_basis_and_dilation_invariant(p):
    rng = np.random.default_rng(7)
    B = LaurentMatrix.diag_pi(p, [-3, -1, 0]) @ random_k(p, rng)
    x = lattice_class(B)
    assert lattice_class(B @ random_k(p, rng)) == x
    assert lattice_class(B.scale_pi(2)) == x
    assert lattice_class(B.scale_pi(-1)) == x
    assert lattice_class(LaurentMatrix.diag_pi(p, [-2, -1, 0])) != x


def test_vertex_types():
    assert vertex_type(base_vertex(2)) == 0
    # det diag(pi^-(i+j), pi^-j, 1) = pi^-(i+2j)
    assert vertex_type(diag_vertex(2, 1, 0)) == 1
    assert vertex_type(diag_vertex(2, 0, 1)) == 2
    assert vertex_type(diag_vertex(2, 1, 1)) == 0


@settings(max_examples=30, deadline=None)
@given(primes, st.lists(st.integers(-3, 3), min_size=6, max_size=6), st.integers(0, 2 ** 31 - 1))
def test_type_additivity(p, exps, seed):
    rng = np.random.default_rng(seed)
    x = lattice_class(random_k(p, rng, steps=3, degree=2) @ LaurentMatrix.diag_pi(p, exps[:3]))
    y = lattice_class(random_k(p, rng, steps=3, degree=2) @ LaurentMatrix.diag_pi(p, exps[3:]))
    pos = relative_position(x, y)
    assert (vertex_type(y) - vertex_type(x)) % 3 == (pos.i - pos.j) % 3


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("i,j", [(0, 0), (1, 0), (0, 1), (2, 1), (1, 3)])
def test_relative_position_of_diagonal_vertices(p, i, j):
    o, x = base_vertex(p), diag_vertex(p, i, j)
    assert relative_position(o, x) == RelativePosition(i, j)
    assert relative_position(x, o) == RelativePosition(i, j).swap()


@pytest.mark.parametrize("p", [2, 3])
def test_relative_position_is_k_invariant(p):
    rng = np.random.default_rng(11)
    g = random_k(p, rng)
    x = lattice_class(g @ LaurentMatrix.diag_pi(p, [-3, -1, 0]))
    assert relative_position(lattice_class(g), x) == RelativePosition(2, 1)


def test_relative_position_examples():
    s = RingSpec(2, 1, LAURENT)
    z, one = s.zero(), s.one()
    assert relative_position(m_minus(1, z, z), m_plus(1, z, one)).as_tuple() == (2, 0)
    assert relative_position(m_minus(1, z, z), m_plus(1, z, z)).as_tuple() == (0, 1)
    assert int(relative_position_formula(2, 1, 1, 0, 1, 0, 0)) == 0
    assert int(relative_position_formula(2, 1, 1, 0, 0, 0, 0)) == 1


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_formula_matches_oracle_random(data):
    p = data.draw(st.sampled_from([2, 3, 5]))
    m, n = data.draw(st.integers(1, 3)), data.draw(st.integers(1, 3))
    x, y = (data.draw(st.integers(0, p ** n - 1)) for _ in range(2))
    a, b = (data.draw(st.integers(0, p ** m - 1)) for _ in range(2))
    i = int(relative_position_formula(p, m, n, x, y, a, b))
    sm, sn = RingSpec(p, m, LAURENT), RingSpec(p, n, LAURENT)
    pos = relative_position(m_minus(m, sm.elements()[a], sm.elements()[b]), m_plus(n, sn.elements()[x], sn.elements()[y]))
    assert pos.as_tuple() == (m + n - 2 * i, i)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.lists(st.integers(0, 1), min_size=2, max_size=2))
def test_lift_choice_does_not_matter(x, y, extra):
    p, n = 2, 2
    base = lattice_class(m_plus_basis(p, n, x, y))
    assert lattice_class(m_plus_basis(p, n, x, y, x_extra=extra)) == base
    assert lattice_class(m_minus_basis(p, n, x, y, b_extra=extra)) == lattice_class(m_minus_basis(p, n, x, y))


@pytest.mark.parametrize("p,m,n", [(2, 1, 1), (2, 2, 1), (2, 1, 3), (3, 1, 1), (3, 2, 1), (5, 1, 1)])
def test_formula_exhaustive_small(p, m, n):
    r = verify_relative_position_formula(p, m, n, identity_limit=64)
    assert r["passed"], r["mismatch_examples"]
    assert r["instances"] == p ** (2 * (m + n))


def test_formula_budget():
    with pytest.raises(BudgetError):
        verify_relative_position_formula(2, 5, 6)
    params = formula_sweep_parameters()
    assert all(p ** (2 * (m + n)) <= 10 ** 6 for p, m, n in params)
    assert (7, 2, 1) in params and (2, 5, 4) in params


@pytest.mark.parametrize("p,m,n", [(2, 1, 1), (2, 3, 2), (3, 2, 2), (3, 3, 1)])
def test_factorizations_exhaustive(p, m, n):
    r = sweep_house_factorizations(p, m, n)
    assert r["passed"]
    assert r["y=ax+b"]["middle_exponents"] == [-m, -n, 0]
    assert r["y=ax+b+pi^(n-1)"]["middle_exponents"] == [-(m + 1), -(n - 1), 0]


def test_factorization_single_and_errors():
    assert verify_house_factorizations(3, 2, 1, 2, 5, 7)["passed"]
    with pytest.raises(ValueError):
        verify_house_factorizations(2, 1, 2, 0, 0, 0)
    with pytest.raises(BudgetError):
        sweep_house_factorizations(3, 5, 5)

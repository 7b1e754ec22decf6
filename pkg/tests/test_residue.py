import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banachlab.residue import (
    LAURENT,
    PADIC,
    AdditiveCharacter,
    RingSpec,
    add_table,
    character_table,
    mul_table,
    nondegenerate_characters,
    valuation,
)

SPECS = [RingSpec(p, n, kind) for p in (2, 3) for n in (1, 2, 3) for kind in (PADIC, LAURENT)]
ring_specs = st.sampled_from(SPECS)


@st.composite
def ring_triples(draw):
    spec = draw(ring_specs)
    idx = st.integers(0, spec.order - 1)
    return spec, draw(idx), draw(idx), draw(idx)


def test_rejects_non_prime_and_bad_level():
    with pytest.raises(ValueError):
        RingSpec(4, 2)
    with pytest.raises(ValueError):
        RingSpec(2, 0)
    with pytest.raises(ValueError):
        RingSpec(2, 2, "adelic")


def test_padic_is_integers_mod_p_power():
    spec = RingSpec(3, 2, PADIC)
    a, b = spec.element(5), spec.element(7)
    assert (a * b).rep == 35 % 9
    assert (a + b).rep == 12 % 9


def test_laurent_has_characteristic_p():
    spec = RingSpec(2, 3, LAURENT)
    one = spec.one()
    assert (one + one) == spec.zero()
    t = spec.pi()
    assert (t * t).rep == (0, 0, 1)
    assert (t * t * t) == spec.zero()


def test_padic_and_laurent_differ_when_carries_occur():
    pa, la = RingSpec(2, 2, PADIC), RingSpec(2, 2, LAURENT)
    assert (pa.one() + pa.one()).index == 2
    assert (la.one() + la.one()).index == 0


@settings(max_examples=200, deadline=None)
@given(ring_triples())
def test_ring_axioms(t):
    spec, i, j, k = t
    x, y, z = (spec.elements()[v] for v in (i, j, k))
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == spec.zero()
    assert x * spec.one() == x


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_tables_match_elementwise_ops(spec):
    A, M = add_table(spec), mul_table(spec)
    els = spec.elements()
    for i, j in itertools.product(range(spec.order), repeat=2):
        assert A[i, j] == (els[i] + els[j]).index
        assert M[i, j] == (els[i] * els[j]).index


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_ideal_pi_k_is_indices_divisible_by_p_k(spec):
    for e in spec.elements():
        v = valuation(e)
        for k in range(spec.n + 1):
            assert (v >= k) == (e.index % spec.p ** k == 0)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_units_and_valuation(spec):
    els = spec.elements()
    assert valuation(spec.zero()) == float("inf")
    units = [e for e in els if e.is_unit()]
    assert len(units) == spec.order - spec.order // spec.p
    for u in units:
        assert any(u * w == spec.one() for w in units)


@settings(max_examples=100, deadline=None)
@given(ring_triples())
def test_valuation_is_multiplicative_up_to_truncation(t):
    spec, i, j, _ = t
    x, y = spec.elements()[i], spec.elements()[j]
    vx, vy, vxy = valuation(x), valuation(y), valuation(x * y)
    assert vxy == (vx + vy if vx + vy < spec.n else float("inf"))
    assert valuation(x + y) >= min(vx, vy)


def test_reduce_lift_and_division_by_pi():
    spec = RingSpec(3, 3, PADIC)
    x = spec.element(9 * 2)
    assert x.reduce(2).index == 0
    assert x.divide_by_pi(2).index == 2
    assert x.divide_by_pi(2).times_pi(2, 3) == x
    with pytest.raises(ValueError):
        spec.element(1).divide_by_pi(1)
    assert spec.element(4).lift(4).reduce(3) == spec.element(4)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_characters_are_additive_and_orthogonal(spec):
    X = character_table(spec)  # X[c, x]
    A = add_table(spec)
    N = spec.order
    for c in range(N):
        assert np.allclose(X[c][A], np.outer(X[c], X[c]), atol=1e-12)
    assert np.allclose(X @ X.conj().T / N, np.eye(N), atol=1e-12)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_nondegenerate_characters_do_not_vanish_on_pi_n_minus_1(spec):
    nd = nondegenerate_characters(spec, spec.n)
    assert len(nd) == spec.order - spec.order // spec.p
    top = [e for e in spec.elements() if valuation(e) >= spec.n - 1]
    for chi in nd:
        assert any(abs(chi(e) - 1) > 1e-9 for e in top)


def test_character_value_oracles():
    chi = AdditiveCharacter(RingSpec(3, 1, PADIC), 1)
    assert chi(RingSpec(3, 1).element(1)) == pytest.approx(np.exp(2j * np.pi / 3))
    psi = AdditiveCharacter(RingSpec(2, 2, LAURENT), 1)
    # laurent pairing reads the coefficient of t^(n-1) of c*x
    assert psi(RingSpec(2, 2, LAURENT).element((0, 1))) == pytest.approx(-1)
    assert psi(RingSpec(2, 2, LAURENT).element((1, 0))) == pytest.approx(1)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banachlab.errors import CompatibilityError, NotBiadditiveError, NotUnitaryError
from banachlab.fourier import (
    CocycleSpec,
    dual_matching,
    fft_factorize,
    fourier_matrix,
    is_nondegenerate_form,
    max_entry_error,
    product,
    representative_set,
    scalar_step_form,
    twisted_chains,
    twisted_cocycle,
    twisted_operator,
    variant_factorize,
    variant_operator,
)
from banachlab.groups import FiniteAbelianGroup, SubgroupChain, maximal_chains
from banachlab.residue import LAURENT, PADIC, AdditiveCharacter, RingSpec

TOL = 1e-12


def _pairing(N):
    return lambda x, y: np.array([[np.exp(2j * np.pi * x * y / N)]])


@pytest.mark.parametrize("factors", [[2], [8], [27], [2, 2, 2], [4, 9], [6, 10]])
def test_fft_exact_on_every_maximal_chain(factors):
    G = FiniteAbelianGroup(factors)
    T = fourier_matrix(G)
    for ch in maximal_chains(G):
        fs = fft_factorize(ch)
        assert len(fs) == ch.length
        assert max_entry_error(product(fs), T) <= TOL


def test_fft_factors_are_butterflies():
    G = FiniteAbelianGroup([8])
    for F in fft_factorize(maximal_chains(G)[0]):
        assert F.nnz() == 8 * 2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3), st.data())
def test_fft_exact_with_random_sections(step, data):
    G = FiniteAbelianGroup([4, 3])
    ch0 = maximal_chains(G)[step % len(maximal_chains(G))]
    secs = []
    for i in range(1, ch0.length + 1):
        Q = ch0.quotient(i)
        lo = ch0.subgroups[i - 1].elements
        shifts = [data.draw(st.sampled_from(lo.tolist())) for _ in range(Q.order)]
        secs.append([int(G.add(r, s)) for r, s in zip(ch0.sections[i - 1], shifts)])
    ch = SubgroupChain(G, ch0.subgroups, sections=secs)
    assert max_entry_error(product(fft_factorize(ch)), fourier_matrix(G)) <= TOL


def test_fourier_matrix_entries():
    T = fourier_matrix(FiniteAbelianGroup([3])).dense()
    w = np.exp(2j * np.pi / 3)
    assert np.allclose(T * 3, [[1, 1, 1], [1, w, w * w], [1, w * w, w]], atol=1e-12)


def test_scalar_cocycle_variant_is_the_fourier_matrix():
    G = FiniteAbelianGroup([4])
    spec = CocycleSpec(G, G, 1, _pairing(4))
    assert max_entry_error(variant_operator(spec), fourier_matrix(G)) <= TOL
    ch = maximal_chains(G)[0]
    gbar = [G.whole(), G.subgroup([2]), G.trivial_subgroup()]
    assert max_entry_error(product(variant_factorize(spec, ch, gbar)), fourier_matrix(G)) <= TOL


def test_cocycle_validation():
    G = FiniteAbelianGroup([4])
    with pytest.raises(NotUnitaryError):
        CocycleSpec(G, G, 1, lambda x, y: np.array([[2.0]])).validate()
    with pytest.raises(NotBiadditiveError):
        CocycleSpec(G, G, 1, lambda x, y: np.array([[np.exp(2j * np.pi * x * x * y / 4)]])).validate()


def test_incompatible_chains_rejected():
    G = FiniteAbelianGroup([4])
    spec = CocycleSpec(G, G, 1, _pairing(4))
    ch = maximal_chains(G)[0]
    wrong = [G.whole(), G.whole(), G.trivial_subgroup()]
    with pytest.raises(CompatibilityError):
        variant_factorize(spec, ch, wrong)


TWISTED = [(p, n, h, kind) for p in (2, 3) for n in (1, 2, 3) for h in (1, 2) if h <= n for kind in (PADIC, LAURENT)]


@pytest.mark.parametrize("p,n,h,kind", TWISTED)
def test_twisted_factorization_exact(p, n, h, kind):
    spec = RingSpec(p, n, kind)
    chi = AdditiveCharacter(spec.at_level(h), 1)
    coc = twisted_cocycle(spec, h, chi)
    coc.validate()
    ch, gbar, I = twisted_chains(spec, h)
    fs = variant_factorize(coc, ch, gbar)
    assert max_entry_error(product(fs), variant_operator(coc)) <= TOL
    assert max_entry_error(twisted_operator(spec, h, chi), variant_operator(coc)) <= TOL


@pytest.mark.parametrize("p,n,h,kind", TWISTED)
def test_twisted_hilbert_norm(p, n, h, kind):
    spec = RingSpec(p, n, kind)
    chi = AdditiveCharacter(spec.at_level(h), 1)
    s = np.linalg.svd(twisted_operator(spec, h, chi).dense(), compute_uv=False)
    # a scaled isometry
    assert s.max() <= p ** (-(n - h) / 2) * (1 + 1e-9)
    assert np.allclose(s, s.max(), atol=1e-9)


@pytest.mark.parametrize("p,n,kind", [(2, 3, PADIC), (3, 2, LAURENT), (2, 4, LAURENT)])
def test_twisted_norm_independent_of_representatives(p, n, kind):
    spec = RingSpec(p, n, kind)
    chi = AdditiveCharacter(spec.at_level(1), 1)
    m = p ** (n - 1)
    Z2 = representative_set(spec, 1, (np.arange(m) + 1) % p)
    a = np.linalg.norm(twisted_operator(spec, 1, chi).dense(), 2)
    b = np.linalg.norm(twisted_operator(spec, 1, chi, Z2).dense(), 2)
    assert abs(a - b) <= TOL


def test_twisted_rejects_bad_inputs():
    spec = RingSpec(3, 2)
    with pytest.raises(ValueError):
        twisted_cocycle(spec, 1, AdditiveCharacter(spec.at_level(1), 0))
    with pytest.raises(ValueError):
        twisted_cocycle(spec, 1, AdditiveCharacter(spec.at_level(1), 1), Z=[0, 3, 6])
    with pytest.raises(ValueError):
        twisted_cocycle(spec, 3, AdditiveCharacter(spec.at_level(1), 1))


@pytest.mark.parametrize("p,n", [(2, 3), (3, 2), (3, 3)])
def test_twisted_steps_scalar_nondegenerate(p, n):
    spec = RingSpec(p, n)
    coc = twisted_cocycle(spec, 1, AdditiveCharacter(spec.at_level(1), 1))
    ch, gbar, I = twisted_chains(spec, 1)
    for i in I:
        X, Y, lam = scalar_step_form(coc, ch, gbar, i)
        assert is_nondegenerate_form(lam)
        assert sorted(dual_matching(X, lam).tolist()) == list(range(X.order))

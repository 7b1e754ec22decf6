"""Averaged Fourier matrices, their factorizations along subgroup chains, and the
twisted variant driven by a bilinear cocycle kappa.

Operators act on averaged l2 spaces, so ``fourier_matrix(G)`` has entries
``chi(x) / #G``.  Factor lists are returned in application order: for
``[F_1, ..., F_n]`` the operator equals ``F_n @ ... @ F_1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .errors import (
    ChainError,
    CompatibilityError,
    IndexMismatchError,
    NotBiadditiveError,
    NotCommutingError,
    NotUnitaryError,
)
from .groups import FiniteAbelianGroup, Subgroup, SubgroupChain, SubQuotient, ring_filtration
from .residue import AdditiveCharacter, RingSpec, add_table, mul_table, neg_table

Matrix = Union[np.ndarray, sp.spmatrix]


@dataclass
class OperatorMatrix:
    """A matrix acting blockwise on averaged l2 spaces of E-valued functions.

    rows / cols are optional label arrays; only their lengths are enforced.
    """

    matrix: Matrix
    rows: Optional[Sequence] = None
    cols: Optional[Sequence] = None
    name: str = ""

    def __post_init__(self):
        if not sp.issparse(self.matrix):
            self.matrix = np.asarray(self.matrix, dtype=complex)
        else:
            self.matrix = sp.csr_matrix(self.matrix, dtype=complex)
        if self.matrix.ndim != 2:
            raise ValueError("operator matrix must be 2-dimensional")
        if self.rows is not None and len(self.rows) != self.matrix.shape[0]:
            raise IndexMismatchError("row labels do not match the matrix")
        if self.cols is not None and len(self.cols) != self.matrix.shape[1]:
            raise IndexMismatchError("column labels do not match the matrix")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else self.matrix

    def nnz(self) -> int:
        return int(self.matrix.nnz) if self.is_sparse else int(np.count_nonzero(self.matrix))

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if self.shape[1] != other.shape[0]:
            raise IndexMismatchError(f"cannot compose {self.shape} with {other.shape}")
        return OperatorMatrix(self.matrix @ other.matrix, self.rows, other.cols)

    def scaled(self, row_units=None, col_units=None) -> "OperatorMatrix":
        """Multiply rows / columns by the given (unit) scalars."""
        M = self.matrix
        if row_units is not None:
            M = sp.diags(row_units) @ M if self.is_sparse else np.asarray(row_units)[:, None] * M
        if col_units is not None:
            M = M @ sp.diags(col_units) if self.is_sparse else M * np.asarray(col_units)[None, :]
        return OperatorMatrix(M, self.rows, self.cols, self.name)


def product(factors: Sequence[OperatorMatrix]) -> OperatorMatrix:
    """F_n @ ... @ F_1 for factors given in application order."""
    return reduce(lambda acc, F: F @ acc, factors[1:], factors[0])


def max_entry_error(A: OperatorMatrix, B: OperatorMatrix) -> float:
    if A.shape != B.shape:
        raise IndexMismatchError(f"shape mismatch {A.shape} vs {B.shape}")
    D = A.matrix - B.matrix
    if sp.issparse(D):
        D = sp.csr_matrix(D)
        return float(np.abs(D.data).max()) if D.nnz else 0.0
    return float(np.abs(D).max()) if D.size else 0.0


def _as_quotient(G) -> SubQuotient:
    if isinstance(G, SubQuotient):
        return G
    if isinstance(G, Subgroup):
        return SubQuotient(G)
    if isinstance(G, FiniteAbelianGroup):
        return SubQuotient(G.whole())
    raise TypeError(f"expected a group, subgroup or subquotient, got {type(G)}")


def fourier_matrix(G) -> OperatorMatrix:
    """T_G with entry (chi, x) = chi(x) / #G; G may be a group, subgroup or subquotient."""
    Q = _as_quotient(G)
    M = Q.G.character_matrix(Q.dual_labels, Q.labels) / Q.order
    return OperatorMatrix(M, rows=Q.dual_labels, cols=Q.labels, name="T_G")


# ---------------------------------------------------------------- fast factorization


def _fft_sub(chain: SubgroupChain, k: int) -> List[np.ndarray]:
    """Dense factors of T_{G_k} (rows: dual labels of G_k, cols: sorted elements of G_k)."""
    G = chain.group
    A = chain.subgroups[k]
    QA = SubQuotient(A)
    if k == 1:
        return [fourier_matrix(QA).dense()]
    H = chain.subgroups[k - 1]
    QH = SubQuotient(H)
    Qq = chain.quotient(k)  # A / H
    sigma = chain.sections[k - 1]
    inner = _fft_sub(chain, k - 1)
    nq, nh = Qq.order, QH.order

    # T_2: rows chi in dual(A), cols (x', chi') with chi' in dual(H), x' major
    chis = QA.dual_labels
    res = QH.restrict(chis)
    vals = G.character_matrix(chis, sigma) / nq  # (|A|, nq)
    T2 = np.zeros((A.order, nq * nh), dtype=complex)
    rows = np.repeat(np.arange(A.order), nq)
    cols = (np.tile(np.arange(nq), A.order) * nh + np.repeat(res, nq))
    T2[rows, cols] = vals.ravel()

    eye = np.eye(nq)
    lifted = [np.kron(eye, F) for F in inner]
    # relabel the columns (x', h) of the first factor to the element sigma(x') + h of A
    elems = G.add_outer(sigma, QH.labels).ravel()
    pos = np.searchsorted(A.elements, elems)
    first = np.zeros_like(lifted[0])
    first[:, pos] = lifted[0]
    lifted[0] = first
    return lifted + [T2]


def fft_factorize(chain: SubgroupChain) -> List[OperatorMatrix]:
    """Factors of T_G along the chain, in application order (length = chain length)."""
    if not chain.strict:
        raise ChainError("fft_factorize needs a strictly increasing chain")
    dense = _fft_sub(chain, chain.length)
    return [OperatorMatrix(F, name=f"F{i + 1}") for i, F in enumerate(dense)]


def chain_quotient_operators(chain: SubgroupChain) -> List[OperatorMatrix]:
    """T_{G_i / G_{i-1}} for i = 1..n."""
    return [fourier_matrix(chain.quotient(i)) for i in range(1, chain.length + 1)]


# ---------------------------------------------------------------- cocycles and the variant


KappaFn = Callable[[int, int], np.ndarray]


@dataclass
class CocycleSpec:
    """A bilinear map kappa: G x Gbar -> U(l2(Z)).

    ``kappa(x, y)`` returns the |Z| x |Z| matrix for element indices x, y.  An
    optional ``monomial(x, y)`` returning ``(cols, phases)`` (row z has its only
    nonzero entry ``phases[z]`` at column ``cols[z]``) enables sparse assembly.
    """

    G: FiniteAbelianGroup
    Gbar: FiniteAbelianGroup
    zsize: int
    kappa: KappaFn
    monomial: Optional[Callable[[int, int], Tuple[np.ndarray, np.ndarray]]] = None
    name: str = ""

    def matrix(self, x: int, y: int) -> np.ndarray:
        if self.monomial is not None:
            cols, ph = self.monomial(int(x), int(y))
            M = np.zeros((self.zsize, self.zsize), dtype=complex)
            M[np.arange(self.zsize), cols] = ph
            return M
        return np.asarray(self.kappa(int(x), int(y)), dtype=complex)

    def validate(self, atol: float = 1e-12) -> None:
        """Check unitarity, biadditivity and commutation (on generators, which suffices)."""
        G, Gb = self.G, self.Gbar
        I = np.eye(self.zsize)
        gens_x = G.standard_generators()
        gens_y = Gb.standard_generators()
        for x in gens_x:
            for y in gens_y:
                K = self.matrix(x, y)
                if not np.allclose(K.conj().T @ K, I, atol=atol):
                    raise NotUnitaryError(f"kappa({x}, {y}) is not unitary")
        if not np.allclose(self.matrix(0, 0), I, atol=atol):
            raise NotBiadditiveError("kappa(0, 0) is not the identity")
        for y in range(Gb.order):
            row = [self.matrix(x, y) for x in range(G.order)]
            if not np.allclose(row[0], I, atol=atol):
                raise NotBiadditiveError(f"kappa(0, {y}) is not the identity")
            for g in gens_x:
                for x in range(G.order):
                    xg = int(G.add(x, g))
                    if not np.allclose(row[xg], row[x] @ row[g], atol=atol):
                        raise NotBiadditiveError(f"kappa(x+x', y) != kappa(x, y) kappa(x', y) at x={x}, x'={g}, y={y}")
        for x in range(G.order):
            col = [self.matrix(x, y) for y in range(Gb.order)]
            if not np.allclose(col[0], I, atol=atol):
                raise NotBiadditiveError(f"kappa({x}, 0) is not the identity")
            for g in gens_y:
                for y in range(Gb.order):
                    yg = int(Gb.add(y, g))
                    if not np.allclose(col[yg], col[y] @ col[g], atol=atol):
                        raise NotBiadditiveError(f"kappa(x, y+y') != kappa(x, y) kappa(x, y') at x={x}, y={y}, y'={g}")
        values = [self.matrix(x, y) for x in gens_x for y in gens_y]
        for i, P in enumerate(values):
            for Q in values[i + 1:]:
                if not np.allclose(P @ Q, Q @ P, atol=atol):
                    raise NotCommutingError("kappa values do not commute")


def _kappa_block_entries(spec: CocycleSpec, xs, ys):
    """Yield (i, j, rows, cols, vals) for kappa(xs[i], ys[j]) as sparse triples over Z."""
    zs = np.arange(spec.zsize)
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            if spec.monomial is not None:
                cols, ph = spec.monomial(int(x), int(y))
                yield i, j, zs, np.asarray(cols), np.asarray(ph, dtype=complex)
            else:
                K = spec.matrix(x, y)
                r, c = np.nonzero(K)
                yield i, j, r, c, K[r, c]


def _variant_on(spec: CocycleSpec, X: SubQuotient, Y: SubQuotient) -> sp.csr_matrix:
    """Variant operator on X x Z -> Y x Z, kappa evaluated on representatives."""
    nz, nx, ny = spec.zsize, X.order, Y.order
    R, C, V = [], [], []
    for i, j, r, c, v in _kappa_block_entries(spec, X.labels, Y.labels):
        R.append(j * nz + r)
        C.append(i * nz + c)
        V.append(v / nx)
    if not R:
        return sp.csr_matrix((ny * nz, nx * nz), dtype=complex)
    return sp.csr_matrix((np.concatenate(V), (np.concatenate(R), np.concatenate(C))), shape=(ny * nz, nx * nz))


def variant_operator(spec: CocycleSpec, validate: bool = True) -> OperatorMatrix:
    """f -> [(y, z) -> E_x (kappa(x, y) f(x, .))(z)] from l2(G x Z) to l2(Gbar x Z)."""
    if validate:
        spec.validate()
    X = SubQuotient(spec.G.whole())
    Y = SubQuotient(spec.Gbar.whole())
    return OperatorMatrix(_variant_on(spec, X, Y), name="T_variant")


def check_compatibility(spec: CocycleSpec, chainG: SubgroupChain, chainGbar_decreasing: Sequence[Subgroup]) -> None:
    """kappa(x, y) = 1 for x in G_i, y in Gbar^i, for every i."""
    if len(chainGbar_decreasing) != len(chainG.subgroups):
        raise ChainError("the two chains must have the same length")
    I = np.eye(spec.zsize)
    for i, (Gi, Gbi) in enumerate(zip(chainG.subgroups, chainGbar_decreasing)):
        for x in Gi.generators or (0,):
            for y in Gbi.generators or (0,):
                if not np.allclose(spec.matrix(x, y), I, atol=1e-12):
                    raise CompatibilityError(f"kappa({x}, {y}) != 1 at step {i}")


def _decreasing_chain(group: FiniteAbelianGroup, subs: Sequence[Subgroup]) -> List[Subgroup]:
    subs = list(subs)
    if subs[0].order != group.order or subs[-1].order != 1:
        raise ChainError("the Gbar chain must run from Gbar down to 0")
    for hi, lo in zip(subs, subs[1:]):
        if not lo.issubgroup(hi):
            raise ChainError("the Gbar chain is not decreasing")
    return subs


def _variant_factors(spec: CocycleSpec, Gs: List[Subgroup], Gbs: List[Subgroup], i: int) -> List[sp.csr_matrix]:
    """Factors of the variant on G_n / G_i x Gbar^i (rows (y, z) in Gbar^i labels order)."""
    n = len(Gs) - 1
    X = SubQuotient(Gs[n], Gs[i])
    Y = SubQuotient(Gbs[i])
    if n - i == 1:
        return [_variant_on(spec, X, Y)]
    G, Gb = spec.G, spec.Gbar
    nz = spec.zsize
    Hq = SubQuotient(Gs[i + 1], Gs[i])  # H inside X
    Xq = SubQuotient(Gs[n], Gs[i + 1])  # X / H
    Yq = SubQuotient(Gbs[i], Gbs[i + 1])  # Y / Hbar
    Hb = SubQuotient(Gbs[i + 1])  # Hbar
    s, sig = Xq.labels, Yq.labels
    nxq, nyq, nh = Xq.order, Yq.order, Hq.order

    # T_0: rows (y', x', z), cols (x, w) with x in X labels
    xs = X.labels
    xp = Xq.project(xs)
    diff = G.sub(xs, s[xp])  # x - s(x') in G_{i+1}
    R, C, V = [], [], []
    zs = np.arange(nz)
    for jy, y in enumerate(sig):
        for ix, (d, q) in enumerate(zip(diff, xp)):
            if spec.monomial is not None:
                cols, ph = spec.monomial(int(d), int(y))
                r, c, v = zs, np.asarray(cols), np.asarray(ph, dtype=complex)
            else:
                K = spec.matrix(d, y)
                r, c = np.nonzero(K)
                v = K[r, c]
            R.append((jy * nxq + q) * nz + r)
            C.append(ix * nz + c)
            V.append(v / nh)
    T0 = sp.csr_matrix((np.concatenate(V), (np.concatenate(R), np.concatenate(C))), shape=(nyq * nxq * nz, X.order * nz))

    inner = _variant_factors(spec, Gs, Gbs, i + 1)
    # Delta_{y'} = blockdiag_{x'} kappa(s(x'), sigma(y'))
    deltas = []
    for y in sig:
        blocks = [sp.csr_matrix(spec.matrix(x, y)) for x in s]
        deltas.append(sp.block_diag(blocks, format="csr"))
    factors = [T0]
    for k, Rk in enumerate(inner):
        if k == 0:
            factors.append(sp.block_diag([Rk @ D for D in deltas], format="csr"))
        else:
            factors.append(sp.block_diag([Rk] * nyq, format="csr"))
    # relabel rows (y', (ybar, z)) -> (sigma(y') + ybar, z) in Y order
    ybar = Hb.labels
    targets = Gb.add_outer(sig, ybar).ravel()
    ypos = np.searchsorted(Y.labels, targets)
    perm = (ypos[:, None] * nz + np.arange(nz)[None, :]).ravel()
    last = factors[-1].tocoo()
    factors[-1] = sp.csr_matrix((last.data, (perm[last.row], last.col)), shape=last.shape)
    return factors


def variant_factorize(
    spec: CocycleSpec,
    chainG: SubgroupChain,
    chainGbar: Sequence[Subgroup],
    validate: bool = True,
) -> List[OperatorMatrix]:
    """Factors of the variant operator along G_0 <= ... <= G_n and Gbar^0 >= ... >= Gbar^n.

    ``chainGbar`` lists Gbar^0 = Gbar, Gbar^1, ..., Gbar^n = 0.  Returned in
    application order; the product equals ``variant_operator(spec)``.
    """
    if validate:
        spec.validate()
    Gbs = _decreasing_chain(spec.Gbar, chainGbar)
    check_compatibility(spec, chainG, Gbs)
    mats = _variant_factors(spec, list(chainG.subgroups), Gbs, 0)
    return [OperatorMatrix(M, name=f"T{i}") for i, M in enumerate(mats)]


def variant_step_operators(spec: CocycleSpec, chainG: SubgroupChain, chainGbar: Sequence[Subgroup]) -> List[OperatorMatrix]:
    """T_{G_{i+1}/G_i, Gbar^i/Gbar^{i+1}, Z} for i = 0..n-1."""
    Gbs = _decreasing_chain(spec.Gbar, chainGbar)
    out = []
    for i in range(chainG.length):
        X = SubQuotient(chainG.subgroups[i + 1], chainG.subgroups[i])
        Y = SubQuotient(Gbs[i], Gbs[i + 1])
        out.append(OperatorMatrix(_variant_on(spec, X, Y), name=f"step{i}"))
    return out


def scalar_step_form(spec: CocycleSpec, chainG: SubgroupChain, chainGbar: Sequence[Subgroup], i: int):
    """If kappa_i is scalar, return (X, Y, Lambda) with Lambda[y', x'] = lambda_i(x', y'); else None."""
    X = SubQuotient(chainG.subgroups[i + 1], chainG.subgroups[i])
    Y = SubQuotient(chainGbar[i], chainGbar[i + 1])
    lam = np.zeros((Y.order, X.order), dtype=complex)
    I = np.eye(spec.zsize)
    for b, y in enumerate(Y.labels):
        for a, x in enumerate(X.labels):
            K = spec.matrix(x, y)
            c = K[0, 0]
            if not np.allclose(K, c * I, atol=1e-12):
                return None
            lam[b, a] = c
    return X, Y, lam


def is_nondegenerate_form(lam: np.ndarray, atol: float = 1e-12) -> bool:
    """lambda(., y) = 1 only for y = 0 and lambda(x, .) = 1 only for x = 0 (index 0 is the zero coset)."""
    ones = np.isclose(lam, 1.0, atol=atol)
    rows_trivial = np.flatnonzero(ones.all(axis=1))
    cols_trivial = np.flatnonzero(ones.all(axis=0))
    return list(rows_trivial) == [0] and list(cols_trivial) == [0]


def dual_matching(X: SubQuotient, lam: np.ndarray) -> np.ndarray:
    """Exhaustively match each y' to the dual label of X whose character equals lambda(., y').

    Returns, for each row of lam, the position in X.dual_labels; raises if the map is not a bijection.
    """
    table = X.G.character_matrix(X.dual_labels, X.labels)
    out = np.full(lam.shape[0], -1, dtype=np.int64)
    for b in range(lam.shape[0]):
        hits = np.flatnonzero(np.all(np.isclose(table, lam[b][None, :], atol=1e-9), axis=1))
        if hits.size != 1:
            raise ValueError("lambda_i* does not hit a unique character")
        out[b] = hits[0]
    if np.unique(out).size != out.size or out.size != X.order:
        raise ValueError("lambda_i* is not a bijection")
    return out


# ---------------------------------------------------------------- the twisted operator on residue rings


def representative_set(spec: RingSpec, h: int, offsets=None) -> np.ndarray:
    """Representatives z + pi^(n-h) alpha(z) of O/pi^(n-h) in O/pi^n (alpha = offsets, default 0)."""
    base = np.arange(spec.p ** (spec.n - h), dtype=np.int64)
    if offsets is None:
        return base
    off = np.asarray(offsets, dtype=np.int64) % spec.p ** h
    return base + off * spec.p ** (spec.n - h)


def _check_twisted(spec: RingSpec, h: int, chi: AdditiveCharacter, Z) -> np.ndarray:
    if h < 1 or spec.n < h:
        raise ValueError(f"need 1 <= h <= n, got h={h}, n={spec.n}")
    if chi.spec != spec.at_level(h):
        raise ValueError("chi must be a character of O/pi^h O of the same ring family")
    if not chi.is_nondegenerate():
        raise ValueError("chi is degenerate (trivial on pi^(h-1) O / pi^h O)")
    Z = representative_set(spec, h) if Z is None else np.asarray(Z, dtype=np.int64)
    m = spec.p ** (spec.n - h)
    if Z.size != m or np.unique(Z % m).size != m:
        raise ValueError("Z is not a set of representatives of O/pi^(n-h) O")
    return Z


def twisted_cocycle(spec: RingSpec, h: int, chi: AdditiveCharacter, Z=None) -> CocycleSpec:
    """kappa(x, y) f(t) = f(t + xy) on the chi-twisted space, written on l2(Z)."""
    Z = _check_twisted(spec, h, chi, Z)
    G = FiniteAbelianGroup.from_ring(spec)
    m = spec.p ** (spec.n - h)
    addt, mult, negt = add_table(spec), mul_table(spec), neg_table(spec)
    hspec = spec.at_level(h)
    hadd, hneg = add_table(hspec), neg_table(hspec)
    pos_of = np.empty(m, dtype=np.int64)
    pos_of[Z % m] = np.arange(m)
    alpha = Z // m  # Z = (Z mod pi^(n-h)) + pi^(n-h) alpha, read on canonical indices
    chitab = _char_row(chi)

    def monomial(x: int, y: int):
        u = addt[Z, mult[x, y]]
        low = u % m
        cols = pos_of[low]
        # u = w' + pi^(n-h) s' with w' = low + pi^(n-h) alpha(w'), and the exact
        # residue u - low lies in pi^(n-h) O so s = (u - low) / pi^(n-h)
        s = addt[u, negt[low]] // m
        s_rel = hadd[s, hneg[alpha[cols]]]
        return cols, chitab[s_rel]

    def kappa(x: int, y: int):
        cols, ph = monomial(x, y)
        M = np.zeros((m, m), dtype=complex)
        M[np.arange(m), cols] = ph
        return M

    return CocycleSpec(G, G, m, kappa, monomial, name=f"twisted(p={spec.p},n={spec.n},h={h})")


def _char_row(chi: AdditiveCharacter) -> np.ndarray:
    from .residue import character_table

    return character_table(chi.spec)[chi.label]


def twisted_operator(spec: RingSpec, h: int, chi: AdditiveCharacter, Z=None) -> OperatorMatrix:
    """(xi_{x,t}) -> (E_x xi_{x, t + xy})_{y,t} on the chi-twisted space, restricted to Z.

    Rows are (y, z) and columns (x, w), y and x major.
    """
    coc = twisted_cocycle(spec, h, chi, Z)
    X = SubQuotient(coc.G.whole())
    return OperatorMatrix(_variant_on(coc, X, X), name="T_twisted")


def twisted_chains(spec: RingSpec, h: int) -> Tuple[SubgroupChain, List[Subgroup], List[int]]:
    """Chains G_i = pi^(n-ih) (i <= a), G_{a+1} = O and Gbar^i = pi^(ih), Gbar^(a+1) = 0; and I = {0..a-1}."""
    n = spec.n
    a = n // h
    G = FiniteAbelianGroup.from_ring(spec)
    Gs = ring_filtration(spec, [n - i * h for i in range(a + 1)]) + [G.whole()]
    Gbs = ring_filtration(spec, [i * h for i in range(a + 1)]) + [G.trivial_subgroup()]
    chain = SubgroupChain(G, Gs, strict=False)
    return chain, Gbs, list(range(a))

"""Vertices of the building of PGL_3 over F_p((t)) and their relative positions.

A vertex is a homothety class of O-lattices in F^3, O = F_p[[t]], pi = t; a
lattice is given by a 3x3 ``LaurentMatrix`` whose columns generate it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import BudgetError
from .laurent import LaurentMatrix, LPoly, determinantal_valuations, series_inverse, trunc_mul
from .residue import LAURENT, RingElem, RingSpec, add_table, digit_array, mul_table, neg_table, valuation_table

FORMULA_BUDGET = 10 ** 6
FACTORIZATION_BUDGET = 10 ** 4
CHUNK = 1 << 16


# ---------------------------------------------------------------- lattice classes


def _hermite_truncated(cols: List[np.ndarray], N: int, p: int) -> Tuple[Tuple[int, ...], np.ndarray]:
    """Lower-triangular Hermite form of the O-module spanned by cols plus t^N O^3.

    cols are (3, N) coefficient arrays mod t^N.  Returns pivot exponents k_r and
    the reduced (3, 3, N) matrix H (column r has t^(k_r) in row r, zeros above,
    entries below row r of degree < k of their row).
    """
    gens = [c.copy() % p for c in cols]
    H = np.zeros((3, 3, N), dtype=np.int64)
    ks = []

    def val(v):
        nz = np.flatnonzero(v)
        return int(nz[0]) if nz.size else N

    for r in range(3):
        vals = [val(g[r]) for g in gens]
        if not gens or min(vals) >= N:
            ks.append(N)
            continue
        i = int(np.argmin(vals))
        v = vals[i]
        g = gens.pop(i)
        unit = np.zeros(N, dtype=np.int64)
        unit[: N - v] = g[r, v:]
        inv = series_inverse(unit[: N - v], N, p)
        g = np.array([trunc_mul(row, inv, N, p) for row in g])
        for j, h in enumerate(gens):
            vj = val(h[r])
            if vj >= N:
                continue
            # h[r] = t^v q ; subtract q * g
            q = np.zeros(N, dtype=np.int64)
            q[: N - v] = h[r, v:]
            gens[j] = np.array([(h[s] - trunc_mul(q, g[s], N, p)) % p for s in range(3)])
        H[:, r, :] = g
        ks.append(v)
    # reduce entries below the diagonal modulo later pivots
    for r in range(1, 3):
        k = ks[r]
        for i in range(r):
            high = H[r, i].copy()
            high[:k] = 0
            if not high.any():
                continue
            q = np.zeros(N, dtype=np.int64)
            q[: N - k] = high[k:]
            pivot_col = H[:, r, :] if k < N else np.zeros((3, N), dtype=np.int64)
            for s in range(3):
                H[s, i] = (H[s, i] - trunc_mul(q, pivot_col[s], N, p)) % p
            H[r, i, k:] = 0
    for r in range(3):
        if ks[r] < N:
            H[r, r] = 0
            H[r, r, ks[r]] = 1
        H[:r, r] = 0
    return tuple(ks), H


@dataclass(frozen=True)
class LatticeClass:
    """Homothety class of the lattice spanned by the columns of ``basis``."""

    basis: LaurentMatrix = field(compare=False, hash=False)
    canonical: tuple
    det_valuation: int = field(compare=False)

    def canonical_matrix(self) -> LaurentMatrix:
        p, ks, N, flat = self.canonical
        H = np.array(flat, dtype=np.int64).reshape(3, 3, N) if N else np.zeros((3, 3, 0), dtype=np.int64)
        rows = [[LPoly(p, H[i, j]) if N else LPoly.const(p, int(i == j)) for j in range(3)] for i in range(3)]
        for r, k in enumerate(ks):
            if k == N:
                rows[r][r] = LPoly.monomial(p, N)
        return LaurentMatrix(p, rows)

    def __repr__(self) -> str:
        return f"LatticeClass(type={vertex_type(self)}, pivots={self.canonical[1]})"


def _check_single(B: LaurentMatrix):
    if B.batch != 1 or B.shape != (3, 3):
        raise ValueError("expected a single 3x3 basis")


def lattice_canonical(basis: LaurentMatrix) -> tuple:
    """Hermite form of the lattice itself (no dilation)."""
    _check_single(basis)
    d = basis.det().valuation()[0]
    if math.isinf(d):
        raise ValueError("singular basis")
    mv = int(basis.min_valuation()[0])
    B = basis.scale_pi(-mv)
    N = int(d) - 3 * mv
    cols = []
    for j in range(3):
        c = np.zeros((3, N), dtype=np.int64)
        for i in range(3):
            e = B.e[i][j]
            for exp, coef in e.terms():
                if exp < N:
                    c[i, exp] = coef
        cols.append(c)
    ks, H = _hermite_truncated(cols, N, basis.p)
    return (basis.p, mv, ks, N, tuple(H.ravel().tolist()))


def lattice_equal(b1: LaurentMatrix, b2: LaurentMatrix) -> bool:
    return lattice_canonical(b1) == lattice_canonical(b2)


def lattice_class(basis: LaurentMatrix) -> LatticeClass:
    """Canonical representative: dilate so the lattice sits in O^3 with a unit entry, then Hermite form."""
    _check_single(basis)
    p, mv, ks, N, flat = lattice_canonical(basis)
    return LatticeClass(basis, (p, ks, N, flat), int(basis.det().valuation()[0]))


def vertex_type(x: LatticeClass) -> int:
    return (-x.det_valuation) % 3


@dataclass(frozen=True)
class RelativePosition:
    i: int
    j: int

    def swap(self) -> "RelativePosition":
        return RelativePosition(self.j, self.i)

    @property
    def length(self) -> int:
        return self.i + self.j

    def as_tuple(self) -> Tuple[int, int]:
        return (self.i, self.j)


def _positions_from_divisors(e: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    e = np.sort(e, axis=1)
    return (e[:, 1] - e[:, 0]).astype(np.int64), (e[:, 2] - e[:, 1]).astype(np.int64)


def relative_position_batch(bx: LaurentMatrix, by: LaurentMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """sigma(x, y) for batched bases, from the elementary divisors of adj(B_x) B_y."""
    C = bx.adjugate() @ by
    return _positions_from_divisors(determinantal_valuations(C))


def relative_position(x: LatticeClass, y: LatticeClass) -> RelativePosition:
    i, j = relative_position_batch(x.basis, y.basis)
    return RelativePosition(int(i[0]), int(j[0]))


# ---------------------------------------------------------------- the two families


def _lift(p: int, value, level: int, offset: Optional[np.ndarray] = None) -> LPoly:
    """Polynomial lift of residues mod t^level (Laurent-kind indices or RingElem)."""
    if isinstance(value, RingElem):
        if value.spec.kind != LAURENT or value.spec.p != p:
            raise ValueError("expected an element of F_p[t]/t^n")
        idx = np.array([value.index])
    else:
        idx = np.atleast_1d(np.asarray(value, dtype=np.int64))
    digits = (idx[:, None] // p ** np.arange(max(level, 1))) % p if level > 0 else np.zeros((idx.size, 1), dtype=np.int64)
    poly = LPoly(p, digits)
    if offset is not None:
        poly = poly + LPoly(p, np.atleast_2d(offset)).shift(level)
    return poly


def m_plus_basis(p: int, n: int, x, y, x_extra=None, y_extra=None) -> LaurentMatrix:
    X, Y = _lift(p, x, n, x_extra), _lift(p, y, n, y_extra)
    pin = LPoly.monomial(p, -n)
    return LaurentMatrix(p, [[pin, 0, 0], [pin * X, 1, 0], [-(pin * Y), 0, 1]])


def m_minus_basis(p: int, m: int, a, b, a_extra=None, b_extra=None) -> LaurentMatrix:
    A, B = _lift(p, a, m, a_extra), _lift(p, b, m, b_extra)
    return LaurentMatrix(p, [[1, 0, 0], [0, 1, 0], [-B, -A, LPoly.monomial(p, m)]])


def m_plus(n: int, x: RingElem, y: RingElem, x_extra=None, y_extra=None) -> LatticeClass:
    return lattice_class(m_plus_basis(x.spec.p, n, x, y, x_extra, y_extra))


def m_minus(m: int, a: RingElem, b: RingElem, a_extra=None, b_extra=None) -> LatticeClass:
    return lattice_class(m_minus_basis(a.spec.p, m, a, b, a_extra, b_extra))


def base_vertex(p: int) -> LatticeClass:
    return lattice_class(LaurentMatrix.identity(p))


def diag_vertex(p: int, i: int, j: int) -> LatticeClass:
    """diag(pi^-(i+j), pi^-j, 1) O^3."""
    return lattice_class(LaurentMatrix.diag_pi(p, [-(i + j), -j, 0]))


def random_k(p: int, rng: np.random.Generator, steps: int = 6, degree: int = 3) -> LaurentMatrix:
    """Product of elementary matrices with entries in O (polynomials), so det = 1."""
    g = LaurentMatrix.identity(p)
    for _ in range(steps):
        r, c = rng.choice(3, size=2, replace=False)
        rows = [[1 if a == b else 0 for b in range(3)] for a in range(3)]
        rows[r][c] = LPoly(p, rng.integers(0, p, size=degree + 1))
        g = g @ LaurentMatrix(p, rows)
    # a monomial permutation with sign keeps det = 1 and mixes coordinates
    perm = rng.permutation(3)
    P = [[0] * 3 for _ in range(3)]
    for a, b in enumerate(perm):
        P[a][b] = 1
    sign = 1 if _perm_sign(perm) > 0 else p - 1
    P[0][perm[0]] = sign
    return g @ LaurentMatrix(p, P)


def _perm_sign(perm) -> int:
    perm = list(perm)
    s = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                s = -s
    return s


def in_K(g: LaurentMatrix) -> np.ndarray:
    """Entries in O and det = 1, per batch element."""
    ok = g.min_valuation() >= 0
    return ok & g.det().equals(LPoly.const(g.p, 1))


# ---------------------------------------------------------------- relative positions of the two families


def relative_position_formula(p: int, m: int, n: int, x, y, a, b) -> np.ndarray:
    """i = largest in {0..min(m, n)} with y - (ax + b) in pi^i (O/pi^min(m,n)); arrays of Laurent indices."""
    k = min(m, n)
    if k == 0:
        return np.zeros(np.broadcast(x, y, a, b).shape, dtype=np.int64)
    s = RingSpec(p, k, LAURENT)
    mod = p ** k
    add, mul, neg = add_table(s), mul_table(s), neg_table(s)
    ax = mul[np.asarray(a) % mod, np.asarray(x) % mod]
    r = add[np.asarray(y) % mod, neg[add[ax, np.asarray(b) % mod]]]
    v = valuation_table(s)[r]
    return np.minimum(v, k).astype(np.int64)


def _proof_case_bases(p: int, m: int, n: int, x: int, y: int, a: int, b: int, i: int):
    """The bases of M^n_{x,y} and M^-m_{a,b} displayed in the proof, for case i."""
    X, Y, A, Bv = (_lift(p, v, lev) for v, lev in ((x, n), (y, n), (a, m), (b, m)))
    one, zero = LPoly.const(p, 1), LPoly.zero(p)
    v = [one, X, -Y]
    w = [zero, one, -A]
    u = [one, X, -(A * X + Bv)]
    e3 = [zero, zero, one]

    def cols(*vs):
        return LaurentMatrix(p, [[vs[c][r] for c in range(3)] for r in range(3)])

    def sc(vec, k):
        return [c.shift(k) for c in vec]

    if i < min(m, n):
        return cols(sc(v, -n), w, sc(u, -i)), cols(sc(v, m - i), w, u)
    if i == n:
        return cols(sc(u, -n), w, e3), cols(u, w, sc(e3, m))
    return cols(sc(v, -n), w, e3), cols(v, w, sc(e3, m))


def verify_relative_position_formula(p: int, m: int, n: int, identity_limit: int = 256, seed: int = 0, budget: int = FORMULA_BUDGET) -> dict:
    """Exhaustive comparison of the closed formula with the elementary-divisor oracle.

    Every (x, y, a, b) is checked against the oracle.  The proof-case basis
    identities are checked by canonical-form equality on every instance when
    there are at most ``identity_limit`` of them, else on a seeded sample.
    """
    if m < 1 or n < 1:
        raise ValueError("m, n must be positive")
    total = p ** (2 * (m + n))
    if total > budget:
        raise BudgetError(f"p^(2(m+n)) = {total} exceeds the exhaustion budget {budget}")
    pn, pm = p ** n, p ** m
    mismatches = 0
    examples = []
    for start in range(0, total, CHUNK):
        flat = np.arange(start, min(total, start + CHUNK))
        x, r = flat % pn, flat // pn
        y, r = r % pn, r // pn
        a, b = r % pm, r // pm
        i_formula = relative_position_formula(p, m, n, x, y, a, b)
        bx = m_minus_basis(p, m, a, b)
        by = m_plus_basis(p, n, x, y)
        ii, jj = relative_position_batch(bx, by)
        bad = (ii != m + n - 2 * i_formula) | (jj != i_formula)
        mismatches += int(bad.sum())
        for t in np.flatnonzero(bad)[: max(0, 5 - len(examples))]:
            examples.append({"x": int(x[t]), "y": int(y[t]), "a": int(a[t]), "b": int(b[t]), "oracle": [int(ii[t]), int(jj[t])], "formula_i": int(i_formula[t])})
    # proof-case identities
    if total <= identity_limit:
        sample = np.arange(total)
    else:
        sample = np.random.default_rng(seed).choice(total, size=identity_limit, replace=False)
    id_fail = 0
    cases: Dict[str, int] = {"i<min": 0, "i=n": 0, "i=m": 0}
    for f in sample:
        f = int(f)
        x, r = f % pn, f // pn
        y, r = r % pn, r // pn
        a, b = r % pm, r // pm
        i = int(relative_position_formula(p, m, n, x, y, a, b))
        plus, minus = _proof_case_bases(p, m, n, x, y, a, b, i)
        key = "i<min" if i < min(m, n) else ("i=n" if i == n else "i=m")
        cases[key] += 1
        if not (lattice_equal(plus, m_plus_basis(p, n, x, y)) and lattice_equal(minus, m_minus_basis(p, m, a, b))):
            id_fail += 1
    return {
        "p": p,
        "m": m,
        "n": n,
        "instances": total,
        "mismatches": mismatches,
        "mismatch_examples": examples,
        "identity_checks": int(len(sample)),
        "identity_exhaustive": bool(total <= identity_limit),
        "identity_cases": cases,
        "identity_failures": id_fail,
        "passed": mismatches == 0 and id_fail == 0,
    }


def formula_sweep_parameters(primes=(2, 3, 5, 7), budget: int = FORMULA_BUDGET) -> List[Tuple[int, int, int]]:
    out = []
    for p in primes:
        for s in itertools.count(2):
            if p ** (2 * s) > budget:
                break
            out.extend((p, m, s - m) for m in range(1, s))
    return out


# ---------------------------------------------------------------- factorizations


def _factor_matrices(p: int, m: int, n: int, X: LPoly, A: LPoly, shifted: bool):
    one = LPoly.const(p, 1)
    c = LPoly.monomial(p, m - n + 1)
    L = LaurentMatrix(p, [[-c, 1, 0], [-(c * X), X, 1], [1, 0, 0]])
    if not shifted:
        D = LaurentMatrix.diag_pi(p, [-m, -n, 0])
        R = LaurentMatrix(p, [[0, A, 1], [1, A.shift(1), LPoly.monomial(p, 1)], [0, 1, 0]])
    else:
        D = LaurentMatrix.diag_pi(p, [-(m + 1), -(n - 1), 0])
        R = LaurentMatrix(p, [[-one, A.shift(1), LPoly.monomial(p, 1)], [0, A, 1], [0, 1, 0]])
    return L, D, R


def house_matrix(p: int, m: int, n: int, X: LPoly, Y: LPoly, A: LPoly, B: LPoly) -> LaurentMatrix:
    """(1 0 0; 0 1 0; pi^-m b  pi^-m a  pi^-m) times the basis of M^n_{x,y}."""
    left = LaurentMatrix(p, [[1, 0, 0], [0, 1, 0], [B.shift(-m), A.shift(-m), LPoly.monomial(p, -m)]])
    pin = LPoly.monomial(p, -n)
    right = LaurentMatrix(p, [[pin, 0, 0], [pin * X, 1, 0], [-(pin * Y), 0, 1]])
    return left @ right


def _factorization_check(p: int, m: int, n: int, X: LPoly, A: LPoly, B: LPoly, shifted: bool) -> dict:
    Y = A * X + B
    if shifted:
        Y = Y + LPoly.monomial(p, n - 1)
    H = house_matrix(p, m, n, X, Y, A, B)
    L, D, R = _factor_matrices(p, m, n, X, A, shifted)
    prod = L @ D @ R
    eq = H.equals(prod)
    return {
        "product_equal": eq,
        "left_in_K": in_K(L),
        "right_in_K": in_K(R),
        "middle_exponents": [-m, -n, 0] if not shifted else [-(m + 1), -(n - 1), 0],
    }


def verify_house_factorizations(p: int, m: int, n: int, x, a, b) -> dict:
    """Both displayed triple products for one (x, a, b); y = ax + b and y = ax + b + pi^(n-1)."""
    if not m >= n >= 1:
        raise ValueError("needs m >= n >= 1")
    X, A, B = _lift(p, x, n), _lift(p, a, m), _lift(p, b, m)
    out = {}
    for name, shifted in (("y=ax+b", False), ("y=ax+b+pi^(n-1)", True)):
        r = _factorization_check(p, m, n, X, A, B, shifted)
        out[name] = {
            "product_equal": bool(r["product_equal"].all()),
            "outer_in_K": bool(r["left_in_K"].all() and r["right_in_K"].all()),
            "middle_exponents": r["middle_exponents"],
        }
    out["passed"] = all(v["product_equal"] and v["outer_in_K"] for v in out.values() if isinstance(v, dict))
    return out


def sweep_house_factorizations(p: int, m: int, n: int, budget: int = FACTORIZATION_BUDGET) -> dict:
    """Exhaustive over x in O/pi^n O and a, b in O/pi^m O (batched)."""
    if not m >= n >= 1:
        raise ValueError("needs m >= n >= 1")
    if p ** (m + n) > budget:
        raise BudgetError(f"p^(m+n) = {p ** (m + n)} exceeds the budget {budget}")
    pn, pm = p ** n, p ** m
    total = pn * pm * pm
    flat = np.arange(total)
    x, r = flat % pn, flat // pn
    a, b = r % pm, r // pm
    X, A, B = _lift(p, x, n), _lift(p, a, m), _lift(p, b, m)
    res = {"p": p, "m": m, "n": n, "instances": total}
    ok = True
    for name, shifted in (("y=ax+b", False), ("y=ax+b+pi^(n-1)", True)):
        r = _factorization_check(p, m, n, X, A, B, shifted)
        fails = int((~np.broadcast_to(r["product_equal"], (total,))).sum())
        kfail = int((~np.broadcast_to(r["left_in_K"] & r["right_in_K"], (total,))).sum())
        res[name] = {"product_failures": fails, "outer_K_failures": kfail, "middle_exponents": r["middle_exponents"]}
        ok &= fails == 0 and kfail == 0
    res["passed"] = bool(ok)
    return res


def factorization_sweep_parameters(primes=(2, 3), max_m: int = 3, budget: int = FACTORIZATION_BUDGET):
    return [(p, m, n) for p in primes for m in range(1, max_m + 1) for n in range(1, m + 1) if p ** (m + n) <= budget]


# names used by the published interface
verify_lemma_4_8 = verify_relative_position_formula
verify_section4_factorizations = verify_house_factorizations

"""Norms of A (x) 1_E on averaged l2 spaces with coefficients in E = l_q^d.

Lower bounds come from a dual power iteration (each step provably does not
decrease the ratio), so every reported lower bound is attained by the returned
witness.  Upper bounds come from the regular (entrywise absolute value) bound,
the exact Hilbert value at q = 2, interpolation between the two for 1 < q < 2,
and the exact scalar value when d = 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import IndexMismatchError
from .fourier import OperatorMatrix

SUM = "sum"
AVERAGED = "averaged"

DENSE_SVD_LIMIT = 512

# method tags
TAG_REGULAR = "regular"
TAG_HILBERT = "hilbert-exact"
TAG_INTERP = "riesz-thorin"
TAG_SCALAR = "scalar-exact(d=1)"
TAG_ASCENT = "dual-power-ascent"
TAG_WITNESS = "supplied-witness"


@dataclass(frozen=True)
class CoefficientSpace:
    q: float
    d: int
    convention: str = SUM

    def __post_init__(self):
        if not (self.q >= 1) or math.isinf(self.q):
            raise ValueError(f"q must lie in [1, inf), got {self.q}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d}")
        if self.convention not in (SUM, AVERAGED):
            raise ValueError(f"unknown norm convention {self.convention!r}")

    def norm(self, v: np.ndarray) -> np.ndarray:
        """E-norm along the last axis."""
        a = np.abs(np.asarray(v))
        if self.q == 1:
            s = a.sum(axis=-1)
        elif self.q == 2:
            s = np.sqrt((a * a).sum(axis=-1))
        else:
            s = (a ** self.q).sum(axis=-1) ** (1.0 / self.q)
        if self.convention == AVERAGED:
            s = s * self.d ** (-1.0 / self.q)
        return s

    def with_dim(self, d: int) -> "CoefficientSpace":
        return CoefficientSpace(self.q, d, self.convention)

    def label(self) -> str:
        return f"l_{self.q:g}^{self.d}({self.convention})"


def l2(d: int = 1) -> CoefficientSpace:
    return CoefficientSpace(2.0, d)


def l1(d: int, convention: str = SUM) -> CoefficientSpace:
    return CoefficientSpace(1.0, d, convention)


@dataclass
class VectorField:
    """A function on a finite index set with values in a coefficient space; values has shape (|I|, d)."""

    values: np.ndarray
    space: CoefficientSpace

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.values.shape[1] != self.space.d:
            raise IndexMismatchError(f"field has {self.values.shape[1]} components, space has d={self.space.d}")

    def norm(self) -> float:
        return field_norm(self.values, self.space)


def field_norm(values: np.ndarray, E: CoefficientSpace) -> float:
    """sqrt(E_{x in I} ||f(x)||_E^2)."""
    pts = E.norm(values)
    return float(np.sqrt(np.mean(pts * pts))) if pts.size else 0.0


def tensor_apply(A: OperatorMatrix, f: VectorField) -> VectorField:
    if f.values.shape[0] != A.shape[1]:
        raise IndexMismatchError(f"field indexed by {f.values.shape[0]} points, operator has {A.shape[1]} columns")
    return VectorField(np.asarray(A.matrix @ f.values), f.space)


def ratio(A: OperatorMatrix, values: np.ndarray, E: CoefficientSpace) -> float:
    den = field_norm(values, E)
    if den == 0:
        return 0.0
    return field_norm(np.asarray(A.matrix @ values), E) / den


@dataclass
class NormEstimate:
    lower: float = 0.0
    upper: float = math.inf
    witness: Optional[VectorField] = None
    tags: Dict[str, float] = field(default_factory=dict)
    lower_tag: str = ""
    upper_tag: str = ""

    def as_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "lower_method": self.lower_tag,
            "upper_method": self.upper_tag,
            "upper_candidates": dict(self.tags),
        }


# ---------------------------------------------------------------- lower bounds


def _sgn(z: np.ndarray) -> np.ndarray:
    a = np.abs(z)
    out = np.zeros_like(z, dtype=complex)
    nz = a > 0
    out[nz] = z[nz] / a[nz]
    return out


def _dual_rows(v: np.ndarray, q: float) -> tuple[np.ndarray, np.ndarray]:
    """Per row: unit l_{q'} vector u with <u, v> = ||v||_q, and ||v||_q (sum convention)."""
    a = np.abs(v)
    if q == 1:
        nrm = a.sum(axis=1)
        return _sgn(v), nrm
    nrm = (a ** q).sum(axis=1) ** (1.0 / q)
    safe = np.where(nrm > 0, nrm, 1.0)
    u = (a ** (q - 1)) * _sgn(v) / safe[:, None] ** (q - 1)
    return u, nrm


def _dual_inf_rows(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per row: unit l_1 vector f with <h, f> = ||h||_inf (dual of q = 1)."""
    a = np.abs(h)
    k = a.argmax(axis=1)
    rows = np.arange(h.shape[0])
    f = np.zeros_like(h, dtype=complex)
    f[rows, k] = _sgn(h[rows, k])
    return f, a[rows, k]


def _pair_dual(h: np.ndarray, q: float) -> np.ndarray:
    """Unit vector f in l2_avg(J; l_q) (sum convention) with <h, f> = ||h||_dual."""
    nj = h.shape[0]
    if q == 1:
        u, nrm = _dual_inf_rows(h)
    else:
        qp = q / (q - 1.0)
        u, nrm = _dual_rows(h, qp)
    tot = math.sqrt(nj * float((nrm * nrm).sum()))
    if tot == 0:
        return np.zeros_like(h)
    return (nj * nrm / tot)[:, None] * u


def _power_ascent(M, MH, f0: np.ndarray, q: float, iters: int, tol: float) -> tuple[float, np.ndarray]:
    ni = M.shape[0]
    E = CoefficientSpace(q, f0.shape[1])
    f = f0 / field_norm(f0, E)
    g = np.asarray(M @ f)
    best = field_norm(g, E)
    best_f = f
    for _ in range(iters):
        if best == 0:
            break
        u, nrm = _dual_rows(g, q)
        phi = (nrm / (ni * best))[:, None] * u
        h = np.asarray(MH @ phi)
        fn = _pair_dual(h, q)
        if not np.any(fn):
            break
        g = np.asarray(M @ fn)
        val = field_norm(g, E)
        if val > best:
            improved = (val - best) / best
            best, best_f = val, fn
            if improved < tol:
                break
        else:
            break
    return best, best_f


def _adjoint(M):
    return M.conj().T.tocsr() if sp.issparse(M) else M.conj().T


def tensor_norm_lower(
    A: OperatorMatrix,
    E: CoefficientSpace,
    restarts: int = 8,
    iters: int = 200,
    seed: int = 0,
    init: Optional[Sequence[np.ndarray]] = None,
    tol: float = 1e-10,
) -> NormEstimate:
    """Best ratio ||(A (x) 1)f|| / ||f|| found by dual power ascent from seeded random starts.

    Extra starting fields may be passed through ``init`` (e.g. a known witness);
    the result is the best over all starts, so adding restarts never lowers it.
    """
    if restarts < 1 or iters < 1:
        raise ValueError("restarts and iters must be at least 1")
    M = A.matrix
    MH = _adjoint(M)
    nj, d = M.shape[1], E.d
    best, best_f, tag = 0.0, np.zeros((nj, d), dtype=complex), TAG_ASCENT
    starts: List[tuple[str, np.ndarray]] = []
    for f0 in init or []:
        f0 = np.asarray(f0, dtype=complex).reshape(nj, d)
        starts.append((TAG_WITNESS, f0))
    children = np.random.SeedSequence(seed).spawn(restarts)
    for ss in children:
        rng = np.random.default_rng(ss)
        starts.append((TAG_ASCENT, rng.standard_normal((nj, d)) + 1j * rng.standard_normal((nj, d))))
    for t, f0 in starts:
        if not np.any(f0):
            continue
        r0 = ratio(A, f0, E)
        if r0 > best:
            best, best_f, tag = r0, f0 / field_norm(f0, E), t
        val, f = _power_ascent(M, MH, f0, E.q, iters, tol)
        # certify on the exact space (convention factors cancel in the ratio)
        val = ratio(A, f, E)
        if val > best:
            best, best_f, tag = val, f, t
    return NormEstimate(lower=best, witness=VectorField(best_f, E), lower_tag=tag)


# ---------------------------------------------------------------- upper bounds


def _avg_factor(M) -> float:
    ni, nj = M.shape
    return math.sqrt(nj / ni)


def spectral_norm(M) -> float:
    """Largest singular value (plain l2)."""
    if min(M.shape) == 0:
        return 0.0
    if max(M.shape) <= DENSE_SVD_LIMIT or not sp.issparse(M) and max(M.shape) <= 2 * DENSE_SVD_LIMIT:
        D = M.toarray() if sp.issparse(M) else M
        return float(np.linalg.svd(D, compute_uv=False)[0])
    op = spla.LinearOperator((M.shape[1], M.shape[1]), matvec=lambda v: M.conj().T @ (M @ v), dtype=complex)
    w = spla.eigsh(op, k=1, which="LM", tol=1e-14, return_eigenvectors=False, maxiter=10_000)
    return float(math.sqrt(abs(w[0])))


def regular_norm(M) -> float:
    """Certified upper bound on the plain spectral norm of |M| (exact for dense small M)."""
    B = abs(M) if sp.issparse(M) else np.abs(M)
    if max(B.shape) <= DENSE_SVD_LIMIT:
        D = B.toarray() if sp.issparse(B) else B
        return float(np.linalg.svd(D, compute_uv=False)[0]) if D.size else 0.0
    B = sp.csr_matrix(B)
    BT = B.T.tocsr()
    rows = np.asarray(B.sum(axis=1)).ravel()
    cols = np.asarray(B.sum(axis=0)).ravel()
    schur = math.sqrt(rows.max() * cols.max())
    # Collatz-Wielandt bound for the nonnegative matrix B^T B
    v = np.ones(B.shape[1])
    for _ in range(50):
        w = BT @ (B @ v)
        if not np.all(w > 0):
            return schur
        v = w / w.max()
    w = BT @ (B @ v)
    cw = math.sqrt(float((w / v).max()))
    return min(schur, cw)


def tensor_norm_upper(A: OperatorMatrix, E: CoefficientSpace, methods: Optional[Sequence[str]] = None) -> NormEstimate:
    """Minimum over the valid upper-bound methods; every candidate is kept in ``tags``."""
    M = A.matrix
    c = _avg_factor(M)
    q = E.q
    wanted = set(methods) if methods else {TAG_REGULAR, TAG_HILBERT, TAG_INTERP, TAG_SCALAR}
    if TAG_INTERP in wanted and methods and not (1 <= q <= 2):
        raise ValueError("interpolation bound needs q in [1, 2]")
    tags: Dict[str, float] = {}
    reg = c * regular_norm(M)
    if TAG_REGULAR in wanted:
        tags[TAG_REGULAR] = reg
    need_hil = (q == 2 and TAG_HILBERT in wanted) or (1 < q < 2 and TAG_INTERP in wanted) or (E.d == 1 and TAG_SCALAR in wanted)
    if need_hil:
        hil = c * spectral_norm(M)
        if q == 2 and TAG_HILBERT in wanted:
            tags[TAG_HILBERT] = hil
        if 1 < q < 2 and TAG_INTERP in wanted:
            theta = 2.0 - 2.0 / q
            tags[TAG_INTERP] = reg ** (1 - theta) * hil ** theta
        if E.d == 1 and TAG_SCALAR in wanted:
            tags[TAG_SCALAR] = hil
    best_tag = min(tags, key=tags.get)
    return NormEstimate(upper=tags[best_tag], tags=tags, upper_tag=best_tag)


def tensor_norm(A: OperatorMatrix, E: CoefficientSpace, restarts: int = 8, iters: int = 200, seed: int = 0, init=None) -> NormEstimate:
    lo = tensor_norm_lower(A, E, restarts, iters, seed, init)
    up = tensor_norm_upper(A, E)
    lo.upper, lo.tags, lo.upper_tag = up.upper, up.tags, up.upper_tag
    return lo


def delta_witness(n: int) -> np.ndarray:
    """The field x -> e_x in l^1(n); norm 1 in the sum convention."""
    return np.eye(n, dtype=complex)


# ---------------------------------------------------------------- type constants


def rademacher_average(xs: np.ndarray, E: CoefficientSpace) -> float:
    """(E_eps || sum eps_i x_i ||_E^2)^(1/2) by exact enumeration of the 2^n sign patterns."""
    n = xs.shape[0]
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    sums = signs @ xs
    v = E.norm(sums)
    return float(np.sqrt(np.mean(v * v)))


def type_ratio(xs: np.ndarray, E: CoefficientSpace, p: float) -> float:
    den = float((E.norm(xs) ** p).sum() ** (1.0 / p))
    return rademacher_average(xs, E) / den if den > 0 else 0.0


def type_constant_lower(
    E: CoefficientSpace,
    p: float,
    n: int,
    seed: int = 0,
    random_families: int = 16,
    climb_steps: int = 60,
    families: Optional[Sequence[np.ndarray]] = None,
) -> float:
    """Certified lower bound on the best type-p constant of E tested on n vectors."""
    if n > 16:
        raise ValueError("exact sign enumeration is limited to n <= 16")
    if n < 1:
        raise ValueError("n must be positive")
    d = E.d
    rng = np.random.default_rng(seed)
    cands: List[np.ndarray] = []
    basis = np.zeros((n, d))
    basis[np.arange(n), np.arange(n) % d] = 1.0
    cands.append(basis)
    for f in families or []:
        cands.append(np.asarray(f, dtype=float).reshape(n, d))
    for _ in range(random_families):
        cands.append(rng.standard_normal((n, d)))
    best = max(type_ratio(x, E, p) for x in cands)
    # hill climb from the best random family
    cur = max(cands[1:] or cands, key=lambda x: type_ratio(x, E, p)).copy()
    cur_val = type_ratio(cur, E, p)
    step = 0.5
    for _ in range(climb_steps):
        trial = cur + step * rng.standard_normal(cur.shape)
        val = type_ratio(trial, E, p)
        if val > cur_val:
            cur, cur_val = trial, val
        else:
            step *= 0.9
    return max(best, cur_val)

"""Exact Laurent polynomials over F_p, optionally batched.

An ``LPoly`` is a family of Laurent polynomials sum_k c[b, k] t^(low + k)
sharing one exponent window.  The batch axis may have length 1, in which case
the value broadcasts against any batch; a single polynomial is the B = 1 case.
Structural constants (0, 1, t^k) therefore cost almost nothing in batched
matrix products.
"""

from __future__ import annotations

import math
from typing import List, Sequence, Union

import numpy as np

from .residue import is_prime

INF = math.inf


def _trim(c: np.ndarray, low: int):
    nz = np.flatnonzero(c.any(axis=0))
    if nz.size == 0:
        return np.zeros((c.shape[0], 0), dtype=np.int64), 0
    return np.ascontiguousarray(c[:, nz[0]:nz[-1] + 1]), low + int(nz[0])


class LPoly:
    __slots__ = ("p", "low", "c")

    def __init__(self, p: int, coeffs, low: int = 0, _clean: bool = False):
        self.p = p
        c = np.asarray(coeffs, dtype=np.int64)
        if c.ndim == 1:
            c = c[None, :]
        if not _clean:
            c = c % p
            c, low = _trim(c, low)
        self.c, self.low = c, low

    # construction
    @classmethod
    def zero(cls, p: int) -> "LPoly":
        return cls(p, np.zeros((1, 0), dtype=np.int64), 0, _clean=True)

    @classmethod
    def const(cls, p: int, v: int) -> "LPoly":
        return cls(p, [v % p])

    @classmethod
    def monomial(cls, p: int, k: int, coeff: int = 1) -> "LPoly":
        return cls(p, [coeff], k)

    @classmethod
    def from_digits(cls, p: int, digits: np.ndarray, low: int = 0) -> "LPoly":
        """digits[b, k] is the coefficient of t^(low + k)."""
        return cls(p, np.asarray(digits), low)

    # shape
    @property
    def batch(self) -> int:
        return self.c.shape[0]

    @property
    def width(self) -> int:
        return self.c.shape[1]

    def is_zero(self) -> bool:
        return self.width == 0

    def high(self) -> int:
        return self.low + self.width

    def _aligned(self, other: "LPoly"):
        if self.is_zero():
            return np.zeros((other.batch, other.width), dtype=np.int64), other.c, other.low
        if other.is_zero():
            return self.c, np.zeros((self.batch, self.width), dtype=np.int64), self.low
        lo = min(self.low, other.low)
        hi = max(self.high(), other.high())
        B = max(self.batch, other.batch)
        a = np.zeros((self.batch, hi - lo), dtype=np.int64)
        b = np.zeros((other.batch, hi - lo), dtype=np.int64)
        a[:, self.low - lo:self.high() - lo] = self.c
        b[:, other.low - lo:other.high() - lo] = other.c
        if self.batch != other.batch and 1 not in (self.batch, other.batch):
            raise ValueError("incompatible batch sizes")
        return np.broadcast_to(a, (B, hi - lo)), np.broadcast_to(b, (B, hi - lo)), lo

    # arithmetic
    def __add__(self, other: "LPoly") -> "LPoly":
        a, b, lo = self._aligned(other)
        return LPoly(self.p, a + b, lo)

    def __sub__(self, other: "LPoly") -> "LPoly":
        a, b, lo = self._aligned(other)
        return LPoly(self.p, a - b, lo)

    def __neg__(self) -> "LPoly":
        return LPoly(self.p, -self.c, self.low)

    def __mul__(self, other: "LPoly") -> "LPoly":
        if self.is_zero() or other.is_zero():
            return LPoly.zero(self.p)
        f, g = self, other
        # loop over the cheaper factor: a constant with few nonzero terms, else the narrower one
        cost_f = np.count_nonzero(f.c.any(axis=0)) if f.batch == 1 else f.width * 4
        cost_g = np.count_nonzero(g.c.any(axis=0)) if g.batch == 1 else g.width * 4
        if cost_g < cost_f:
            f, g = g, f
        B = max(f.batch, g.batch)
        out = np.zeros((B, f.width + g.width - 1), dtype=np.int64)
        for k in np.flatnonzero(f.c.any(axis=0)):
            out[:, k:k + g.width] += f.c[:, k:k + 1] * g.c
        return LPoly(self.p, out, f.low + g.low)

    def shift(self, k: int) -> "LPoly":
        """Multiply by t^k."""
        return LPoly(self.p, self.c, self.low + k, _clean=True)

    # valuations
    def valuation(self) -> np.ndarray:
        """Per batch element; inf for zero."""
        if self.is_zero():
            return np.full(self.batch, INF)
        nz = self.c != 0
        first = nz.argmax(axis=1).astype(float) + self.low
        first[~nz.any(axis=1)] = INF
        return first

    def min_valuation(self) -> float:
        return float(self.valuation().min())

    # comparison and display
    def equals(self, other: "LPoly") -> np.ndarray:
        d = self - other
        if d.is_zero():
            return np.ones(max(self.batch, other.batch), dtype=bool)
        return ~d.c.any(axis=1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LPoly):
            return NotImplemented
        return self.p == other.p and bool(self.equals(other).all())

    def __hash__(self):
        return hash((self.p, self.low, self.c.tobytes(), self.c.shape))

    def item(self, b: int) -> "LPoly":
        return LPoly(self.p, self.c[b if self.batch > 1 else 0], self.low)

    def terms(self) -> List[tuple]:
        """(exponent, coefficient) pairs of a single polynomial."""
        if self.batch != 1:
            raise ValueError("terms() needs a single polynomial")
        return [(self.low + k, int(v)) for k, v in enumerate(self.c[0]) if v]

    def __repr__(self) -> str:
        if self.batch != 1:
            return f"LPoly(p={self.p}, batch={self.batch}, window=[{self.low}, {self.high()}))"
        ts = self.terms()
        if not ts:
            return "0"
        return " + ".join(f"{c}t^{e}" if e else f"{c}" for e, c in ts)


Entry = Union[LPoly, int]


class LaurentMatrix:
    """Square or rectangular matrix of LPoly entries (all over the same F_p)."""

    def __init__(self, p: int, rows: Sequence[Sequence[Entry]]):
        if not is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        self.p = p
        self.e: List[List[LPoly]] = [[v if isinstance(v, LPoly) else LPoly.const(p, int(v)) for v in r] for r in rows]
        if len({len(r) for r in self.e}) != 1:
            raise ValueError("ragged matrix")

    @property
    def shape(self):
        return len(self.e), len(self.e[0])

    @property
    def batch(self) -> int:
        return max(v.batch for r in self.e for v in r)

    @classmethod
    def identity(cls, p: int, n: int = 3) -> "LaurentMatrix":
        return cls(p, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def diag_pi(cls, p: int, exps: Sequence[int]) -> "LaurentMatrix":
        n = len(exps)
        return cls(p, [[LPoly.monomial(p, exps[i]) if i == j else 0 for j in range(n)] for i in range(n)])

    def __matmul__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ValueError("shape mismatch")
        out = []
        for i in range(n):
            row = []
            for j in range(m):
                acc = LPoly.zero(self.p)
                for t in range(k):
                    if self.e[i][t].is_zero() or other.e[t][j].is_zero():
                        continue
                    acc = acc + self.e[i][t] * other.e[t][j]
                row.append(acc)
            out.append(row)
        return LaurentMatrix(self.p, out)

    def __add__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        return LaurentMatrix(self.p, [[a + b for a, b in zip(r, s)] for r, s in zip(self.e, other.e)])

    def scale_pi(self, k: int) -> "LaurentMatrix":
        return LaurentMatrix(self.p, [[v.shift(k) for v in r] for r in self.e])

    def minor(self, rows, cols) -> LPoly:
        if len(rows) == 1:
            return self.e[rows[0]][cols[0]]
        acc = LPoly.zero(self.p)
        r0, rest = rows[0], rows[1:]
        for k, c in enumerate(cols):
            if self.e[r0][c].is_zero():
                continue
            sub = self.minor(rest, cols[:k] + cols[k + 1:])
            term = self.e[r0][c] * sub
            acc = acc + term if k % 2 == 0 else acc - term
        return acc

    def det(self) -> LPoly:
        n, m = self.shape
        if n != m:
            raise ValueError("det of a non-square matrix")
        return self.minor(tuple(range(n)), tuple(range(n)))

    def adjugate(self) -> "LaurentMatrix":
        n, _ = self.shape
        idx = tuple(range(n))
        out = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                m = self.minor(idx[:j] + idx[j + 1:], idx[:i] + idx[i + 1:]) if n > 1 else LPoly.const(self.p, 1)
                out[i][j] = m if (i + j) % 2 == 0 else -m
        return LaurentMatrix(self.p, out)

    def min_valuation(self) -> np.ndarray:
        vals = [v.valuation() for r in self.e for v in r]
        B = max(v.size for v in vals)
        return np.min([np.broadcast_to(v, (B,)) for v in vals], axis=0)

    def equals(self, other: "LaurentMatrix") -> np.ndarray:
        res = None
        for r, s in zip(self.e, other.e):
            for a, b in zip(r, s):
                eq = a.equals(b)
                res = eq if res is None else res & eq
        return res

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(self.equals(other).all())

    def item(self, b: int) -> "LaurentMatrix":
        return LaurentMatrix(self.p, [[v.item(b) for v in r] for r in self.e])

    def exponent_text(self) -> str:
        """Debug text: each entry as its (exponent:coefficient) terms."""
        if self.batch != 1:
            raise ValueError("exponent_text needs a single matrix")
        lines = []
        for r in self.e:
            cells = [" ".join(f"{e}:{c}" for e, c in v.terms()) or "0" for v in r]
            lines.append(" | ".join(cells))
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"LaurentMatrix(p={self.p}, shape={self.shape}, batch={self.batch})"


def determinantal_valuations(C: LaurentMatrix) -> np.ndarray:
    """Elementary-divisor valuations e_1 <= e_2 <= e_3 of a 3x3 matrix, per batch element.

    e_1 = min entry valuation, e_1 + e_2 = min 2x2 minor valuation, sum = val det.
    """
    if C.shape != (3, 3):
        raise ValueError("3x3 only")
    B = C.batch
    d1 = np.broadcast_to(C.min_valuation(), (B,))
    pairs = [(0, 1), (0, 2), (1, 2)]
    m2 = np.full(B, INF)
    for rs in pairs:
        for cs in pairs:
            m2 = np.minimum(m2, np.broadcast_to(C.minor(rs, cs).valuation(), (B,)))
    d3 = np.broadcast_to(C.det().valuation(), (B,))
    if np.isinf(d3).any():
        raise ValueError("singular matrix")
    return np.stack([d1, m2 - d1, d3 - m2], axis=1)


# ---------------------------------------------------------------- truncated power series


def series_inverse(u: np.ndarray, N: int, p: int) -> np.ndarray:
    """Inverse of a unit power series mod t^N."""
    u = np.pad(np.asarray(u, dtype=np.int64) % p, (0, max(0, N - len(u))))[:N]
    if u[0] == 0:
        raise ValueError("not a unit")
    inv0 = pow(int(u[0]), -1, p)
    v = np.zeros(N, dtype=np.int64)
    v[0] = inv0
    for k in range(1, N):
        v[k] = (-inv0 * int(np.dot(u[1:k + 1], v[k - 1::-1][:k]))) % p
    return v


def trunc_mul(f: np.ndarray, g: np.ndarray, N: int, p: int) -> np.ndarray:
    return np.convolve(f, g)[:N] % p if len(f) and len(g) else np.zeros(N, dtype=np.int64)


"""Exact arithmetic in the residue rings O / pi^n O and their additive characters.

Two families of rings are supported:

* ``"p-adic"``: O = Z_p, so R_n = Z / p^n Z and pi = p.
* ``"laurent"``: O = F_p[[t]], so R_n = F_p[t] / t^n and pi = t.

Every element is stored by a canonical integer *index* in ``[0, p^n)``.  For the
p-adic ring the index is the least nonnegative representative; for the Laurent
ring it is ``sum(c_k * p**k)`` where ``c_k`` is the coefficient of ``t^k``.
With this encoding reduction to a lower level, canonical lifting and
multiplication/division by powers of pi are the same integer operations in
both families, which the vectorized kernels elsewhere rely on.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, List, Sequence

import numpy as np

PADIC = "p-adic"
LAURENT = "laurent"
KINDS = (PADIC, LAURENT)

INF = math.inf


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class RingSpec:
    p: int
    n: int
    kind: str = PADIC

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ring kind {self.kind!r}; expected one of {KINDS}")
        if not isinstance(self.p, (int, np.integer)) or not is_prime(int(self.p)):
            raise ValueError(f"p={self.p} is not prime")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"level n={self.n} must be a positive integer")

    @property
    def order(self) -> int:
        return self.p ** self.n

    @property
    def q(self) -> int:
        """Size of the residue field."""
        return self.p

    def at_level(self, level: int) -> "RingSpec":
        return RingSpec(self.p, level, self.kind)

    def elements(self) -> List["RingElem"]:
        return [RingElem(self, i) for i in range(self.order)]

    def __iter__(self) -> Iterator["RingElem"]:
        return iter(self.elements())

    def element(self, value) -> "RingElem":
        """Build an element from an integer (p-adic) or a coefficient sequence (laurent)."""
        if self.kind == LAURENT and not isinstance(value, (int, np.integer)):
            coeffs = list(value)[: self.n]
            return RingElem(self, sum((int(c) % self.p) * self.p ** k for k, c in enumerate(coeffs)))
        if self.kind == LAURENT:
            # an integer for a laurent ring is read as a constant of F_p
            return RingElem(self, int(value) % self.p)
        return RingElem(self, int(value) % self.order)

    def zero(self) -> "RingElem":
        return RingElem(self, 0)

    def one(self) -> "RingElem":
        return RingElem(self, 1)

    def pi(self) -> "RingElem":
        if self.n == 1:
            return self.zero()
        return RingElem(self, self.p)


def ring_make(p: int, n: int, kind: str = PADIC) -> RingSpec:
    return RingSpec(p, n, kind)


def _digits(index: int, p: int, n: int) -> List[int]:
    out = []
    for _ in range(n):
        index, r = divmod(index, p)
        out.append(r)
    return out


def _from_digits(digits: Sequence[int], p: int) -> int:
    return sum(int(c) * p ** k for k, c in enumerate(digits))


def _poly_mul_trunc(a: Sequence[int], b: Sequence[int], p: int, n: int) -> List[int]:
    out = [0] * n
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(n - i):
            out[i + j] = (out[i + j] + ai * b[j]) % p
    return out


@dataclass(frozen=True)
class RingElem:
    spec: RingSpec
    index: int

    def __post_init__(self):
        if not 0 <= self.index < self.spec.order:
            raise ValueError(f"index {self.index} out of range for {self.spec}")

    @property
    def rep(self):
        """Canonical representative: an integer (p-adic) or coefficient tuple (laurent)."""
        if self.spec.kind == PADIC:
            return self.index
        return tuple(_digits(self.index, self.spec.p, self.spec.n))

    def _check(self, other: "RingElem") -> None:
        if not isinstance(other, RingElem) or other.spec != self.spec:
            raise ValueError(f"ring mismatch: {self.spec} vs {getattr(other, 'spec', other)}")

    def __add__(self, other: "RingElem") -> "RingElem":
        self._check(other)
        return RingElem(self.spec, int(add_table(self.spec)[self.index, other.index]))

    def __neg__(self) -> "RingElem":
        return RingElem(self.spec, int(neg_table(self.spec)[self.index]))

    def __sub__(self, other: "RingElem") -> "RingElem":
        return self + (-other)

    def __mul__(self, other: "RingElem") -> "RingElem":
        self._check(other)
        return RingElem(self.spec, _mul_index(self.spec, self.index, other.index))

    def valuation(self):
        return valuation(self)

    def is_unit(self) -> bool:
        return self.index % self.spec.p != 0

    def reduce(self, level: int) -> "RingElem":
        """Image in O / pi^level O (level <= n)."""
        if level > self.spec.n:
            raise ValueError("cannot reduce to a higher level; use lift")
        return RingElem(self.spec.at_level(level), self.index % self.spec.p ** level)

    def lift(self, level: int) -> "RingElem":
        """Canonical lift to O / pi^level O (level >= n)."""
        if level < self.spec.n:
            raise ValueError("cannot lift to a lower level; use reduce")
        return RingElem(self.spec.at_level(level), self.index)

    def times_pi(self, k: int, level: int | None = None) -> "RingElem":
        """pi^k * (canonical lift of self), read in O / pi^level O (default: own level)."""
        level = self.spec.n if level is None else level
        return RingElem(self.spec.at_level(level), (self.index * self.spec.p ** k) % self.spec.p ** level)

    def divide_by_pi(self, k: int) -> "RingElem":
        """The unique e in O / pi^(n-k) O with pi^k * e = self; needs valuation >= k."""
        if k > self.spec.n or (self.index % self.spec.p ** k) != 0:
            raise ValueError(f"{self} is not divisible by pi^{k}")
        if k == self.spec.n:
            raise ValueError("quotient would live in the zero ring")
        return RingElem(self.spec.at_level(self.spec.n - k), self.index // self.spec.p ** k)

    def __repr__(self) -> str:
        return f"RingElem({self.rep}, p={self.spec.p}, n={self.spec.n}, {self.spec.kind})"


def _mul_index(spec: RingSpec, i: int, j: int) -> int:
    if spec.kind == PADIC:
        return (i * j) % spec.order
    prod = _poly_mul_trunc(_digits(i, spec.p, spec.n), _digits(j, spec.p, spec.n), spec.p, spec.n)
    return _from_digits(prod, spec.p)


@lru_cache(maxsize=None)
def add_table(spec: RingSpec) -> np.ndarray:
    N = spec.order
    idx = np.arange(N)
    if spec.kind == PADIC:
        return (idx[:, None] + idx[None, :]) % N
    digits = digit_array(spec)
    s = (digits[:, None, :] + digits[None, :, :]) % spec.p
    return (s * (spec.p ** np.arange(spec.n))).sum(axis=-1)


@lru_cache(maxsize=None)
def neg_table(spec: RingSpec) -> np.ndarray:
    N = spec.order
    idx = np.arange(N)
    if spec.kind == PADIC:
        return (-idx) % N
    digits = (-digit_array(spec)) % spec.p
    return (digits * (spec.p ** np.arange(spec.n))).sum(axis=-1)


@lru_cache(maxsize=None)
def mul_table(spec: RingSpec) -> np.ndarray:
    N = spec.order
    idx = np.arange(N)
    if spec.kind == PADIC:
        return (idx[:, None] * idx[None, :]) % N
    d = digit_array(spec)
    out = np.zeros((N, N, spec.n), dtype=np.int64)
    for i in range(spec.n):
        for j in range(spec.n - i):
            out[:, :, i + j] += d[:, None, i] * d[None, :, j]
    out %= spec.p
    return (out * (spec.p ** np.arange(spec.n))).sum(axis=-1)


@lru_cache(maxsize=None)
def digit_array(spec: RingSpec) -> np.ndarray:
    """(N, n) array of base-p digits of every index (coefficients for laurent)."""
    idx = np.arange(spec.order)
    return np.stack([(idx // spec.p ** k) % spec.p for k in range(spec.n)], axis=-1)


@lru_cache(maxsize=None)
def valuation_table(spec: RingSpec) -> np.ndarray:
    """Valuation of every index, with spec.n standing in for infinity (the zero element)."""
    idx = np.arange(spec.order)
    out = np.full(spec.order, spec.n, dtype=np.int64)
    for k in range(spec.n - 1, -1, -1):
        out[(idx % spec.p ** (k + 1)) != 0] = k
    return out


def valuation(e: RingElem):
    """Largest i with e in pi^i R_n; math.inf for the zero element."""
    if e.index == 0:
        return INF
    return int(valuation_table(e.spec)[e.index])


@dataclass(frozen=True)
class AdditiveCharacter:
    """chi_c for a label c in R_n; evaluated lazily."""

    spec: RingSpec
    label: int

    def __call__(self, x: RingElem) -> complex:
        return char_eval(self, x)

    def is_nondegenerate(self) -> bool:
        return self.label % self.spec.p != 0


def character(spec: RingSpec, c) -> AdditiveCharacter:
    if isinstance(c, RingElem):
        if c.spec != spec:
            raise ValueError("label lives in a different ring")
        return AdditiveCharacter(spec, c.index)
    return AdditiveCharacter(spec, spec.element(c).index)


def _pairing_numerator(spec: RingSpec, prod_index):
    """Integer k such that chi_1 of an element with the given index is exp(2 pi i k / modulus)."""
    if spec.kind == PADIC:
        return prod_index, spec.order
    # coefficient of t^(n-1)
    return (prod_index // spec.p ** (spec.n - 1)) % spec.p, spec.p


def char_eval(chi: AdditiveCharacter, x: RingElem) -> complex:
    if x.spec != chi.spec:
        raise ValueError(f"character on {chi.spec} evaluated at an element of {x.spec}")
    k, mod = _pairing_numerator(chi.spec, _mul_index(chi.spec, chi.label, x.index))
    return cmath.exp(2j * math.pi * k / mod)


@lru_cache(maxsize=None)
def character_table(spec: RingSpec) -> np.ndarray:
    """Matrix [c, x] -> chi_c(x) over the whole ring."""
    k, mod = _pairing_numerator(spec, mul_table(spec))
    return np.exp(2j * np.pi * k / mod)


def nondegenerate_characters(spec: RingSpec, h: int) -> List[AdditiveCharacter]:
    """Characters of O / pi^h O nontrivial on pi^(h-1) O / pi^h O, i.e. chi_c with c a unit."""
    if h != spec.n:
        raise ValueError(f"h={h} must equal the ring level n={spec.n}")
    return [AdditiveCharacter(spec, c) for c in range(spec.order) if c % spec.p != 0]


def residue_field_character(p: int, c: int = 1, kind: str = PADIC) -> AdditiveCharacter:
    """The character eps -> exp(2 pi i c eps / p) of the residue field F_p."""
    return AdditiveCharacter(RingSpec(p, 1, kind), c % p)

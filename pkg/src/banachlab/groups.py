"""Finite abelian groups Z/m_1 x ... x Z/m_r, their subgroups, subquotients and duals.

Elements are integers in ``[0, #G)`` using little-endian mixed radix: the first
coordinate varies fastest.  The additive group of a residue ring (either kind)
therefore has exactly the same element indices as the ring itself.

The dual group is identified with the same factor list: ``y`` acts by
``x -> exp(2 pi i sum_k y_k x_k / m_k)``.  Phases are kept as exact integers
modulo ``L = lcm(m_k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ChainError, SectionError
from .residue import LAURENT, RingSpec


class FiniteAbelianGroup:
    def __init__(self, factors: Sequence[int]):
        factors = tuple(int(m) for m in factors)
        if any(m < 1 for m in factors):
            raise ValueError(f"cyclic factor orders must be positive, got {factors}")
        self.factors = factors
        self.order = int(np.prod(factors, dtype=np.int64)) if factors else 1
        self.rank = len(factors)
        self.radix = np.array([int(np.prod(factors[:k], dtype=np.int64)) for k in range(self.rank)], dtype=np.int64)
        self.lcm = math.lcm(*factors) if factors else 1

    @classmethod
    def cyclic(cls, m: int) -> "FiniteAbelianGroup":
        return cls([m])

    @classmethod
    def from_ring(cls, spec: RingSpec) -> "FiniteAbelianGroup":
        """Additive group of a residue ring, index-compatible with RingElem.index."""
        if spec.kind == LAURENT:
            return cls([spec.p] * spec.n)
        return cls([spec.p ** spec.n])

    def __repr__(self) -> str:
        return f"FiniteAbelianGroup({list(self.factors)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteAbelianGroup) and other.factors == self.factors

    def __hash__(self) -> int:
        return hash(self.factors)

    @cached_property
    def coord_table(self) -> np.ndarray:
        idx = np.arange(self.order, dtype=np.int64)
        if self.rank == 0:
            return np.zeros((1, 0), dtype=np.int64)
        m = np.array(self.factors, dtype=np.int64)
        return (idx[:, None] // self.radix[None, :]) % m[None, :]

    def coords(self, idx) -> np.ndarray:
        return self.coord_table[np.asarray(idx)]

    def index(self, coords) -> np.ndarray:
        c = np.asarray(coords, dtype=np.int64) % np.array(self.factors, dtype=np.int64)
        return (c * self.radix).sum(axis=-1)

    def add(self, i, j):
        return self.index(self.coords(i) + self.coords(j))

    def neg(self, i):
        return self.index(-self.coords(i))

    def sub(self, i, j):
        return self.index(self.coords(i) - self.coords(j))

    def scale(self, k: int, i):
        return self.index(k * self.coords(i))

    @cached_property
    def add_table(self) -> np.ndarray:
        c = self.coord_table
        return self.index(c[:, None, :] + c[None, :, :])

    def add_outer(self, a, b) -> np.ndarray:
        """Matrix of sums a_i + b_j."""
        a, b = np.asarray(a), np.asarray(b)
        if self.order <= 1024:
            return self.add_table[np.ix_(a, b)]
        ca, cb = self.coords(a), self.coords(b)
        return self.index(ca[:, None, :] + cb[None, :, :])

    @cached_property
    def neg_table(self) -> np.ndarray:
        return self.index(-self.coord_table)

    def phase(self, y, x) -> np.ndarray:
        """Integer phase of the character y at x, modulo self.lcm (outer product of the inputs)."""
        cy = self.coords(np.atleast_1d(y))
        cx = self.coords(np.atleast_1d(x))
        w = np.array([self.lcm // m for m in self.factors], dtype=np.int64)
        return ((cy * w) @ cx.T) % self.lcm

    def character_matrix(self, ys, xs) -> np.ndarray:
        return np.exp(2j * np.pi * self.phase(ys, xs) / self.lcm)

    def elements(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    def standard_generators(self) -> List[int]:
        return [int(r) for r, m in zip(self.radix, self.factors) if m > 1]

    def subgroup(self, generators: Iterable[int]) -> "Subgroup":
        return Subgroup(self, tuple(int(g) for g in generators))

    def trivial_subgroup(self) -> "Subgroup":
        return Subgroup(self, ())

    def whole(self) -> "Subgroup":
        return Subgroup(self, tuple(self.standard_generators()))


@dataclass(frozen=True, eq=False)
class Subgroup:
    group: FiniteAbelianGroup
    generators: Tuple[int, ...]

    def __post_init__(self):
        for g in self.generators:
            if not 0 <= g < self.group.order:
                raise ValueError(f"generator {g} is not an element of {self.group}")

    @cached_property
    def mask(self) -> np.ndarray:
        G = self.group
        mask = np.zeros(G.order, dtype=bool)
        mask[0] = True
        for g in self.generators:
            while True:
                cur = np.flatnonzero(mask)
                shifted = G.add_outer(cur, [g])[:, 0]
                new = mask.copy()
                new[shifted] = True
                if new.sum() == mask.sum():
                    break
                mask = new
        return mask

    @cached_property
    def elements(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @property
    def order(self) -> int:
        return int(self.elements.size)

    def contains(self, x) -> bool:
        return bool(np.all(self.mask[np.asarray(x)]))

    def issubgroup(self, other: "Subgroup") -> bool:
        return other.group == self.group and bool(np.all(other.mask[self.elements]))

    def __eq__(self, other) -> bool:
        return isinstance(other, Subgroup) and other.group == self.group and np.array_equal(other.mask, self.mask)

    def __hash__(self) -> int:
        return hash((self.group, self.elements.tobytes()))

    def __repr__(self) -> str:
        return f"Subgroup(order={self.order}, generators={list(self.generators)})"


class SubQuotient:
    """The quotient A / B for subgroups B <= A <= G.

    Elements are labelled by their least coset representative (an element of G).
    Dual elements are labelled by the least y in the dual of G that is trivial on
    B and restricts to the given character of A.
    """

    def __init__(self, A: Subgroup, B: Optional[Subgroup] = None):
        G = A.group
        B = G.trivial_subgroup() if B is None else B
        if not B.issubgroup(A):
            raise ChainError("the subgroup B is not contained in A")
        self.G, self.A, self.B = G, A, B
        a = A.elements
        cosets = G.add_outer(a, B.elements)
        reps = cosets.min(axis=1)
        self._rep_of = np.full(G.order, -1, dtype=np.int64)
        self._rep_of[a] = reps
        self.labels = np.unique(reps)
        self.order = int(self.labels.size)
        self._pos = np.full(G.order, -1, dtype=np.int64)
        self._pos[self.labels] = np.arange(self.order)

    def __repr__(self) -> str:
        return f"SubQuotient(|A|={self.A.order}, |B|={self.B.order})"

    def project(self, x) -> np.ndarray:
        """Position (in self.labels) of the coset of each element x of A."""
        x = np.asarray(x)
        r = self._rep_of[x]
        if np.any(r < 0):
            raise ValueError("element does not lie in A")
        return self._pos[r]

    def rep(self, x) -> np.ndarray:
        return self._rep_of[np.asarray(x)]

    @cached_property
    def _restriction(self):
        G = self.G
        ys = G.elements()
        gens_a = list(self.A.generators) or [0]
        gens_b = list(self.B.generators) or [0]
        trivial_on_b = np.all(G.phase(ys, gens_b) == 0, axis=1)
        keys = G.phase(ys, gens_a)
        labels: Dict[Tuple[int, ...], int] = {}
        for y in ys[trivial_on_b]:
            k = tuple(keys[y])
            if k not in labels:
                labels[k] = int(y)
        if len(labels) != self.order:
            raise AssertionError("dual group size mismatch")
        return labels

    @cached_property
    def dual_labels(self) -> np.ndarray:
        return np.array(sorted(self._restriction.values()), dtype=np.int64)

    @cached_property
    def _dual_pos(self) -> Dict[Tuple[int, ...], int]:
        order = {y: i for i, y in enumerate(self.dual_labels)}
        return {k: order[y] for k, y in self._restriction.items()}

    def restrict(self, ys) -> np.ndarray:
        """Position in self.dual_labels of the restriction of each character y of G (trivial on B)."""
        gens_a = list(self.A.generators) or [0]
        keys = self.G.phase(np.atleast_1d(ys), gens_a)
        try:
            return np.array([self._dual_pos[tuple(k)] for k in keys], dtype=np.int64)
        except KeyError as exc:
            raise ValueError("character is not trivial on B") from exc


def default_section(Q: SubQuotient) -> np.ndarray:
    """Least-representative section, indexed by label position."""
    return Q.labels.copy()


def validate_section(Q: SubQuotient, section) -> np.ndarray:
    s = np.asarray(section, dtype=np.int64)
    if s.shape != (Q.order,):
        raise SectionError(f"section must have one entry per coset ({Q.order}), got shape {s.shape}")
    if np.any(s < 0) or np.any(s >= Q.G.order) or not np.all(Q.A.mask[s]):
        raise SectionError("section values must lie in A")
    if not np.array_equal(Q.project(s), np.arange(Q.order)):
        raise SectionError("projection composed with section is not the identity")
    return s


@dataclass(eq=False)
class SubgroupChain:
    """0 = G_0 <= G_1 <= ... <= G_n = G with optional sections of G_i -> G_i / G_{i-1}.

    ``sections[i-1]`` (if given) lists, for every coset of G_{i-1} in G_i in label
    order, a representative element.
    """

    group: FiniteAbelianGroup
    subgroups: List[Subgroup]
    sections: Optional[List[Optional[Sequence[int]]]] = None
    strict: bool = True
    _quotients: List[SubQuotient] = field(init=False, repr=False)

    def __post_init__(self):
        G = self.group
        if len(self.subgroups) < 2:
            raise ChainError("a chain needs at least 0 and G")
        if self.subgroups[0].order != 1:
            raise ChainError("the chain must start at the trivial subgroup")
        if self.subgroups[-1].order != G.order:
            raise ChainError("the chain must end at the whole group")
        for lo, hi in zip(self.subgroups, self.subgroups[1:]):
            if lo.group != G or hi.group != G or not lo.issubgroup(hi):
                raise ChainError("chain is not nested")
            if self.strict and lo.order == hi.order:
                raise ChainError("chain has a repeated step")
        self._quotients = [SubQuotient(hi, lo) for lo, hi in zip(self.subgroups, self.subgroups[1:])]
        secs = self.sections or [None] * self.length
        if len(secs) != self.length:
            raise SectionError("one section per step is required")
        self.sections = [
            default_section(Q) if s is None else validate_section(Q, s) for Q, s in zip(self._quotients, secs)
        ]

    @property
    def length(self) -> int:
        return len(self.subgroups) - 1

    def quotient(self, i: int) -> SubQuotient:
        """G_i / G_{i-1} for i in 1..n."""
        return self._quotients[i - 1]

    @classmethod
    def from_generators(cls, group: FiniteAbelianGroup, steps: Sequence[Sequence[int]], **kw) -> "SubgroupChain":
        """Chain 0 < <steps[0]> < <steps[1]> < ... < G from generator lists of the intermediate subgroups."""
        subs = [group.trivial_subgroup()] + [group.subgroup(s) for s in steps] + [group.whole()]
        if len(steps) and subs[-2].order == group.order:
            subs.pop()
        return cls(group, subs, **kw)


def maximal_chains(G: FiniteAbelianGroup, limit: int = 10_000) -> List[SubgroupChain]:
    """All composition series of G (each step of prime index), by depth-first search."""
    whole = G.order
    out: List[List[Subgroup]] = []

    def is_prime(k: int) -> bool:
        return k > 1 and all(k % f for f in range(2, int(k ** 0.5) + 1))

    def extend(path: List[Subgroup]):
        if len(out) >= limit:
            return
        S = path[-1]
        if S.order == whole:
            out.append(list(path))
            return
        seen = set()
        for g in range(G.order):
            if S.mask[g]:
                continue
            T = G.subgroup(S.generators + (g,))
            key = T.elements.tobytes()
            if key in seen or not is_prime(T.order // S.order):
                continue
            seen.add(key)
            path.append(T)
            extend(path)
            path.pop()

    extend([G.trivial_subgroup()])
    return [SubgroupChain(G, p) for p in out]


def ring_filtration(spec: RingSpec, levels: Sequence[int]) -> List[Subgroup]:
    """Subgroups pi^k R_n for each k in levels (k = n gives the trivial subgroup)."""
    G = FiniteAbelianGroup.from_ring(spec)
    out = []
    for k in levels:
        if k >= spec.n:
            out.append(G.trivial_subgroup())
        elif spec.kind == LAURENT:
            out.append(G.subgroup([spec.p ** j for j in range(k, spec.n)]))
        else:
            out.append(G.subgroup([spec.p ** k]))
    return out

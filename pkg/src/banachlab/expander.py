"""Cayley graphs of SL_3(Z/m), spectral gaps and vector-valued Poincare ratios."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import scipy.optimize as opt
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from .errors import BanachLabError, BudgetError
from .norms import CoefficientSpace

VERTEX_BUDGET = 10 ** 5
DENSE_EIG_LIMIT = 2000
PAIR_EXACT_LIMIT = 2500
OPTIMIZE_LIMIT = 6000
BOUNDED_SPREAD = 2.0


class DisconnectedGraphError(BanachLabError, ValueError):
    pass


@dataclass
class CayleyGraph:
    """Right Cayley graph: x ~ x s for s in the generator list (with multiplicity)."""

    name: str
    neighbors: np.ndarray  # (V, #S) vertex indices
    vertices: Optional[np.ndarray] = None  # (V, 3, 3) for matrix groups
    generators: Optional[List[np.ndarray]] = None
    modulus: Optional[int] = None
    s2_condition: Optional[bool] = None

    @property
    def order(self) -> int:
        return self.neighbors.shape[0]

    @property
    def degree(self) -> int:
        return self.neighbors.shape[1]

    def adjacency(self) -> sp.csr_matrix:
        V, k = self.neighbors.shape
        rows = np.repeat(np.arange(V), k)
        return sp.csr_matrix((np.ones(V * k), (rows, self.neighbors.ravel())), shape=(V, V))

    def is_symmetric(self) -> bool:
        A = self.adjacency()
        return (A - A.T).nnz == 0

    def is_connected(self) -> bool:
        n, _ = csgraph.connected_components(self.adjacency(), directed=False)
        return n == 1


# ---------------------------------------------------------------- construction


def elementary_generators() -> List[np.ndarray]:
    """e_rs(+1), e_rs(-1) for r != s: twelve integer matrices."""
    gens = []
    for r in range(3):
        for s in range(3):
            if r == s:
                continue
            for sign in (1, -1):
                g = np.eye(3, dtype=np.int64)
                g[r, s] = sign
                gens.append(g)
    return gens


def _prime_factors(m: int) -> Dict[int, int]:
    out: Dict[int, int] = {}
    d = 2
    while d * d <= m:
        while m % d == 0:
            out[d] = out.get(d, 0) + 1
            m //= d
        d += 1
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def sl3_order(m: int) -> int:
    """#SL_3(Z/m) = prod over p^k || m of p^(8(k-1)) p^3 (p^3 - 1)(p^2 - 1)."""
    if m < 2:
        raise ValueError("modulus must be at least 2")
    n = 1
    for p, k in _prime_factors(m).items():
        n *= p ** (8 * (k - 1)) * p ** 3 * (p ** 3 - 1) * (p ** 2 - 1)
    return n


def s2_condition(gens: Sequence[np.ndarray], m: int) -> bool:
    """Whether the only product of two generators that reduces to 1 mod m is 1 itself."""
    eye = np.eye(3, dtype=np.int64)
    for s in gens:
        for t in gens:
            st = s @ t
            if not np.array_equal(st, eye) and np.array_equal(st % m, eye):
                return False
    return True


def _encode(M: np.ndarray, m: int) -> np.ndarray:
    flat = M.reshape(M.shape[0], 9) % m
    return flat @ (m ** np.arange(9, dtype=np.int64))


def congruence_quotient(m: int, generators: Optional[Sequence[np.ndarray]] = None, budget: int = VERTEX_BUDGET) -> CayleyGraph:
    """Cayley graph of SL_3(Z/m) by breadth-first closure from the identity."""
    if m < 2:
        raise ValueError("modulus must be at least 2")
    expected = sl3_order(m)
    if expected > budget:
        raise BudgetError(f"#SL_3(Z/{m}) = {expected} exceeds the vertex budget {budget}")
    gens = [np.asarray(g, dtype=np.int64) for g in (generators or elementary_generators())]
    G = np.stack(gens) % m
    eye = np.eye(3, dtype=np.int64)[None]
    elems = [eye]
    keys = _encode(eye, m)
    frontier = eye
    while frontier.shape[0]:
        prod = np.einsum("vij,gjk->vgik", frontier, G).reshape(-1, 3, 3) % m
        pk = _encode(prod, m)
        uk, first = np.unique(pk, return_index=True)
        new = ~np.isin(uk, keys)
        frontier = prod[first[new]]
        if frontier.shape[0]:
            elems.append(frontier)
            keys = np.concatenate([keys, uk[new]])
        if keys.size > budget:
            raise BudgetError(f"closure exceeded the vertex budget {budget}")
    verts = np.concatenate(elems)
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    prod = np.einsum("vij,gjk->vgik", verts, G) % m
    pk = _encode(prod.reshape(-1, 3, 3), m)
    nb = order[np.searchsorted(sorted_keys, pk)].reshape(verts.shape[0], len(gens))
    return CayleyGraph(f"SL3(Z/{m})", nb, verts, gens, m, s2_condition(gens, m))


def abelian_cayley_graph(n: int, gens: Sequence[int], name: Optional[str] = None) -> CayleyGraph:
    """Cayley graph of Z/n for a symmetric generator list."""
    gens = [g % n for g in gens]
    if sorted(gens) != sorted((-g) % n for g in gens):
        raise ValueError("generator list must be symmetric")
    x = np.arange(n)
    nb = (x[:, None] + np.array(gens)[None, :]) % n
    return CayleyGraph(name or f"Cay(Z/{n},{gens})", nb)


def complete_graph(n: int) -> CayleyGraph:
    return abelian_cayley_graph(n, list(range(1, n)), f"K{n}")


def cycle_graph(n: int) -> CayleyGraph:
    return abelian_cayley_graph(n, [1, -1], f"C{n}")


# ---------------------------------------------------------------- spectrum


@dataclass
class SpectralGap:
    lambda1: float
    eigenvector: np.ndarray
    method: str


def spectral_gap(graph: CayleyGraph, seed: int = 0) -> SpectralGap:
    """Smallest nonzero eigenvalue of the normalized Laplacian I - A / deg."""
    if not graph.is_connected():
        raise DisconnectedGraphError(f"{graph.name} is disconnected")
    A = graph.adjacency() / graph.degree
    V = graph.order
    if V <= DENSE_EIG_LIMIT:
        w, U = np.linalg.eigh(np.eye(V) - A.toarray())
        return SpectralGap(float(w[1]), U[:, 1], "dense")
    v0 = np.random.default_rng(seed).standard_normal(V)
    w, U = spla.eigsh(A, k=2, which="LA", tol=1e-12, v0=v0, maxiter=100_000)
    i = int(np.argsort(w)[0])
    return SpectralGap(float(1.0 - w[i]), U[:, i], "lanczos")


# ---------------------------------------------------------------- Poincare ratios


def _norms(D: np.ndarray, q: float) -> np.ndarray:
    """Sum-convention l_q norms along the last axis (convention factors cancel in ratios)."""
    a = np.abs(D)
    if q == 1:
        return a.sum(axis=-1)
    return (a ** q).sum(axis=-1) ** (1.0 / q)


def _sq_grad(D: np.ndarray, q: float) -> np.ndarray:
    """Gradient of ||v||_q^2 for each row of D."""
    n = _norms(D, q)
    if q == 1:
        return 2.0 * n[..., None] * np.sign(D)
    safe = np.where(n > 0, n, 1.0)
    return 2.0 * (safe ** (2 - q))[..., None] * np.abs(D) ** (q - 1) * np.sign(D)


def edge_average(graph: CayleyGraph, f: np.ndarray, q: float = 2.0) -> float:
    D = f[:, None, :] - f[graph.neighbors]
    return float(np.mean(_norms(D, q) ** 2))


def pair_average(f: np.ndarray, q: float = 2.0, exact_limit: int = PAIR_EXACT_LIMIT, samples: int = 200_000, seed: int = 0):
    """E_{x,y}||f(x) - f(y)||^2 and the method used."""
    V = f.shape[0]
    if q == 2:
        c = f - f.mean(axis=0)
        return float(2.0 * np.mean((c * c).sum(axis=1))), "variance-identity"
    if V <= exact_limit:
        tot = 0.0
        for s in range(0, V, 256):
            D = f[s:s + 256, None, :] - f[None, :, :]
            tot += float((_norms(D, q) ** 2).sum())
        return tot / V ** 2, "exact"
    rng = np.random.default_rng(seed)
    x, y = rng.integers(0, V, samples), rng.integers(0, V, samples)
    return float(np.mean(_norms(f[x] - f[y], q) ** 2)), f"sampled({samples})"


def variance_identity_error(f: np.ndarray) -> float:
    """|E_{x,y}||f(x)-f(y)||^2 - 2 E_x||f(x) - m_f||^2| in a Hilbert space, by direct pair summation."""
    V = f.shape[0]
    tot = 0.0
    for s in range(0, V, 256):
        D = f[s:s + 256, None, :] - f[None, :, :]
        tot += float((np.abs(D) ** 2).sum())
    pairs = tot / V ** 2
    c = f - f.mean(axis=0)
    return abs(pairs - 2.0 * float(np.mean((np.abs(c) ** 2).sum(axis=1))))


def poincare_value(graph: CayleyGraph, f: np.ndarray, E: CoefficientSpace, seed: int = 0) -> float:
    f = np.asarray(f, dtype=float).reshape(graph.order, -1)
    den = edge_average(graph, f, E.q)
    if den == 0:
        return math.nan
    num, _ = pair_average(f, E.q, seed=seed)
    return num / den


@dataclass
class PoincareReport:
    graph: str
    space: str
    vertices: int
    degree: int
    ratio_lower: float
    ratio_oracle: Optional[float]
    lambda1: float
    witness: np.ndarray = field(repr=False)
    pair_method: str = ""
    optimized: bool = False

    def as_dict(self) -> dict:
        return {
            "graph": self.graph,
            "space": self.space,
            "vertices": self.vertices,
            "degree": self.degree,
            "lambda1": self.lambda1,
            "ratio_lower": self.ratio_lower,
            "ratio_oracle": self.ratio_oracle,
            "pair_method": self.pair_method,
            "optimized": self.optimized,
        }


def _objective(graph: CayleyGraph, q: float, shape):
    V = graph.order
    nb = graph.neighbors
    k = graph.degree

    def fun(z):
        f = z.reshape(shape)
        D = f[:, None, :] - f[nb]
        Q = float(np.mean(_norms(D, q) ** 2))
        G = _sq_grad(D, q)
        gQ = G.sum(axis=1)
        np.add.at(gQ, nb.ravel(), -G.reshape(-1, shape[1]))
        gQ /= V * k
        if q == 2:
            c = f - f.mean(axis=0)
            P = 2.0 * float(np.mean((c * c).sum(axis=1)))
            gP = 4.0 * c / V
        else:
            P, gP = 0.0, np.zeros_like(f)
            for s in range(0, V, 256):
                Dp = f[s:s + 256, None, :] - f[None, :, :]
                P += float((_norms(Dp, q) ** 2).sum())
                gP[s:s + 256] += _sq_grad(Dp, q).sum(axis=1)
            P /= V ** 2
            gP *= 2.0 / V ** 2
        if P <= 0 or Q <= 0:
            return 0.0, np.zeros_like(z)
        val = -(math.log(P) - math.log(Q))
        grad = -(gP / P - gQ / Q)
        return val, grad.ravel()

    return fun


def word_distances(graph: CayleyGraph, source: int = 0) -> np.ndarray:
    """Word length from ``source`` (vertex 0 is the identity for constructed groups)."""
    return csgraph.shortest_path(graph.adjacency(), unweighted=True, indices=source).astype(np.int64)


def poincare_ratio(graph: CayleyGraph, E: CoefficientSpace, restarts: int = 4, seed: int = 0, iters: int = 200,
                   gap: Optional[SpectralGap] = None) -> PoincareReport:
    """Best pair/edge ratio over nonconstant fields; the Hilbert supremum 1/lambda_1 as oracle."""
    gap = gap or spectral_gap(graph, seed)
    V, d, q = graph.order, E.d, E.q
    hilbert = q == 2
    starts = []
    e = np.zeros((V, d))
    e[:, 0] = gap.eigenvector
    starts.append(e)
    dist = np.zeros((V, d))
    dist[:, 0] = word_distances(graph)
    starts.append(dist)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 58]))
    for _ in range(restarts):
        starts.append(rng.standard_normal((V, d)))
    can_optimize = V <= (OPTIMIZE_LIMIT if hilbert else PAIR_EXACT_LIMIT)
    best, best_f = -math.inf, starts[0]
    fun = _objective(graph, q, (V, d)) if can_optimize else None
    for f0 in starts:
        f = f0
        if fun is not None:
            res = opt.minimize(fun, f0.ravel(), jac=True, method="L-BFGS-B", options={"maxiter": iters})
            f = res.x.reshape(V, d)
            # keep the better of start and optimized field
            if poincare_value(graph, f0, E, seed) > poincare_value(graph, f, E, seed):
                f = f0
        val = poincare_value(graph, f, E, seed)
        if val > best:
            best, best_f = val, f
    _, method = pair_average(best_f, q, seed=seed)
    return PoincareReport(
        graph.name,
        E.label(),
        V,
        graph.degree,
        float(best),
        1.0 / gap.lambda1 if hilbert else None,
        gap.lambda1,
        best_f,
        method,
        fun is not None,
    )


# ---------------------------------------------------------------- diagnostics


def translate(graph: CayleyGraph, f: np.ndarray, word: Sequence[int]) -> np.ndarray:
    """(gamma f)(x) = f(x gamma) for gamma = s_1 ... s_k given by generator positions."""
    idx = np.arange(graph.order)
    for s in word:
        idx = graph.neighbors[idx, s]
    return f[idx]


def field_norm_l2(f: np.ndarray) -> float:
    return float(np.sqrt(np.mean((np.abs(f) ** 2).sum(axis=-1))))


def telescoping_check(graph: CayleyGraph, f: np.ndarray, word: Sequence[int]) -> dict:
    """||f - gamma f|| against k * sum_s ||f - s f|| for a word of length k."""
    lhs = field_norm_l2(f - translate(graph, f, word))
    steps = sum(field_norm_l2(f - translate(graph, f, [s])) for s in range(graph.degree))
    rhs = len(word) * steps
    return {"lhs": lhs, "rhs": rhs, "holds": lhs <= rhs + 1e-12}


def lipschitz_distance_check(graph: CayleyGraph, gap: Optional[SpectralGap] = None) -> dict:
    """f = word distance to the identity: 1-Lipschitz, and 2 Var f <= (1/lambda_1) * edge average."""
    gap = gap or spectral_gap(graph)
    f = word_distances(graph).astype(float)[:, None]
    lip = float(np.abs(f[:, 0][:, None] - f[graph.neighbors, 0]).max())
    edge = edge_average(graph, f)
    c = f - f.mean()
    var = float(np.mean(c ** 2))
    bound = edge / gap.lambda1
    return {"lipschitz": lip, "variance": var, "edge_average": edge, "pair_average": 2 * var, "bound": bound,
            "holds": lip <= 1 and edge <= 1 + 1e-12 and 2 * var <= bound * (1 + 1e-9)}


def counting_diagnostic(graph: CayleyGraph, rho: Callable[[np.ndarray], np.ndarray], N: float) -> dict:
    """Ball counts K(k) against (#S)^k #X, and E rho(d)^2 against N^2 (1 - (#S)^(k_N) / #X)."""
    dist = word_distances(graph)
    V, S = graph.order, graph.degree
    diam = int(dist.max())
    ks = np.arange(diam + 1)
    ball = np.array([(dist <= k).sum() for k in ks])
    K = ball * V  # vertex transitivity: d(x, y) = d(1, x^-1 y)
    stated = np.array([float(S) ** k * V for k in ks])
    geometric = np.array([sum(float(S) ** j for j in range(k + 1)) * V for k in ks])
    rvals = np.asarray(rho(ks.astype(float)), dtype=float)
    # k_N: least k with rho(a) >= N for all a >= k within the diameter
    ok = rvals >= N
    k_N = None
    for k in ks:
        if ok[k:].all():
            k_N = int(k)
            break
    counts = np.bincount(dist, minlength=diam + 1)
    mean_rho2 = float((counts * rvals ** 2).sum() / V)
    lower = None if k_N is None else N ** 2 * (1.0 - S ** k_N / V)
    return {
        "vertices": V,
        "degree": S,
        "diameter": diam,
        "K": K.tolist(),
        "stated_bound_holds": [bool(a <= b) for a, b in zip(K, stated)],
        "geometric_bound_holds": [bool(a <= b) for a, b in zip(K, geometric)],
        "k_N": k_N,
        "mean_rho_sq": mean_rho2,
        "lower_bound": lower,
        "lower_bound_holds": None if lower is None else bool(mean_rho2 >= lower - 1e-12),
    }


def embedding_obstruction_scan(moduli: Sequence[int], E: CoefficientSpace, seed: int = 0, restarts: int = 2,
                               budget: int = VERTEX_BUDGET) -> dict:
    rows = []
    for m in moduli:
        g = congruence_quotient(m, budget=budget)
        gap = spectral_gap(g, seed)
        rep = poincare_ratio(g, E, restarts=restarts, seed=seed, gap=gap)
        rows.append({
            "m": m,
            "vertices": g.order,
            "degree": g.degree,
            "lambda1": gap.lambda1,
            "ratio_lower": rep.ratio_lower,
            "ratio_oracle": rep.ratio_oracle,
            "space": E.label(),
            "seed": seed,
            "s2_condition": g.s2_condition,
            "pair_method": rep.pair_method,
        })
    ratios = [r["ratio_lower"] for r in rows]
    spread = max(ratios) / min(ratios) if rows and min(ratios) > 0 else math.inf
    return {
        "space": E.label(),
        "rows": rows,
        "max_ratio": max(ratios) if rows else None,
        "ratio_spread": spread,
        "ratios_bounded": bool(spread <= BOUNDED_SPREAD),
    }

"""Regularity decisions, certificates, and blow-up host construction."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import ContractViolation, InvariantError, SizeLimitError, UndefinedDensity
from .graph import HOST, BipartitePair, Graph, VertexSet, density
from .rng import make_rng

EXACT_LIMIT = 12
_CHUNK = 512


def as_fraction(x) -> Fraction:
    """Exact conversion; floats go through their shortest repr (0.45 -> 9/20)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def ceil_frac(q: Fraction) -> int:
    return -(-q.numerator // q.denominator)


def floor_frac(q: Fraction) -> int:
    return q.numerator // q.denominator


@dataclass(frozen=True)
class IrregularityWitness:
    x: VertexSet
    y: VertexSet
    deviation: Fraction


@dataclass(frozen=True)
class RegularityVerdict:
    regular: bool
    witness: IrregularityWitness | None = None


def _subset_sums(rows: np.ndarray) -> np.ndarray:
    """Row ``mask`` of the result is the sum of ``rows[i]`` over the bits ``i`` of ``mask``."""
    out = np.zeros((1, rows.shape[1]), dtype=np.int64)
    for r in rows.astype(np.int64):
        out = np.vstack([out, out + r])
    return out


def _popcounts(k: int) -> np.ndarray:
    masks = np.arange(1 << k, dtype=np.int64)
    counts = np.zeros(1 << k, dtype=np.int64)
    for i in range(k):
        counts += (masks >> i) & 1
    return counts


def is_regular_exact(p: BipartitePair, eps, limit: int = EXACT_LIMIT) -> RegularityVerdict:
    """Decide eps-regularity by enumerating every qualifying pair of subsets.

    Exponential in the side sizes; refuses pairs with a side larger than
    ``limit``. When the pair is irregular the witness maximises the density
    deviation (ties broken by smallest X mask, then smallest Y mask).
    """
    eps = as_fraction(eps)
    a, b = p.size_a, p.size_b
    if a > limit or b > limit:
        raise SizeLimitError(
            f"pair {a}x{b} exceeds the exhaustive limit {limit}; use certify_regular"
        )
    if a == 0 or b == 0:
        raise UndefinedDensity("regularity of a pair with an empty side")
    en, ed = eps.numerator, eps.denominator
    total = p.num_edges()
    ab = a * b

    xsize = _popcounts(a)
    xq = np.flatnonzero(xsize * ed > en * a)
    ysize = _popcounts(b)
    yq = np.flatnonzero(ysize * ed > en * b)
    if len(xq) == 0 or len(yq) == 0:
        return RegularityVerdict(True)

    col_sums = _subset_sums(p.biadj)[xq]  # (nx, b)
    ymat = ((yq[None, :] >> np.arange(b)[:, None]) & 1).astype(np.int64)  # (b, ny)
    ys = ysize[yq]

    best = None  # (numer, denom, xmask, ymask)
    for start in range(0, len(xq), _CHUNK):
        e = col_sums[start:start + _CHUNK] @ ymat  # e(X, Y)
        xs = xsize[xq[start:start + _CHUNK]]
        xy = xs[:, None] * ys[None, :]
        numer = np.abs(e * ab - total * xy)
        denom = xy * ab
        bad = numer * ed >= en * denom
        if not bad.any():
            continue
        ratio = np.where(bad, numer / denom, -1.0)
        top = ratio.max()
        for i, j in zip(*np.nonzero(ratio >= top - 1e-12)):
            cand = (int(numer[i, j]), int(denom[i, j]), int(xq[start + i]), int(yq[j]))
            if best is None or Fraction(cand[0], cand[1]) > Fraction(best[0], best[1]):
                best = cand
    if best is None:
        return RegularityVerdict(True)
    numer, denom, xm, ym = best
    w = IrregularityWitness(
        VertexSet("pair-a", a, xm), VertexSet("pair-b", b, ym), Fraction(numer, denom)
    )
    return RegularityVerdict(False, w)


@dataclass(frozen=True)
class RegularityCertificate:
    """Codegree certificate for eps-regularity.

    With ``W = M - dJ`` the centred biadjacency matrix, the codegree deviation
    matrix ``K = W W^T`` has entries ``codeg(u,u') - d deg(u) - d deg(u') + d^2 |B|``.
    For every X, Y the density deviation is at most ``sqrt(lambda_max(K) / (|X||Y|))``,
    so ``lambda_max(K) <= eps^4 |A||B|`` proves eps-regularity. ``lambda_max`` is
    bounded from above by the Gershgorin row sums and by the Frobenius norm of
    ``K``; both are exact. A failing certificate is inconclusive.
    """

    eps: Fraction
    density: Fraction
    size_a: int
    size_b: int
    abs_deviation_sum: Fraction  # sum over u, u' in A of |K[u, u']|
    gershgorin: Fraction  # max row sum of |K|, minimised over the two sides
    frobenius_sq: Fraction  # sum of K[u, u']^2, minimised over the two sides
    threshold: Fraction  # eps^4 |A||B|
    passes: bool
    implied_eps: float  # smallest eps this certificate proves

    @property
    def conclusive(self) -> bool:
        return self.passes

    def to_dict(self) -> dict:
        return {
            "eps": str(self.eps),
            "density": str(self.density),
            "size_a": self.size_a,
            "size_b": self.size_b,
            "abs_deviation_sum": str(self.abs_deviation_sum),
            "gershgorin": str(self.gershgorin),
            "frobenius_sq": str(self.frobenius_sq),
            "threshold": str(self.threshold),
            "passes": self.passes,
            "implied_eps": self.implied_eps,
            "conclusive": self.conclusive,
        }


def codegree_deviation_matrix(p: BipartitePair) -> tuple[np.ndarray, int]:
    """Return ``(q^2 K, q^2)`` as int64 where ``d = num / q`` is the pair density."""
    d = density(p)
    num, q = d.numerator, d.denominator
    m = p.biadj.astype(np.int64)
    w = q * m - num  # q W, entries bounded by q
    return w @ w.T, q * q


def _side_stats(p: BipartitePair) -> tuple[int, int, int, int]:
    k, scale = codegree_deviation_matrix(p)
    absk = np.abs(k)
    abs_sum = int(absk.sum())
    gersh = int(absk.sum(axis=1).max())
    frob = sum(int(v) * int(v) for v in k.ravel().tolist())
    return abs_sum, gersh, frob, scale


def certify_regular(p: BipartitePair, eps) -> RegularityCertificate:
    eps = as_fraction(eps)
    a, b = p.size_a, p.size_b
    if a == 0 or b == 0:
        raise UndefinedDensity("certificate for a pair with an empty side")
    d = density(p)
    abs_a, gersh_a, frob_a, scale = _side_stats(p)
    _, gersh_b, frob_b, _ = _side_stats(p.transpose())
    gersh = Fraction(min(gersh_a, gersh_b), scale)
    frob_sq = Fraction(min(frob_a, frob_b), scale * scale)
    threshold = eps ** 4 * a * b
    passes = gersh <= threshold or frob_sq <= threshold * threshold
    lam = min(float(gersh), float(frob_sq) ** 0.5)
    implied = (lam / (a * b)) ** 0.25
    return RegularityCertificate(
        eps=eps,
        density=d,
        size_a=a,
        size_b=b,
        abs_deviation_sum=Fraction(abs_a, scale),
        gershgorin=gersh,
        frobenius_sq=frob_sq,
        threshold=threshold,
        passes=passes,
        implied_eps=implied,
    )


@dataclass(frozen=True)
class SuperRegularityVerdict:
    super_regular: bool
    regular: bool
    method: str  # "exact" or "certificate"
    conclusive: bool
    failing_a: tuple[int, ...]
    failing_b: tuple[int, ...]
    regularity: RegularityVerdict | RegularityCertificate

    def __bool__(self) -> bool:
        return self.super_regular

    @property
    def failing(self) -> list[tuple[str, int]]:
        return [("a", v) for v in self.failing_a] + [("b", v) for v in self.failing_b]


def is_super_regular(p: BipartitePair, eps, delta, exact_limit: int = EXACT_LIMIT) -> SuperRegularityVerdict:
    """Regularity (exact when small, certificate otherwise) plus both minimum-degree conditions.

    With the certificate a ``False`` regularity result only means "not proven";
    ``conclusive`` tells the two apart.
    """
    eps, delta = as_fraction(eps), as_fraction(delta)
    a, b = p.size_a, p.size_b
    dn, dd = delta.numerator, delta.denominator
    failing_a = tuple(np.flatnonzero(p.degrees_a() * dd < dn * b).tolist())
    failing_b = tuple(np.flatnonzero(p.degrees_b() * dd < dn * a).tolist())
    if a <= exact_limit and b <= exact_limit:
        verdict = is_regular_exact(p, eps, exact_limit)
        regular, method, conclusive = verdict.regular, "exact", True
    else:
        verdict = certify_regular(p, eps)
        regular, method, conclusive = verdict.passes, "certificate", verdict.passes
    degrees_ok = not failing_a and not failing_b
    return SuperRegularityVerdict(
        super_regular=regular and degrees_ok,
        regular=regular,
        method=method,
        conclusive=conclusive or not degrees_ok,
        failing_a=failing_a,
        failing_b=failing_b,
        regularity=verdict,
    )


def generate_super_regular_pair(n: int, delta, seed) -> BipartitePair:
    """Seeded random n x n pair with edge probability delta and min degree >= delta*n.

    After sampling, every vertex below the degree target receives edges to
    its non-neighbours of lowest current degree (ties in seeded random
    order) until it reaches ``ceil(delta * n)``. Rows are repaired first,
    then columns; adding column edges never lowers a row degree.
    """
    delta = as_fraction(delta)
    if not 0 < delta <= 1:
        raise ContractViolation("delta must lie in (0, 1]")
    if n < 1:
        raise ContractViolation("n must be positive")
    rng = make_rng(seed)
    m = rng.random((n, n)) < float(delta)
    if delta == 1:
        m[:] = True
    target = ceil_frac(delta * n)
    tiebreak = rng.permutation(n)
    for side in (0, 1):
        mat = m if side == 0 else m.T
        deg_other = mat.sum(axis=0)
        for u in np.flatnonzero(mat.sum(axis=1) < target):
            missing = target - int(mat[u].sum())
            free = np.flatnonzero(~mat[u])
            order = np.lexsort((tiebreak[free], deg_other[free]))
            chosen = free[order[:missing]]
            mat[u, chosen] = True
            deg_other[chosen] += 1
    return BipartitePair(m)


@dataclass(frozen=True)
class ClusterGraph:
    """The reduced graph R on clusters ``0..r-1`` with a density per edge."""

    r: int
    edges: frozenset
    densities: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        for e in self.edges:
            i, j = e
            if not (0 <= i < j < self.r):
                raise InvariantError("cluster-graph-simple", f"bad edge {e}")
        for e, d in self.densities.items():
            if e not in self.edges or not 0 < d <= 1:
                raise InvariantError("cluster-density-range", f"{e}: {d}")

    @classmethod
    def from_edges(cls, r: int, edges: Iterable[tuple[int, int]], density=1) -> "ClusterGraph":
        es = frozenset(tuple(sorted(e)) for e in edges)
        dens = {e: as_fraction(density) for e in es}
        return cls(r, es, dens)

    @classmethod
    def complete(cls, r: int, density=1) -> "ClusterGraph":
        return cls.from_edges(r, [(i, j) for i in range(r) for j in range(i + 1, r)], density)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def density(self, i: int, j: int) -> Fraction:
        return self.densities[(min(i, j), max(i, j))]

    def with_densities(self, densities: dict) -> "ClusterGraph":
        return ClusterGraph(self.r, self.edges, dict(densities))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


class HostGraph:
    """G on r*N vertices; cluster i is ``range(i*N, (i+1)*N)``."""

    def __init__(self, cluster_graph: ClusterGraph, n: int, graph: Graph):
        self.cluster_graph = cluster_graph
        self.n_per_cluster = n
        self.graph = graph
        self.validate()

    @property
    def r(self) -> int:
        return self.cluster_graph.r

    @property
    def order(self) -> int:
        return self.graph.order

    def cluster_of(self, v: int) -> int:
        return v // self.n_per_cluster

    def cluster(self, i: int) -> VertexSet:
        n = self.n_per_cluster
        return VertexSet.of(HOST, self.order, range(i * n, (i + 1) * n))

    def block(self, i: int, j: int) -> np.ndarray:
        n = self.n_per_cluster
        return self.graph.matrix[i * n:(i + 1) * n, j * n:(j + 1) * n]

    def pair(self, i: int, j: int) -> BipartitePair:
        n = self.n_per_cluster
        return BipartitePair(self.block(i, j), range(i * n, (i + 1) * n), range(j * n, (j + 1) * n))

    def validate(self) -> None:
        n, r = self.n_per_cluster, self.r
        if n < 1:
            raise InvariantError("cluster-size", "N must be positive")
        if self.graph.order != r * n:
            raise InvariantError("cluster-size", f"order {self.graph.order} != r*N = {r * n}")
        for i in range(r):
            for j in range(i, r):
                if self.block(i, j).any() and not self.cluster_graph.has_edge(i, j):
                    raise InvariantError("host-edges-follow-R", f"edges between clusters {i} and {j}")


def host_from_pairs(cluster_graph: ClusterGraph, n: int, pairs: dict) -> HostGraph:
    """Place one N x N biadjacency per cluster edge; densities are recorded from the pairs."""
    r = cluster_graph.r
    m = np.zeros((r * n, r * n), dtype=bool)
    dens = {}
    for (i, j) in cluster_graph.sorted_edges():
        p = pairs[(i, j)]
        if p.biadj.shape != (n, n):
            raise InvariantError("cluster-size", f"pair {(i, j)} has shape {p.biadj.shape}")
        m[i * n:(i + 1) * n, j * n:(j + 1) * n] = p.biadj
        m[j * n:(j + 1) * n, i * n:(i + 1) * n] = p.biadj.T
        d = density(p)
        if d == 0:
            raise InvariantError("cluster-density-range", f"pair {(i, j)} is empty")
        dens[(i, j)] = d
    return HostGraph(cluster_graph.with_densities(dens), n, Graph(m, HOST))


def build_complete_blowup(cluster_graph: ClusterGraph, n: int) -> HostGraph:
    """R(N): every cluster edge becomes a complete bipartite graph K_{N,N}."""
    if n < 1:
        raise ContractViolation("N must be positive")
    full = BipartitePair(np.ones((n, n), dtype=bool))
    return host_from_pairs(cluster_graph, n, {e: full for e in cluster_graph.edges})

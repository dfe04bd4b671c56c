"""Pattern graphs with their cluster assignments, restrictions, and full instances."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DegenerateInstance, GenerationFailure, InvariantError
from .graph import HOST, PATTERN, Graph, VertexSet
from .params import ParameterCascade
from .regularity import (
    ClusterGraph,
    HostGraph,
    as_fraction,
    generate_super_regular_pair,
    host_from_pairs,
)
from .rng import generation_seeds, make_rng


@dataclass(frozen=True)
class PatternGraph:
    """H together with its assignment psi : V(H) -> clusters.

    ``assignment[x]`` is the cluster index of pattern vertex ``x``.
    """

    graph: Graph
    max_degree: int
    assignment: tuple[int, ...]
    r: int
    n_per_cluster: int

    @property
    def order(self) -> int:
        return self.graph.order

    def cluster_members(self, i: int) -> list[int]:
        return [x for x, c in enumerate(self.assignment) if c == i]

    def adjacency(self) -> list[list[int]]:
        return [self.graph.neighbor_list(x) for x in range(self.order)]

    def validate(self, cluster_graph: ClusterGraph | None = None) -> None:
        g = self.graph
        if g.universe != PATTERN:
            raise InvariantError("pattern-universe", f"graph lives in {g.universe!r}")
        if len(self.assignment) != g.order:
            raise InvariantError("assignment-total", "psi must label every pattern vertex")
        if g.max_degree() > self.max_degree:
            raise InvariantError("max-degree", f"Delta(H) = {g.max_degree()} > {self.max_degree}")
        if any(not 0 <= c < self.r for c in self.assignment):
            raise InvariantError("assignment-range", "cluster index out of range")
        sizes = Counter(self.assignment)
        bad = {i: sizes.get(i, 0) for i in range(self.r) if sizes.get(i, 0) != self.n_per_cluster}
        if bad:
            raise InvariantError("class-sizes", f"|psi^-1(i)| != N={self.n_per_cluster}: {bad}")
        for x, y in g.edges():
            cx, cy = self.assignment[x], self.assignment[y]
            if cx == cy:
                raise InvariantError("assignment-proper", f"edge {x}-{y} inside cluster {cx}")
            if cluster_graph is not None and not cluster_graph.has_edge(cx, cy):
                raise InvariantError(
                    "assignment-follows-R", f"edge {x}-{y} maps to non-edge {cx}-{cy} of R"
                )


def _pattern(order: int, edges, assignment, r: int, n: int, max_degree: int) -> PatternGraph:
    p = PatternGraph(Graph.from_edges(order, edges, PATTERN), max_degree, tuple(assignment), r, n)
    p.validate()
    return p


def gen_matching_pattern(n: int) -> PatternGraph:
    """Perfect matching {2i, 2i+1}; even vertices in cluster 0, odd in cluster 1."""
    if n < 1:
        raise DegenerateInstance("N must be positive")
    edges = [(2 * i, 2 * i + 1) for i in range(n)]
    return _pattern(2 * n, edges, [x % 2 for x in range(2 * n)], 2, n, 1)


def gen_hamiltonian_path_pattern(n: int) -> PatternGraph:
    if n < 1:
        raise DegenerateInstance("N must be positive")
    edges = [(x, x + 1) for x in range(2 * n - 1)]
    return _pattern(2 * n, edges, [x % 2 for x in range(2 * n)], 2, n, 2)


def gen_power_ham_cycle_pattern(n: int, k: int) -> PatternGraph:
    """k-th power of the Hamiltonian cycle on (k+1)N vertices, psi(x) = x mod (k+1).

    Any two vertices within cyclic distance k differ mod k+1, so psi is a
    proper assignment into the complete cluster graph K_{k+1}.
    """
    if k < 1:
        raise DegenerateInstance("k must be positive")
    if n < 2:
        raise DegenerateInstance("need N >= 2 so that all chords are distinct")
    order = (k + 1) * n
    edges = {tuple(sorted((x, (x + j) % order))) for x in range(order) for j in range(1, k + 1)}
    return _pattern(order, sorted(edges), [x % (k + 1) for x in range(order)], k + 1, n, 2 * k)


def gen_square_ham_cycle_pattern(n: int) -> PatternGraph:
    return gen_power_ham_cycle_pattern(n, 2)


def gen_bounded_tree_pattern(n: int, max_degree: int, seed, max_retries: int = 10_000) -> PatternGraph:
    """Random tree on 2N vertices with degrees <= max_degree and balanced 2-colouring.

    Vertex k attaches to a uniformly random earlier vertex that still has
    spare degree; trees whose colour classes differ in size are rejected.
    """
    if max_degree < 3:
        raise DegenerateInstance("max_degree must be at least 3")
    if n < 1:
        raise DegenerateInstance("N must be positive")
    rng = make_rng(seed)
    order = 2 * n
    for _ in range(max_retries):
        deg = [0] * order
        depth = [0] * order
        open_ = [0]
        edges = []
        for k in range(1, order):
            idx = int(rng.integers(len(open_)))
            parent = open_[idx]
            edges.append((parent, k))
            deg[parent] += 1
            deg[k] = 1
            depth[k] = depth[parent] + 1
            if deg[parent] == max_degree:
                open_[idx] = open_[-1]
                open_.pop()
            open_.append(k)
        colour = [d % 2 for d in depth]
        if sum(colour) == n:
            return _pattern(order, edges, colour, 2, n, max_degree)
    raise GenerationFailure(f"no balanced tree after {max_retries} attempts; reseed")


@dataclass(frozen=True)
class Restriction:
    """Pattern vertex ``vertex`` may only be mapped into ``allowed`` (host universe)."""

    vertex: int
    allowed: VertexSet


@dataclass
class Instance:
    host: HostGraph
    pattern: PatternGraph
    params: ParameterCascade
    restrictions: list = field(default_factory=list)
    seed_lineage: dict = field(default_factory=dict)

    @property
    def r(self) -> int:
        return self.host.r

    @property
    def n_per_cluster(self) -> int:
        return self.host.n_per_cluster

    def restriction_map(self) -> dict[int, VertexSet]:
        return {rs.vertex: rs.allowed for rs in self.restrictions}

    def validate(self) -> None:
        host, pat = self.host, self.pattern
        if host.r != pat.r or host.n_per_cluster != pat.n_per_cluster:
            raise InvariantError(
                "pattern-host-shape",
                f"host has r={host.r}, N={host.n_per_cluster}; pattern r={pat.r}, N={pat.n_per_cluster}",
            )
        pat.validate(host.cluster_graph)
        if pat.max_degree > self.params.max_degree and self.params.max_degree:
            raise InvariantError("max-degree", "pattern exceeds the cascade's Delta")
        n = host.n_per_cluster
        seen = set()
        per_cluster = Counter()
        for rs in self.restrictions:
            x = rs.vertex
            if not 0 <= x < pat.order or x in seen:
                raise InvariantError("restriction-vertex", f"bad or repeated vertex {x}")
            seen.add(x)
            i = pat.assignment[x]
            if rs.allowed.universe != HOST or rs.allowed.size != host.order:
                raise InvariantError("restriction-universe", f"vertex {x}")
            if not rs.allowed.issubset(host.cluster(i)):
                raise InvariantError("restriction-within-cluster", f"C_{x} leaves cluster {i}")
            if len(rs.allowed) < self.params.c * n:
                raise InvariantError("restriction-size", f"|C_{x}| = {len(rs.allowed)} < c*N")
            per_cluster[i] += 1
        for i, cnt in per_cluster.items():
            if cnt > self.params.alpha * n:
                raise InvariantError("restriction-count", f"cluster {i} has {cnt} > alpha*N restrictions")


def random_restrictions(pattern: PatternGraph, host: HostGraph, per_cluster: int, size: int, seed) -> list[Restriction]:
    """``per_cluster`` restricted pattern vertices per cluster, each to a random ``size``-subset."""
    rng = make_rng(seed)
    n = host.n_per_cluster
    out = []
    for i in range(pattern.r):
        members = pattern.cluster_members(i)
        chosen = sorted(rng.choice(members, size=per_cluster, replace=False).tolist())
        for x in chosen:
            local = rng.choice(n, size=size, replace=False)
            out.append(Restriction(x, VertexSet.of(HOST, host.order, (i * n + local).tolist())))
    return out


def assemble_instance(
    cluster_graph: ClusterGraph,
    n: int,
    delta,
    pattern: PatternGraph,
    params: ParameterCascade | None = None,
    restrictions: Sequence[Restriction] = (),
    seed=0,
) -> Instance:
    """Build G from one generated super-regular pair per cluster edge and validate everything."""
    delta = as_fraction(delta)
    if params is None:
        params = ParameterCascade.default(delta, pattern.max_degree)
    pattern.validate(cluster_graph)
    edges = cluster_graph.sorted_edges()
    children = generation_seeds(seed, len(edges))["edges"]
    pairs = {e: generate_super_regular_pair(n, delta, ss) for e, ss in zip(edges, children)}
    host = host_from_pairs(cluster_graph, n, pairs)
    inst = Instance(
        host,
        pattern,
        params,
        list(restrictions),
        {"seed": seed if isinstance(seed, int) else None, "delta": str(delta)},
    )
    inst.validate()
    return inst


R_GRAPHS = {
    "K2": lambda: ClusterGraph.complete(2),
    "triangle": lambda: ClusterGraph.complete(3),
}


def cluster_graph_named(name: str) -> ClusterGraph:
    """``K2``, ``triangle``, ``K<r>`` (complete), or ``C<r>`` (cycle)."""
    if name in R_GRAPHS:
        return R_GRAPHS[name]()
    if name[0] in "KC" and name[1:].isdigit():
        r = int(name[1:])
        if name[0] == "K":
            return ClusterGraph.complete(r)
        return ClusterGraph.from_edges(r, [(i, (i + 1) % r) for i in range(r)])
    raise ValueError(f"unknown cluster graph {name!r}")

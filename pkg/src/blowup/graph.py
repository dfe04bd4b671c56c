"""Bit-vector graph representation and the counting primitives built on it.

Vertex sets are Python integers used as bitsets (``int.bit_count`` is a
word-parallel popcount), tagged with the name of the vertex universe they
live in so that pattern-side and host-side sets cannot be mixed silently.
A dense boolean numpy matrix is kept alongside for the vectorised counting
done by the embedder.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ContractViolation, UndefinedDensity

PATTERN = "pattern"
HOST = "host"


def bits_from_bool(row: np.ndarray) -> int:
    """Pack a boolean vector into an int with bit ``i`` set iff ``row[i]``."""
    packed = np.packbits(np.asarray(row, dtype=bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def bool_from_bits(bits: int, size: int) -> np.ndarray:
    nbytes = (size + 7) // 8
    raw = np.frombuffer(bits.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little", count=size).astype(bool)


@dataclass(frozen=True)
class VertexSet:
    """An immutable set of vertex indices over a named universe ``[0, size)``."""

    universe: str
    size: int
    bits: int = 0

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.size:
            raise ContractViolation(f"members outside [0, {self.size})")

    @classmethod
    def of(cls, universe: str, size: int, members: Iterable[int] = ()) -> "VertexSet":
        bits = 0
        for m in members:
            if not 0 <= m < size:
                raise ContractViolation(f"vertex {m} outside [0, {size})")
            bits |= 1 << m
        return cls(universe, size, bits)

    @classmethod
    def full(cls, universe: str, size: int) -> "VertexSet":
        return cls(universe, size, (1 << size) - 1)

    @classmethod
    def from_mask(cls, universe: str, mask: np.ndarray) -> "VertexSet":
        return cls(universe, len(mask), bits_from_bool(mask))

    def mask(self) -> np.ndarray:
        return bool_from_bits(self.bits, self.size)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.size and bool(self.bits >> v & 1)

    def __iter__(self) -> Iterator[int]:
        b = self.bits
        while b:
            low = b & -b
            yield low.bit_length() - 1
            b ^= low

    def _check(self, other: "VertexSet") -> None:
        if self.universe != other.universe or self.size != other.size:
            raise ContractViolation(
                f"cannot combine sets over {self.universe}[{self.size}] and "
                f"{other.universe}[{other.size}]"
            )

    def __and__(self, other: "VertexSet") -> "VertexSet":
        self._check(other)
        return VertexSet(self.universe, self.size, self.bits & other.bits)

    def __or__(self, other: "VertexSet") -> "VertexSet":
        self._check(other)
        return VertexSet(self.universe, self.size, self.bits | other.bits)

    def __sub__(self, other: "VertexSet") -> "VertexSet":
        self._check(other)
        return VertexSet(self.universe, self.size, self.bits & ~other.bits)

    def issubset(self, other: "VertexSet") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def to_list(self) -> list[int]:
        return list(self)

    def __repr__(self) -> str:
        return f"VertexSet({self.universe!r}, {self.size}, {self.to_list()})"


class Graph:
    """A simple undirected graph on ``order`` vertices of one universe.

    Immutable after construction: ``rows`` holds one adjacency bitset per
    vertex and ``matrix`` the same relation as a read-only boolean array.
    """

    __slots__ = ("order", "universe", "rows", "matrix")

    def __init__(self, matrix: np.ndarray, universe: str = HOST):
        m = np.array(matrix, dtype=bool)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ContractViolation("adjacency matrix must be square")
        if m.diagonal().any():
            raise ContractViolation("graphs are simple: no loops")
        if not np.array_equal(m, m.T):
            raise ContractViolation("adjacency must be symmetric")
        m.setflags(write=False)
        self.order = m.shape[0]
        self.universe = universe
        self.matrix = m
        self.rows = tuple(bits_from_bool(r) for r in m)

    @classmethod
    def from_edges(cls, order: int, edges: Iterable[tuple[int, int]], universe: str = HOST) -> "Graph":
        m = np.zeros((order, order), dtype=bool)
        for u, v in edges:
            if u == v:
                raise ContractViolation(f"loop at {u}")
            m[u, v] = m[v, u] = True
        return cls(m, universe)

    def vertex_set(self, members: Iterable[int] = ()) -> VertexSet:
        return VertexSet.of(self.universe, self.order, members)

    def all_vertices(self) -> VertexSet:
        return VertexSet.full(self.universe, self.order)

    def neighbors(self, v: int) -> VertexSet:
        return VertexSet(self.universe, self.order, self.rows[v])

    def neighbor_list(self, v: int) -> list[int]:
        return np.flatnonzero(self.matrix[v]).tolist()

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.matrix[u, v])

    def edges(self) -> list[tuple[int, int]]:
        us, vs = np.nonzero(np.triu(self.matrix, 1))
        return list(zip(us.tolist(), vs.tolist()))

    def num_edges(self) -> int:
        return int(self.matrix.sum()) // 2

    def max_degree(self) -> int:
        return int(self.matrix.sum(axis=1).max()) if self.order else 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.universe == other.universe
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.universe, self.rows))

    def __repr__(self) -> str:
        return f"Graph({self.universe!r}, order={self.order}, edges={self.num_edges()})"


def _check_vertex(g: Graph, v: int) -> None:
    if not 0 <= v < g.order:
        raise ContractViolation(f"vertex {v} not in graph of order {g.order}")


def _check_set(g: Graph, s: VertexSet) -> None:
    if s.universe != g.universe or s.size != g.order:
        raise ContractViolation(
            f"set over {s.universe}[{s.size}] used with graph over {g.universe}[{g.order}]"
        )


def degree_into(g: Graph, v: int, s: VertexSet) -> int:
    """Number of neighbours of ``v`` inside ``s``."""
    _check_vertex(g, v)
    _check_set(g, s)
    return (g.rows[v] & s.bits).bit_count()


def codegree(g: Graph, u: int, v: int, s: VertexSet) -> int:
    """Size of the common neighbourhood of ``u`` and ``v`` restricted to ``s``."""
    _check_vertex(g, u)
    _check_vertex(g, v)
    _check_set(g, s)
    return (g.rows[u] & g.rows[v] & s.bits).bit_count()


class BipartitePair:
    """The pair (A, B): the bipartite graph of all edges between two disjoint sides.

    Stored as a read-only ``|A| x |B|`` biadjacency matrix. ``labels_a`` and
    ``labels_b`` optionally record which vertices of a parent graph the rows
    and columns came from.
    """

    __slots__ = ("biadj", "labels_a", "labels_b")

    def __init__(self, biadj: np.ndarray, labels_a: Sequence[int] | None = None,
                 labels_b: Sequence[int] | None = None):
        m = np.array(biadj, dtype=bool)
        if m.ndim != 2:
            raise ContractViolation("biadjacency must be 2-dimensional")
        m.setflags(write=False)
        self.biadj = m
        self.labels_a = tuple(range(m.shape[0])) if labels_a is None else tuple(labels_a)
        self.labels_b = tuple(range(m.shape[1])) if labels_b is None else tuple(labels_b)

    @classmethod
    def from_graph(cls, g: Graph, a: VertexSet, b: VertexSet) -> "BipartitePair":
        _check_set(g, a)
        _check_set(g, b)
        if a.bits & b.bits:
            raise ContractViolation("pair sides must be disjoint")
        ia, ib = a.to_list(), b.to_list()
        return cls(g.matrix[np.ix_(ia, ib)], ia, ib)

    @property
    def size_a(self) -> int:
        return self.biadj.shape[0]

    @property
    def size_b(self) -> int:
        return self.biadj.shape[1]

    def num_edges(self) -> int:
        return int(self.biadj.sum())

    def transpose(self) -> "BipartitePair":
        return BipartitePair(self.biadj.T, self.labels_b, self.labels_a)

    def degrees_a(self) -> np.ndarray:
        return self.biadj.sum(axis=1)

    def degrees_b(self) -> np.ndarray:
        return self.biadj.sum(axis=0)

    def __eq__(self, other) -> bool:
        return isinstance(other, BipartitePair) and np.array_equal(self.biadj, other.biadj)

    def __repr__(self) -> str:
        return f"BipartitePair({self.size_a}x{self.size_b}, edges={self.num_edges()})"


def density(p: BipartitePair) -> Fraction:
    """Exact edge density e(A,B) / (|A||B|)."""
    if p.size_a == 0 or p.size_b == 0:
        raise UndefinedDensity("density of a pair with an empty side")
    return Fraction(p.num_edges(), p.size_a * p.size_b)


def subpair_density(p: BipartitePair, xs: Sequence[int], ys: Sequence[int]) -> Fraction:
    """Density d(X, Y) for row indices ``xs`` and column indices ``ys`` of ``p``."""
    if len(xs) == 0 or len(ys) == 0:
        raise UndefinedDensity("density with an empty side")
    e = int(p.biadj[np.ix_(list(xs), list(ys))].sum())
    return Fraction(e, len(xs) * len(ys))


def bfs_distances(adj: Sequence[Sequence[int]], sources: Iterable[int], limit: int | None = None) -> dict[int, int]:
    """Multi-source BFS over adjacency lists; stops expanding past ``limit``."""
    dist = {}
    frontier = []
    for s in sources:
        if s not in dist:
            dist[s] = 0
            frontier.append(s)
    d = 0
    while frontier and (limit is None or d < limit):
        d += 1
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in dist:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    return dist

"""Maximum bipartite matching, distinct representatives, and Hall diagnostics."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np

from .graph import VertexSet
from .regularity import as_fraction, ceil_frac
from .rng import make_rng

_INF = float("inf")


@dataclass
class CandidacyGraph:
    """Bipartite graph between unembedded pattern vertices and free host vertices.

    ``adj[i]`` lists the right indices adjacent to left index ``i``; ``left``
    and ``right`` carry the external labels.
    """

    left: list
    right: list
    adj: list

    @classmethod
    def from_sets(cls, left: Sequence[Hashable], sets: Sequence[Sequence[Hashable]], right: Sequence[Hashable] | None = None):
        if right is None:
            right = sorted({v for s in sets for v in s})
        index = {v: j for j, v in enumerate(right)}
        adj = [sorted(index[v] for v in s if v in index) for s in sets]
        return cls(list(left), list(right), adj)

    @classmethod
    def from_matrix(cls, mat: np.ndarray, left=None, right=None):
        mat = np.asarray(mat, dtype=bool)
        left = list(range(mat.shape[0])) if left is None else list(left)
        right = list(range(mat.shape[1])) if right is None else list(right)
        return cls(left, right, [np.flatnonzero(row).tolist() for row in mat])

    def num_edges(self) -> int:
        return sum(len(a) for a in self.adj)


@dataclass
class MatchingResult:
    """``pairs`` are (left label, right label); ``perfect`` means every left vertex is matched."""

    pairs: list
    perfect: bool
    hall_witness: list | None = None
    phases: int = 0

    @property
    def size(self) -> int:
        return len(self.pairs)

    def as_dict(self) -> dict:
        return dict(self.pairs)


def _hopcroft_karp(n_left: int, n_right: int, adj: list, init=None) -> tuple[list[int], list[int], int]:
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    for u, v in init or ():
        match_l[u] = v
        match_r[v] = u
    phases = 0
    while True:
        dist = [_INF] * n_left
        q = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                q.append(u)
        found = _INF
        while q:
            u = q.popleft()
            if dist[u] >= found:
                continue
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = min(found, dist[u] + 1)
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        if found == _INF:
            break
        phases += 1
        ptr = [0] * n_left
        for root in range(n_left):
            if match_l[root] != -1:
                continue
            # iterative layered DFS for a shortest augmenting path from root
            stack = [root]
            path_r = []
            while stack:
                u = stack[-1]
                advanced = False
                while ptr[u] < len(adj[u]):
                    v = adj[u][ptr[u]]
                    ptr[u] += 1
                    w = match_r[v]
                    if w == -1 and dist[u] + 1 == found:
                        path_r.append(v)
                        for lu, rv in zip(stack, path_r):
                            match_l[lu] = rv
                            match_r[rv] = lu
                        stack = []
                        advanced = True
                        break
                    if w != -1 and dist[w] == dist[u] + 1:
                        path_r.append(v)
                        stack.append(w)
                        advanced = True
                        break
                if not advanced:
                    dist[u] = _INF
                    stack.pop()
                    if path_r:
                        path_r.pop()
    return match_l, match_r, phases


def hall_witness_from(adj: list, match_l: list[int], match_r: list[int]) -> list[int]:
    """Left indices reachable from unmatched left vertices by alternating paths.

    For a maximum matching their neighbourhood is fully matched back into
    the set, so it is smaller than the set by the number of unmatched roots.
    """
    seen_l = set(u for u, v in enumerate(match_l) if v == -1)
    q = deque(seen_l)
    seen_r = set()
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v not in seen_r:
                seen_r.add(v)
                w = match_r[v]
                if w != -1 and w not in seen_l:
                    seen_l.add(w)
                    q.append(w)
    return sorted(seen_l)


def max_matching(g: CandidacyGraph, initial=None) -> MatchingResult:
    """Maximum-cardinality matching by Hopcroft-Karp phases of shortest augmenting paths.

    ``initial`` optionally seeds the search with a matching given as
    (left index, right index) pairs.
    """
    match_l, match_r, phases = _hopcroft_karp(len(g.left), len(g.right), g.adj, initial)
    pairs = [(g.left[u], g.right[v]) for u, v in enumerate(match_l) if v != -1]
    perfect = len(pairs) == len(g.left)
    witness = None
    if not perfect:
        witness = [g.left[u] for u in hall_witness_from(g.adj, match_l, match_r)]
    return MatchingResult(pairs, perfect, witness, phases)


def union_size(sets: Sequence[VertexSet], members: Sequence[int]) -> int:
    bits = 0
    for i in members:
        bits |= sets[i].bits
    return bits.bit_count()


@dataclass
class SdrResult:
    representatives: list | None
    hall_witness: list | None = None
    matching: MatchingResult | None = None

    @property
    def found(self) -> bool:
        return self.representatives is not None


def sdr(sets: Sequence[VertexSet]) -> SdrResult:
    """Distinct representatives ``rep[k] in sets[k]``, or a family of indices violating Hall."""
    left = list(range(len(sets)))
    g = CandidacyGraph.from_sets(left, [list(s) for s in sets])
    res = max_matching(g)
    if not res.perfect:
        return SdrResult(None, res.hall_witness, res)
    rep = res.as_dict()
    return SdrResult([rep[k] for k in left], None, res)


@dataclass
class HallAudit:
    m: int
    d3: Fraction
    sizes_ok: bool  # every |H_x| > d3*M
    unions_ok: bool  # sampled |S| >= d3*M have |union| >= (1-d3)*M
    covers_ok: bool  # every y lies in >= d3*M sets
    min_set_size: int
    min_union_margin: Fraction | None
    min_cover: int
    small_sets: list = field(default_factory=list)
    rare_hosts: list = field(default_factory=list)
    samples: int = 0

    @property
    def passed(self) -> bool:
        return self.sizes_ok and self.unions_ok and self.covers_ok

    def to_dict(self) -> dict:
        return {
            "M": self.m,
            "d3": str(self.d3),
            "sizes_ok": self.sizes_ok,
            "unions_ok": self.unions_ok,
            "covers_ok": self.covers_ok,
            "min_set_size": self.min_set_size,
            "min_union_margin": None if self.min_union_margin is None else str(self.min_union_margin),
            "min_cover": self.min_cover,
            "small_sets": self.small_sets,
            "rare_hosts": self.rare_hosts,
            "samples": self.samples,
        }


def hall_audit(sets: Sequence[VertexSet], d3, right: VertexSet | None = None, samples: int = 200, seed=0) -> HallAudit:
    """Check the three sufficient conditions for an SDR of ``sets`` over ``right``.

    The subset condition is checked on ``samples`` seeded random families
    only; the other two are exact.
    """
    d3 = as_fraction(d3)
    m = len(sets)
    if right is None:
        bits = 0
        for s in sets:
            bits |= s.bits
        right = VertexSet(sets[0].universe, sets[0].size, bits) if sets else None
    sizes = [len(s & right) for s in sets]
    small_sets = [k for k, sz in enumerate(sizes) if not sz > d3 * m]
    covers = {y: sum(1 for s in sets if y in s) for y in (right or [])}
    rare_hosts = [y for y, c in covers.items() if c < d3 * m]

    rng = make_rng(seed)
    lo = max(1, ceil_frac(d3 * m))
    margin = None
    unions_ok = True
    done = 0
    if m:
        for _ in range(samples):
            k = int(rng.integers(lo, m + 1))
            members = rng.choice(m, size=k, replace=False).tolist()
            u = union_size([s & right for s in sets], members)
            gap = u - (1 - d3) * m
            margin = gap if margin is None else min(margin, gap)
            unions_ok &= gap >= 0
            done += 1
    return HallAudit(
        m=m,
        d3=d3,
        sizes_ok=not small_sets,
        unions_ok=unions_ok,
        covers_ok=not rare_hosts,
        min_set_size=min(sizes) if sizes else 0,
        min_union_margin=margin,
        min_cover=min(covers.values()) if covers else 0,
        small_sets=small_sets,
        rare_hosts=rare_hosts,
        samples=done,
    )

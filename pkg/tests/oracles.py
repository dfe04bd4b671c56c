"""Reference implementations written without reusing package internals.

They are slow and simple on purpose; tests compare the package against them.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from itertools import combinations

import numpy as np


def regular_by_enumeration(biadj: np.ndarray, eps: Fraction) -> bool:
    """Every X, Y with |X| > eps|A|, |Y| > eps|B| has |d(X,Y) - d(A,B)| < eps.

    For a fixed X the extreme values of e(X, Y) over |Y| = k are the sums of
    the k smallest and k largest column counts, so only X is enumerated.
    """
    a, b = biadj.shape
    m = biadj.astype(int)
    d = Fraction(int(m.sum()), a * b)
    ks = [k for k in range(1, b + 1) if k > eps * b]
    for size in range(1, a + 1):
        if not size > eps * a:
            continue
        for xs in combinations(range(a), size):
            cols = sorted(m[list(xs)].sum(axis=0).tolist())
            lo = hi = 0
            prefix_lo = [0]
            prefix_hi = [0]
            for k in range(b):
                lo += cols[k]
                hi += cols[b - 1 - k]
                prefix_lo.append(lo)
                prefix_hi.append(hi)
            for k in ks:
                for e in (prefix_lo[k], prefix_hi[k]):
                    if abs(Fraction(e, size * k) - d) >= eps:
                        return False
    return True


def kuhn_matching_size(n_left: int, n_right: int, adj) -> int:
    """One augmenting path per left vertex, found by plain recursive search."""
    mate = [-1] * n_right

    def augment(u, seen):
        for v in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            if mate[v] == -1 or augment(mate[v], seen):
                mate[v] = u
                return True
        return False

    return sum(augment(u, set()) for u in range(n_left))


def distances(adj, source: int) -> dict[int, int]:
    dist = {source: 0}
    q = deque([source])
    while q:
        u = q.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def replay_run(inst, log, phi_final) -> list[str]:
    """Re-derive C and H from scratch along a sequential selection log.

    Returns a list of violations of: selection windows, logged pairwise
    counts, monotone shrinkage, H within C, occupancy, and the candidate
    size lower bound ``prod (d - eps) * |C_0|`` over embedded neighbours.
    """
    host, pat, p = inst.host, inst.pattern, inst.params
    N = host.n_per_cluster
    g = host.graph.matrix
    adj = pat.adjacency()
    psi = pat.assignment
    n = pat.order
    allowed = np.zeros((n, host.order), dtype=bool)
    for x in range(n):
        allowed[x, psi[x] * N:(psi[x] + 1) * N] = True
    for rs in inst.restrictions:
        allowed[rs.vertex] &= rs.allowed.mask()
    init_size = allowed.sum(axis=1)
    dens = {}
    for (i, j) in host.cluster_graph.sorted_edges():
        blk = g[i * N:(i + 1) * N, j * N:(j + 1) * N]
        dens[(i, j)] = dens[(j, i)] = Fraction(int(blk.sum()), N * N)

    phi = {}
    occupied = np.zeros(host.order, dtype=bool)
    prev_c = allowed.copy()
    prev_h = allowed.copy()
    bad = []

    def c_set(y):
        s = allowed[y].copy()
        for z in adj[y]:
            if z in phi:
                s &= g[phi[z]]
        return s

    for k, rec in enumerate(log):
        if rec.t != k + 1:
            bad.append(f"log position {k} has t={rec.t}")
        x, v = rec.x, rec.v
        hx = c_set(x) & ~occupied
        if not hx[v]:
            bad.append(f"t={rec.t}: image of {x} not in its host set")
        if rec.pool > int(hx.sum()):
            bad.append(f"t={rec.t}: logged pool larger than H")
        for y in adj[x]:
            if y in phi:
                continue
            cy = c_set(y)
            hy = cy & ~occupied
            d = dens[(psi[x], psi[y])]
            lo, hi = d - p.eps, d + p.eps
            for s in (hy, cy):
                deg, size = int((g[v] & s).sum()), int(s.sum())
                if not lo * size <= deg <= hi * size:
                    bad.append(f"t={rec.t}: window for {x}->{v} at neighbour {y} ({deg}/{size})")
        for (y, passed, total, same) in rec.pairwise:
            cy = c_set(y)
            d = dens[(psi[x], psi[y])]
            lo, hi = d - p.eps, d + p.eps
            good = 0
            for y2 in same:
                s = c_set(y2) & cy
                deg, size = int((g[v] & s).sum()), int(s.sum())
                good += lo * size <= deg <= hi * size
            if good != passed or good < (1 - p.eps1) * total or total != len(same):
                bad.append(f"t={rec.t}: pairwise count for {x} at {y} is {good}, logged {passed}")
        phi[x] = v
        occupied[v] = True
        # C only changes at neighbours of x; H elsewhere just loses v
        for y in adj[x]:
            if y in phi:
                continue
            cy = c_set(y)
            hy = cy & ~occupied
            if (cy & ~prev_c[y]).any() or (hy & ~prev_h[y]).any():
                bad.append(f"t={rec.t}: sets of {y} grew")
            bound = Fraction(int(init_size[y]))
            for z in adj[y]:
                if z in phi:
                    bound *= dens[(psi[y], psi[z])] - p.eps
            if cy.sum() < bound:
                bad.append(f"t={rec.t}: |C_{y}| = {int(cy.sum())} below {float(bound):.3f}")
            prev_c[y], prev_h[y] = cy, hy
        if len(bad) > 20:
            break
    for x, v in phi.items():
        if phi_final is not None and phi_final[x] != v:
            bad.append(f"final image of {x} differs from the logged choice")
    return bad

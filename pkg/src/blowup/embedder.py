"""Deterministic two-phase embedding of a bounded-degree pattern into a blow-up host.

Phase 1 embeds pattern vertices one at a time in a prescribed order,
choosing each image with degree-window tests that keep the candidate sets
of the remaining vertices well spread. A set of buffer vertices is held
back and placed at the end by a system of distinct representatives
(phase 2).

Host vertices are addressed two ways: globally (``0 .. rN-1``) and locally
inside their cluster (``0 .. N-1``). Candidate sets are rows of boolean
matrices indexed by local host index; the counting inner loops are
matrix products, one row per candidate image.
"""

from __future__ import annotations

import heapq
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    EmbeddingFailure,
    HallFailure,
    InvariantError,
    PreprocessingError,
    SelectionExhausted,
    SweepFailure,
)
from .graph import HOST, VertexSet, bfs_distances, bits_from_bool, bool_from_bits, degree_into
from .instances import Instance
from .matching import CandidacyGraph, hall_audit, max_matching
from .params import ParameterCascade
from .regularity import ceil_frac, floor_frac
from .rng import split

log = logging.getLogger(__name__)

PAIRWISE_LIMIT = 64
UNEMBEDDED = -1


def _within(deg: np.ndarray, size: np.ndarray, lo: Fraction, hi: Fraction) -> np.ndarray:
    """Exact test ``lo*size <= deg <= hi*size`` on integer arrays."""
    deg = np.asarray(deg, dtype=np.int64)
    size = np.asarray(size, dtype=np.int64)
    return (deg * lo.denominator >= lo.numerator * size) & (deg * hi.denominator <= hi.numerator * size)


@dataclass
class EmbeddingState:
    """Everything that changes during a run.

    ``cand`` and ``hosts`` are the candidate sets C and host sets H of every
    pattern vertex, as rows over the local indices of its own cluster. Rows
    of embedded vertices are frozen at their last value.
    """

    t: int
    order: list
    phi: np.ndarray  # global host index per pattern vertex, -1 if unembedded
    cand: np.ndarray  # (n, N) bool
    hosts: np.ndarray  # (n, N) bool
    occupied: np.ndarray  # (r, N) bool
    buffers: list  # per cluster, list of pattern vertices
    m: int
    T0: int
    T1: int
    T: int | None = None
    forced: dict = field(default_factory=dict)  # pattern vertex -> cluster of its E_i
    e_pool: np.ndarray | None = None  # (r, N) bool, the unconsumed E_i
    clamped: list = field(default_factory=list)

    def unembedded(self) -> np.ndarray:
        return self.phi == UNEMBEDDED

    def copy(self) -> "EmbeddingState":
        return EmbeddingState(
            t=self.t,
            order=list(self.order),
            phi=self.phi.copy(),
            cand=self.cand.copy(),
            hosts=self.hosts.copy(),
            occupied=self.occupied.copy(),
            buffers=[list(b) for b in self.buffers],
            m=self.m,
            T0=self.T0,
            T1=self.T1,
            T=self.T,
            forced=dict(self.forced),
            e_pool=None if self.e_pool is None else self.e_pool.copy(),
            clamped=list(self.clamped),
        )

    def to_dict(self, params: ParameterCascade | None = None) -> dict:
        """Self-contained JSON-ready dump; set rows are hex bitmasks (bit k = local vertex k)."""
        hexrows = lambda mat: [format(bits_from_bool(row), "x") for row in mat]
        return {
            "format": "blowup-state/1",
            "t": self.t,
            "N": int(self.cand.shape[1]),
            "order": [int(x) for x in self.order],
            "phi": self.phi.tolist(),
            "C": hexrows(self.cand),
            "H": hexrows(self.hosts),
            "occupied": hexrows(self.occupied),
            "buffers": [[int(b) for b in bs] for bs in self.buffers],
            "m": self.m,
            "T0": self.T0,
            "T1": self.T1,
            "T": self.T,
            "forced": {str(k): int(v) for k, v in self.forced.items()},
            "E_pool": None if self.e_pool is None else hexrows(self.e_pool),
            "clamped": list(self.clamped),
            "params": None if params is None else params.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EmbeddingState":
        n_local = d["N"]
        rows = lambda hx: np.array([bool_from_bits(int(h, 16), n_local) for h in hx], dtype=bool).reshape(len(hx), n_local)
        return cls(
            t=d["t"],
            order=list(d["order"]),
            phi=np.array(d["phi"], dtype=np.int64),
            cand=rows(d["C"]),
            hosts=rows(d["H"]),
            occupied=rows(d["occupied"]),
            buffers=[list(b) for b in d["buffers"]],
            m=d["m"],
            T0=d["T0"],
            T1=d["T1"],
            T=d["T"],
            forced={int(k): v for k, v in d["forced"].items()},
            e_pool=None if d["E_pool"] is None else rows(d["E_pool"]),
            clamped=list(d["clamped"]),
        )

    def equals(self, other: "EmbeddingState") -> bool:
        return self.to_dict() == other.to_dict()


@dataclass
class SelectionLog:
    """What one selection saw, enough to re-verify its windows afterwards."""

    t: int
    x: int
    v: int
    pool: int
    qualifying: int
    forced: bool
    windows: list  # (y, kind, degree, size, lo, hi) for kind in {"H", "C"}
    pairwise: list  # (y, passed, total, sampled same-cluster vertices)


@dataclass
class Qualification:
    """Window evaluation of every image in the host set of one pattern vertex."""

    x: int
    i: int
    forced: bool
    cands: np.ndarray  # local host indices
    ok: np.ndarray  # candidate passes every window
    score: np.ndarray  # min over unembedded neighbours y of deg(v, H_y)
    ldata: list
    hist: dict

    def exhausted(self, t: int) -> SelectionExhausted:
        return SelectionExhausted(
            f"no admissible image for pattern vertex {self.x} at t={t} among {len(self.cands)} candidates",
            t=t, vertex=self.x, histogram=self.hist, candidates=len(self.cands), forced=self.forced,
        )


@dataclass
class RunReport:
    outcome: str = "pending"
    mode: str = "sequential"
    failure: dict | None = None
    n: int = 0
    T0: int = 0
    T1: int = 0
    T: int | None = None
    buffers_per_cluster: list = field(default_factory=list)
    clamped: list = field(default_factory=list)
    candidates_scanned: int = 0
    pairwise_sampled: int = 0
    pattern_sweeps: list = field(default_factory=list)  # (t, exceptional count)
    buffers_pulled: int = 0  # buffer vertices brought forward by pattern sweeps
    host_sweep: dict | None = None
    min_host_set: int | None = None  # min |H_{t,y}| over all t < embedding time of y
    min_host_set_ratio: float | None = None  # same, divided by N
    host_floor_violations: int = 0
    phase2: list = field(default_factory=list)
    audits: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    phase1_seconds: float = 0.0
    phase2_seconds: float = 0.0
    rounds: dict | None = None

    @property
    def success(self) -> bool:
        return self.outcome == "success"

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        return out


@dataclass
class Verification:
    ok: bool
    violations: list

    def __bool__(self) -> bool:
        return self.ok


class Embedder:
    """Holds the instance-derived constants and the mutable state of one run."""

    def __init__(self, inst: Instance, seed=0, check: bool = False, pairwise_limit: int = PAIRWISE_LIMIT,
                 audit_every_sweep: bool = True, tiebreak: str = "cover"):
        self.inst = inst
        self._pulled: set[int] = set()
        self._started = False
        self.tiebreak = tiebreak
        self.params = inst.params
        self.check = check
        self.pairwise_limit = pairwise_limit
        self.audit_every_sweep = audit_every_sweep
        host, pat = inst.host, inst.pattern
        self.N = host.n_per_cluster
        self.r = host.r
        self.n = pat.order
        self.psi = np.array(pat.assignment, dtype=np.int64)
        self.adj = pat.adjacency()
        self.members = [np.flatnonzero(self.psi == i) for i in range(self.r)]
        self.blocks = {}
        self.fblocks = {}
        self.dens = {}
        for (i, j) in host.cluster_graph.sorted_edges():
            for a, b in ((i, j), (j, i)):
                blk = np.ascontiguousarray(host.block(a, b))
                self.blocks[(a, b)] = blk
                self.fblocks[(a, b)] = blk.astype(np.float32)
                self.dens[(a, b)] = host.cluster_graph.density(a, b)
        self.restricted = inst.restriction_map()
        streams = split(seed)
        self.rng = np.random.default_rng(streams["select"])
        self.report = RunReport(n=self.n)
        self.log: list[SelectionLog] = []
        self.state: EmbeddingState | None = None
        self._bound: dict[int, Fraction] = {}

    # ------------------------------------------------------------------ preprocessing

    def _local_mask(self, vs: VertexSet, cluster: int) -> np.ndarray:
        return vs.mask()[cluster * self.N:(cluster + 1) * self.N]

    def choose_buffers(self) -> list[list[int]]:
        """Greedy round-robin over clusters in vertex order.

        Buffers of one cluster are pairwise at distance >= 4; buffers of
        different clusters are at least non-adjacent, so no edge of H runs
        between two vertices left for phase 2. If a pass falls short, the
        pass is repeated with each other cluster taking the first pick, and
        then once more over candidates sorted by degree.
        """
        d1 = self.params.d1
        want = ceil_frac(d1 * self.N)
        if want < 1:
            want = 1
        if d1 * self.N < 1:
            self.report.clamped.append("buffer-count")
        best = None
        by_index = self.members
        by_degree = [sorted(mem.tolist(), key=lambda x: (len(self.adj[x]), x)) for mem in self.members]
        for members in (by_index, by_degree):
            for lead in range(self.r):
                chosen = self._buffer_pass(want, lead, members)
                short = {i: len(c) for i, c in enumerate(chosen) if len(c) < want}
                if not short:
                    return chosen
                if best is None or sum(want - c for c in short.values()) < sum(want - c for c in best.values()):
                    best = short
        raise PreprocessingError(
            f"could only place {best} of {want} buffer vertices per cluster at pairwise distance >= 4",
            achievable=best,
            wanted=want,
        )

    def _buffer_pass(self, want: int, lead: int, members) -> list[list[int]]:
        blocked_same = [set() for _ in range(self.r)]
        blocked_any = set()
        chosen = [[] for _ in range(self.r)]
        ptr = [0] * self.r
        active = set(range(self.r))
        rotation = [(lead + k) % self.r for k in range(self.r)]
        while active:
            for i in [c for c in rotation if c in active]:
                mem = members[i]
                picked = False
                while ptr[i] < len(mem):
                    x = int(mem[ptr[i]])
                    ptr[i] += 1
                    if x in blocked_same[i] or x in blocked_any or x in self.restricted:
                        continue
                    chosen[i].append(x)
                    blocked_same[i].update(bfs_distances(self.adj, [x], limit=3))
                    blocked_any.add(x)
                    blocked_any.update(self.adj[x])
                    picked = True
                    break
                if not picked or len(chosen[i]) == want:
                    active.discard(i)
        return chosen

    def _rest_order(self, placed: set, exclude: set) -> list[int]:
        """Remaining vertices, each time taking one with the most already-placed neighbours."""
        count = {x: sum(1 for y in self.adj[x] if y in placed) for x in range(self.n)
                 if x not in placed and x not in exclude}
        heap = [(-c, x) for x, c in count.items()]
        heapq.heapify(heap)
        out = []
        done = set()
        while heap:
            c, x = heapq.heappop(heap)
            if x in done or -c != count[x]:
                continue
            done.add(x)
            out.append(x)
            for y in self.adj[x]:
                if y in count and y not in done:
                    count[y] += 1
                    heapq.heappush(heap, (-count[y], y))
        return out

    def preprocess(self) -> EmbeddingState:
        p = self.params
        buffers = self.choose_buffers()
        flat_buffers = sorted(b for bs in buffers for b in bs)
        bufset = set(flat_buffers)
        self._bufset = bufset
        order = []
        placed = set()
        for b in flat_buffers:
            for y in self.adj[b]:
                if y not in placed:
                    placed.add(y)
                    order.append(y)
        T0 = len(order)
        for x in sorted(self.restricted):
            if x not in placed:
                placed.add(x)
                order.append(x)
        order += self._rest_order(placed, bufset)
        order += flat_buffers

        T1 = floor_frac(p.d2 * self.n)
        if T1 < 1:
            T1 = 1
            self.report.clamped.append("T1")

        cand = np.ones((self.n, self.N), dtype=bool)
        for x, allowed in self.restricted.items():
            cand[x] = self._local_mask(allowed, self.psi[x])
        state = EmbeddingState(
            t=0,
            order=order,
            phi=np.full(self.n, UNEMBEDDED, dtype=np.int64),
            cand=cand,
            hosts=cand.copy(),
            occupied=np.zeros((self.r, self.N), dtype=bool),
            buffers=buffers,
            m=len(flat_buffers),
            T0=T0,
            T1=T1,
            e_pool=np.zeros((self.r, self.N), dtype=bool),
            clamped=list(self.report.clamped),
        )
        self._bound = {x: Fraction(int(cand[x].sum())) for x in range(self.n)}
        self.state = state
        rep = self.report
        rep.T0, rep.T1 = T0, T1
        rep.buffers_per_cluster = [len(b) for b in buffers]
        return state

    # ------------------------------------------------------------------ selection

    def qualifying(self, x: int) -> "Qualification":
        """Evaluate every window for every image in the current host set of ``x``."""
        st, p = self.state, self.params
        i = int(self.psi[x])
        pool = st.hosts[x]
        forced = x in st.forced
        if forced:
            pool = pool & st.e_pool[i]
        cands = np.flatnonzero(pool)
        k = len(cands)
        self.report.candidates_scanned += k
        if k == 0:
            raise SelectionExhausted(
                f"empty host set for pattern vertex {x} at t={st.t + 1}",
                t=st.t + 1, vertex=x, histogram={"empty": 1}, forced=forced,
            )
        unemb = st.unembedded()
        ys = [y for y in self.adj[x] if unemb[y]]
        ok = np.ones(k, dtype=bool)
        score = np.full(k, np.iinfo(np.int64).max, dtype=np.int64)
        hist = {"H-window": 0, "C-window": 0, "pairwise": 0}
        ldata = []
        for y in ys:
            j = int(self.psi[y])
            a = self.fblocks[(i, j)][cands]
            d = self.dens[(i, j)]
            lo, hi = d - p.eps, d + p.eps
            hs, cy = st.hosts[y], st.cand[y]
            deg_h = (a @ hs.astype(np.float32)).astype(np.int64)
            deg_c = (a @ cy.astype(np.float32)).astype(np.int64)
            ok_h = _within(deg_h, int(hs.sum()), lo, hi)
            ok_c = _within(deg_c, int(cy.sum()), lo, hi)

            same = np.flatnonzero(unemb & (self.psi == j))
            if len(same) > self.pairwise_limit:
                same = np.sort(self.rng.choice(same, size=self.pairwise_limit, replace=False))
                self.report.pairwise_sampled += 1
            inter = st.cand[same] & cy
            sizes = inter.sum(axis=1)
            degs = (a @ inter.T.astype(np.float32)).astype(np.int64)
            passed = _within(degs, sizes[None, :], lo, hi).sum(axis=1)
            need = 1 - p.eps1
            ok_p = passed * need.denominator >= need.numerator * len(same)

            hist["H-window"] += int((~ok_h).sum())
            hist["C-window"] += int((~ok_c).sum())
            hist["pairwise"] += int((~ok_p).sum())
            ok &= ok_h & ok_c & ok_p
            score = np.minimum(score, deg_h)
            ldata.append((y, j, lo, hi, deg_h, deg_c, int(hs.sum()), int(cy.sum()), same, passed))
        return Qualification(x, i, forced, cands, ok, score, ldata, hist)

    def select_image(self, x: int) -> int:
        """Pick the local image of ``x`` from its host set (or its E_i slot)."""
        q = self.qualifying(x)
        if not q.ok.any():
            raise q.exhausted(self.state.t + 1)
        idx = int(self.preference(q)[0])
        return self.commit_choice(q, idx)

    def commit_choice(self, q: "Qualification", idx: int, t: int | None = None) -> int:
        """Log the selection of ``q.cands[idx]`` and re-verify it in check mode."""
        st = self.state
        t = st.t + 1 if t is None else t
        v = int(q.cands[idx])
        windows, pairwise = [], []
        for (y, j, lo, hi, deg_h, deg_c, sh, sc, same, passed) in q.ldata:
            windows.append((y, "H", int(deg_h[idx]), sh, lo, hi))
            windows.append((y, "C", int(deg_c[idx]), sc, lo, hi))
            pairwise.append((y, int(passed[idx]), len(same), same.tolist()))
        self.log.append(SelectionLog(t, q.x, q.i * self.N + v, len(q.cands), int(q.ok.sum()),
                                     q.forced, windows, pairwise))
        if self.check:
            self._check_selection(q.x, q.i, v, q.ldata)
        return v

    def preference(self, q: "Qualification") -> np.ndarray:
        """Indices of qualifying candidates, best first under the tie-break rule."""
        st = self.state
        n_ok = int(q.ok.sum())
        tie = np.arange(len(q.cands))
        relief = np.where(q.ok, q.score, -1)
        if self.tiebreak == "cover":
            un = st.unembedded()
            bs = [b for b in st.buffers[q.i] if un[b]]
            cover = st.cand[bs][:, q.cands].sum(axis=0) if bs else np.zeros(len(q.cands), dtype=np.int64)
            # fewest buffer candidate sets, then most relief, then smallest index
            order = np.lexsort((tie, -relief, np.where(q.ok, cover, np.iinfo(np.int64).max)))
        else:
            order = np.lexsort((tie, -relief))
        return order[:n_ok]

    def _check_selection(self, x, i, v, ldata) -> None:
        """Recount every window of the chosen image with bitset popcounts."""
        st, p = self.state, self.params
        g = self.inst.host.graph
        gv = i * self.N + v
        for (y, j, lo, hi, _dh, _dc, _sh, _sc, same, _passed) in ldata:
            off = j * self.N
            def glob(mask):
                return VertexSet(HOST, g.order, bits_from_bool(mask) << off)
            for s in (st.hosts[y], st.cand[y]):
                vs = glob(s)
                deg = degree_into(g, gv, vs)
                if not (lo * len(vs) <= deg <= hi * len(vs)):
                    raise InvariantError("selection-window", f"t={st.t + 1} x={x} y={y}")
            good = 0
            for y2 in same:
                vs = glob(st.cand[y2] & st.cand[y])
                deg = degree_into(g, gv, vs)
                good += lo * len(vs) <= deg <= hi * len(vs)
            if good < (1 - p.eps1) * len(same):
                raise InvariantError("selection-pairwise", f"t={st.t + 1} x={x} y={y}")

    # ------------------------------------------------------------------ update

    def update_after_embedding(self, x: int, v: int) -> None:
        """Record phi(x) = v and shrink the sets of every unembedded vertex."""
        st = self.state
        i = int(self.psi[x])
        if self.check:
            prev_c, prev_h = st.cand.copy(), st.hosts.copy()
        st.t += 1
        st.phi[x] = i * self.N + v
        st.occupied[i, v] = True
        st.e_pool[i, v] = False
        st.hosts[self.members[i], v] = False
        for y in self.adj[x]:
            if st.phi[y] == UNEMBEDDED:
                j = int(self.psi[y])
                nb = self.blocks[(i, j)][v]
                st.cand[y] &= nb
                st.hosts[y] &= nb
                self._bound[y] *= self.dens[(i, j)] - self.params.eps
        if self.check:
            self._check_state(prev_c, prev_h)

    def _check_state(self, prev_c=None, prev_h=None) -> None:
        st = self.state
        un = st.unembedded()
        rows = np.flatnonzero(un)
        if (st.hosts[rows] & ~st.cand[rows]).any():
            raise InvariantError("host-subset-candidate", f"t={st.t}")
        occ = st.occupied[self.psi[rows]]
        if (st.hosts[rows] & occ).any():
            raise InvariantError("host-set-unoccupied", f"t={st.t}")
        if prev_c is not None:
            if (st.cand[rows] & ~prev_c[rows]).any() or (st.hosts[rows] & ~prev_h[rows]).any():
                raise InvariantError("monotone-shrinkage", f"t={st.t}")
        sizes = st.cand[rows].sum(axis=1)
        for y, s in zip(rows.tolist(), sizes.tolist()):
            if s < self._bound[y]:
                raise InvariantError("candidate-size-bound", f"t={st.t} y={y}: {s} < {self._bound[y]}")
        emb = st.phi[~un]
        if len(set(emb.tolist())) != len(emb):
            raise InvariantError("phi-injective", f"t={st.t}")
        done = np.flatnonzero(~un)
        if (st.phi[done] // self.N != self.psi[done]).any():
            raise InvariantError("phi-respects-psi", f"t={st.t}")
        g = self.inst.host.graph.matrix
        for x in done.tolist():
            for y in self.adj[x]:
                if st.phi[y] != UNEMBEDDED and not g[st.phi[x], st.phi[y]]:
                    raise InvariantError("edge-preserved", f"t={st.t} edge {x}-{y}")

    # ------------------------------------------------------------------ sweeps

    def _move_to_front(self, front: list[int]) -> None:
        st = self.state
        fs = set(front)
        rest = [y for y in st.order[st.t:] if y not in fs]
        st.order = st.order[:st.t] + list(front) + rest

    def sweep_exceptional_pattern(self) -> list[int]:
        """Bring forward every unembedded vertex whose host set has at most d1^2 * n vertices."""
        st, p = self.state, self.params
        lim = p.d1 * p.d1 * self.n
        sizes = st.hosts.sum(axis=1)
        exc = [y for y in st.order[st.t:] if sizes[y] * lim.denominator <= lim.numerator]
        if exc:
            self._move_to_front(exc)
            self._pulled.update(exc)
            self.report.buffers_pulled = len(self._pulled & self._bufset)
        self.report.pattern_sweeps.append((st.t, len(exc)))
        per_cluster = np.bincount(self.psi[exc], minlength=self.r) if exc else np.zeros(self.r, int)
        bound = self._floored(p.d3 * p.d3 * self.N, "exceptional-pattern-bound")
        for i, c in enumerate(per_cluster.tolist()):
            if c > bound:
                self._warn(f"t={st.t}: {c} exceptional pattern vertices in cluster {i} exceed (d''')^2 N = {float(bound):.3g}")
        if self.audit_every_sweep:
            self.report.audits.append(self.audit_state())
        return exc

    def exceptional_host_sets(self) -> list[np.ndarray]:
        """Per cluster, free host vertices lying in fewer than d2*|B_i| buffer candidate sets."""
        st, p = self.state, self.params
        un = st.unembedded()
        out = []
        for i in range(self.r):
            bs = [b for b in st.buffers[i] if un[b]]
            if not bs:
                out.append(np.zeros(self.N, dtype=bool))
                continue
            cover = st.cand[bs].sum(axis=0)
            lim = p.d2 * len(bs)
            out.append(~st.occupied[i] & (cover * lim.denominator < lim.numerator))
        return out

    def sweep_exceptional_host(self) -> list[int]:
        st, p = self.state, self.params
        ex = self.exceptional_host_sets()
        need = [int(e.sum()) for e in ex]
        un = st.unembedded()
        bufset = {b for bs in st.buffers for b in bs}
        embedded = np.flatnonzero(~un).tolist()
        blocked = set(bfs_distances(self.adj, embedded, limit=3))
        chosen = []
        got = [0] * self.r
        for x in range(self.n):
            i = int(self.psi[x])
            if got[i] >= need[i] or x in blocked or not un[x] or x in bufset or x in self.restricted:
                continue
            chosen.append(x)
            got[i] += 1
            blocked.update(bfs_distances(self.adj, [x], limit=3))
        self.report.host_sweep = {"t": st.t, "E_sizes": need, "chosen": len(chosen)}
        short = {i: (got[i], need[i]) for i in range(self.r) if got[i] < need[i]}
        if short:
            raise SweepFailure(
                f"not enough untouched pattern vertices for exceptional host vertices: {short}",
                t=st.t, shortfall=short,
            )
        for x in chosen:
            i = int(self.psi[x])
            free = ~st.occupied[i]
            if not np.array_equal(st.hosts[x], free & st.cand[x]) or not st.cand[x].all():
                raise InvariantError("E-untouched", f"pattern vertex {x}")
            st.forced[x] = i
        for i in range(self.r):
            st.e_pool[i] = ex[i]
        bound = self._floored(p.eps2 * self.N, "exceptional-host-bound")
        for i, c in enumerate(need):
            if not c < bound:
                self._warn(f"|E_{i}| = {c} is not below eps'' N = {float(bound):.3g}")
        self._move_to_front(chosen)
        return chosen

    # ------------------------------------------------------------------ audits

    def _floored(self, value, name: str):
        """Thresholds below one are raised to one and reported as clamped."""
        if value >= 1:
            return value
        if name not in self.report.clamped:
            self.report.clamped.append(name)
        return 1

    def _warn(self, msg: str) -> None:
        log.warning(msg)
        self.report.warnings.append(msg)

    def audit_state(self, seed: int = 0) -> dict:
        return audit_state(self.inst, self.state, seed=seed)

    # ------------------------------------------------------------------ phases

    def _track_host_sets(self) -> None:
        st = self.state
        un = np.flatnonzero(st.unembedded())
        if len(un) == 0:
            return
        smallest = int(st.hosts[un].sum(axis=1).min())
        rep = self.report
        if rep.min_host_set is None or smallest < rep.min_host_set:
            rep.min_host_set = smallest
            rep.min_host_set_ratio = smallest / self.N
        if not smallest > self.params.d2 * self.N:
            rep.host_floor_violations += 1

    def step(self) -> None:
        """Steps 1-4 for the next vertex of the order."""
        st = self.state
        x = st.order[st.t]
        v = self.select_image(x)
        self.update_after_embedding(x, v)
        st.forced.pop(x, None)
        self._track_host_sets()
        if st.t % st.T1 == 0:
            self.sweep_exceptional_pattern()
        if st.t == st.T0:
            self.sweep_exceptional_host()

    def nonbuffers_left(self) -> int:
        st = self.state
        un = st.unembedded()
        for bs in st.buffers:
            un[bs] = False
        return int(un.sum())

    def begin_phase1(self) -> None:
        """Initial audit, plus the host sweep when there are no buffer neighbours."""
        if self.state is None:
            self.preprocess()
        if self._started:
            return
        self._started = True
        self._track_host_sets()
        self.report.audits.append(self.audit_state())
        if self.state.T0 == 0:
            self.sweep_exceptional_host()

    def run_phase1(self) -> EmbeddingState:
        t0 = time.perf_counter()
        self.begin_phase1()
        st = self.state
        while self.nonbuffers_left() > 0:
            self.step()
        st.T = st.t
        self.report.T = st.T
        self.report.audits.append(self.audit_state())
        self.report.phase1_seconds += time.perf_counter() - t0
        return st

    def run_phase2(self, matcher=None) -> None:
        """Distinct representatives for the leftover vertices, cluster by cluster.

        ``matcher`` maps a CandidacyGraph to ``(MatchingResult, extra)``;
        the default is Hopcroft-Karp with no extra report fields.
        """
        matcher = matcher or _sequential_matcher
        t0 = time.perf_counter()
        st, p = self.state, self.params
        un = st.unembedded()
        for i in range(self.r):
            left = [int(x) for x in self.members[i] if un[x]]
            right = np.flatnonzero(~st.occupied[i]).tolist()
            if not left:
                continue
            if len(left) != len(right):
                raise InvariantError("phase2-balanced", f"cluster {i}: {len(left)} vs {len(right)}")
            free = ~st.occupied[i]
            g = CandidacyGraph.from_matrix(st.hosts[left][:, free], left=left, right=right)
            res, extra = matcher(g)
            sets = [VertexSet("local", self.N, bits_from_bool(st.hosts[x])) for x in left]
            audit = hall_audit(sets, p.d3, VertexSet("local", self.N, bits_from_bool(~st.occupied[i])), seed=i)
            self.report.phase2.append({
                "cluster": i, "M": len(left), "matched": res.size, "phases": res.phases,
                "hall": audit.to_dict(), **extra,
            })
            if not audit.sizes_ok:
                self._warn(f"cluster {i}: Hall size condition fails for {len(audit.small_sets)} leftover vertices")
            if not res.perfect:
                raise HallFailure(
                    f"no distinct representatives in cluster {i}: {len(left) - res.size} unmatched",
                    t=st.t, witness=res.hall_witness,
                )
            for x, v in res.pairs:
                st.phi[x] = i * self.N + v
                st.occupied[i, v] = True
        st.t = self.n
        self.report.phase2_seconds += time.perf_counter() - t0

    def run(self):
        rep = self.report
        rep.clamped = []
        try:
            self.preprocess()
            self.run_phase1()
            self.run_phase2()
        except EmbeddingFailure as e:
            rep.outcome = "failure"
            rep.failure = {"kind": e.kind, "t": e.t, "vertex": e.vertex, "message": str(e),
                           "info": _jsonable(e.info)}
            return None, rep
        phi = [int(v) for v in self.state.phi]
        ver = verify_embedding(self.inst, phi)
        if not ver.ok:
            raise InvariantError("verifier-clean", "; ".join(ver.violations[:5]))
        rep.outcome = "success"
        return phi, rep


def _sequential_matcher(g: CandidacyGraph):
    return max_matching(g), {}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def preprocess(inst: Instance, seed=0) -> EmbeddingState:
    return Embedder(inst, seed).preprocess()


def run_phase1(inst: Instance, seed=0, check: bool = False):
    emb = Embedder(inst, seed, check=check)
    try:
        emb.run_phase1()
    except EmbeddingFailure as e:
        emb.report.outcome = "failure"
        emb.report.failure = {"kind": e.kind, "t": e.t, "vertex": e.vertex, "message": str(e),
                              "info": _jsonable(e.info)}
        raise
    return emb.state, emb.report


def run(inst: Instance, seed=0, check: bool = False):
    """Embed the whole pattern. Returns ``(phi, report)``; ``phi`` is None on failure."""
    emb = Embedder(inst, seed, check=check)
    phi, rep = emb.run()
    return phi, rep


def audit_state(inst: Instance, state: EmbeddingState, seed: int = 0, spread_samples: int = 8) -> dict:
    """Read-only snapshot of the quantities the correctness argument controls."""
    p = inst.params
    N = inst.n_per_cluster
    psi = np.array(inst.pattern.assignment)
    un = state.unembedded()
    rows = np.flatnonzero(un)
    out = {"t": state.t, "unembedded": int(len(rows))}
    if len(rows):
        sizes = state.hosts[rows].sum(axis=1)
        out["min_host_set"] = int(sizes.min())
        out["host_floor"] = float(p.d2 * N)
        out["host_floor_ok"] = bool(sizes.min() > p.d2 * N)
    else:
        out["min_host_set"] = None
        out["host_floor_ok"] = True
    rng = np.random.default_rng(seed + state.t)
    dmax = inst.pattern.max_degree
    clusters = []
    for i in range(inst.r):
        s = np.flatnonzero(un & (psi == i))
        rec = {"cluster": i, "S": int(len(s))}
        if len(s):
            prof = state.cand[s].sum(axis=0)
            total = int(prof.sum())
            dens = Fraction(total, len(s) * N)
            rel = (1 - p.eps2) * dens * len(s)
            absolute = p.delta ** dmax / 2 * len(s)
            rec["d_U"] = float(dens)
            rec["profile_exceptional"] = int(sum(1 for c in prof.tolist() if c < rel))
            rec["profile_exceptional_abs"] = int(sum(1 for c in prof.tolist() if c < absolute))
            rec["profile_bound"] = float(p.eps2 * N)
            rec["profile_applies"] = bool(len(s) >= p.d3 * p.d3 * N)
            a_size = max(1, ceil_frac(p.d3 * N))
            worst = 0
            for _ in range(spread_samples):
                a = np.zeros(N, dtype=bool)
                a[rng.choice(N, size=a_size, replace=False)] = True
                inter = (state.cand[s] & a).sum(axis=1)
                csz = state.cand[s].sum(axis=1)
                bad = int((2 * N * inter < a_size * csz).sum())
                worst = max(worst, bad)
            rec["spread_worst_exceptions"] = worst
            rec["spread_bound"] = float(p.d3 * p.d3 * N)
        clusters.append(rec)
    out["clusters"] = clusters
    return out


def verify_embedding(inst: Instance, phi) -> Verification:
    """Check totality, injectivity, cluster respect, edge preservation and restrictions."""
    pat, host = inst.pattern, inst.host
    N = host.n_per_cluster
    bad = []
    phi = list(phi)
    if len(phi) != pat.order:
        return Verification(False, [f"totality: {len(phi)} images for {pat.order} pattern vertices"])
    for x, v in enumerate(phi):
        if not isinstance(v, (int, np.integer)) or not 0 <= v < host.order:
            bad.append(f"totality: vertex {x} has no valid image ({v!r})")
    if bad:
        return Verification(False, bad)
    seen = {}
    for x, v in enumerate(phi):
        if v in seen:
            bad.append(f"injectivity: vertices {seen[v]} and {x} both map to {v}")
        else:
            seen[v] = x
    for x, v in enumerate(phi):
        if v // N != pat.assignment[x]:
            bad.append(f"psi-respect: vertex {x} assigned to cluster {pat.assignment[x]} mapped into cluster {v // N}")
    g = host.graph.matrix
    for x, y in pat.graph.edges():
        if not g[phi[x], phi[y]]:
            bad.append(f"edge: {{{x},{y}}} maps to non-edge {{{phi[x]},{phi[y]}}}")
    for rs in inst.restrictions:
        if phi[rs.vertex] not in rs.allowed:
            bad.append(f"restriction: vertex {rs.vertex} mapped to {phi[rs.vertex]} outside C_x")
    return Verification(not bad, bad)

"""Round-based embedding: many far-apart pattern vertices per round.

Each round picks a set of unembedded pattern vertices that are pairwise at
distance at least four (a maximal independent set of an auxiliary graph),
evaluates the selection windows for all of them against the same state,
and embeds them at once through distinct representatives. Because the
chosen vertices have disjoint neighbourhoods, the per-vertex updates commute,
so a round is well defined regardless of the order in which it is applied.

When few vertices remain the run falls back to the one-at-a-time procedure,
and the leftover buffer vertices are matched by completing a greedy maximal
matching with short alternating paths.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .embedder import Embedder, _jsonable, verify_embedding
from .errors import BatchFailure, EmbeddingFailure, HallFailure, InvariantError
from .graph import Graph, VertexSet, bfs_distances
from .instances import Instance
from .matching import CandidacyGraph, MatchingResult, max_matching
from .regularity import as_fraction, floor_frac
from .rng import make_rng, stream

AUX = "aux"


# ---------------------------------------------------------------- maximal independent sets


def _luby(matrix: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Luby's rounds: local minima of fresh random priorities join, then leave with their neighbours."""
    n = matrix.shape[0]
    alive = np.ones(n, dtype=bool)
    chosen = np.zeros(n, dtype=bool)
    rounds = 0
    while alive.any():
        rounds += 1
        pri = rng.random(n)
        pri[~alive] = np.inf
        nb_min = np.where(matrix, pri[None, :], np.inf).min(axis=1, initial=np.inf)
        join = alive & (pri < nb_min)
        chosen |= join
        alive &= ~(join | matrix[join].any(axis=0))
    return chosen, rounds


def luby_mis(g: Graph, seed=0) -> VertexSet:
    """A maximal independent set of ``g``; the same seed gives the same set."""
    chosen, _ = _luby(g.matrix, make_rng(seed))
    return VertexSet.from_mask(g.universe, chosen)


def is_maximal_independent(g: Graph, s: VertexSet) -> bool:
    mask = s.mask()
    if (g.matrix[mask][:, mask]).any():
        return False
    dominated = mask | g.matrix[mask].any(axis=0)
    return bool(dominated.all())


@dataclass
class MisInstance:
    """Auxiliary graph over ``labels``: distance below four in H, or both already embedded."""

    graph: Graph
    labels: list
    embedded: frozenset

    @classmethod
    def build(cls, balls: list[set], candidates, embedded) -> "MisInstance":
        labels = list(candidates) + sorted(embedded)
        index = {x: k for k, x in enumerate(labels)}
        m = np.zeros((len(labels), len(labels)), dtype=bool)
        for k, x in enumerate(labels):
            for y in balls[x]:
                j = index.get(y)
                if j is not None and j != k:
                    m[k, j] = m[j, k] = True
        emb = [index[x] for x in embedded]
        if emb:
            m[np.ix_(emb, emb)] = True
            m[emb, emb] = False
        return cls(Graph(m, AUX), labels, frozenset(embedded))

    def validate(self) -> None:
        m = self.graph.matrix
        idx = [k for k, x in enumerate(self.labels) if x in self.embedded]
        sub = m[np.ix_(idx, idx)]
        if not (sub | np.eye(len(idx), dtype=bool)).all():
            raise InvariantError("aux-embedded-clique", "embedded vertices must be pairwise adjacent")


# ---------------------------------------------------------------- round log


@dataclass
class RoundRecord:
    t: int  # vertices embedded before the round
    remaining: int  # n', unembedded vertices before the round
    target: int  # floor(alpha * n'), capped by the segment being processed
    selected: int  # vertices kept from the independent set
    mis_iterations: int
    representatives: int  # vertices actually embedded
    retries: int = 0
    tier: str = "rest"


@dataclass
class RoundLog:
    alpha: str
    tail_threshold: int
    rounds: list = field(default_factory=list)
    tail_size: int | None = None  # n' when the sequential tail took over
    phase2: list = field(default_factory=list)

    @property
    def total_rounds(self) -> int:
        return len(self.rounds)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "tail_threshold": self.tail_threshold,
            "total_rounds": self.total_rounds,
            "tail_size": self.tail_size,
            "rounds": [asdict(r) for r in self.rounds],
            "phase2": self.phase2,
        }


def default_tail(n: int) -> int:
    """ceil((log2 n)^5), capped at n."""
    if n <= 1:
        return n
    return min(n, math.ceil(math.log2(n) ** 5))


# ---------------------------------------------------------------- batches


class BatchRunner:
    """Drives an :class:`Embedder` through batched rounds."""

    def __init__(self, emb: Embedder, alpha=None, seed=0, max_halvings: int = 2):
        self.emb = emb
        self.alpha = as_fraction(emb.params.alpha_batch if alpha is None else alpha)
        self.rng = stream(seed, "mis")
        self.max_halvings = max_halvings
        self.balls = [set(bfs_distances(emb.adj, [x], limit=3)) for x in range(emb.n)]
        self.front: list[int] = []  # exceptional vertices brought forward by the latest sweep

    def _tiers(self):
        """Vertices the next round may use, in the priority the one-at-a-time order implies."""
        emb = self.emb
        st = emb.state
        un = st.unembedded()
        forced = [x for x in st.order[st.t:] if x in st.forced]
        if forced:
            return "forced", forced
        if st.t < st.T0:
            return "buffer-neighbourhood", [x for x in st.order[st.t:st.T0] if un[x]]
        front = [x for x in self.front if un[x]]
        if front:
            return "exceptional", front
        rest = [x for x in st.order[st.t:] if x not in emb._bufset or x in emb._pulled]
        return "rest", rest

    def select(self, target: int):
        """Pick up to ``target`` unembedded vertices pairwise at distance >= 4."""
        st = self.emb.state
        tier, pool = self._tiers()
        if tier == "buffer-neighbourhood":
            target = min(target, len(pool))
        embedded = np.flatnonzero(~st.unembedded()).tolist()
        mi = MisInstance.build(self.balls, pool, embedded)
        chosen, iters = _luby(mi.graph.matrix, self.rng)
        picked = [mi.labels[k] for k in np.flatnonzero(chosen) if mi.labels[k] not in mi.embedded]
        pos = {x: k for k, x in enumerate(st.order)}
        picked.sort(key=pos.__getitem__)
        return tier, picked[:target], iters

    def embed(self, batch: list[int]) -> tuple[int, int]:
        """Embed ``batch`` simultaneously; returns (vertices embedded, retries used)."""
        emb = self.emb
        st = emb.state
        quals = [emb.qualifying(x) for x in batch]
        for q in quals:
            if not q.ok.any():
                raise q.exhausted(st.t + 1)
        prefs = [emb.preference(q) for q in quals]
        retries = 0
        size = len(batch)
        while True:
            res = _batch_sdr(quals[:size], prefs[:size], emb.N)
            if res.perfect:
                break
            if retries == self.max_halvings or size == 1:
                raise BatchFailure(
                    f"no distinct representatives across a batch of {size}",
                    t=st.t, witness=res.hall_witness, batch=batch[:size],
                )
            retries += 1
            size = max(1, size // 2)
        chosen = dict(res.pairs)
        batch = batch[:size]
        emb._move_to_front(batch)
        t = st.t
        picks = []
        for k, (x, q) in enumerate(zip(batch, quals)):
            v = chosen[x] % emb.N
            idx = int(np.searchsorted(q.cands, v))
            picks.append((x, emb.commit_choice(q, idx, t=t + k + 1)))
        apply_updates(emb, picks)
        return size, retries


def _batch_sdr(quals, prefs, n_local: int) -> MatchingResult:
    """Distinct hosts for a batch; adjacency lists follow each vertex's preference order."""
    left = [q.x for q in quals]
    right, index, adj = [], {}, []
    for q, pref in zip(quals, prefs):
        row = []
        for idx in pref.tolist():
            gv = q.i * n_local + int(q.cands[idx])
            if gv not in index:
                index[gv] = len(right)
                right.append(gv)
            row.append(index[gv])
        adj.append(row)
    return max_matching(CandidacyGraph(left, right, adj))


def apply_updates(emb: Embedder, picks) -> None:
    """Apply the Step 2 updates of a batch in the given order."""
    st = emb.state
    for x, v in picks:
        emb.update_after_embedding(x, v)
        st.forced.pop(x, None)
    emb._track_host_sets()


def batch_select(emb: Embedder, alpha, seed=0) -> list[int]:
    """One batch for the current state of ``emb`` (which must be preprocessed)."""
    runner = BatchRunner(emb, alpha, seed)
    st = emb.state
    target = max(1, floor_frac(runner.alpha * int(st.unembedded().sum())))
    return runner.select(target)[1]


def batch_embed_round(emb: Embedder, batch: list[int], seed=0) -> int:
    """Embed ``batch`` in one round; returns how many vertices were embedded."""
    return BatchRunner(emb, seed=seed).embed(batch)[0]


# ---------------------------------------------------------------- phase 2


@dataclass
class ParallelMatching:
    matching: MatchingResult
    maximal_size: int
    paths_flipped: int
    fallback_augmented: int

    def extra(self) -> dict:
        return {
            "maximal": self.maximal_size,
            "paths_flipped": self.paths_flipped,
            "fallback_augmented": self.fallback_augmented,
        }


def _greedy_maximal(adj, n_left, n_right, rng):
    edges = [(u, v) for u in range(n_left) for v in adj[u]]
    mate_l = [-1] * n_left
    mate_r = [-1] * n_right
    for k in rng.permutation(len(edges)).tolist():
        u, v = edges[k]
        if mate_l[u] == -1 and mate_r[v] == -1:
            mate_l[u], mate_r[v] = v, u
    return mate_l, mate_r


def _find_path5(x, v, adj, radj, mate_l, mate_r, used):
    """x - v1 = x1 - v2 = x2 - v with '=' the current matching edges."""
    ends = {}
    for x2 in radj[v]:
        v2 = mate_l[x2]
        if v2 != -1 and ("l", x2) not in used and ("r", v2) not in used:
            ends[v2] = x2
    if not ends:
        return None
    for v1 in adj[x]:
        x1 = mate_r[v1]
        if x1 == -1 or ("r", v1) in used or ("l", x1) in used:
            continue
        for v2 in adj[x1]:
            if v2 != v1 and v2 in ends:
                return v1, x1, v2, ends[v2]
    return None


def parallel_phase2(g: CandidacyGraph, seed=0, strict: bool = True) -> ParallelMatching:
    """Perfect matching from a greedy maximal matching plus length-5 alternating paths.

    Unmatched left and right vertices are paired in index order; each pair
    is joined by an alternating path of length 5 whose internal vertices are
    disjoint from all other paths, and every path is flipped. Pairs without
    such a path are finished by ordinary augmenting paths.
    """
    rng = make_rng(seed)
    n_left, n_right = len(g.left), len(g.right)
    mate_l, mate_r = _greedy_maximal(g.adj, n_left, n_right, rng)
    maximal = sum(1 for v in mate_l if v != -1)
    radj = [[] for _ in range(n_right)]
    for u, vs in enumerate(g.adj):
        for v in vs:
            radj[v].append(u)
    zx = [u for u in range(n_left) if mate_l[u] == -1]
    zy = [v for v in range(n_right) if mate_r[v] == -1]
    used = set()
    paths = []
    for x, v in zip(zx, zy):
        found = _find_path5(x, v, g.adj, radj, mate_l, mate_r, used)
        if found is None:
            continue
        v1, x1, v2, x2 = found
        used.update({("l", x), ("r", v), ("r", v1), ("l", x1), ("r", v2), ("l", x2)})
        paths.append((x, v1, x1, v2, x2, v))
    # internal vertices are disjoint, so the flips commute
    for x, v1, x1, v2, x2, v in paths:
        mate_l[x], mate_r[v1] = v1, x
        mate_l[x1], mate_r[v2] = v2, x1
        mate_l[x2], mate_r[v] = v, x2
    size = sum(1 for v in mate_l if v != -1)
    fallback = 0
    if size < min(n_left, n_right):
        init = [(u, v) for u, v in enumerate(mate_l) if v != -1]
        res = max_matching(g, initial=init)
        fallback = res.size - size
    else:
        pairs = [(g.left[u], g.right[v]) for u, v in enumerate(mate_l) if v != -1]
        res = MatchingResult(pairs, len(pairs) == n_left, None, 0)
    if strict and not res.perfect:
        raise HallFailure(f"no perfect matching: {n_left - res.size} left vertices unmatched",
                          witness=res.hall_witness)
    return ParallelMatching(res, maximal, len(paths), fallback)


# ---------------------------------------------------------------- driver


def run_batched(inst: Instance, alpha=None, tail_threshold: int | None = None, seed=0, check: bool = False,
                embedder: Embedder | None = None):
    """Batched phase 1, sequential tail, then matching completion.

    Returns ``(phi or None, RoundLog, RunReport)``. Pass a fresh ``embedder``
    to keep access to the final state.
    """
    emb = embedder if embedder is not None else Embedder(inst, seed, check=check)
    alpha = inst.params.alpha_batch if alpha is None else as_fraction(alpha)
    n = emb.n
    tail = default_tail(n) if tail_threshold is None else tail_threshold
    rl = RoundLog(str(alpha), tail)
    rep = emb.report
    rep.mode = "batched"
    runner = None
    try:
        emb.preprocess()
        emb.begin_phase1()
        runner = BatchRunner(emb, alpha, seed)
        st = emb.state
        t0 = time.perf_counter()
        while emb.nonbuffers_left() > 0:
            remaining = int(st.unembedded().sum())
            target = floor_frac(alpha * remaining)
            if remaining <= tail or target < 1:
                break
            before = st.t
            tier, batch, iters = runner.select(target)
            if not batch:
                break
            done, retries = runner.embed(batch)
            rl.rounds.append(RoundRecord(before, remaining, target, len(batch), iters, done, retries, tier))
            _after_round(emb, runner, before)
        rep.phase1_seconds += time.perf_counter() - t0
        rl.tail_size = int(st.unembedded().sum())
        emb.run_phase1()

        def matcher(g):
            pm = parallel_phase2(g, stream(seed, "mis"), strict=False)
            rl.phase2.append(pm.extra())
            return pm.matching, pm.extra()

        # with no batch rounds this is the sequential algorithm, phase 2 included
        emb.run_phase2(matcher if tail < n else None)
    except EmbeddingFailure as e:
        rep.outcome = "failure"
        rep.failure = {"kind": e.kind, "t": e.t, "vertex": e.vertex, "message": str(e),
                       "round": len(rl.rounds), "info": _jsonable(e.info)}
        rep.rounds = rl.to_dict()
        return None, rl, rep
    phi = [int(v) for v in emb.state.phi]
    ver = verify_embedding(inst, phi)
    if not ver.ok:
        raise InvariantError("verifier-clean", "; ".join(ver.violations[:5]))
    rep.outcome = "success"
    rep.rounds = rl.to_dict()
    return phi, rl, rep


def _after_round(emb: Embedder, runner: BatchRunner, before: int) -> None:
    """Steps 3 and 4 for any trigger time the round stepped over."""
    st = emb.state
    if st.t // st.T1 > before // st.T1:
        runner.front = emb.sweep_exceptional_pattern()
    if before < st.T0 <= st.t:
        emb.sweep_exceptional_host()
        runner.front = []

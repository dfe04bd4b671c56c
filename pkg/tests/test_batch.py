import copy
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blowup.batch import (
    BatchRunner,
    MisInstance,
    apply_updates,
    default_tail,
    is_maximal_independent,
    luby_mis,
    parallel_phase2,
    run_batched,
)
from blowup.cli import build_instance
from blowup.embedder import Embedder, run, verify_embedding
from blowup.errors import HallFailure
from blowup.graph import Graph
from blowup.matching import CandidacyGraph, max_matching
from oracles import distances


@st.composite
def graphs(draw):
    n = draw(st.integers(0, 40))
    p = draw(st.floats(0, 0.6))
    seed = draw(st.integers(0, 2**32 - 1))
    upper = np.triu(np.random.default_rng(seed).random((n, n)) < p, 1)
    return Graph(upper | upper.T)


@settings(max_examples=80, deadline=None)
@given(graphs(), st.integers(0, 1000))
def test_luby_returns_a_maximal_independent_set(g, seed):
    s = luby_mis(g, seed)
    assert is_maximal_independent(g, s)
    assert luby_mis(g, seed) == s


def test_maximality_check_rejects_bad_sets():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert not is_maximal_independent(g, g.vertex_set([0]))
    assert not is_maximal_independent(g, g.vertex_set([0, 1]))
    assert is_maximal_independent(g, g.vertex_set([1]))


def test_embedded_vertices_form_a_clique_in_the_auxiliary_graph():
    balls = [{0, 1}, {0, 1}, {2}, {3}, {4}]
    mi = MisInstance.build(balls, [0, 2], {3, 4, 1})
    mi.validate()
    idx = {x: k for k, x in enumerate(mi.labels)}
    m = mi.graph.matrix
    assert m[idx[3], idx[4]] and m[idx[1], idx[3]]
    assert m[idx[0], idx[1]] and not m[idx[0], idx[2]]


def test_default_tail():
    assert default_tail(400) == 400
    assert default_tail(10**9) == math.ceil(math.log2(10**9) ** 5)
    assert default_tail(1) == 1


@pytest.fixture(scope="module")
def mid_run():
    """An embedder partway through phase 1 on a random instance."""
    inst = build_instance("hampath", 100, Fraction(1, 2), 2)
    emb = Embedder(inst, 2)
    emb.preprocess()
    emb.begin_phase1()
    while emb.state.t < emb.state.T0 + 20:
        emb.step()
    return inst, emb


def test_batches_are_spread_out(mid_run):
    inst, emb = mid_run
    adj = inst.pattern.adjacency()
    runner = BatchRunner(copy.deepcopy(emb), Fraction(1, 10), seed=1)
    _, batch, _ = runner.select(20)
    assert len(batch) > 1
    for x in batch:
        d = distances(adj, x)
        assert all(d.get(y, 99) >= 4 for y in batch if y != x)
        assert emb.state.phi[x] == -1


@pytest.mark.parametrize("seed", range(4))
def test_update_order_within_a_batch_does_not_matter(mid_run, seed):
    _, emb = mid_run
    a = copy.deepcopy(emb)
    b = copy.deepcopy(emb)
    runner = BatchRunner(a, Fraction(1, 10), seed=seed)
    _, batch, _ = runner.select(15)
    runner.embed(batch)
    k = len(batch)
    picks = [(rec.x, rec.v % a.N) for rec in a.log[-k:]]
    perm = np.random.default_rng(seed).permutation(k)
    apply_updates(b, [picks[j] for j in perm])
    assert np.array_equal(a.state.cand, b.state.cand)
    assert np.array_equal(a.state.hosts, b.state.hosts)
    assert np.array_equal(a.state.phi, b.state.phi)


@pytest.mark.parametrize("seed", range(3))
def test_tail_at_least_n_is_the_sequential_algorithm(seed):
    inst = build_instance("hampath", 100, Fraction(1, 2), seed)
    phi_s, rep_s = run(inst, seed=seed)
    emb = Embedder(inst, seed)
    phi_b, log, rep_b = run_batched(inst, tail_threshold=inst.pattern.order, seed=seed, embedder=emb)
    assert rep_s.outcome == rep_b.outcome
    assert log.total_rounds == 0
    assert phi_b == phi_s


@pytest.mark.parametrize("pattern", ["matching", "hampath", "sqhamcycle", "tree"])
def test_fully_batched_runs_on_complete_blowups(pattern):
    inst = build_instance(pattern, 100, Fraction(1), 0)
    phi, log, rep = run_batched(inst, alpha=Fraction(1, 20), tail_threshold=0, seed=0, check=True)
    assert rep.success, rep.failure
    assert verify_embedding(inst, phi).ok
    assert log.total_rounds > 0
    assert all(r.representatives <= r.target for r in log.rounds)


@st.composite
def perfect_bipartite(draw):
    n = draw(st.integers(1, 40))
    p = draw(st.floats(0.05, 0.5))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    mat = rng.random((n, n)) < p
    if draw(st.booleans()):
        mat[np.arange(n), rng.permutation(n)] = True
    return CandidacyGraph.from_matrix(mat)


@settings(max_examples=80, deadline=None)
@given(perfect_bipartite(), st.integers(0, 1000))
def test_parallel_phase2_finds_a_maximum_matching(g, seed):
    best = max_matching(g)
    pm = parallel_phase2(g, seed, strict=False)
    assert pm.matching.size == best.size
    rights = [v for _, v in pm.matching.pairs]
    assert len(set(rights)) == len(rights)
    for u, v in pm.matching.pairs:
        assert v in g.adj[u]
    assert pm.maximal_size + pm.paths_flipped + pm.fallback_augmented == pm.matching.size
    if not best.perfect:
        with pytest.raises(HallFailure):
            parallel_phase2(g, seed)

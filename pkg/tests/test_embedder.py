import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blowup.cli import build_instance
from blowup.embedder import Embedder, EmbeddingState, audit_state, run, verify_embedding
from blowup.errors import InvariantError
from blowup.instances import assemble_instance, gen_bounded_tree_pattern, gen_power_ham_cycle_pattern
from blowup.params import ParameterCascade
from blowup.regularity import ClusterGraph, ceil_frac
from oracles import distances, replay_run

PATTERNS = ["matching", "hampath", "sqhamcycle", "powhamcycle:3", "tree"]


@pytest.fixture(scope="module")
def random_run():
    inst = build_instance("hampath", 100, Fraction(1, 2), 3, restrict=1)
    emb = Embedder(inst, 3, check=True)
    phi, rep = emb.run()
    assert rep.success, rep.failure
    return inst, emb, phi


@pytest.mark.parametrize("pattern", PATTERNS)
def test_complete_blowups_embed_in_check_mode(pattern):
    inst = build_instance(pattern, 20, Fraction(1), 0)
    phi, rep = run(inst, seed=0, check=True)
    assert rep.success, rep.failure
    assert verify_embedding(inst, phi).ok


def test_run_log_replays_against_an_independent_recount(random_run):
    inst, emb, phi = random_run
    assert replay_run(inst, emb.log, phi) == []


def test_replay_notices_a_tampered_log(random_run):
    inst, emb, phi = random_run
    log = list(emb.log)
    k = next(i for i, rec in enumerate(log) if rec.pairwise)
    rec = log[k]
    y, passed, total, same = rec.pairwise[0]
    log[k] = type(rec)(**{**rec.__dict__, "pairwise": [(y, passed - 1, total, same)] + rec.pairwise[1:]})
    assert replay_run(inst, log, phi)


def test_buffers_are_spread_out(random_run):
    inst, emb, _ = random_run
    st_ = emb.state
    adj = inst.pattern.adjacency()
    want = ceil_frac(inst.params.d1 * inst.n_per_cluster)
    restricted = set(inst.restriction_map())
    all_buffers = [b for bs in st_.buffers for b in bs]
    for bs in st_.buffers:
        assert len(bs) == want
        for b in bs:
            assert b not in restricted
            dist = distances(adj, b)
            assert all(dist.get(c, 99) >= 4 for c in bs if c != b)
    for b in all_buffers:
        assert not set(adj[b]) & set(all_buffers)


def test_order_puts_buffer_neighbourhoods_first_and_buffers_unpulled_last(random_run):
    inst, emb, _ = random_run
    st_ = emb.state
    adj = inst.pattern.adjacency()
    buffers = {b for bs in st_.buffers for b in bs}
    nbhd = {y for b in buffers for y in adj[b]}
    first = [x for x in emb.log[:st_.T0]]
    assert {rec.x for rec in first} == nbhd
    phase1 = {rec.x for rec in emb.log}
    assert phase1 & buffers == emb._pulled & buffers
    assert st_.T == len(emb.log)


def test_state_round_trips_through_json(random_run):
    _, emb, _ = random_run
    d = emb.state.to_dict(emb.params)
    again = EmbeddingState.from_dict(d)
    assert again.equals(emb.state)
    assert np.array_equal(again.cand, emb.state.cand)


def test_same_seed_same_embedding():
    inst = build_instance("tree", 30, Fraction(1, 2), 5)
    a, ra = run(inst, seed=2)
    b, rb = run(inst, seed=2)
    assert ra.outcome == rb.outcome
    assert a == b


def test_check_mode_catches_a_host_set_outside_its_candidate_set():
    inst = build_instance("hampath", 20, Fraction(1), 0)
    emb = Embedder(inst, 0, check=True)
    emb.preprocess()
    emb.begin_phase1()
    for _ in range(3):
        emb.step()
    st_ = emb.state
    y = int(np.flatnonzero(st_.unembedded())[0])
    st_.cand[y, 0] = False
    st_.hosts[y, 0] = True
    with pytest.raises(InvariantError) as exc:
        emb._check_state()
    assert exc.value.invariant == "host-subset-candidate"


def test_impossible_buffer_placement_is_a_reported_failure():
    pat = gen_power_ham_cycle_pattern(20, 3)
    params = ParameterCascade.default(1, pat.max_degree, d1=Fraction(9, 10), d2=Fraction(1, 2),
                                      d3=Fraction(1, 4), eps2=Fraction(1, 8))
    inst = assemble_instance(ClusterGraph.complete(4), 20, 1, pat, params, seed=0)
    phi, rep = run(inst)
    assert phi is None
    assert rep.failure["kind"] == "preprocessing"


@pytest.fixture(scope="module")
def small_instance():
    inst = build_instance("hampath", 5, Fraction(1), 0, restrict=0)
    phi, rep = run(inst)
    assert rep.success
    return inst, phi


def test_verifier_names_each_kind_of_violation(small_instance):
    inst, phi = small_instance
    swapped = list(phi)
    swapped[0] = swapped[2]
    v = verify_embedding(inst, swapped)
    assert any(s.startswith("injectivity") for s in v.violations)
    wrong_side = list(phi)
    wrong_side[0] = phi[1]
    wrong_side[1] = phi[0]
    assert any(s.startswith("psi-respect") for s in verify_embedding(inst, wrong_side).violations)
    assert not verify_embedding(inst, phi[:-1]).ok
    assert not verify_embedding(inst, phi[:-1] + [10**6]).ok


def test_verifier_flags_non_edges():
    inst = build_instance("matching", 30, Fraction(1, 2), 1)
    phi, rep = run(inst, seed=1)
    assert rep.success
    g = inst.host.graph.matrix
    n = inst.n_per_cluster
    # move the image of vertex 1 to a host in the same cluster not adjacent to phi(0)
    target = next(v for v in range(n, 2 * n) if not g[phi[0], v])
    other = phi.index(target)
    bad = list(phi)
    bad[1], bad[other] = target, phi[1]
    assert any(s.startswith("edge") for s in verify_embedding(inst, bad).violations)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 25), st.integers(0, 1000))
def test_trees_always_embed_into_complete_blowups(n, seed):
    pat = gen_bounded_tree_pattern(n, 3, seed)
    inst = assemble_instance(ClusterGraph.complete(2), n, 1, pat, seed=seed)
    phi, rep = run(inst, seed=seed, check=True)
    assert rep.success, rep.failure
    assert verify_embedding(inst, phi).ok


def test_audit_at_T_is_rederivable_from_a_state_dump():
    inst = build_instance("hampath", 100, Fraction(1, 2), 1)
    emb = Embedder(inst, 1)
    emb.preprocess()
    emb.run_phase1()
    dumped = json.loads(json.dumps(emb.state.to_dict(inst.params)))
    restored = EmbeddingState.from_dict(dumped)
    assert audit_state(inst, restored) == emb.report.audits[-1]
    assert emb.report.audits[-1]["t"] == emb.state.T

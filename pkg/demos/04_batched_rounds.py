# %% [markdown]
# # Batched phase 1
#
# Each round picks a maximal independent set in the "distance below four"
# graph, keeps about alpha * n' of it, and embeds the whole batch at once.
# Vertices at distance four or more do not touch each other's sets, so the
# order of the updates inside a batch does not matter.

# %%
from fractions import Fraction

import numpy as np

from blowup.batch import default_tail, luby_mis, parallel_phase2, run_batched
from blowup.cli import build_instance
from blowup.graph import Graph
from blowup.matching import CandidacyGraph

inst = build_instance("hampath", 200, Fraction(1, 2), seed=3)
n = inst.pattern.order
print("default tail for n =", n, "is", default_tail(n), "(everything sequential at this size)")

# %%
phi, log, report = run_batched(inst, alpha=Fraction(1, 20), tail_threshold=0, seed=3)
print(report.outcome, "rounds", log.total_rounds)
for r in log.rounds[:8]:
    print(f"t={r.t:3d} n'={r.remaining:3d} target={r.target:2d} embedded={r.representatives:2d} "
          f"mis iterations={r.mis_iterations} tier={r.tier}")
print("phase 2", log.phase2)

# %%
# Luby on a random graph
rng = np.random.default_rng(0)
upper = np.triu(rng.random((60, 60)) < 0.1, 1)
g = Graph(upper | upper.T)
print("MIS size", len(luby_mis(g, seed=1)))

# %%
mat = rng.random((50, 50)) < 0.2
mat[np.arange(50), rng.permutation(50)] = True
pm = parallel_phase2(CandidacyGraph.from_matrix(mat), seed=0)
print("perfect", pm.matching.perfect, pm.extra())

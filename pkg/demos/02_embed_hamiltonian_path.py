# %% [markdown]
# # Embedding a Hamiltonian path into a random pair
#
# Host: two clusters of N = 200 vertices joined by a random pair of
# density 1/2 with minimum degree at least N/2. Pattern: a path on 400
# vertices alternating between the clusters.

# %%
from fractions import Fraction

from blowup.cli import build_instance
from blowup.embedder import Embedder, verify_embedding

inst = build_instance("hampath", 200, Fraction(1, 2), seed=7)
p = inst.params
print("cascade:", {k: str(v) for k, v in p.to_dict().items()})

# %%
emb = Embedder(inst, seed=7)
phi, report = emb.run()
print("outcome", report.outcome)
print("buffers per cluster", report.buffers_per_cluster, "T0", report.T0, "T1", report.T1, "T", report.T)
print("buffers pulled forward by sweeps", report.buffers_pulled)
print("smallest host set seen", report.min_host_set, f"({report.min_host_set_ratio:.3f} N)")
print("phase 1 %.2fs, phase 2 %.3fs" % (report.phase1_seconds, report.phase2_seconds))

# %%
# every selection is logged with the windows it passed
rec = emb.log[len(emb.log) // 2]
print("t", rec.t, "vertex", rec.x, "->", rec.v, "pool", rec.pool, "qualifying", rec.qualifying)
for y, kind, deg, size, lo, hi in rec.windows:
    print(f"  neighbour {y} {kind}: {float(lo) * size:.1f} <= {deg} <= {float(hi) * size:.1f}")

# %%
print("verifier:", verify_embedding(inst, phi).ok)
for row in report.phase2:
    print("phase 2 cluster", row["cluster"], "left", row["M"], "matched", row["matched"],
          "Hall sizes", row["hall"]["sizes_ok"])

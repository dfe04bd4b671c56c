# %% [markdown]
# # Restricted vertices and what the audits watch
#
# Two vertices per cluster may only go to a random 30% of their cluster.
# They are embedded right after the buffer neighbourhoods.

# %%
from fractions import Fraction

from blowup.cli import build_instance
from blowup.embedder import Embedder

inst = build_instance("hampath", 200, Fraction(1, 2), seed=4, restrict=2)
for r in inst.restrictions:
    print("vertex", r.vertex, "allowed", len(r.allowed), "hosts")

emb = Embedder(inst, seed=4)
phi, report = emb.run()
print(report.outcome, [phi[r.vertex] in r.allowed for r in inst.restrictions])

# %%
# snapshots are taken at the start, at every pattern sweep and at t = T
for snap in report.audits[::4]:
    worst = max(c["profile_exceptional"] for c in snap["clusters"] if c["S"])
    print(f"t={snap['t']:4d} unembedded={snap['unembedded']:4d} min|H|={snap['min_host_set']} "
          f"profile exceptional={worst}")

# %%
print("host sweep", report.host_sweep)
print("pattern sweeps (t, pulled)", report.pattern_sweeps[:6], "...")
print("warnings", report.warnings)

# %% [markdown]
# # Where desk-scale parameters run out: squares of Hamiltonian cycles
#
# With three clusters of 150 and density 1/2, a vertex of the squared cycle
# has four neighbours, so a buffer's candidate set shrinks to about
# (1/2)^4 * 150 = 9 hosts. The pattern sweep pulls forward any vertex whose
# host set is at most d1^2 * n, which at these sizes is most buffers.

# %%
from collections import Counter
from fractions import Fraction

from blowup.cli import build_instance
from blowup.embedder import Embedder

outcomes = Counter()
for seed in range(6):
    inst = build_instance("sqhamcycle", 150, Fraction(1, 2), seed)
    emb = Embedder(inst, seed)
    phi, report = emb.run()
    kind = report.outcome if phi is not None else report.failure["kind"]
    outcomes[kind] += 1
    p = inst.params
    print(f"seed {seed}: {kind:20s} buffers pulled {report.buffers_pulled}/{sum(report.buffers_per_cluster)} "
          f"pull threshold {float(p.d1 ** 2 * inst.pattern.order):.1f}")
print(dict(outcomes))

# %%
# the same pattern embeds without trouble into the complete blow-up
inst = build_instance("sqhamcycle", 150, Fraction(1), 0)
phi, report = Embedder(inst, 0).run()
print("complete blow-up:", report.outcome)

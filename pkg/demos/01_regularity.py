# %% [markdown]
# # Regular pairs, exactly and approximately
#
# A pair is eps-regular when every big enough sub-pair has nearly the same
# density. On tiny pairs we can check every subset; on large ones we fall
# back to a one-sided codegree certificate.

# %%
from fractions import Fraction

import numpy as np

from blowup.graph import BipartitePair, density
from blowup.regularity import certify_regular, generate_super_regular_pair, is_regular_exact, is_super_regular

# %%
# two disjoint complete blocks: density 1/2 overall, 1 or 0 inside the blocks
m = np.zeros((8, 8), dtype=bool)
m[:4, :4] = m[4:, 4:] = True
pair = BipartitePair(m)
verdict = is_regular_exact(pair, Fraction(1, 4))
print("density", density(pair), "regular", verdict.regular)
print("witness X", verdict.witness.x.to_list(), "Y", verdict.witness.y.to_list(),
      "deviation", verdict.witness.deviation)

# %%
# a random pair of the kind the generator builds for the host graph
big = generate_super_regular_pair(300, Fraction(1, 2), seed=1)
print(big, "min degrees", big.degrees_a().min(), big.degrees_b().min())
for eps in (Fraction(1, 5), Fraction(3, 10), Fraction(9, 20)):
    cert = certify_regular(big, eps)
    print(f"eps={eps}: certificate passes={cert.passes} implied eps={cert.implied_eps:.3f}")

# %%
# the certificate only proves; failing to pass says nothing
sr = is_super_regular(big, Fraction(9, 20), Fraction(1, 2))
print("super-regular", sr.super_regular, "method", sr.method, "conclusive", sr.conclusive)

# %% [markdown]
# # Sampling A and building sA
# One draw per integer, keyed by (seed, trial_index); the same key always
# gives the same sequence.

# %%
import numpy as np

from pseudopowers import expected_count, gaps, sample_sequence, sumset, sumset_density

N = 10**6
seq = sample_sequence(2, N, seed=0, trial_index=0)
print(seq.header())
print("|A| =", len(seq), " expected", round(expected_count(2, N), 2))
print("first members:", seq.elements[:12].tolist())

# %%
profile = sumset(seq, 2, N)
print("density of 2A on [1000, N]:", round(sumset_density(profile, 1000), 4),
      " vs 1 - exp(-pi/8) =", round(1 - np.exp(-np.pi / 8), 4))

# %%
table = gaps(profile, min_b=1000)
k = int(np.argmax(table.normalized))
print("largest normalized gap:", table[k])
print("runs of consecutive members (first 5):", profile.runs()[:5].tolist())

# %% [markdown]
# # Representation counts look Poisson(lambda_s)
# r_2(A, n) counts a1 <= a2 in A with a1 + a2 = n.

# %%
import math

from pseudopowers import (poisson_profile, poisson_reference, representation_counts,
                          sample_sequence, total_variation)

N = 10**6
seq = sample_sequence(2, N, seed=0, trial_index=1)
table = representation_counts(seq, 2, N)
prof = poisson_profile(table, n_min=1000, d_max=6)
ref = poisson_reference(math.pi / 8, 6)

# %%
for d, (f, q) in enumerate(zip(prof.frequencies(), ref)):
    label = f"{d}" if d <= prof.d_max else f">{prof.d_max}"
    print(f"d={label:>3}  empirical {f:.5f}  Poisson {q:.5f}")
print("TV distance:", round(total_variation(prof.frequencies(), ref), 5))
